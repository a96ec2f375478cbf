#include <algorithm>
#include <cctype>
#include <map>

#include "finelogic/proof/chain.hpp"
#include "text_util.hpp"

namespace finelogic::proof {

namespace {

using detail::trim;

constexpr std::string_view kMarkers[] = {"__PROVED__", "__DISPROVED__", "__UNKNOWN__"};
constexpr Answer kMarkerAnswers[] = {Answer::Proved, Answer::Disproved, Answer::Unknown};

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = nl + 1;
  }
  return out;
}

// Length of a label token (fact12, int3, assump1, hypothesis) at the start of
// s, or 0.
std::size_t label_token_length(std::string_view s) {
  for (std::string_view prefix : {"fact", "int", "assump"}) {
    if (s.starts_with(prefix)) {
      std::size_t i = prefix.size();
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i == prefix.size()) return 0;
      if (i < s.size() && is_word(s[i])) return 0;
      return i;
    }
  }
  if (s.starts_with("hypothesis") && (s.size() == 10 || !is_word(s[10]))) return 10;
  return 0;
}

struct LabelLine {
  std::string label;
  std::string rest;
};

std::optional<LabelLine> match_label_line(std::string_view line) {
  line = trim(line);
  std::size_t n = label_token_length(line);
  if (n == 0) return std::nullopt;
  std::size_t i = n;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  return LabelLine{std::string(line.substr(0, n)), std::string(trim(line.substr(i + 1)))};
}

struct Header {
  int number = 0;
  std::string rest;
};

std::optional<Header> match_header(std::string_view line) {
  line = trim(line);
  std::size_t i = 0;
  while (i < line.size() && (line[i] == '*' || line[i] == '#')) ++i;
  while (i < line.size() && line[i] == ' ') ++i;
  if (line.substr(i, 4) != "Step") return std::nullopt;
  i += 4;
  std::size_t sp = i;
  while (i < line.size() && line[i] == ' ') ++i;
  if (i == sp) return std::nullopt;
  std::size_t d = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == d || i - d > 6) return std::nullopt;
  int number = std::stoi(std::string(line.substr(d, i - d)));
  while (i < line.size() && (line[i] == ' ' || line[i] == '*')) ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  ++i;
  while (i < line.size() && line[i] == '*') ++i;
  return Header{number, std::string(trim(line.substr(i)))};
}

struct RefToken {
  bool is_step = false;
  int step = 0;
  std::string label;
};

std::vector<RefToken> scan_refs(std::string_view s) {
  std::vector<RefToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (i > 0 && is_word(s[i - 1])) {
      ++i;
      continue;
    }
    std::string_view rest = s.substr(i);
    if (rest.starts_with("Step") || rest.starts_with("step")) {
      std::size_t j = 4;
      while (j < rest.size() && rest[j] == ' ') ++j;
      std::size_t d = j;
      while (j < rest.size() && std::isdigit(static_cast<unsigned char>(rest[j]))) ++j;
      if (j > d && j - d <= 6 && d > 4 && (j == rest.size() || !is_word(rest[j]))) {
        out.push_back({true, std::stoi(std::string(rest.substr(d, j - d))), {}});
        i += j;
        continue;
      }
    }
    if (std::size_t n = label_token_length(rest)) {
      out.push_back({false, 0, std::string(rest.substr(0, n))});
      i += n;
      continue;
    }
    ++i;
  }
  return out;
}

bool contains_ci(std::string_view hay, std::string_view needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
           return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
         }) != hay.end();
}

struct BlockLines {
  int header_number = 0;
  std::vector<std::string_view> lines;  // header remainder first
  std::string header_rest;
};

struct StepScope {
  std::vector<int> open;  // assumption ordinals open at the step
};

bool scope_visible(const std::vector<int>& inner, const std::vector<int>& outer) {
  // a step introduced under `inner` is visible from `outer` iff inner is a prefix
  if (inner.size() > outer.size()) return false;
  return std::equal(inner.begin(), inner.end(), outer.begin());
}

class ChainParser {
 public:
  ChainParser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {
    chain_.problem_id = opts.problem_id;
    chain_.dialect = opts.dialect;
    chain_.raw_text = std::string(text);
  }

  ProofChain run() {
    auto lines = split_lines(text_);
    std::vector<BlockLines> blocks;
    std::vector<std::string_view> preamble;
    for (auto line : lines) {
      if (auto h = match_header(line)) {
        blocks.push_back({h->number, {}, h->rest});
        continue;
      }
      if (blocks.empty()) {
        preamble.push_back(line);
      } else {
        blocks.back().lines.push_back(line);
      }
    }
    read_preamble(preamble);
    for (const auto& f : opts_.facts) {
      if (!chain_.find_fact(f.label)) chain_.facts.push_back(f);
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) read_step(static_cast<int>(b + 1), blocks[b]);
    if (!open_.empty()) {
      for (int a : open_) {
        fail(a, "assumption " + chain_.steps[static_cast<std::size_t>(a - 1)].label + " is never discharged");
      }
    }
    Answer ans = extract_answer(text_);
    if (ans != Answer::None) chain_.final_label = ans;
    return std::move(chain_);
  }

 private:
  void fail(int ordinal, std::string reason) { chain_.malformed.push_back({ordinal, std::move(reason)}); }

  std::optional<logic::Formula> parse_symbolic(int ordinal, std::string_view text, bool report) {
    if (chain_.dialect != Dialect::Symbolic) return std::nullopt;
    try {
      return logic::parse_formula(text, arities_);
    } catch (const std::exception& e) {
      if (report) fail(ordinal, "cannot parse formula '" + std::string(text) + "': " + e.what());
      return std::nullopt;
    }
  }

  void read_preamble(const std::vector<std::string_view>& lines) {
    for (auto line : lines) {
      auto ll = match_label_line(line);
      if (!ll) continue;
      if (ll->label.starts_with("fact")) {
        if (chain_.find_fact(ll->label)) continue;
        GivenFact f{ll->label, ll->rest, parse_symbolic(0, ll->rest, false)};
        chain_.facts.push_back(std::move(f));
      } else if (ll->label == "hypothesis" && !chain_.hypothesis) {
        chain_.hypothesis = GivenFact{ll->label, ll->rest, parse_symbolic(0, ll->rest, false)};
      }
    }
  }

  // Most recent earlier step carrying `label` that is visible from the current
  // scope; sets out_of_scope if only invisible ones exist.
  std::optional<int> resolve_label(const std::string& label, int before, bool& out_of_scope) const {
    out_of_scope = false;
    for (int j = before - 1; j >= 1; --j) {
      const auto& s = chain_.steps[static_cast<std::size_t>(j - 1)];
      if (s.label != label) continue;
      if (scope_visible(scopes_[static_cast<std::size_t>(j - 1)].open, open_)) return j;
      out_of_scope = true;
    }
    return std::nullopt;
  }

  bool fact_known(const std::string& label) const {
    // without any fact list we cannot tell; the evaluator resolves later
    return chain_.facts.empty() || chain_.find_fact(label) != nullptr;
  }

  void add_ref(ProofStep& step, const std::string& label, int ordinal) {
    for (std::size_t i = 0; i < step.premises.size(); ++i) {
      if (step.premises[i] == label && step.premise_ordinals[i] == ordinal) return;
    }
    step.premises.push_back(label);
    step.premise_ordinals.push_back(ordinal);
  }

  void resolve_refs(ProofStep& step, const std::string& explanation) {
    int k = step.ordinal;
    for (const auto& tok : scan_refs(explanation)) {
      if (tok.is_step) {
        if (tok.step >= k) {
          fail(k, "reference to Step " + std::to_string(tok.step) + " which does not precede it");
          continue;
        }
        if (tok.step < 1) {
          fail(k, "reference to nonexistent Step " + std::to_string(tok.step));
          continue;
        }
        const auto& target = chain_.steps[static_cast<std::size_t>(tok.step - 1)];
        if (!scope_visible(scopes_[static_cast<std::size_t>(tok.step - 1)].open, open_)) {
          fail(k, "Step " + std::to_string(tok.step) + " lies inside a closed assumption block");
          continue;
        }
        add_ref(step, target.label, tok.step);
        continue;
      }
      bool hidden = false;
      if (auto j = resolve_label(tok.label, k, hidden)) {
        add_ref(step, tok.label, *j);
      } else if (hidden) {
        fail(k, "reference to " + tok.label + " outside its assumption block");
      } else if (tok.label.starts_with("fact") && fact_known(tok.label)) {
        add_ref(step, tok.label, 0);
      } else if (tok.label == step.label || tok.label == "hypothesis") {
        // mentions of the step's own label or of the hypothesis are not citations
      } else {
        fail(k, "reference to undefined label " + tok.label);
      }
    }
  }

  void match_sentences(ProofStep& step, const std::string& explanation) {
    std::string hay = detail::fold_sentence(explanation);
    if (hay.empty()) return;
    for (const auto& f : chain_.facts) {
      std::string s = detail::fold_sentence(f.text);
      if (!s.empty() && hay.find(s) != std::string::npos) add_ref(step, f.label, 0);
    }
    for (int j = 1; j < step.ordinal; ++j) {
      const auto& prev = chain_.steps[static_cast<std::size_t>(j - 1)];
      if (!scope_visible(scopes_[static_cast<std::size_t>(j - 1)].open, open_)) continue;
      std::string s = detail::fold_sentence(prev.conclusion_text);
      if (s.empty() || s == detail::fold_sentence(std::string(kFalsumLabel))) continue;
      if (hay.find(s) != std::string::npos) {
        bool hidden = false;
        if (resolve_label(prev.label, step.ordinal, hidden) == j) add_ref(step, prev.label, j);
      }
    }
  }

  void read_step(int k, const BlockLines& block) {
    ProofStep step;
    step.ordinal = k;
    if (block.header_number != k) {
      fail(k, "step numbered " + std::to_string(block.header_number) + ", expected " + std::to_string(k));
    }
    std::vector<std::string_view> lines;
    lines.push_back(block.header_rest);
    for (auto l : block.lines) {
      if (!trim(l).empty()) lines.push_back(trim(l));
    }
    // locate the labeled formula line (or a bare ⊥)
    std::optional<std::size_t> fline;
    for (std::size_t i = 1; i < lines.size() && !fline; ++i) {
      if (trim(lines[i]) == kFalsumLabel || match_label_line(lines[i])) fline = i;
    }
    if (!fline && match_label_line(lines[0])) fline = 0;

    std::string explanation;
    std::size_t expl_end = fline ? *fline : lines.size();
    for (std::size_t i = 0; i < expl_end; ++i) {
      if (trim(lines[i]).empty()) continue;
      if (!explanation.empty()) explanation += ' ';
      explanation += std::string(trim(lines[i]));
    }
    if (fline) {
      for (std::size_t i = *fline + 1; i < lines.size(); ++i) {
        if (match_label_line(lines[i]) || trim(lines[i]) == kFalsumLabel) {
          fail(k, "more than one formula line in the step");
          break;
        }
      }
    }
    step.explanation = explanation;

    if (fline) {
      if (trim(lines[*fline]) == kFalsumLabel) {
        step.label = std::string(kFalsumLabel);
        step.conclusion_text = std::string(kFalsumLabel);
      } else {
        auto ll = *match_label_line(lines[*fline]);
        step.label = ll.label;
        step.conclusion_text = ll.rest;
      }
    } else if (!explanation.empty() && std::string_view(explanation).ends_with(kFalsumLabel)) {
      step.label = std::string(kFalsumLabel);
      step.conclusion_text = std::string(kFalsumLabel);
    } else {
      step.label = "step" + std::to_string(k);
      fail(k, "no labeled formula line");
    }
    if (step.conclusion_text.empty() && fline) fail(k, "empty conclusion");

    bool falsum = trim(step.conclusion_text) == kFalsumLabel;
    if (contains_ci(explanation, "assume for contradiction")) {
      step.kind = StepKind::Assumption;
    } else if (contains_ci(explanation, "reductio ad absurdum")) {
      step.kind = StepKind::ReductioDischarge;
    } else if (falsum) {
      step.kind = StepKind::Contradiction;
    } else if (step.label.starts_with("fact")) {
      step.kind = StepKind::GivenFact;
    } else if (step.label == "hypothesis") {
      step.kind = StepKind::FinalConclusion;
    } else {
      step.kind = StepKind::Derivation;
    }

    if (!step.conclusion_text.empty()) {
      if (chain_.dialect == Dialect::Symbolic) step.formula = parse_symbolic(k, step.conclusion_text, true);
    }

    // the step is appended before resolution so self-lookups stay below k
    chain_.steps.push_back(step);
    scopes_.push_back({open_});
    ProofStep& s = chain_.steps.back();

    switch (s.kind) {
      case StepKind::Assumption:
        open_.push_back(k);
        scopes_.back().open = open_;
        break;
      case StepKind::GivenFact:
        break;
      case StepKind::ReductioDischarge:
        resolve_refs(s, explanation);
        if (open_.empty()) {
          fail(k, "reductio without an open assumption");
        } else {
          int a = open_.back();
          add_ref(s, chain_.steps[static_cast<std::size_t>(a - 1)].label, a);
          open_.pop_back();
          scopes_.back().open = open_;
        }
        break;
      case StepKind::FinalConclusion:
        if (seen_final_) fail(k, "second final-conclusion step");
        seen_final_ = true;
        if (!open_.empty()) fail(k, "final conclusion reached with an open assumption");
        [[fallthrough]];
      case StepKind::Derivation:
      case StepKind::Contradiction:
        resolve_refs(s, explanation);
        if (chain_.dialect == Dialect::Natural) match_sentences(s, explanation);
        if (s.premises.empty() && s.kind != StepKind::Contradiction) fail(k, "derivation cites no premises");
        break;
    }
  }

  std::string_view text_;
  const ParseOptions& opts_;
  ProofChain chain_;
  logic::ArityTable arities_;
  std::vector<StepScope> scopes_;
  std::vector<int> open_;
  bool seen_final_ = false;
};

}  // namespace

std::string strip_preamble(std::string_view text, std::string_view answer_tag) {
  if (answer_tag.empty()) return std::string(text);
  auto pos = text.rfind(answer_tag);
  if (pos == std::string_view::npos) return std::string(text);
  return std::string(text.substr(pos + answer_tag.size()));
}

Answer extract_answer(std::string_view text) {
  Answer best = Answer::None;
  std::size_t best_pos = 0;
  bool found = false;
  for (std::size_t m = 0; m < 3; ++m) {
    std::string_view marker = kMarkers[m];
    std::size_t pos = text.find(marker);
    while (pos != std::string_view::npos) {
      bool clean_left = pos == 0 || text[pos - 1] != '_';
      bool clean_right = pos + marker.size() >= text.size() || text[pos + marker.size()] != '_';
      if (clean_left && clean_right && (!found || pos > best_pos)) {
        best = kMarkerAnswers[m];
        best_pos = pos;
        found = true;
      }
      pos = text.find(marker, pos + 1);
    }
  }
  return best;
}

ProofChain parse_proof(std::string_view text, const ParseOptions& opts) {
  try {
    return ChainParser(text, opts).run();
  } catch (const std::exception& e) {
    ProofChain broken;
    broken.problem_id = opts.problem_id;
    broken.dialect = opts.dialect;
    broken.raw_text = std::string(text);
    broken.malformed.push_back({0, std::string("unparseable chain: ") + e.what()});
    return broken;
  }
}

ProofChain parse_proof(std::string_view text, Dialect dialect) {
  ParseOptions opts;
  opts.dialect = dialect;
  return parse_proof(text, opts);
}

}  // namespace finelogic::proof
