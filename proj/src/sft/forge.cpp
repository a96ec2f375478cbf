#include <algorithm>
#include <fstream>
#include <random>

#include "finelogic/bench/harness.hpp"
#include "finelogic/logic/rules.hpp"
#include "finelogic/sft/forge.hpp"

namespace finelogic::sft {

namespace {

constexpr std::pair<Style, std::string_view> kStyleNames[] = {
    {Style::NL, "NL"},
    {Style::SymbStruct, "SymbStruct"},
    {Style::SymbFilter, "SymbFilter"},
    {Style::SymbDirect, "SymbDirect"},
};

std::string marker_line(bench::Label label) {
  std::string out;
  if (label == bench::Label::Unknown) out += std::string(kExhaustedMessage) + "\n";
  out += "Final conclusion: __" + std::string(proof::answer_name(bench::answer_for(label))) + "__";
  return out;
}

/// Replaces the placeholder words x, y, z by the given arguments.
std::string fill_reading(const std::string& reading, const std::vector<std::string>& args) {
  static const char* kSlots[] = {"x", "y", "z"};
  std::string out;
  std::size_t i = 0;
  auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < reading.size()) {
    bool replaced = false;
    if (i == 0 || !word_char(reading[i - 1])) {
      for (std::size_t k = 0; k < args.size() && k < 3; ++k) {
        if (reading[i] == kSlots[k][0] && (i + 1 == reading.size() || !word_char(reading[i + 1]))) {
          out += args[k];
          ++i;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += reading[i++];
  }
  return out;
}

void collect(const logic::Formula& f, std::vector<std::pair<std::string, std::size_t>>& preds,
             std::vector<std::string>& consts) {
  switch (f.kind()) {
    case logic::Connective::Atom:
      if (std::none_of(preds.begin(), preds.end(), [&](const auto& p) { return p.first == f.name(); })) {
        preds.emplace_back(f.name(), f.args().size());
      }
      for (const auto& t : f.args()) {
        if (!t.is_variable() && std::find(consts.begin(), consts.end(), t.name) == consts.end()) {
          consts.push_back(t.name);
        }
      }
      break;
    case logic::Connective::Falsum:
      break;
    case logic::Connective::Not:
    case logic::Connective::ForAll:
    case logic::Connective::Exists:
      collect(f.lhs(), preds, consts);
      break;
    default:
      collect(f.lhs(), preds, consts);
      collect(f.rhs(), preds, consts);
  }
}

struct Symbols {
  std::vector<std::pair<std::string, std::size_t>> predicates;
  std::vector<std::string> constants;
};

Symbols symbols_of(const proof::ProofChain& chain) {
  Symbols s;
  for (const auto& f : chain.facts) {
    if (f.formula) collect(*f.formula, s.predicates, s.constants);
  }
  if (chain.hypothesis && chain.hypothesis->formula) collect(*chain.hypothesis->formula, s.predicates, s.constants);
  for (const auto& st : chain.steps) {
    if (st.formula) collect(*st.formula, s.predicates, s.constants);
  }
  return s;
}

/// Chain carrying the problem's facts and hypothesis in symbolic form.
proof::ProofChain with_statement(const GoldProblem& gold) {
  proof::ProofChain c = gold.proof();
  c.dialect = proof::Dialect::Symbolic;
  c.facts = gold.problem.given_facts();
  if (gold.problem.hypothesis_formula) {
    logic::ArityTable arities;
    std::optional<logic::Formula> h;
    try {
      h = logic::parse_formula(*gold.problem.hypothesis_formula, arities);
    } catch (const std::exception&) {
    }
    c.hypothesis = proof::GivenFact{"hypothesis", *gold.problem.hypothesis_formula, h};
  }
  return c;
}

std::string symbol_lines(const proof::ProofChain& c, const std::set<std::string>* keep) {
  std::string out;
  for (const auto& f : c.facts) {
    if (keep && !keep->count(f.label)) continue;
    out += f.label + ": " + (f.formula ? logic::print_formula(*f.formula) : f.text) + "\n";
  }
  if (c.hypothesis) {
    out += "hypothesis: " +
           (c.hypothesis->formula ? logic::print_formula(*c.hypothesis->formula) : c.hypothesis->text) + "\n";
  }
  return out;
}

std::string step_lines(const proof::ProofChain& c) {
  std::string out;
  for (const auto& s : c.steps) out += proof::render_step(c, s) + "\n";
  return out;
}

std::string definitions(const proof::ProofChain& c, const Glossary& g) {
  Symbols s = symbols_of(c);
  std::string out = "For the predicate, we denote:\n";
  static const char* kSlots[] = {"x", "y", "z"};
  for (const auto& [name, arity] : s.predicates) {
    auto it = g.predicates.find(name);
    if (it == g.predicates.end()) throw GlossaryGap(name);
    out += name;
    if (arity > 0) {
      out += "(";
      for (std::size_t i = 0; i < arity; ++i) out += (i ? ", " : "") + std::string(kSlots[std::min<std::size_t>(i, 2)]);
      out += ")";
    }
    out += ": " + it->second + "\n";
  }
  if (!s.constants.empty()) {
    out += "For the entities, we denote:\n";
    for (const auto& k : s.constants) {
      auto it = g.constants.find(k);
      if (it == g.constants.end()) throw GlossaryGap(k);
      out += k + ": " + it->second + "\n";
    }
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::optional<logic::Formula> premise_formula(const proof::ProofChain& c, const proof::ProofStep& s, std::size_t i) {
  int ord = s.premise_ordinals[i];
  if (ord == 0) {
    const auto* f = c.find_fact(s.premises[i]);
    return f ? f->formula : std::nullopt;
  }
  return c.steps[static_cast<std::size_t>(ord - 1)].formula;
}

std::string nl_step(const proof::ProofChain& c, const proof::ProofStep& s, const Glossary& g) {
  auto read = [&](const std::optional<logic::Formula>& f) {
    return f ? read_formula(*f, g) : std::string("the previous result");
  };
  std::vector<logic::Formula> premises;
  std::vector<std::string> said;
  for (std::size_t i = 0; i < s.premises.size(); ++i) {
    auto f = premise_formula(c, s, i);
    said.push_back(read(f));
    if (f) premises.push_back(*f);
  }
  std::string concl = read(s.formula);
  auto joined = [&] {
    std::string out;
    for (std::size_t i = 0; i < said.size(); ++i) {
      if (i) out += i + 1 == said.size() ? ", and " : ", ";
      out += said[i];
    }
    return out;
  };
  using proof::StepKind;
  switch (s.kind) {
    case StepKind::GivenFact:
      return "We know that " + concl + ".";
    case StepKind::Assumption:
      return "Suppose, for the sake of contradiction, that " + concl + ".";
    case StepKind::Contradiction:
      if (said.size() == 2) return capitalize(said[0]) + ", yet " + said[1] + ", which is a contradiction.";
      return "We have reached a contradiction.";
    case StepKind::ReductioDischarge: {
      std::string assumed = said.empty() ? std::string("the assumption") : said.back();
      return "The assumption that " + assumed + " led to a contradiction, so " + concl + ".";
    }
    case StepKind::Derivation:
    case StepKind::FinalConclusion:
      break;
  }
  std::optional<logic::Rule> rule;
  if (s.formula && premises.size() == s.premises.size()) rule = logic::identify_rule(premises, *s.formula);
  if (!rule || said.empty()) return "From " + joined() + ", we conclude that " + concl + ".";
  using logic::Rule;
  switch (*rule) {
    case Rule::ModusPonens:
    case Rule::UniversalModusPonens:
    case Rule::ExistentialIntro:
      return "Since " + joined() + ", " + concl + ".";
    case Rule::ModusTollens:
    case Rule::UniversalModusTollens:
      return "Since " + joined() + ", it must be that " + concl + ".";
    case Rule::ConjunctionIntro:
      return capitalize(joined()) + " both hold, so " + concl + ".";
    case Rule::ConjunctionElim:
    case Rule::UniversalInstantiation:
      return "Since " + joined() + ", in particular " + concl + ".";
    case Rule::DisjunctionIntro:
      return "Since " + joined() + ", it follows that " + concl + ".";
    case Rule::DisjunctiveSyllogism:
      return "Since " + joined() + ", the remaining option holds: " + concl + ".";
    case Rule::DeMorgan:
      return "Saying that " + joined() + " amounts to saying that " + concl + ".";
    case Rule::Contraposition:
      return "Since " + joined() + ", turning it around, " + concl + ".";
    case Rule::ContradictionIntro:
      return capitalize(joined()) + " cannot both hold, which is a contradiction.";
    case Rule::Reductio:
      break;
  }
  return "From " + joined() + ", we conclude that " + concl + ".";
}

SftSample base_sample(const GoldProblem& gold, Style style) {
  SftSample s;
  s.style = style;
  s.prompt = sft_prompt(gold.problem);
  s.depth = gold.problem.depth;
  s.source_id = gold.problem.id;
  s.label = gold.problem.label;
  return s;
}

}  // namespace

std::string_view style_name(Style s) {
  for (auto [style, name] : kStyleNames) {
    if (style == s) return name;
  }
  return "NL";
}

std::optional<Style> style_from_name(std::string_view s) {
  for (auto [style, name] : kStyleNames) {
    if (name == s) return style;
  }
  return std::nullopt;
}

const proof::ProofChain& GoldProblem::proof() const {
  if (!problem.gold_proof) throw std::invalid_argument("gold problem " + problem.id + " has no proof");
  return *problem.gold_proof;
}

std::set<std::string> necessary_facts(const GoldProblem& gold) {
  auto labels = proof::necessary_fact_labels(gold.proof());
  return {labels.begin(), labels.end()};
}

void check_glossary(const GoldProblem& gold) {
  Symbols s = symbols_of(with_statement(gold));
  for (const auto& [name, arity] : s.predicates) {
    if (!gold.glossary.predicates.count(name)) throw GlossaryGap(name);
  }
  for (const auto& k : s.constants) {
    if (!gold.glossary.constants.count(k)) throw GlossaryGap(k);
  }
}

namespace {

/// "is red" for an atom over `var` whose reading is "x is red".
std::optional<std::string> predicate_phrase(const logic::Formula& f, const std::string& var, const Glossary& g) {
  if (!f.is(logic::Connective::Atom) || f.args().size() != 1 || f.args()[0].name != var) return std::nullopt;
  auto it = g.predicates.find(f.name());
  if (it == g.predicates.end()) throw GlossaryGap(f.name());
  if (!it->second.starts_with("x ")) return std::nullopt;
  return it->second.substr(2);
}

}  // namespace

std::string read_formula(const logic::Formula& f, const Glossary& g) {
  using logic::Connective;
  if (f.is(Connective::ForAll) && f.lhs().is(Connective::Implies)) {
    const auto& body = f.lhs();
    auto a = predicate_phrase(body.lhs(), f.name(), g);
    bool negated = body.rhs().is(Connective::Not);
    auto b = predicate_phrase(negated ? body.rhs().lhs() : body.rhs(), f.name(), g);
    if (a && b) return (negated ? "nothing that " : "everything that ") + *a + " " + *b;
  }
  if (f.is(Connective::Not) && f.lhs().is(Connective::Atom) && f.lhs().args().size() == 1 &&
      !f.lhs().args()[0].is_variable()) {
    auto it = g.predicates.find(f.lhs().name());
    if (it != g.predicates.end() && it->second.starts_with("x is ")) {
      auto c = g.constants.find(f.lhs().args()[0].name);
      if (c == g.constants.end()) throw GlossaryGap(f.lhs().args()[0].name);
      return c->second + " is not " + it->second.substr(5);
    }
  }
  switch (f.kind()) {
    case Connective::Atom: {
      auto it = g.predicates.find(f.name());
      if (it == g.predicates.end()) throw GlossaryGap(f.name());
      std::vector<std::string> args;
      for (const auto& t : f.args()) {
        if (t.is_variable()) {
          args.push_back("it");
          continue;
        }
        auto c = g.constants.find(t.name);
        if (c == g.constants.end()) throw GlossaryGap(t.name);
        args.push_back(c->second);
      }
      return fill_reading(it->second, args);
    }
    case Connective::Falsum:
      return "a contradiction";
    case Connective::Not:
      return "it is not the case that " + read_formula(f.lhs(), g);
    case Connective::And:
      return read_formula(f.lhs(), g) + " and " + read_formula(f.rhs(), g);
    case Connective::Or:
      return "either " + read_formula(f.lhs(), g) + " or " + read_formula(f.rhs(), g);
    case Connective::Implies:
      return "if " + read_formula(f.lhs(), g) + " then " + read_formula(f.rhs(), g);
    case Connective::ForAll:
      return "for everything, " + read_formula(f.lhs(), g);
    case Connective::Exists:
      return "there is something such that " + read_formula(f.lhs(), g);
  }
  return {};
}

std::string sft_prompt(const bench::Problem& problem) { return bench::build_prompt(problem, bench::PromptMode::Direct); }

SftSample gen_symb_struct(const GoldProblem& gold) {
  proof::ProofChain c = with_statement(gold);
  SftSample s = base_sample(gold, Style::SymbStruct);
  s.target = std::string(kStructPreamble) + "\n" + definitions(c, gold.glossary) + symbol_lines(c, nullptr) +
             step_lines(c) + marker_line(gold.problem.label);
  return s;
}

proof::ProofChain filtered_chain(const GoldProblem& gold) {
  proof::ProofChain full = with_statement(gold);
  auto keep_steps = proof::dependency_closure(full);
  std::map<int, int> renumber;
  for (std::size_t i = 0; i < keep_steps.size(); ++i) renumber[keep_steps[i]] = static_cast<int>(i + 1);
  auto keep_facts = necessary_facts(gold);
  proof::ProofChain c = full;
  c.facts.clear();
  for (const auto& f : full.facts) {
    if (keep_facts.count(f.label)) c.facts.push_back(f);
  }
  c.steps.clear();
  for (int ord : keep_steps) {
    proof::ProofStep st = full.steps[static_cast<std::size_t>(ord - 1)];
    st.ordinal = renumber.at(ord);
    for (auto& p : st.premise_ordinals) {
      if (p > 0) p = renumber.at(p);
    }
    c.steps.push_back(std::move(st));
  }
  return c;
}

SftSample gen_symb_filter(const GoldProblem& gold) {
  proof::ProofChain c = filtered_chain(gold);
  SftSample s = base_sample(gold, Style::SymbFilter);
  s.target = std::string(kStructPreamble) + "\n" + definitions(c, gold.glossary) + symbol_lines(c, nullptr) +
             step_lines(c) + marker_line(gold.problem.label);
  return s;
}

SftSample gen_symb_direct(const GoldProblem& gold) {
  proof::ProofChain c = with_statement(gold);
  SftSample s = base_sample(gold, Style::SymbDirect);
  s.target = symbol_lines(c, nullptr) + step_lines(c) + marker_line(gold.problem.label);
  return s;
}

SftSample gen_nl(const GoldProblem& gold) {
  proof::ProofChain c = with_statement(gold);
  SftSample s = base_sample(gold, Style::NL);
  for (const auto& st : c.steps) {
    s.target += "Step " + std::to_string(st.ordinal) + ": " + nl_step(c, st, gold.glossary) + "\n";
  }
  s.target += marker_line(gold.problem.label);
  return s;
}

SftSample generate(const GoldProblem& gold, Style style) {
  switch (style) {
    case Style::NL:
      return gen_nl(gold);
    case Style::SymbStruct:
      return gen_symb_struct(gold);
    case Style::SymbFilter:
      return gen_symb_filter(gold);
    case Style::SymbDirect:
      return gen_symb_direct(gold);
  }
  return gen_nl(gold);
}

std::size_t CorpusManifest::total() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.need;
  return n;
}

CorpusManifest fld_manifest() {
  CorpusManifest m;
  m.dataset = bench::DatasetKind::FLD;
  for (int d = 0; d <= 15; ++d) m.entries.push_back({d, false, 500});
  m.entries.push_back({std::nullopt, true, 1500});
  return m;
}

CorpusManifest prontoqa_manifest() {
  CorpusManifest m;
  m.dataset = bench::DatasetKind::ProntoQA;
  m.entries.push_back({std::nullopt, false, 3200});
  return m;
}

nlohmann::json CorpusReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [k, n] : counts) {
    const auto& [style, depth, label] = k;
    rows.push_back({{"style", style},
                    {"depth", depth < 0 ? nlohmann::json(nullptr) : nlohmann::json(depth)},
                    {"label", label},
                    {"count", n}});
  }
  return {{"total", total}, {"counts", rows}};
}

Corpus build_corpus(const std::vector<GoldProblem>& golds, Style style, const CorpusManifest& manifest,
                    std::uint64_t seed) {
  std::vector<const GoldProblem*> chosen;
  for (const auto& e : manifest.entries) {
    std::vector<const GoldProblem*> pool;
    for (const auto& g : golds) {
      if (g.problem.dataset != manifest.dataset) continue;
      if ((g.problem.label == bench::Label::Unknown) != e.unknown) continue;
      if (e.depth && g.problem.depth != e.depth) continue;
      pool.push_back(&g);
    }
    if (pool.size() < e.need) throw ManifestShortfall(e.unknown ? std::nullopt : e.depth, pool.size(), e.need);
    std::sort(pool.begin(), pool.end(), [](auto a, auto b) { return a->problem.id < b->problem.id; });
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(chosen.size() + 1));
    for (std::size_t i = 0; i < e.need; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
      std::swap(pool[i], pool[j]);
      chosen.push_back(pool[i]);
    }
  }
  // a problem matching two entries is only used once
  std::vector<const GoldProblem*> seen = chosen;
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("manifest entries overlap");
  }

  Corpus corpus;
  corpus.samples.resize(chosen.size());
  std::vector<std::exception_ptr> errors(chosen.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    try {
      corpus.samples[i] = generate(*chosen[i], style);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& s : corpus.samples) {
    ++corpus.report.counts[{std::string(style_name(s.style)), s.depth.value_or(-1),
                            std::string(bench::label_name(s.label))}];
  }
  corpus.report.total = corpus.samples.size();
  return corpus;
}

nlohmann::json sample_to_json(const SftSample& s) {
  return {{"style", style_name(s.style)},
          {"prompt", s.prompt},
          {"target", s.target},
          {"depth", s.depth ? nlohmann::json(*s.depth) : nlohmann::json(nullptr)},
          {"source_id", s.source_id}};
}

void write_corpus(const std::filesystem::path& path, const std::vector<SftSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

nlohmann::json gold_to_json(const GoldProblem& g) {
  nlohmann::json j = bench::problem_to_json(g.problem);
  j["glossary"] = {{"predicates", g.glossary.predicates}, {"constants", g.glossary.constants}};
  return j;
}

GoldProblem gold_from_json(const nlohmann::json& j) {
  GoldProblem g;
  g.problem = bench::problem_from_json(j);
  if (!g.problem.gold_proof) throw std::invalid_argument("gold problem " + g.problem.id + " has no gold_proof");
  if (j.contains("glossary")) {
    const auto& gl = j.at("glossary");
    if (gl.contains("predicates")) g.glossary.predicates = gl.at("predicates").get<std::map<std::string, std::string>>();
    if (gl.contains("constants")) g.glossary.constants = gl.at("constants").get<std::map<std::string, std::string>>();
  }
  // attach the problem's facts so fact citations resolve
  auto& chain = *g.problem.gold_proof;
  if (chain.facts.empty()) chain.facts = g.problem.given_facts();
  return g;
}

std::vector<GoldProblem> load_gold_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<GoldProblem> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(gold_from_json(nlohmann::json::parse(text)));
    } catch (const std::exception& e) {
      throw bench::SchemaError(line, e.what());
    }
  }
  return out;
}

}  // namespace finelogic::sft
