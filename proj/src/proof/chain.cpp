#include <algorithm>
#include <map>
#include <sstream>

#include "finelogic/proof/chain.hpp"

namespace finelogic::proof {

namespace {

constexpr std::pair<StepKind, std::string_view> kKindNames[] = {
    {StepKind::GivenFact, "given-fact"},
    {StepKind::Derivation, "derivation"},
    {StepKind::Assumption, "assumption"},
    {StepKind::Contradiction, "contradiction"},
    {StepKind::ReductioDischarge, "reductio-discharge"},
    {StepKind::FinalConclusion, "final-conclusion"},
};

constexpr std::pair<Answer, std::string_view> kAnswerNames[] = {
    {Answer::Proved, "PROVED"},
    {Answer::Disproved, "DISPROVED"},
    {Answer::Unknown, "UNKNOWN"},
    {Answer::None, "NONE"},
};

std::string conclusion_of(const ProofChain& chain, const ProofStep& s) {
  if (chain.dialect == Dialect::Symbolic && s.formula) return logic::print_formula(*s.formula);
  return s.conclusion_text;
}

std::string fact_text(const ProofChain& chain, const GivenFact& f) {
  if (chain.dialect == Dialect::Symbolic && f.formula) return logic::print_formula(*f.formula);
  return f.text;
}

bool same_formula(const std::optional<logic::Formula>& a, const std::optional<logic::Formula>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || a->identical(*b);
}

}  // namespace

std::string_view kind_name(StepKind k) {
  for (auto [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "derivation";
}

std::optional<StepKind> kind_from_name(std::string_view s) {
  for (auto [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::string_view answer_name(Answer a) {
  for (auto [ans, name] : kAnswerNames) {
    if (ans == a) return name;
  }
  return "NONE";
}

std::optional<Answer> answer_from_name(std::string_view s) {
  for (auto [ans, name] : kAnswerNames) {
    if (name == s) return ans;
  }
  return std::nullopt;
}

std::string_view dialect_name(Dialect d) { return d == Dialect::Symbolic ? "symbolic" : "natural"; }

std::optional<std::size_t> ProofChain::terminal_index() const {
  if (steps.empty()) return std::nullopt;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].kind == StepKind::FinalConclusion) return i;
  }
  return steps.size() - 1;
}

const GivenFact* ProofChain::find_fact(std::string_view label) const {
  for (const auto& f : facts) {
    if (f.label == label) return &f;
  }
  return nullptr;
}

std::optional<std::size_t> DependencyGraph::index_of(const GraphNode& n) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == n) return i;
  }
  return std::nullopt;
}

std::size_t DependencyGraph::out_degree(std::size_t node) const {
  std::size_t d = 0;
  for (auto [from, to] : edges) d += from == node;
  return d;
}

std::size_t DependencyGraph::in_degree(std::size_t node) const {
  std::size_t d = 0;
  for (auto [from, to] : edges) d += to == node;
  return d;
}

DependencyGraph dependency_graph(const ProofChain& chain) {
  DependencyGraph g;
  std::map<std::string, std::size_t> fact_nodes;
  // given facts first, in order of first citation
  for (const auto& s : chain.steps) {
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      if (s.premise_ordinals[i] != 0 || fact_nodes.count(s.premises[i])) continue;
      fact_nodes[s.premises[i]] = g.nodes.size();
      g.nodes.push_back({s.premises[i], 0});
    }
  }
  std::size_t first_step = g.nodes.size();
  for (const auto& s : chain.steps) g.nodes.push_back({s.label, s.ordinal});
  for (const auto& s : chain.steps) {
    std::size_t to = first_step + static_cast<std::size_t>(s.ordinal - 1);
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      int from_ord = s.premise_ordinals[i];
      if (from_ord >= s.ordinal) {
        throw CycleDetected("step " + std::to_string(s.ordinal) + " depends on step " + std::to_string(from_ord));
      }
      std::size_t from = from_ord == 0 ? fact_nodes.at(s.premises[i])
                                       : first_step + static_cast<std::size_t>(from_ord - 1);
      g.edges.emplace_back(from, to);
    }
  }
  return g;
}

std::vector<int> dependency_closure(const ProofChain& chain) {
  auto term = chain.terminal_index();
  if (!term) return {};
  std::vector<bool> keep(chain.steps.size() + 1, false);
  keep[*term + 1] = true;
  for (std::size_t i = *term + 1; i >= 1; --i) {
    if (!keep[i]) continue;
    for (int ord : chain.steps[i - 1].premise_ordinals) {
      if (ord > 0 && static_cast<std::size_t>(ord) < i) keep[static_cast<std::size_t>(ord)] = true;
    }
  }
  std::vector<int> out;
  for (std::size_t i = 1; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<std::string> necessary_fact_labels(const ProofChain& chain) {
  std::vector<std::string> cited;
  for (int ord : dependency_closure(chain)) {
    const auto& s = chain.steps[static_cast<std::size_t>(ord - 1)];
    for (std::size_t i = 0; i < s.premises.size(); ++i) {
      if (s.premise_ordinals[i] == 0 && std::find(cited.begin(), cited.end(), s.premises[i]) == cited.end()) {
        cited.push_back(s.premises[i]);
      }
    }
  }
  if (chain.facts.empty()) {
    // keep citation order across the closure
    std::vector<std::string> ordered;
    for (const auto& s : chain.steps) {
      for (std::size_t i = 0; i < s.premises.size(); ++i) {
        const auto& p = s.premises[i];
        if (s.premise_ordinals[i] == 0 && std::find(cited.begin(), cited.end(), p) != cited.end() &&
            std::find(ordered.begin(), ordered.end(), p) == ordered.end()) {
          ordered.push_back(p);
        }
      }
    }
    return ordered;
  }
  std::vector<std::string> out;
  for (const auto& f : chain.facts) {
    if (std::find(cited.begin(), cited.end(), f.label) != cited.end()) out.push_back(f.label);
  }
  return out;
}

std::string render_step(const ProofChain& chain, const ProofStep& step) {
  auto cite = [&](std::size_t i) -> std::string {
    const std::string& label = step.premises[i];
    int ord = step.premise_ordinals[i];
    if (ord == 0) return label;
    bool shadowed = label == kFalsumLabel || label.starts_with("step");
    for (int j = ord + 1; j < step.ordinal && !shadowed; ++j) {
      shadowed = chain.steps[static_cast<std::size_t>(j - 1)].label == label;
    }
    return shadowed ? "Step " + std::to_string(ord) : label;
  };
  std::string refs;
  for (std::size_t i = 0; i < step.premises.size(); ++i) {
    if (i) refs += ", ";
    refs += cite(i);
  }

  std::ostringstream out;
  out << "Step " << step.ordinal << ": ";
  switch (step.kind) {
    case StepKind::GivenFact:
      out << "We restate a given fact:";
      break;
    case StepKind::Assumption:
      out << "Assume for contradiction:";
      break;
    case StepKind::Contradiction:
      out << (refs.empty() ? std::string("Contradiction:") : "From " + refs + ", we derive a contradiction:");
      break;
    case StepKind::ReductioDischarge:
      out << "By reductio ad absurdum from " << refs << ":";
      break;
    case StepKind::Derivation:
    case StepKind::FinalConclusion:
      out << (refs.empty() ? std::string("We derive:") : "From " + refs + ", we derive:");
      break;
  }
  out << "\n";
  if (step.label == kFalsumLabel) {
    out << kFalsumLabel;
  } else {
    out << step.label << ": " << conclusion_of(chain, step);
  }
  return out.str();
}

std::string render_chain(const ProofChain& chain) {
  std::ostringstream out;
  for (const auto& f : chain.facts) out << f.label << ": " << fact_text(chain, f) << "\n";
  if (chain.hypothesis) out << "hypothesis: " << fact_text(chain, *chain.hypothesis) << "\n";
  for (const auto& s : chain.steps) out << render_step(chain, s) << "\n";
  if (chain.final_label) out << "Final conclusion: __" << answer_name(*chain.final_label) << "__\n";
  return out.str();
}

bool same_structure(const ProofChain& a, const ProofChain& b) {
  if (a.problem_id != b.problem_id || a.dialect != b.dialect || a.final_label != b.final_label) return false;
  if (a.malformed != b.malformed || a.steps.size() != b.steps.size() || a.facts.size() != b.facts.size()) {
    return false;
  }
  auto same_fact = [&](const GivenFact& x, const GivenFact& y) {
    if (x.label != y.label || !same_formula(x.formula, y.formula)) return false;
    return x.formula || x.text == y.text;
  };
  for (std::size_t i = 0; i < a.facts.size(); ++i) {
    if (!same_fact(a.facts[i], b.facts[i])) return false;
  }
  if (a.hypothesis.has_value() != b.hypothesis.has_value()) return false;
  if (a.hypothesis && !same_fact(*a.hypothesis, *b.hypothesis)) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.ordinal != y.ordinal || x.label != y.label || x.kind != y.kind || x.premises != y.premises ||
        x.premise_ordinals != y.premise_ordinals || !same_formula(x.formula, y.formula)) {
      return false;
    }
    if (!x.formula && x.conclusion_text != y.conclusion_text) return false;
  }
  return true;
}

nlohmann::json chain_to_json(const ProofChain& chain) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : chain.steps) {
    steps.push_back({{"label", s.label},
                     {"kind", kind_name(s.kind)},
                     {"premises", s.premises},
                     {"premise_steps", s.premise_ordinals},
                     {"conclusion", conclusion_of(chain, s)},
                     {"text", s.explanation}});
  }
  nlohmann::json facts = nlohmann::json::array();
  for (const auto& f : chain.facts) facts.push_back({{"label", f.label}, {"text", fact_text(chain, f)}});
  nlohmann::json reasons = nlohmann::json::array();
  for (const auto& m : chain.malformed) reasons.push_back({{"step", m.ordinal}, {"reason", m.reason}});

  nlohmann::json j = {{"problem_id", chain.problem_id},
                      {"dialect", dialect_name(chain.dialect)},
                      {"steps", steps},
                      {"final_label", nullptr},
                      {"malformed", chain.is_malformed()},
                      {"malformed_reasons", reasons},
                      {"facts", facts}};
  if (chain.final_label) j["final_label"] = answer_name(*chain.final_label);
  if (chain.hypothesis) j["hypothesis"] = fact_text(chain, *chain.hypothesis);
  return j;
}

ProofChain chain_from_json(const nlohmann::json& j) {
  ProofChain c;
  c.problem_id = j.value("problem_id", "");
  c.dialect = j.value("dialect", "symbolic") == "natural" ? Dialect::Natural : Dialect::Symbolic;
  logic::ArityTable arities;
  auto formula_of = [&](const std::string& text) -> std::optional<logic::Formula> {
    if (c.dialect != Dialect::Symbolic) return std::nullopt;
    try {
      return logic::parse_formula(text, arities);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (j.contains("facts")) {
    for (const auto& f : j.at("facts")) {
      std::string text = f.at("text").get<std::string>();
      c.facts.push_back({f.at("label").get<std::string>(), text, formula_of(text)});
    }
  }
  if (j.contains("hypothesis") && j.at("hypothesis").is_string()) {
    std::string text = j.at("hypothesis").get<std::string>();
    c.hypothesis = GivenFact{"hypothesis", text, formula_of(text)};
  }
  int ordinal = 0;
  for (const auto& js : j.at("steps")) {
    ProofStep s;
    s.ordinal = ++ordinal;
    s.label = js.at("label").get<std::string>();
    auto kind = kind_from_name(js.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown step kind " + js.at("kind").dump());
    s.kind = *kind;
    s.premises = js.at("premises").get<std::vector<std::string>>();
    if (js.contains("premise_steps")) {
      s.premise_ordinals = js.at("premise_steps").get<std::vector<int>>();
    } else {
      // most recent earlier step with the label, otherwise a given fact
      for (const auto& p : s.premises) {
        int found = 0;
        for (int k = ordinal - 1; k >= 1 && !found; --k) {
          if (c.steps[static_cast<std::size_t>(k - 1)].label == p) found = k;
        }
        s.premise_ordinals.push_back(found);
      }
    }
    if (s.premise_ordinals.size() != s.premises.size()) {
      throw std::invalid_argument("premise_steps and premises differ in length");
    }
    s.conclusion_text = js.at("conclusion").get<std::string>();
    s.explanation = js.value("text", "");
    if (c.dialect == Dialect::Symbolic) s.formula = formula_of(s.conclusion_text);
    c.steps.push_back(std::move(s));
  }
  if (j.contains("final_label") && j.at("final_label").is_string()) {
    auto a = answer_from_name(j.at("final_label").get<std::string>());
    if (a && *a != Answer::None) c.final_label = *a;
  }
  if (j.contains("malformed_reasons")) {
    for (const auto& m : j.at("malformed_reasons")) {
      c.malformed.push_back({m.value("step", 0), m.value("reason", "")});
    }
  }
  if (j.value("malformed", false) && c.malformed.empty()) c.malformed.push_back({0, "flagged malformed"});
  return c;
}

}  // namespace finelogic::proof
