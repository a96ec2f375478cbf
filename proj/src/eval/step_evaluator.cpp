#include "finelogic/eval/step_evaluator.hpp"

#include <algorithm>

namespace finelogic::eval {

using logic::Formula;
using proof::ProofChain;
using proof::ProofStep;
using proof::StepKind;

namespace {

struct ResolvedPremises {
  std::vector<Formula> formulas;
  std::vector<std::string> texts;  // "label: text"
  std::string missing;             // first label without a usable formula
};

ResolvedPremises resolve_premises(const ProofStep& step, const ProofChain& chain) {
  ResolvedPremises out;
  for (std::size_t i = 0; i < step.premises.size(); ++i) {
    const std::string& label = step.premises[i];
    int ord = step.premise_ordinals[i];
    if (ord > 0) {
      const auto& p = chain.steps[static_cast<std::size_t>(ord - 1)];
      out.texts.push_back(label + ": " + p.conclusion_text);
      if (p.formula) {
        out.formulas.push_back(*p.formula);
      } else if (out.missing.empty()) {
        out.missing = label;
      }
      continue;
    }
    const auto* fact = chain.find_fact(label);
    if (!fact) {
      if (out.missing.empty()) out.missing = label;
      continue;
    }
    out.texts.push_back(label + ": " + fact->text);
    if (fact->formula) {
      out.formulas.push_back(*fact->formula);
    } else if (out.missing.empty()) {
      out.missing = label;
    }
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string conclusion_full(const ProofStep& step) {
  if (step.label == proof::kFalsumLabel) return std::string(proof::kFalsumLabel);
  return step.label + ": " + step.conclusion_text;
}

bool visible(const std::vector<int>& inner, const std::vector<int>& outer) {
  return inner.size() <= outer.size() && std::equal(inner.begin(), inner.end(), outer.begin());
}

// A contradiction step citing nothing: look for φ and ¬φ among the facts and
// the earlier steps still in scope.
bool contradictory_pair_available(const ProofStep& step, const ProofChain& chain) {
  auto scopes = assumption_scopes(chain);
  const auto& here = scopes[static_cast<std::size_t>(step.ordinal - 1)];
  std::vector<std::string> keys;
  for (const auto& f : chain.facts) {
    if (f.formula) keys.push_back(logic::ac_key(*f.formula));
  }
  for (int j = 1; j < step.ordinal; ++j) {
    const auto& p = chain.steps[static_cast<std::size_t>(j - 1)];
    if (p.formula && visible(scopes[static_cast<std::size_t>(j - 1)], here)) keys.push_back(logic::ac_key(*p.formula));
  }
  std::sort(keys.begin(), keys.end());
  for (const auto& f : chain.facts) {
    if (f.formula && std::binary_search(keys.begin(), keys.end(), logic::ac_key(Formula::negation(*f.formula)))) {
      return true;
    }
  }
  for (int j = 1; j < step.ordinal; ++j) {
    const auto& p = chain.steps[static_cast<std::size_t>(j - 1)];
    if (!p.formula || !visible(scopes[static_cast<std::size_t>(j - 1)], here)) continue;
    if (std::binary_search(keys.begin(), keys.end(), logic::ac_key(Formula::negation(*p.formula)))) return true;
  }
  return false;
}

Verdict reductio_validity(const ProofStep& step, const ProofChain& chain, std::string* note) {
  const ProofStep* assumption = nullptr;
  for (std::size_t i = step.premises.size(); i-- > 0;) {
    int ord = step.premise_ordinals[i];
    if (ord > 0 && chain.steps[static_cast<std::size_t>(ord - 1)].kind == StepKind::Assumption) {
      assumption = &chain.steps[static_cast<std::size_t>(ord - 1)];
      break;
    }
  }
  if (!assumption || !assumption->formula || !step.formula) {
    if (note) *note = "reductio without a discharged assumption formula";
    return Verdict::False;
  }
  bool has_falsum = false;
  for (int ord : step.premise_ordinals) {
    if (ord > assumption->ordinal) {
      const auto& p = chain.steps[static_cast<std::size_t>(ord - 1)];
      has_falsum |= p.formula && p.formula->is(logic::Connective::Falsum);
    }
  }
  if (!has_falsum) {
    if (note) *note = "reductio cites no contradiction derived under the assumption";
    return Verdict::False;
  }
  bool ok = logic::equivalent_ac(*step.formula, Formula::negation(*assumption->formula));
  if (!ok && note) *note = "conclusion is not the negated assumption";
  return ok ? Verdict::True : Verdict::False;
}

Verdict ask_judge(JudgeKind kind, const ProofStep& step, const ProofChain& chain, const EvaluatorConfig& cfg,
                  std::string* note) {
  auto prem = resolve_premises(step, chain);
  try {
    return cfg.judge->judge(kind, join_lines(prem.texts), conclusion_full(step)) ? Verdict::True : Verdict::False;
  } catch (const std::exception& e) {
    if (note) *note = e.what();
    return Verdict::Unknown;
  }
}

Verdict from_bool(bool b) { return b ? Verdict::True : Verdict::False; }

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True:
      return "true";
    case Verdict::False:
      return "false";
    case Verdict::Unknown:
      break;
  }
  return "unknown";
}

std::string_view source_name(JudgeSource s) {
  switch (s) {
    case JudgeSource::Symbolic:
      return "symbolic";
    case JudgeSource::Remote:
      return "remote";
    case JudgeSource::Skipped:
      break;
  }
  return "skipped";
}

bool ChainVerdict::all_valid() const {
  return !malformed && std::all_of(steps.begin(), steps.end(), [](const auto& s) { return s.valid == Verdict::True; });
}
bool ChainVerdict::all_relevant() const {
  return !malformed &&
         std::all_of(steps.begin(), steps.end(), [](const auto& s) { return s.relevant == Verdict::True; });
}
bool ChainVerdict::all_atomic() const {
  return !malformed &&
         std::all_of(steps.begin(), steps.end(), [](const auto& s) { return s.atomic == Verdict::True; });
}

std::vector<std::vector<int>> assumption_scopes(const ProofChain& chain) {
  std::vector<std::vector<int>> out;
  std::vector<int> open;
  for (const auto& s : chain.steps) {
    if (s.kind == StepKind::Assumption) open.push_back(s.ordinal);
    if (s.kind == StepKind::ReductioDischarge && !open.empty()) open.pop_back();
    out.push_back(open);
  }
  return out;
}

Verdict eval_validity(const ProofStep& step, const ProofChain& chain, const EvaluatorConfig& cfg, std::string* note) {
  if (step.kind == StepKind::GivenFact || step.kind == StepKind::Assumption) return Verdict::True;
  if (chain.dialect == proof::Dialect::Natural) {
    if (!cfg.judge) return Verdict::Unknown;
    return ask_judge(JudgeKind::Validity, step, chain, cfg, note);
  }
  if (step.kind == StepKind::ReductioDischarge) return reductio_validity(step, chain, note);
  if (step.kind == StepKind::Contradiction && step.premises.empty()) {
    return from_bool(contradictory_pair_available(step, chain));
  }
  if (!step.formula) {
    if (note) *note = "conclusion has no formula";
    return Verdict::Unknown;
  }
  auto prem = resolve_premises(step, chain);
  if (!prem.missing.empty()) {
    if (note) *note = "no formula for premise " + prem.missing;
    return Verdict::Unknown;
  }
  auto v = logic::entails(prem.formulas, *step.formula, cfg.budget);
  switch (v.status) {
    case logic::EntailmentStatus::Valid:
      return Verdict::True;
    case logic::EntailmentStatus::Invalid:
      if (note && v.countermodel) *note = "countermodel: " + v.countermodel->describe();
      return Verdict::False;
    case logic::EntailmentStatus::Unknown:
      break;
  }
  if (note) *note = "entailment search exhausted its budget";
  return Verdict::Unknown;
}

Verdict eval_atomicity(const ProofStep& step, const ProofChain& chain, const EvaluatorConfig& cfg, std::string* note) {
  if (step.kind == StepKind::GivenFact || step.kind == StepKind::Assumption) return Verdict::True;
  if (chain.dialect == proof::Dialect::Natural) {
    if (!cfg.judge) return Verdict::Unknown;
    return ask_judge(JudgeKind::Atomicity, step, chain, cfg, note);
  }
  if (step.kind == StepKind::ReductioDischarge) return reductio_validity(step, chain, nullptr);
  if (step.kind == StepKind::Contradiction && step.premises.empty()) {
    return from_bool(contradictory_pair_available(step, chain));
  }
  if (!step.formula) return Verdict::Unknown;
  auto prem = resolve_premises(step, chain);
  if (!prem.missing.empty()) {
    if (note) *note = "no formula for premise " + prem.missing;
    return Verdict::Unknown;
  }
  auto a = logic::check_atomic(prem.formulas, *step.formula, cfg.budget);
  if (a.atomic) return Verdict::True;
  return a.unknown ? Verdict::Unknown : Verdict::False;
}

std::vector<bool> eval_relevance(const ProofChain& chain) {
  std::size_t n = chain.steps.size();
  std::vector<bool> rel(n, false);
  for (const auto& s : chain.steps) {
    for (int ord : s.premise_ordinals) {
      if (ord > 0 && ord < s.ordinal) rel[static_cast<std::size_t>(ord - 1)] = true;
    }
  }
  if (auto t = chain.terminal_index()) rel[*t] = true;
  // assumption and contradiction steps inherit relevance from their block's discharge
  for (const auto& s : chain.steps) {
    if (s.kind != StepKind::ReductioDischarge || !rel[static_cast<std::size_t>(s.ordinal - 1)]) continue;
    int a = 0;
    for (int ord : s.premise_ordinals) {
      if (ord > 0 && chain.steps[static_cast<std::size_t>(ord - 1)].kind == StepKind::Assumption) a = ord;
    }
    if (a == 0) continue;
    for (int j = a; j < s.ordinal; ++j) {
      auto k = chain.steps[static_cast<std::size_t>(j - 1)].kind;
      if (k == StepKind::Assumption || k == StepKind::Contradiction) rel[static_cast<std::size_t>(j - 1)] = true;
    }
  }
  return rel;
}

ChainVerdict evaluate_chain(const ProofChain& chain, const EvaluatorConfig& cfg) {
  ChainVerdict out;
  out.problem_id = chain.problem_id;
  if (chain.is_malformed()) {
    out.malformed = true;
    return out;
  }
  if (chain.empty()) {
    out.excluded = true;
    return out;
  }
  auto rel = eval_relevance(chain);
  bool natural = chain.dialect == proof::Dialect::Natural;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const auto& step = chain.steps[i];
    StepVerdict v;
    bool structural = step.kind == StepKind::GivenFact || step.kind == StepKind::Assumption;
    if (natural && !cfg.judge && !structural) {
      v.source = JudgeSource::Skipped;
      v.note = "no judge endpoint configured";
      out.steps.push_back(v);
      continue;
    }
    v.source = natural && !structural ? JudgeSource::Remote : JudgeSource::Symbolic;
    v.relevant = rel[i] ? Verdict::True : Verdict::False;
    std::string note_v;
    std::string note_a;
    v.valid = eval_validity(step, chain, cfg, &note_v);
    v.atomic = eval_atomicity(step, chain, cfg, &note_a);
    v.note = !note_v.empty() ? note_v : note_a;
    out.steps.push_back(std::move(v));
  }
  return out;
}

std::vector<ChainVerdict> evaluate_chains(const std::vector<ProofChain>& chains, const EvaluatorConfig& cfg) {
  std::vector<ChainVerdict> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(evaluate_chain(c, cfg));
  return out;
}

std::vector<ChainVerdict> evaluate_chains_parallel(const std::vector<ProofChain>& chains, const EvaluatorConfig& cfg) {
  std::vector<ChainVerdict> out(chains.size());
  const long n = static_cast<long>(chains.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = evaluate_chain(chains[static_cast<std::size_t>(i)], cfg);
  }
  return out;
}

Aggregate aggregate(const std::vector<ChainVerdict>& verdicts) {
  Aggregate a;
  std::size_t valid = 0, relevant = 0, atomic = 0, steps = 0, unk_v = 0, unk_a = 0;
  for (const auto& v : verdicts) {
    if (v.excluded) {
      ++a.excluded;
      continue;
    }
    ++a.chains;
    if (v.malformed) ++a.malformed;
    valid += v.all_valid();
    relevant += v.all_relevant();
    atomic += v.all_atomic();
    for (const auto& s : v.steps) {
      ++steps;
      unk_v += s.valid == Verdict::Unknown;
      unk_a += s.atomic == Verdict::Unknown;
    }
  }
  if (a.chains == 0) throw EmptyCohort("no chains left to aggregate after excluding empty ones");
  double n = static_cast<double>(a.chains);
  a.all_valid = static_cast<double>(valid) / n;
  a.all_relevant = static_cast<double>(relevant) / n;
  a.all_atomic = static_cast<double>(atomic) / n;
  if (steps) {
    a.unknown_valid_rate = static_cast<double>(unk_v) / static_cast<double>(steps);
    a.unknown_atomic_rate = static_cast<double>(unk_a) / static_cast<double>(steps);
  }
  return a;
}

nlohmann::json verdict_to_json(const ChainVerdict& v) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : v.steps) {
    nlohmann::json js = {{"valid", verdict_name(s.valid)},
                         {"relevant", verdict_name(s.relevant)},
                         {"atomic", verdict_name(s.atomic)},
                         {"source", source_name(s.source)}};
    if (!s.note.empty()) js["note"] = s.note;
    steps.push_back(std::move(js));
  }
  return {{"problem_id", v.problem_id}, {"excluded", v.excluded},       {"malformed", v.malformed},
          {"all_valid", v.all_valid()}, {"all_relevant", v.all_relevant()}, {"all_atomic", v.all_atomic()},
          {"steps", steps}};
}

ChainVerdict verdict_from_json(const nlohmann::json& j) {
  auto verdict = [](const std::string& s) {
    return s == "true" ? Verdict::True : s == "false" ? Verdict::False : Verdict::Unknown;
  };
  ChainVerdict v;
  v.problem_id = j.at("problem_id").get<std::string>();
  v.excluded = j.value("excluded", false);
  v.malformed = j.value("malformed", false);
  for (const auto& js : j.at("steps")) {
    StepVerdict s;
    s.valid = verdict(js.at("valid").get<std::string>());
    s.relevant = verdict(js.at("relevant").get<std::string>());
    s.atomic = verdict(js.at("atomic").get<std::string>());
    std::string src = js.value("source", "skipped");
    s.source = src == "symbolic" ? JudgeSource::Symbolic : src == "remote" ? JudgeSource::Remote : JudgeSource::Skipped;
    s.note = js.value("note", "");
    v.steps.push_back(std::move(s));
  }
  return v;
}

nlohmann::json aggregate_to_json(const Aggregate& a) {
  return {{"N", a.chains},
          {"excluded_empty", a.excluded},
          {"malformed", a.malformed},
          {"AllValid", a.all_valid},
          {"AllRelevant", a.all_relevant},
          {"AllAtomic", a.all_atomic},
          {"unknown_valid_rate", a.unknown_valid_rate},
          {"unknown_atomic_rate", a.unknown_atomic_rate}};
}

}  // namespace finelogic::eval
