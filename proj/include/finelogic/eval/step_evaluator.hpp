#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/eval/judge.hpp"
#include "finelogic/logic/entailment.hpp"
#include "finelogic/proof/chain.hpp"
#include "finelogic/util/errors.hpp"

namespace finelogic::eval {

enum class Verdict { False, True, Unknown };
enum class JudgeSource { Symbolic, Remote, Skipped };

std::string_view verdict_name(Verdict v);
std::string_view source_name(JudgeSource s);

struct StepVerdict {
  Verdict valid = Verdict::Unknown;
  Verdict relevant = Verdict::Unknown;
  Verdict atomic = Verdict::Unknown;
  JudgeSource source = JudgeSource::Skipped;
  std::string note;
};

struct ChainVerdict {
  std::string problem_id;
  std::vector<StepVerdict> steps;
  /// K = 0; left out of the aggregates.
  bool excluded = false;
  /// Malformed chains fail all three metrics.
  bool malformed = false;

  bool all_valid() const;
  bool all_relevant() const;
  bool all_atomic() const;
};

struct EvaluatorConfig {
  logic::SearchBudget budget;
  /// Required for natural-dialect chains; without it their steps are unknown.
  RemoteJudge* judge = nullptr;
};

struct Aggregate {
  double all_valid = 0;
  double all_relevant = 0;
  double all_atomic = 0;
  std::size_t chains = 0;  // N after exclusion
  std::size_t excluded = 0;
  std::size_t malformed = 0;
  /// Fractions of evaluated steps whose verdict stayed unknown.
  double unknown_valid_rate = 0;
  double unknown_atomic_rate = 0;
};

using finelogic::EmptyCohort;

/// Open assumption ordinals in force at each step (an assumption is inside its
/// own block; a discharge is outside it).
std::vector<std::vector<int>> assumption_scopes(const proof::ProofChain& chain);

Verdict eval_validity(const proof::ProofStep& step, const proof::ProofChain& chain, const EvaluatorConfig& cfg,
                      std::string* note = nullptr);
Verdict eval_atomicity(const proof::ProofStep& step, const proof::ProofChain& chain, const EvaluatorConfig& cfg,
                       std::string* note = nullptr);
std::vector<bool> eval_relevance(const proof::ProofChain& chain);

ChainVerdict evaluate_chain(const proof::ProofChain& chain, const EvaluatorConfig& cfg);
/// Serial reference.
std::vector<ChainVerdict> evaluate_chains(const std::vector<proof::ProofChain>& chains, const EvaluatorConfig& cfg);
/// One chain per OpenMP iteration; output order matches the input.
std::vector<ChainVerdict> evaluate_chains_parallel(const std::vector<proof::ProofChain>& chains,
                                                   const EvaluatorConfig& cfg);

Aggregate aggregate(const std::vector<ChainVerdict>& verdicts);

nlohmann::json verdict_to_json(const ChainVerdict& v);
ChainVerdict verdict_from_json(const nlohmann::json& j);
nlohmann::json aggregate_to_json(const Aggregate& a);

}  // namespace finelogic::eval
