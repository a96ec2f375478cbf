#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "finelogic/logic/formula.hpp"
#include "finelogic/logic/rules.hpp"
#include "finelogic/logic/semantics.hpp"

namespace finelogic::logic {

struct SearchBudget {
  int max_depth = 3;
  std::size_t max_nodes = 50'000;
  std::chrono::milliseconds time_limit{2000};
  /// Domain bound for the countermodel search; 0 selects min(2^#predicates, 4).
  int max_domain = 0;
};

class InvalidBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EntailmentStatus { Valid, Invalid, Unknown };

std::string_view status_name(EntailmentStatus s);

struct EntailmentVerdict {
  EntailmentStatus status = EntailmentStatus::Unknown;
  /// Present iff status is Valid.
  std::optional<int> min_rule_count;
  /// Derivation witness for Valid (empty when the conclusion is a premise).
  std::vector<RuleApplication> derivation;
  /// Countermodel witness for Invalid.
  std::optional<Interpretation> countermodel;
  std::size_t nodes_expanded = 0;
  bool budget_exhausted = false;
};

EntailmentVerdict entails(std::span<const Formula> premises, const Formula& conclusion,
                          const SearchBudget& budget = {});

struct AtomicityResult {
  bool atomic = false;
  /// The entailment check ran out of budget; `atomic` is then false.
  bool unknown = false;
  std::optional<Rule> rule;
};

/// True iff the conclusion follows by exactly one catalog rule that consumes
/// every stated premise.
AtomicityResult check_atomic(std::span<const Formula> premises, const Formula& conclusion,
                             const SearchBudget& budget = {});

/// Replays a derivation against the catalog. Assumptions discharged by a
/// Reductio step are available to the steps before it.
bool validate_derivation(std::span<const Formula> premises,
                         std::span<const RuleApplication> derivation, const Formula& conclusion);

}  // namespace finelogic::logic
