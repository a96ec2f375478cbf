#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finelogic/logic/formula.hpp"

namespace finelogic::logic {

/// A finite structure: elements 0..domain_size-1, a denotation for each
/// constant and an extension for each predicate.
struct Interpretation {
  std::size_t domain_size = 1;
  std::map<std::string, std::size_t> constants;
  std::map<std::string, std::size_t> arities;
  /// Truth value per argument tuple, tuple index in base domain_size
  /// (first argument most significant).
  std::map<std::string, std::vector<bool>> extensions;

  bool holds(const Formula& f) const;
  bool atom_holds(const std::string& predicate, const std::vector<std::size_t>& tuple) const;

  /// e.g. "domain {d0}; A={d0}; B={}; a=d0"
  std::string describe() const;
};

enum class SemanticOutcome { Entailed, Countermodel, Inconclusive };

struct SemanticResult {
  SemanticOutcome outcome = SemanticOutcome::Inconclusive;
  std::optional<Interpretation> countermodel;
  std::uint64_t interpretations_checked = 0;
  bool combinatorial_limit = false;
};

struct BruteforceOptions {
  std::uint64_t interpretation_cap = std::uint64_t{1} << 24;
};

/// Whether the formulas lie in the fragment where a bounded finite search is
/// conclusive: all predicates at most unary, or no quantifiers at all.
bool monadic_or_ground(std::span<const Formula> formulas);

/// Enumerates every interpretation over domains 1..max_domain. Serial
/// reference implementation.
SemanticResult semantic_entails_bruteforce(std::span<const Formula> premises,
                                           const Formula& conclusion, int max_domain,
                                           const BruteforceOptions& opts = {});

/// Same result as the serial version; interpretation blocks are checked by
/// an OpenMP team and the lowest-index countermodel wins.
SemanticResult semantic_entails_bruteforce_parallel(std::span<const Formula> premises,
                                                    const Formula& conclusion, int max_domain,
                                                    const BruteforceOptions& opts = {});

/// Countermodel search by grounding into propositional constraints and
/// running a DPLL-style backtracking search. Returns a structure satisfying
/// every premise and falsifying the conclusion, if one exists within the
/// domain bound.
std::optional<Interpretation> find_countermodel(std::span<const Formula> premises,
                                                const Formula& conclusion, int max_domain);

}  // namespace finelogic::logic
