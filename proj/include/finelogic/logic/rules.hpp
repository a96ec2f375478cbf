#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finelogic/logic/formula.hpp"

namespace finelogic::logic {

/// The atomic inference catalog. A step that instantiates exactly one of
/// these, consuming every stated premise, is atomic.
enum class Rule {
  ModusPonens,             // φ→ψ, φ ⊢ ψ
  UniversalModusPonens,    // ∀x̄(φ→ψ), φσ ⊢ ψσ
  ModusTollens,            // φ→ψ, ¬ψ ⊢ ¬φ
  UniversalModusTollens,   // ∀x̄(φ→ψ), ¬ψσ ⊢ ¬φσ
  ConjunctionIntro,        // φ, ψ ⊢ φ∧ψ
  ConjunctionElim,         // φ∧ψ ⊢ φ  (or ψ)
  DisjunctionIntro,        // φ ⊢ φ∨ψ  (or ψ∨φ)
  DisjunctiveSyllogism,    // φ∨ψ, ¬φ ⊢ ψ
  DeMorgan,                // ¬(φ∧ψ) ⊣⊢ ¬φ∨¬ψ,  ¬(φ∨ψ) ⊣⊢ ¬φ∧¬ψ
  Contraposition,          // φ→ψ ⊢ ¬ψ→¬φ  (also under a ∀ prefix)
  UniversalInstantiation,  // ∀x̄ φ ⊢ φσ
  ExistentialIntro,        // φ[c] ⊢ ∃x φ[x]
  ContradictionIntro,      // φ, ¬φ ⊢ ⊥
  Reductio,                // [φ ... ⊥] ⊢ ¬φ
};

inline constexpr Rule kAllRules[] = {
    Rule::ModusPonens,          Rule::UniversalModusPonens,  Rule::ModusTollens,
    Rule::UniversalModusTollens, Rule::ConjunctionIntro,     Rule::ConjunctionElim,
    Rule::DisjunctionIntro,     Rule::DisjunctiveSyllogism,  Rule::DeMorgan,
    Rule::Contraposition,       Rule::UniversalInstantiation, Rule::ExistentialIntro,
    Rule::ContradictionIntro,   Rule::Reductio,
};

std::string_view rule_name(Rule r);
std::optional<Rule> rule_from_name(std::string_view name);

using Substitution = std::map<std::string, std::string>;  // variable -> constant

struct RuleApplication {
  Rule rule = Rule::ModusPonens;
  std::vector<Formula> premises;
  Formula conclusion;
  Substitution substitution;
};

/// One-way matching of `pattern` against `target`, binding the variables in
/// `vars` to constants. ∧ and ∨ operands match in either order.
bool match(const Formula& pattern, const Formula& target, const std::vector<std::string>& vars,
           Substitution& subst);

/// Strips a leading ∀ block: returns the bound variables and the body.
std::pair<std::vector<std::string>, Formula> strip_universals(const Formula& f);

/// Checks that `conclusion` follows from exactly `premises` (as a set, in any
/// order) by one application of `rule`. Fills `subst` for quantifier rules.
bool rule_instance_holds(Rule rule, std::span<const Formula> premises, const Formula& conclusion,
                         Substitution* subst = nullptr);

/// First catalog rule (in catalog order) that licenses the inference, if any.
/// Reductio is excluded since it needs a discharged assumption.
std::optional<Rule> identify_rule(std::span<const Formula> premises, const Formula& conclusion);

/// Context for forward generation of single-rule consequences.
struct GenerationContext {
  std::vector<std::string> constants;
  /// ac_keys of formulas that introduction rules may build.
  std::map<std::string, Formula> intro_targets;
  bool allow_contradiction = false;
};

GenerationContext make_generation_context(std::span<const Formula> premises, const Formula& goal);

struct KeyedFormula {
  Formula formula;
  std::string ac;
};

/// All single-rule consequences of `available` that are not already in it.
/// Each conclusion appears at most once.
std::vector<RuleApplication> forward_applications(const std::vector<KeyedFormula>& available,
                                                  const GenerationContext& ctx);

}  // namespace finelogic::logic
