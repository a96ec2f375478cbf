#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finelogic::logic {

struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  std::string name;

  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  bool is_variable() const { return kind == Kind::Variable; }
  friend bool operator==(const Term&, const Term&) = default;
};

enum class Connective { Atom, Not, And, Or, Implies, ForAll, Exists, Falsum };

/// Immutable first-order formula. Copies share structure.
///
/// `operator==` compares up to renaming of bound variables (alpha
/// equivalence); `identical` is strict structural equality including the
/// names chosen for bound variables.
class Formula {
 public:
  Formula();  // ⊥

  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula forall(std::string var, Formula body);
  static Formula exists(std::string var, Formula body);
  static Formula falsum();

  Connective kind() const;
  bool is(Connective c) const { return kind() == c; }
  bool is_binary() const;
  bool is_quantifier() const;

  /// Predicate name for atoms, bound variable for quantifiers.
  const std::string& name() const;
  const std::vector<Term>& args() const;
  /// Operand of ¬, body of a quantifier, left operand of a binary connective.
  Formula lhs() const;
  Formula rhs() const;
  Formula body() const { return lhs(); }

  bool identical(const Formula& other) const;
  friend bool operator==(const Formula& a, const Formula& b);

  struct Node;  // internal representation

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : std::runtime_error("syntax error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ArityError : public std::runtime_error {
 public:
  ArityError(std::string predicate, std::size_t expected, std::size_t found)
      : std::runtime_error("predicate " + predicate + " used with arity " + std::to_string(found) +
                           ", previously " + std::to_string(expected)),
        predicate_(std::move(predicate)) {}
  const std::string& predicate() const { return predicate_; }

 private:
  std::string predicate_;
};

/// Predicate arities seen so far; shared across one parse batch.
using ArityTable = std::map<std::string, std::size_t>;

Formula parse_formula(std::string_view text);
Formula parse_formula(std::string_view text, ArityTable& arities);
std::vector<Formula> parse_formulas(const std::vector<std::string>& texts);

/// Canonical unicode rendering.
std::string print_formula(const Formula& f);

/// Renames bound variables x1, x2, ... in order of first binder occurrence.
Formula normalize(const Formula& f);

/// Canonical key: printed normal form.
std::string key(const Formula& f);

/// Key that additionally ignores operand order of ∧ and ∨.
std::string ac_key(const Formula& f);

/// Alpha equivalence modulo commutativity of ∧/∨.
bool equivalent_ac(const Formula& a, const Formula& b);

/// Replaces free occurrences of `var` by the constant `constant`.
Formula instantiate(const Formula& f, const std::string& var, const std::string& constant);

/// Replaces occurrences of the constant by a variable (for ∃-introduction).
Formula abstract_constant(const Formula& f, const std::string& constant, const std::string& var);

struct Signature {
  std::map<std::string, std::size_t> predicates;  // name -> arity
  std::set<std::string> constants;
  bool quantified = false;

  std::size_t max_arity() const;
  bool monadic() const { return max_arity() <= 1; }
};

void collect_signature(const Formula& f, Signature& sig);
Signature signature_of(const std::vector<Formula>& fs);

std::set<std::string> free_variables(const Formula& f);
bool is_closed(const Formula& f);

/// Depth of the syntax tree (atoms and ⊥ have depth 0).
std::size_t formula_depth(const Formula& f);

std::vector<Formula> subformulas(const Formula& f);

}  // namespace finelogic::logic
