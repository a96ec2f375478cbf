#include "finelogic/logic/rules.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace finelogic::logic {

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::ModusPonens:
      return "modus_ponens";
    case Rule::UniversalModusPonens:
      return "universal_modus_ponens";
    case Rule::ModusTollens:
      return "modus_tollens";
    case Rule::UniversalModusTollens:
      return "universal_modus_tollens";
    case Rule::ConjunctionIntro:
      return "conjunction_intro";
    case Rule::ConjunctionElim:
      return "conjunction_elim";
    case Rule::DisjunctionIntro:
      return "disjunction_intro";
    case Rule::DisjunctiveSyllogism:
      return "disjunctive_syllogism";
    case Rule::DeMorgan:
      return "de_morgan";
    case Rule::Contraposition:
      return "contraposition";
    case Rule::UniversalInstantiation:
      return "universal_instantiation";
    case Rule::ExistentialIntro:
      return "existential_intro";
    case Rule::ContradictionIntro:
      return "contradiction_intro";
    case Rule::Reductio:
      return "reductio";
  }
  return "unknown";
}

std::optional<Rule> rule_from_name(std::string_view name) {
  for (Rule r : kAllRules) {
    if (rule_name(r) == name) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct MatchState {
  const std::vector<std::string>* vars;
  Substitution subst;
  std::vector<std::string> pattern_binders;
  std::vector<std::string> target_binders;
};

int binder_index(const std::vector<std::string>& binders, const std::string& name) {
  for (std::size_t i = binders.size(); i-- > 0;) {
    if (binders[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool match_term(const Term& p, const Term& t, MatchState& st) {
  if (p.is_variable()) {
    int ip = binder_index(st.pattern_binders, p.name);
    if (ip >= 0) {
      return t.is_variable() && binder_index(st.target_binders, t.name) == ip;
    }
    if (std::find(st.vars->begin(), st.vars->end(), p.name) != st.vars->end()) {
      if (t.is_variable()) return false;
      auto [it, inserted] = st.subst.emplace(p.name, t.name);
      return inserted || it->second == t.name;
    }
    return t == p;
  }
  return !t.is_variable() && t.name == p.name;
}

bool match_rec(const Formula& p, const Formula& t, MatchState& st) {
  if (p.kind() != t.kind()) return false;
  switch (p.kind()) {
    case Connective::Falsum:
      return true;
    case Connective::Atom: {
      if (p.name() != t.name() || p.args().size() != t.args().size()) return false;
      for (std::size_t i = 0; i < p.args().size(); ++i) {
        if (!match_term(p.args()[i], t.args()[i], st)) return false;
      }
      return true;
    }
    case Connective::Not:
      return match_rec(p.lhs(), t.lhs(), st);
    case Connective::ForAll:
    case Connective::Exists: {
      st.pattern_binders.push_back(p.name());
      st.target_binders.push_back(t.name());
      bool ok = match_rec(p.lhs(), t.lhs(), st);
      st.pattern_binders.pop_back();
      st.target_binders.pop_back();
      return ok;
    }
    case Connective::Implies:
      return match_rec(p.lhs(), t.lhs(), st) && match_rec(p.rhs(), t.rhs(), st);
    case Connective::And:
    case Connective::Or: {
      MatchState straight = st;
      if (match_rec(p.lhs(), t.lhs(), straight) && match_rec(p.rhs(), t.rhs(), straight)) {
        st = std::move(straight);
        return true;
      }
      MatchState swapped = st;
      if (match_rec(p.lhs(), t.rhs(), swapped) && match_rec(p.rhs(), t.lhs(), swapped)) {
        st = std::move(swapped);
        return true;
      }
      return false;
    }
  }
  return false;
}

Formula apply_subst(Formula f, const Substitution& s) {
  for (const auto& [var, c] : s) f = instantiate(f, var, c);
  return f;
}

bool all_bound(const Formula& f, const std::vector<std::string>& vars, const Substitution& s) {
  auto fv = free_variables(f);
  for (const auto& v : vars) {
    if (fv.count(v) && !s.count(v)) return false;
  }
  return true;
}

}  // namespace

bool match(const Formula& pattern, const Formula& target, const std::vector<std::string>& vars,
           Substitution& subst) {
  MatchState st{&vars, subst, {}, {}};
  if (!match_rec(pattern, target, st)) return false;
  subst = std::move(st.subst);
  return true;
}

std::pair<std::vector<std::string>, Formula> strip_universals(const Formula& f) {
  std::vector<std::string> vars;
  Formula body = f;
  while (body.is(Connective::ForAll)) {
    vars.push_back(body.name());
    body = body.lhs();
  }
  return {vars, body};
}

// ---------------------------------------------------------------------------
// Checking a claimed rule instance. Quantifier rules enumerate substitutions
// over the constants in play rather than reusing the matcher above.

namespace {

bool eq(const Formula& a, const Formula& b) { return equivalent_ac(a, b); }

std::vector<std::string> constants_of(std::span<const Formula> premises, const Formula& c) {
  Signature sig;
  for (const auto& p : premises) collect_signature(p, sig);
  collect_signature(c, sig);
  return {sig.constants.begin(), sig.constants.end()};
}

// Calls fn(subst) for every assignment of vars to constants; stops when fn
// returns true.
template <typename Fn>
bool for_each_assignment(const std::vector<std::string>& vars,
                         const std::vector<std::string>& constants, Fn&& fn) {
  if (vars.empty()) return fn(Substitution{});
  if (constants.empty()) return false;
  std::vector<std::size_t> idx(vars.size(), 0);
  while (true) {
    Substitution s;
    for (std::size_t i = 0; i < vars.size(); ++i) s[vars[i]] = constants[idx[i]];
    if (fn(s)) return true;
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == constants.size()) idx[pos++] = 0;
    if (pos == idx.size()) return false;
  }
}

Formula rewrap_universals(const std::vector<std::string>& vars, Formula body) {
  for (std::size_t i = vars.size(); i-- > 0;) body = Formula::forall(vars[i], body);
  return body;
}

std::vector<Formula> de_morgan_images(const Formula& f) {
  std::vector<Formula> out;
  if (f.is(Connective::Not)) {
    Formula inner = f.lhs();
    if (inner.is(Connective::And)) {
      out.push_back(Formula::disjunction(Formula::negation(inner.lhs()),
                                         Formula::negation(inner.rhs())));
    } else if (inner.is(Connective::Or)) {
      out.push_back(Formula::conjunction(Formula::negation(inner.lhs()),
                                         Formula::negation(inner.rhs())));
    }
  }
  if ((f.is(Connective::Or) || f.is(Connective::And)) && f.lhs().is(Connective::Not) &&
      f.rhs().is(Connective::Not)) {
    Formula a = f.lhs().lhs();
    Formula b = f.rhs().lhs();
    out.push_back(Formula::negation(f.is(Connective::Or) ? Formula::conjunction(a, b)
                                                         : Formula::disjunction(a, b)));
  }
  return out;
}

std::optional<Formula> contrapositive(const Formula& f) {
  auto [vars, body] = strip_universals(f);
  if (!body.is(Connective::Implies)) return std::nullopt;
  return rewrap_universals(
      vars, Formula::implication(Formula::negation(body.rhs()), Formula::negation(body.lhs())));
}

bool check_two(Rule rule, const Formula& p, const Formula& q, const Formula& c,
               const std::vector<std::string>& constants, Substitution* out) {
  switch (rule) {
    case Rule::ModusPonens:
      return p.is(Connective::Implies) && eq(p.lhs(), q) && eq(p.rhs(), c);
    case Rule::ModusTollens:
      return p.is(Connective::Implies) && q.is(Connective::Not) && eq(p.rhs(), q.lhs()) &&
             eq(Formula::negation(p.lhs()), c);
    case Rule::UniversalModusPonens:
    case Rule::UniversalModusTollens: {
      auto [vars, body] = strip_universals(p);
      if (vars.empty() || !body.is(Connective::Implies)) return false;
      bool tollens = rule == Rule::UniversalModusTollens;
      if (tollens && !q.is(Connective::Not)) return false;
      return for_each_assignment(vars, constants, [&](const Substitution& s) {
        Formula inst = apply_subst(body, s);
        bool ok = tollens ? eq(inst.rhs(), q.lhs()) && eq(Formula::negation(inst.lhs()), c)
                          : eq(inst.lhs(), q) && eq(inst.rhs(), c);
        if (ok && out) *out = s;
        return ok;
      });
    }
    case Rule::ConjunctionIntro:
      return c.is(Connective::And) && eq(c, Formula::conjunction(p, q));
    case Rule::DisjunctiveSyllogism:
      if (!p.is(Connective::Or) || !q.is(Connective::Not)) return false;
      return (eq(p.lhs(), q.lhs()) && eq(p.rhs(), c)) || (eq(p.rhs(), q.lhs()) && eq(p.lhs(), c));
    case Rule::ContradictionIntro:
      return c.is(Connective::Falsum) && q.is(Connective::Not) && eq(q.lhs(), p);
    case Rule::Reductio:
      // p is the discharged assumption, q the derived ⊥.
      return q.is(Connective::Falsum) &&
             (eq(Formula::negation(p), c) || (p.is(Connective::Not) && eq(p.lhs(), c)));
    default:
      return false;
  }
}

bool check_one(Rule rule, const Formula& p, const Formula& c,
               const std::vector<std::string>& constants, Substitution* out) {
  switch (rule) {
    case Rule::ConjunctionIntro:
      return c.is(Connective::And) && eq(c.lhs(), p) && eq(c.rhs(), p);
    case Rule::ConjunctionElim:
      return p.is(Connective::And) && (eq(p.lhs(), c) || eq(p.rhs(), c));
    case Rule::DisjunctionIntro:
      return c.is(Connective::Or) && (eq(c.lhs(), p) || eq(c.rhs(), p));
    case Rule::DeMorgan:
      for (const auto& img : de_morgan_images(p)) {
        if (eq(img, c)) return true;
      }
      return false;
    case Rule::Contraposition: {
      auto cp = contrapositive(p);
      return cp && eq(*cp, c);
    }
    case Rule::UniversalInstantiation: {
      auto [vars, body] = strip_universals(p);
      for (std::size_t k = 1; k <= vars.size(); ++k) {
        std::vector<std::string> prefix(vars.begin(), vars.begin() + static_cast<long>(k));
        std::vector<std::string> rest(vars.begin() + static_cast<long>(k), vars.end());
        Formula inner = rewrap_universals(rest, body);
        bool ok = for_each_assignment(prefix, constants, [&](const Substitution& s) {
          bool hit = eq(apply_subst(inner, s), c);
          if (hit && out) *out = s;
          return hit;
        });
        if (ok) return true;
      }
      return false;
    }
    case Rule::ExistentialIntro: {
      if (!c.is(Connective::Exists)) return false;
      for (const auto& k : constants) {
        if (eq(instantiate(c.lhs(), c.name(), k), p)) {
          if (out) *out = {{c.name(), k}};
          return true;
        }
      }
      return false;
    }
    default:
      return false;
  }
}

}  // namespace

bool rule_instance_holds(Rule rule, std::span<const Formula> premises, const Formula& conclusion,
                         Substitution* subst) {
  std::vector<Formula> unique;
  std::set<std::string> seen;
  for (const auto& p : premises) {
    if (seen.insert(ac_key(p)).second) unique.push_back(p);
  }
  auto constants = constants_of(unique, conclusion);
  if (unique.size() == 1) return check_one(rule, unique[0], conclusion, constants, subst);
  if (unique.size() == 2) {
    return check_two(rule, unique[0], unique[1], conclusion, constants, subst) ||
           check_two(rule, unique[1], unique[0], conclusion, constants, subst);
  }
  return false;
}

std::optional<Rule> identify_rule(std::span<const Formula> premises, const Formula& conclusion) {
  for (Rule r : kAllRules) {
    if (r == Rule::Reductio) continue;
    if (rule_instance_holds(r, premises, conclusion)) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Forward generation

GenerationContext make_generation_context(std::span<const Formula> premises, const Formula& goal) {
  GenerationContext ctx;
  Signature sig;
  for (const auto& p : premises) collect_signature(p, sig);
  collect_signature(goal, sig);
  ctx.constants.assign(sig.constants.begin(), sig.constants.end());
  ctx.allow_contradiction = goal.is(Connective::Falsum);

  auto add_with_subformulas = [&](const Formula& f) {
    for (const auto& s : subformulas(f)) {
      if (is_closed(s)) ctx.intro_targets.emplace(ac_key(s), s);
    }
  };
  add_with_subformulas(goal);
  for (const auto& p : premises) {
    auto [vars, body] = strip_universals(p);
    if (!body.is(Connective::Implies)) continue;
    for_each_assignment(vars, ctx.constants, [&](const Substitution& s) {
      Formula inst = apply_subst(body, s);
      add_with_subformulas(inst.lhs());
      if (!vars.empty()) ctx.intro_targets.emplace(ac_key(inst), inst);
      return false;
    });
  }
  return ctx;
}

std::vector<RuleApplication> forward_applications(const std::vector<KeyedFormula>& available,
                                                  const GenerationContext& ctx) {
  std::unordered_set<std::string> have;
  for (const auto& k : available) have.insert(k.ac);
  std::unordered_set<std::string> emitted;
  std::vector<RuleApplication> out;

  auto emit = [&](Rule r, std::vector<Formula> premises, Formula conclusion, Substitution s = {}) {
    std::string k = ac_key(conclusion);
    if (have.count(k) || !emitted.insert(k).second) return;
    out.push_back({r, std::move(premises), std::move(conclusion), std::move(s)});
  };
  auto find = [&](const std::string& k) -> const KeyedFormula* {
    for (const auto& a : available) {
      if (a.ac == k) return &a;
    }
    return nullptr;
  };

  for (const auto& entry : available) {
    const Formula& f = entry.formula;
    switch (f.kind()) {
      case Connective::Implies: {
        if (auto* g = find(ac_key(f.lhs()))) emit(Rule::ModusPonens, {f, g->formula}, f.rhs());
        if (auto* g = find(ac_key(Formula::negation(f.rhs())))) {
          emit(Rule::ModusTollens, {f, g->formula}, Formula::negation(f.lhs()));
        }
        emit(Rule::Contraposition, {f}, *contrapositive(f));
        break;
      }
      case Connective::ForAll: {
        auto [vars, body] = strip_universals(f);
        if (body.is(Connective::Implies)) {
          for (const auto& g : available) {
            Substitution s;
            if (match(body.lhs(), g.formula, vars, s) && all_bound(body.rhs(), vars, s)) {
              emit(Rule::UniversalModusPonens, {f, g.formula}, apply_subst(body.rhs(), s), s);
            }
            Substitution t;
            if (g.formula.is(Connective::Not) && match(body.rhs(), g.formula.lhs(), vars, t) &&
                all_bound(body.lhs(), vars, t)) {
              emit(Rule::UniversalModusTollens, {f, g.formula},
                   Formula::negation(apply_subst(body.lhs(), t)), t);
            }
          }
          emit(Rule::Contraposition, {f}, *contrapositive(f));
        }
        for_each_assignment(vars, ctx.constants, [&](const Substitution& s) {
          Formula inst = apply_subst(body, s);
          // Instantiating a rule is only worthwhile when the instance itself is wanted.
          if (!body.is(Connective::Implies) || ctx.intro_targets.count(ac_key(inst))) {
            emit(Rule::UniversalInstantiation, {f}, inst, s);
          }
          return false;
        });
        break;
      }
      case Connective::And:
        emit(Rule::ConjunctionElim, {f}, f.lhs());
        emit(Rule::ConjunctionElim, {f}, f.rhs());
        break;
      case Connective::Or:
        if (auto* g = find(ac_key(Formula::negation(f.lhs())))) {
          emit(Rule::DisjunctiveSyllogism, {f, g->formula}, f.rhs());
        }
        if (auto* g = find(ac_key(Formula::negation(f.rhs())))) {
          emit(Rule::DisjunctiveSyllogism, {f, g->formula}, f.lhs());
        }
        break;
      default:
        break;
    }
    for (auto& img : de_morgan_images(f)) emit(Rule::DeMorgan, {f}, std::move(img));
  }

  for (const auto& [k, t] : ctx.intro_targets) {
    if (have.count(k)) continue;
    if (t.is(Connective::And)) {
      auto* a = find(ac_key(t.lhs()));
      auto* b = find(ac_key(t.rhs()));
      if (a && b) emit(Rule::ConjunctionIntro, {a->formula, b->formula}, t);
    } else if (t.is(Connective::Or)) {
      if (auto* a = find(ac_key(t.lhs()))) {
        emit(Rule::DisjunctionIntro, {a->formula}, t);
      } else if (auto* b = find(ac_key(t.rhs()))) {
        emit(Rule::DisjunctionIntro, {b->formula}, t);
      }
    } else if (t.is(Connective::Exists)) {
      for (const auto& c : ctx.constants) {
        if (auto* a = find(ac_key(instantiate(t.lhs(), t.name(), c)))) {
          emit(Rule::ExistentialIntro, {a->formula}, t, {{t.name(), c}});
          break;
        }
      }
    }
  }

  if (ctx.allow_contradiction) {
    for (const auto& entry : available) {
      if (!entry.formula.is(Connective::Not)) continue;
      if (auto* g = find(ac_key(entry.formula.lhs()))) {
        emit(Rule::ContradictionIntro, {g->formula, entry.formula}, Formula::falsum());
        break;
      }
    }
  }
  return out;
}

}  // namespace finelogic::logic
