#include "finelogic/logic/semantics.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace finelogic::logic {

// ---------------------------------------------------------------------------
// Generic Tarskian evaluation (used to verify any countermodel we report)

namespace {

std::size_t tuple_index(const std::vector<std::size_t>& tuple, std::size_t n) {
  std::size_t idx = 0;
  for (auto e : tuple) idx = idx * n + e;
  return idx;
}

bool eval_generic(const Interpretation& m, const Formula& f,
                  std::vector<std::pair<std::string, std::size_t>>& env) {
  switch (f.kind()) {
    case Connective::Falsum:
      return false;
    case Connective::Atom: {
      std::vector<std::size_t> tuple;
      for (const auto& t : f.args()) {
        if (t.is_variable()) {
          auto it = std::find_if(env.rbegin(), env.rend(),
                                 [&](const auto& b) { return b.first == t.name; });
          if (it == env.rend()) throw std::logic_error("free variable " + t.name);
          tuple.push_back(it->second);
        } else {
          auto c = m.constants.find(t.name);
          if (c == m.constants.end()) throw std::logic_error("uninterpreted constant " + t.name);
          tuple.push_back(c->second);
        }
      }
      return m.atom_holds(f.name(), tuple);
    }
    case Connective::Not:
      return !eval_generic(m, f.lhs(), env);
    case Connective::And:
      return eval_generic(m, f.lhs(), env) && eval_generic(m, f.rhs(), env);
    case Connective::Or:
      return eval_generic(m, f.lhs(), env) || eval_generic(m, f.rhs(), env);
    case Connective::Implies:
      return !eval_generic(m, f.lhs(), env) || eval_generic(m, f.rhs(), env);
    case Connective::ForAll:
    case Connective::Exists: {
      bool universal = f.is(Connective::ForAll);
      for (std::size_t e = 0; e < m.domain_size; ++e) {
        env.emplace_back(f.name(), e);
        bool v = eval_generic(m, f.lhs(), env);
        env.pop_back();
        if (universal && !v) return false;
        if (!universal && v) return true;
      }
      return universal;
    }
  }
  return false;
}

}  // namespace

bool Interpretation::atom_holds(const std::string& predicate,
                                const std::vector<std::size_t>& tuple) const {
  auto it = extensions.find(predicate);
  if (it == extensions.end()) return false;
  std::size_t idx = tuple_index(tuple, domain_size);
  return idx < it->second.size() && it->second[idx];
}

bool Interpretation::holds(const Formula& f) const {
  std::vector<std::pair<std::string, std::size_t>> env;
  return eval_generic(*this, f, env);
}

std::string Interpretation::describe() const {
  std::ostringstream os;
  os << "domain {";
  for (std::size_t e = 0; e < domain_size; ++e) os << (e ? "," : "") << 'd' << e;
  os << '}';
  for (const auto& [pred, bits] : extensions) {
    std::size_t arity = arities.count(pred) ? arities.at(pred) : 1;
    os << "; " << pred << "={";
    bool first = true;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i]) continue;
      if (!first) os << ',';
      first = false;
      if (arity == 0) {
        os << "true";
        continue;
      }
      std::vector<std::size_t> tuple(arity);
      std::size_t rem = i;
      for (std::size_t k = arity; k-- > 0;) {
        tuple[k] = rem % domain_size;
        rem /= domain_size;
      }
      if (arity > 1) os << '(';
      for (std::size_t k = 0; k < arity; ++k) os << (k ? "," : "") << 'd' << tuple[k];
      if (arity > 1) os << ')';
    }
    os << '}';
  }
  for (const auto& [c, e] : constants) os << "; " << c << "=d" << e;
  return os.str();
}

bool monadic_or_ground(std::span<const Formula> formulas) {
  Signature sig;
  for (const auto& f : formulas) collect_signature(f, sig);
  return sig.monadic() || !sig.quantified;
}

// ---------------------------------------------------------------------------
// Brute-force enumeration over a compiled representation

namespace {

struct CompiledSignature {
  std::vector<std::string> predicates;
  std::vector<std::size_t> arities;
  std::vector<std::string> constants;
};

// Flat node array; children referenced by index.
struct CNode {
  Connective op = Connective::Falsum;
  int pred = -1;
  // For atoms: term codes; >= 0 is a constant id, < 0 is -(binder depth + 1).
  std::vector<int> terms;
  int a = -1;
  int b = -1;
};

struct CompiledFormula {
  std::vector<CNode> nodes;
  int root = -1;
};

class Compiler {
 public:
  explicit Compiler(CompiledSignature& sig) : sig_(sig) {}

  CompiledFormula compile(const Formula& f) {
    CompiledFormula out;
    std::vector<std::string> binders;
    out.root = emit(f, out, binders);
    return out;
  }

 private:
  int pred_id(const std::string& name, std::size_t arity) {
    for (std::size_t i = 0; i < sig_.predicates.size(); ++i) {
      if (sig_.predicates[i] == name) return static_cast<int>(i);
    }
    sig_.predicates.push_back(name);
    sig_.arities.push_back(arity);
    return static_cast<int>(sig_.predicates.size() - 1);
  }

  int const_id(const std::string& name) {
    for (std::size_t i = 0; i < sig_.constants.size(); ++i) {
      if (sig_.constants[i] == name) return static_cast<int>(i);
    }
    sig_.constants.push_back(name);
    return static_cast<int>(sig_.constants.size() - 1);
  }

  int emit(const Formula& f, CompiledFormula& out, std::vector<std::string>& binders) {
    CNode n;
    n.op = f.kind();
    switch (f.kind()) {
      case Connective::Falsum:
        break;
      case Connective::Atom:
        n.pred = pred_id(f.name(), f.args().size());
        for (const auto& t : f.args()) {
          if (t.is_variable()) {
            int depth = -1;
            for (std::size_t i = binders.size(); i-- > 0;) {
              if (binders[i] == t.name) {
                depth = static_cast<int>(i);
                break;
              }
            }
            if (depth < 0) throw std::logic_error("free variable " + t.name);
            n.terms.push_back(-(depth + 1));
          } else {
            n.terms.push_back(const_id(t.name));
          }
        }
        break;
      case Connective::Not:
        n.a = emit(f.lhs(), out, binders);
        break;
      case Connective::ForAll:
      case Connective::Exists:
        binders.push_back(f.name());
        n.a = emit(f.lhs(), out, binders);
        binders.pop_back();
        break;
      default:
        n.a = emit(f.lhs(), out, binders);
        n.b = emit(f.rhs(), out, binders);
    }
    out.nodes.push_back(std::move(n));
    return static_cast<int>(out.nodes.size() - 1);
  }

  CompiledSignature& sig_;
};

struct Layout {
  std::size_t n = 1;
  std::vector<std::size_t> offsets;  // bit offset per predicate
  std::size_t bits = 0;
  std::uint64_t constant_assignments = 1;
};

Layout layout_for(const CompiledSignature& sig, std::size_t n) {
  Layout l;
  l.n = n;
  for (auto a : sig.arities) {
    l.offsets.push_back(l.bits);
    std::size_t cells = 1;
    for (std::size_t k = 0; k < a; ++k) cells *= n;
    l.bits += cells;
  }
  for (std::size_t i = 0; i < sig.constants.size(); ++i) l.constant_assignments *= n;
  return l;
}

struct Assignment {
  const Layout* layout;
  std::vector<std::size_t> consts;
  std::uint64_t bits;
};

bool eval_compiled(const CompiledFormula& f, int node, const Assignment& m,
                   std::vector<std::size_t>& env) {
  const CNode& n = f.nodes[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Connective::Falsum:
      return false;
    case Connective::Atom: {
      std::size_t idx = 0;
      for (int code : n.terms) {
        std::size_t e = code >= 0 ? m.consts[static_cast<std::size_t>(code)]
                                  : env[static_cast<std::size_t>(-code - 1)];
        idx = idx * m.layout->n + e;
      }
      std::size_t bit = m.layout->offsets[static_cast<std::size_t>(n.pred)] + idx;
      return (m.bits >> bit) & 1u;
    }
    case Connective::Not:
      return !eval_compiled(f, n.a, m, env);
    case Connective::And:
      return eval_compiled(f, n.a, m, env) && eval_compiled(f, n.b, m, env);
    case Connective::Or:
      return eval_compiled(f, n.a, m, env) || eval_compiled(f, n.b, m, env);
    case Connective::Implies:
      return !eval_compiled(f, n.a, m, env) || eval_compiled(f, n.b, m, env);
    case Connective::ForAll:
    case Connective::Exists: {
      bool universal = n.op == Connective::ForAll;
      for (std::size_t e = 0; e < m.layout->n; ++e) {
        env.push_back(e);
        bool v = eval_compiled(f, n.a, m, env);
        env.pop_back();
        if (universal != v) return v;
      }
      return universal;
    }
  }
  return false;
}

struct Problem {
  CompiledSignature sig;
  std::vector<CompiledFormula> premises;
  CompiledFormula conclusion;
};

Problem compile_problem(std::span<const Formula> premises, const Formula& conclusion) {
  Problem p;
  Compiler c(p.sig);
  for (const auto& f : premises) p.premises.push_back(c.compile(f));
  p.conclusion = c.compile(conclusion);
  return p;
}

Assignment decode(const Layout& l, std::size_t num_constants, std::uint64_t index) {
  Assignment a{&l, std::vector<std::size_t>(num_constants), 0};
  std::uint64_t predicate_space = l.bits >= 64 ? 0 : (std::uint64_t{1} << l.bits);
  a.bits = index % predicate_space;
  std::uint64_t rest = index / predicate_space;
  for (std::size_t i = 0; i < num_constants; ++i) {
    a.consts[i] = static_cast<std::size_t>(rest % l.n);
    rest /= l.n;
  }
  return a;
}

bool is_countermodel(const Problem& p, const Assignment& a) {
  std::vector<std::size_t> env;
  for (const auto& f : p.premises) {
    if (!eval_compiled(f, f.root, a, env)) return false;
  }
  return !eval_compiled(p.conclusion, p.conclusion.root, a, env);
}

Interpretation to_interpretation(const Problem& p, const Assignment& a) {
  Interpretation m;
  m.domain_size = a.layout->n;
  for (std::size_t i = 0; i < p.sig.constants.size(); ++i) m.constants[p.sig.constants[i]] = a.consts[i];
  for (std::size_t i = 0; i < p.sig.predicates.size(); ++i) {
    std::size_t cells = 1;
    for (std::size_t k = 0; k < p.sig.arities[i]; ++k) cells *= a.layout->n;
    std::vector<bool> ext(cells);
    for (std::size_t j = 0; j < cells; ++j) ext[j] = (a.bits >> (a.layout->offsets[i] + j)) & 1u;
    m.extensions[p.sig.predicates[i]] = std::move(ext);
    m.arities[p.sig.predicates[i]] = p.sig.arities[i];
  }
  return m;
}

// Interpretations per domain size, or nullopt when the total exceeds cap.
std::optional<std::vector<Layout>> plan(const Problem& p, int max_domain, std::uint64_t cap) {
  std::vector<Layout> layouts;
  std::uint64_t total = 0;
  for (int n = 1; n <= max_domain; ++n) {
    Layout l = layout_for(p.sig, static_cast<std::size_t>(n));
    if (l.bits >= 63) return std::nullopt;
    std::uint64_t space = std::uint64_t{1} << l.bits;
    if (l.constant_assignments > cap || space > cap / l.constant_assignments) return std::nullopt;
    total += space * l.constant_assignments;
    if (total > cap) return std::nullopt;
    layouts.push_back(l);
  }
  return layouts;
}

void check_domain(int max_domain) {
  if (max_domain < 1 || max_domain > 4) throw std::invalid_argument("max_domain must be in [1, 4]");
}

SemanticResult finish(bool conclusive_fragment, SemanticResult r) {
  if (r.countermodel) {
    r.outcome = SemanticOutcome::Countermodel;
  } else {
    r.outcome = conclusive_fragment ? SemanticOutcome::Entailed : SemanticOutcome::Inconclusive;
  }
  return r;
}

bool fragment_of(std::span<const Formula> premises, const Formula& conclusion) {
  std::vector<Formula> all(premises.begin(), premises.end());
  all.push_back(conclusion);
  return monadic_or_ground(all);
}

}  // namespace

SemanticResult semantic_entails_bruteforce(std::span<const Formula> premises,
                                           const Formula& conclusion, int max_domain,
                                           const BruteforceOptions& opts) {
  check_domain(max_domain);
  Problem p = compile_problem(premises, conclusion);
  SemanticResult r;
  auto layouts = plan(p, max_domain, opts.interpretation_cap);
  if (!layouts) {
    r.combinatorial_limit = true;
    return r;
  }
  for (const auto& l : *layouts) {
    std::uint64_t count = (std::uint64_t{1} << l.bits) * l.constant_assignments;
    for (std::uint64_t i = 0; i < count; ++i) {
      Assignment a = decode(l, p.sig.constants.size(), i);
      ++r.interpretations_checked;
      if (is_countermodel(p, a)) {
        r.countermodel = to_interpretation(p, a);
        return finish(true, std::move(r));
      }
    }
  }
  return finish(fragment_of(premises, conclusion), std::move(r));
}

SemanticResult semantic_entails_bruteforce_parallel(std::span<const Formula> premises,
                                                    const Formula& conclusion, int max_domain,
                                                    const BruteforceOptions& opts) {
  check_domain(max_domain);
  Problem p = compile_problem(premises, conclusion);
  SemanticResult r;
  auto layouts = plan(p, max_domain, opts.interpretation_cap);
  if (!layouts) {
    r.combinatorial_limit = true;
    return r;
  }
  constexpr std::int64_t kBlock = 4096;
  const std::size_t nconst = p.sig.constants.size();
  for (const auto& l : *layouts) {
    const auto count = static_cast<std::int64_t>((std::uint64_t{1} << l.bits) * l.constant_assignments);
    for (std::int64_t start = 0; start < count; start += kBlock) {
      const std::int64_t end = std::min(count, start + kBlock);
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
#pragma omp parallel for schedule(static) reduction(min : best)
      for (std::int64_t i = start; i < end; ++i) {
        Assignment a = decode(l, nconst, static_cast<std::uint64_t>(i));
        if (is_countermodel(p, a)) best = std::min(best, i);
      }
      if (best != std::numeric_limits<std::int64_t>::max()) {
        r.interpretations_checked += static_cast<std::uint64_t>(best - start + 1);
        r.countermodel = to_interpretation(p, decode(l, nconst, static_cast<std::uint64_t>(best)));
        return finish(true, std::move(r));
      }
      r.interpretations_checked += static_cast<std::uint64_t>(end - start);
    }
  }
  return finish(fragment_of(premises, conclusion), std::move(r));
}

// ---------------------------------------------------------------------------
// Grounding + DPLL countermodel search

namespace {

struct PNode {
  enum class Op { Var, Not, And, Or, True, False } op = Op::False;
  int var = -1;
  std::vector<int> kids;
};

enum class Tri : std::int8_t { False = 0, True = 1, Unset = 2 };

class Grounder {
 public:
  Grounder(std::size_t n, const std::map<std::string, std::size_t>& consts) : n_(n), consts_(consts) {}

  int ground(const Formula& f, std::vector<std::pair<std::string, std::size_t>>& env) {
    switch (f.kind()) {
      case Connective::Falsum:
        return add({PNode::Op::False, -1, {}});
      case Connective::Atom: {
        std::vector<std::size_t> tuple;
        for (const auto& t : f.args()) {
          if (t.is_variable()) {
            auto it = std::find_if(env.rbegin(), env.rend(),
                                   [&](const auto& b) { return b.first == t.name; });
            tuple.push_back(it->second);
          } else {
            tuple.push_back(consts_.at(t.name));
          }
        }
        auto key = std::make_pair(f.name(), tuple);
        auto [it, inserted] = atom_ids_.emplace(key, static_cast<int>(atoms_.size()));
        if (inserted) atoms_.push_back(key);
        arities_[f.name()] = tuple.size();
        return add({PNode::Op::Var, it->second, {}});
      }
      case Connective::Not:
        return add({PNode::Op::Not, -1, {ground(f.lhs(), env)}});
      case Connective::And:
        return add({PNode::Op::And, -1, {ground(f.lhs(), env), ground(f.rhs(), env)}});
      case Connective::Or:
        return add({PNode::Op::Or, -1, {ground(f.lhs(), env), ground(f.rhs(), env)}});
      case Connective::Implies: {
        int a = add({PNode::Op::Not, -1, {ground(f.lhs(), env)}});
        return add({PNode::Op::Or, -1, {a, ground(f.rhs(), env)}});
      }
      case Connective::ForAll:
      case Connective::Exists: {
        PNode node{f.is(Connective::ForAll) ? PNode::Op::And : PNode::Op::Or, -1, {}};
        for (std::size_t e = 0; e < n_; ++e) {
          env.emplace_back(f.name(), e);
          node.kids.push_back(ground(f.lhs(), env));
          env.pop_back();
        }
        return add(std::move(node));
      }
    }
    return -1;
  }

  Tri eval(int id, const std::vector<Tri>& vals) const {
    const PNode& p = nodes_[static_cast<std::size_t>(id)];
    switch (p.op) {
      case PNode::Op::True:
        return Tri::True;
      case PNode::Op::False:
        return Tri::False;
      case PNode::Op::Var:
        return vals[static_cast<std::size_t>(p.var)];
      case PNode::Op::Not: {
        Tri v = eval(p.kids[0], vals);
        return v == Tri::Unset ? v : (v == Tri::True ? Tri::False : Tri::True);
      }
      case PNode::Op::And: {
        bool unset = false;
        for (int k : p.kids) {
          Tri v = eval(k, vals);
          if (v == Tri::False) return Tri::False;
          unset |= v == Tri::Unset;
        }
        return unset ? Tri::Unset : Tri::True;
      }
      case PNode::Op::Or: {
        bool unset = false;
        for (int k : p.kids) {
          Tri v = eval(k, vals);
          if (v == Tri::True) return Tri::True;
          unset |= v == Tri::Unset;
        }
        return unset ? Tri::Unset : Tri::False;
      }
    }
    return Tri::Unset;
  }

  std::size_t num_atoms() const { return atoms_.size(); }
  const std::vector<std::pair<std::string, std::vector<std::size_t>>>& atoms() const { return atoms_; }
  const std::map<std::string, std::size_t>& arities() const { return arities_; }

 private:
  int add(PNode p) {
    nodes_.push_back(std::move(p));
    return static_cast<int>(nodes_.size() - 1);
  }

  std::size_t n_;
  const std::map<std::string, std::size_t>& consts_;
  std::vector<PNode> nodes_;
  std::map<std::pair<std::string, std::vector<std::size_t>>, int> atom_ids_;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> atoms_;
  std::map<std::string, std::size_t> arities_;
};

// Each constraint is (root, required value).
bool dpll(const Grounder& g, const std::vector<std::pair<int, bool>>& constraints,
          std::vector<Tri>& vals, std::size_t next) {
  bool all_met = true;
  for (const auto& [root, want] : constraints) {
    Tri v = g.eval(root, vals);
    if (v == Tri::Unset) {
      all_met = false;
      continue;
    }
    if ((v == Tri::True) != want) return false;
  }
  if (all_met) return true;
  if (next >= vals.size()) return false;
  for (Tri choice : {Tri::False, Tri::True}) {
    vals[next] = choice;
    if (dpll(g, constraints, vals, next + 1)) return true;
  }
  vals[next] = Tri::Unset;
  return false;
}

// Restricted-growth assignment of constants to elements: one representative
// per partition of the constants into at most n classes.
template <typename Fn>
bool for_each_constant_partition(std::size_t count, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> a(count, 0);
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == count) return fn(a);
    for (std::size_t e = 0; e <= std::min(used, n - 1); ++e) {
      a[i] = e;
      if (rec(i + 1, std::max(used, e + 1))) return true;
    }
    return false;
  };
  return rec(0, 0);
}

}  // namespace

std::optional<Interpretation> find_countermodel(std::span<const Formula> premises,
                                                const Formula& conclusion, int max_domain) {
  Signature sig;
  for (const auto& p : premises) collect_signature(p, sig);
  collect_signature(conclusion, sig);
  std::vector<std::string> constants(sig.constants.begin(), sig.constants.end());

  for (int dn = 1; dn <= max_domain; ++dn) {
    auto n = static_cast<std::size_t>(dn);
    std::optional<Interpretation> found;
    for_each_constant_partition(constants.size(), n, [&](const std::vector<std::size_t>& a) {
      std::map<std::string, std::size_t> cmap;
      for (std::size_t i = 0; i < constants.size(); ++i) cmap[constants[i]] = a[i];
      Grounder g(n, cmap);
      std::vector<std::pair<std::string, std::size_t>> env;
      std::vector<std::pair<int, bool>> constraints;
      for (const auto& p : premises) constraints.emplace_back(g.ground(p, env), true);
      constraints.emplace_back(g.ground(conclusion, env), false);
      std::vector<Tri> vals(g.num_atoms(), Tri::Unset);
      if (!dpll(g, constraints, vals, 0)) return false;

      Interpretation m;
      m.domain_size = n;
      m.constants = cmap;
      for (const auto& [pred, arity] : sig.predicates) {
        std::size_t cells = 1;
        for (std::size_t k = 0; k < arity; ++k) cells *= n;
        m.extensions[pred] = std::vector<bool>(cells, false);
        m.arities[pred] = arity;
      }
      for (std::size_t i = 0; i < g.num_atoms(); ++i) {
        if (vals[i] != Tri::True) continue;
        const auto& [pred, tuple] = g.atoms()[i];
        m.extensions[pred][tuple_index(tuple, n)] = true;
      }
      found = std::move(m);
      return true;
    });
    if (found) return found;
  }
  return std::nullopt;
}

}  // namespace finelogic::logic
