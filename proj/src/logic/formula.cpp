#include "finelogic/logic/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <utility>

namespace finelogic::logic {

struct Formula::Node {
  Connective kind = Connective::Falsum;
  std::string name;
  std::vector<Term> args;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

const std::shared_ptr<const Formula::Node>& falsum_node() {
  static const auto node = std::make_shared<const Formula::Node>();
  return node;
}

const std::vector<Term>& no_args() {
  static const std::vector<Term> empty;
  return empty;
}

}  // namespace

Formula::Formula() : node_(falsum_node()) {}

Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Connective::Atom;
  n->name = std::move(predicate);
  n->args = std::move(args);
  return Formula(std::move(n));
}

Formula Formula::negation(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = Connective::Not;
  n->a = std::move(f.node_);
  return Formula(std::move(n));
}

namespace {
template <typename NodeT>
std::shared_ptr<NodeT> binary_node(Connective kind, std::shared_ptr<const NodeT> a,
                                   std::shared_ptr<const NodeT> b) {
  auto n = std::make_shared<NodeT>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
}  // namespace

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(binary_node<Node>(Connective::And, std::move(lhs.node_), std::move(rhs.node_)));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return Formula(binary_node<Node>(Connective::Or, std::move(lhs.node_), std::move(rhs.node_)));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return Formula(binary_node<Node>(Connective::Implies, std::move(lhs.node_), std::move(rhs.node_)));
}

Formula Formula::forall(std::string var, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Connective::ForAll;
  n->name = std::move(var);
  n->a = std::move(body.node_);
  return Formula(std::move(n));
}

Formula Formula::exists(std::string var, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Connective::Exists;
  n->name = std::move(var);
  n->a = std::move(body.node_);
  return Formula(std::move(n));
}

Formula Formula::falsum() { return Formula(); }

Connective Formula::kind() const { return node_->kind; }

bool Formula::is_binary() const {
  auto k = kind();
  return k == Connective::And || k == Connective::Or || k == Connective::Implies;
}

bool Formula::is_quantifier() const {
  return kind() == Connective::ForAll || kind() == Connective::Exists;
}

const std::string& Formula::name() const { return node_->name; }

const std::vector<Term>& Formula::args() const {
  return node_->kind == Connective::Atom ? node_->args : no_args();
}

Formula Formula::lhs() const { return node_->a ? Formula(node_->a) : Formula(); }
Formula Formula::rhs() const { return node_->b ? Formula(node_->b) : Formula(); }

bool Formula::identical(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Connective::Falsum:
      return true;
    case Connective::Atom:
      return name() == other.name() && args() == other.args();
    case Connective::Not:
      return lhs().identical(other.lhs());
    case Connective::ForAll:
    case Connective::Exists:
      return name() == other.name() && lhs().identical(other.lhs());
    default:
      return lhs().identical(other.lhs()) && rhs().identical(other.rhs());
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr std::string_view kNot = "¬";
constexpr std::string_view kAnd = "∧";
constexpr std::string_view kOr = "∨";
constexpr std::string_view kImplies = "→";
constexpr std::string_view kForAll = "∀";
constexpr std::string_view kExists = "∃";
constexpr std::string_view kFalsum = "⊥";

int precedence(Connective c) {
  switch (c) {
    case Connective::Implies:
      return 1;
    case Connective::Or:
      return 2;
    case Connective::And:
      return 3;
    default:
      return 4;
  }
}

// A formula whose rightmost component is an unparenthesized quantifier
// would swallow anything that follows it.
bool ends_in_quantifier(const Formula& f) {
  if (f.is_quantifier()) return true;
  if (f.is(Connective::Not)) return ends_in_quantifier(f.lhs());
  return false;
}

bool needs_parens(Connective parent, const Formula& child, bool left) {
  if (ends_in_quantifier(child)) return true;
  if (!child.is_binary()) return false;
  int pp = precedence(parent);
  int cp = precedence(child.kind());
  if (cp < pp) return true;
  if (cp > pp) return false;
  if (parent == Connective::Implies) return left;
  return !left;
}

// Variable display names: either the raw name or a de Bruijn level.
struct PrintContext {
  bool de_bruijn = false;
  bool sort_ac = false;
  std::vector<std::string> binders;  // innermost last
};

std::string term_text(const Term& t, const PrintContext& ctx) {
  if (!ctx.de_bruijn || !t.is_variable()) return t.name;
  for (std::size_t i = ctx.binders.size(); i-- > 0;) {
    if (ctx.binders[i] == t.name) return "#" + std::to_string(i);
  }
  return t.name;
}

void print_into(const Formula& f, PrintContext& ctx, std::string& out);

std::string printed(const Formula& f, PrintContext& ctx) {
  std::string s;
  print_into(f, ctx, s);
  return s;
}

void print_into(const Formula& f, PrintContext& ctx, std::string& out) {
  switch (f.kind()) {
    case Connective::Falsum:
      out += kFalsum;
      return;
    case Connective::Atom: {
      out += f.name();
      if (!f.args().empty()) {
        out += '(';
        for (std::size_t i = 0; i < f.args().size(); ++i) {
          if (i) out += ',';
          out += term_text(f.args()[i], ctx);
        }
        out += ')';
      }
      return;
    }
    case Connective::Not: {
      out += kNot;
      Formula c = f.lhs();
      bool wrap = c.is_binary();
      if (wrap) out += '(';
      print_into(c, ctx, out);
      if (wrap) out += ')';
      return;
    }
    case Connective::ForAll:
    case Connective::Exists: {
      out += f.is(Connective::ForAll) ? kForAll : kExists;
      ctx.binders.push_back(f.name());
      out += ctx.de_bruijn ? "#" + std::to_string(ctx.binders.size() - 1) : f.name();
      out += ' ';
      Formula body = f.lhs();
      bool wrap = body.is_binary();
      if (wrap) out += '(';
      print_into(body, ctx, out);
      if (wrap) out += ')';
      ctx.binders.pop_back();
      return;
    }
    default:
      break;
  }
  std::string_view op = f.is(Connective::And) ? kAnd : f.is(Connective::Or) ? kOr : kImplies;
  Formula l = f.lhs();
  Formula r = f.rhs();
  bool wl = needs_parens(f.kind(), l, true);
  bool wr = needs_parens(f.kind(), r, false);
  if (ctx.sort_ac) {
    // position-independent so that swapped operands print alike
    wl = l.is_binary() || ends_in_quantifier(l);
    wr = r.is_binary() || ends_in_quantifier(r);
  }
  std::string ls = printed(l, ctx);
  std::string rs = printed(r, ctx);
  if (wl) ls = "(" + ls + ")";
  if (wr) rs = "(" + rs + ")";
  if (ctx.sort_ac && !f.is(Connective::Implies) && rs < ls) std::swap(ls, rs);
  out += ls;
  out += ' ';
  out += op;
  out += ' ';
  out += rs;
}

}  // namespace

std::string print_formula(const Formula& f) {
  PrintContext ctx;
  return printed(f, ctx);
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  PrintContext ca;
  ca.de_bruijn = true;
  PrintContext cb = ca;
  return printed(a, ca) == printed(b, cb);
}

std::string key(const Formula& f) { return print_formula(normalize(f)); }

std::string ac_key(const Formula& f) {
  PrintContext ctx;
  ctx.de_bruijn = true;
  ctx.sort_ac = true;
  return printed(f, ctx);
}

bool equivalent_ac(const Formula& a, const Formula& b) { return ac_key(a) == ac_key(b); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Name, LParen, RParen, Comma, Not, And, Or, Implies, ForAll, Exists, Falsum, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t offset = 0;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.offset = pos_;
    if (pos_ >= src_.size()) return t;
    auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static constexpr Sym syms[] = {
        {kNot, Tok::Not},       {kAnd, Tok::And},       {kOr, Tok::Or},
        {kImplies, Tok::Implies}, {kForAll, Tok::ForAll}, {kExists, Tok::Exists},
        {kFalsum, Tok::Falsum}, {"->", Tok::Implies},   {"~", Tok::Not},
        {"&", Tok::And},        {"|", Tok::Or},         {"(", Tok::LParen},
        {")", Tok::RParen},     {",", Tok::Comma},
    };
    for (const auto& s : syms) {
      if (starts(s.text)) {
        t.kind = s.kind;
        t.text = std::string(s.text);
        pos_ += s.text.size();
        return t;
      }
    }
    if (is_name_char(src_[pos_])) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
      t.text = std::string(src_.substr(start, pos_ - start));
      // ASCII quantifier: "Ax." / "Ex."
      if (pos_ < src_.size() && src_[pos_] == '.' && t.text.size() >= 2 &&
          (t.text[0] == 'A' || t.text[0] == 'E')) {
        t.kind = t.text[0] == 'A' ? Tok::ForAll : Tok::Exists;
        t.text = t.text.substr(1);
        ++pos_;
        return t;
      }
      t.kind = Tok::Name;
      return t;
    }
    throw SyntaxError(pos_, "unexpected character");
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, ArityTable& arities) : lexer_(src), arities_(arities) {
    advance();
  }

  Formula parse() {
    Formula f = implication();
    if (cur_.kind != Tok::End) throw SyntaxError(cur_.offset, "trailing input '" + cur_.text + "'");
    return f;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) throw SyntaxError(cur_.offset, std::string("expected ") + what);
    advance();
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (cur_.kind == Tok::Implies) {
      advance();
      return Formula::implication(lhs, implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (cur_.kind == Tok::Or) {
      advance();
      f = Formula::disjunction(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = negation();
    while (cur_.kind == Tok::And) {
      advance();
      f = Formula::conjunction(f, negation());
    }
    return f;
  }

  Formula negation() {
    switch (cur_.kind) {
      case Tok::Not:
        advance();
        return Formula::negation(negation());
      case Tok::Falsum:
        advance();
        return Formula::falsum();
      case Tok::LParen: {
        advance();
        Formula f = implication();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::ForAll:
      case Tok::Exists:
        return quantified();
      case Tok::Name:
        return atom();
      case Tok::End:
        throw SyntaxError(cur_.offset, "unexpected end of input");
      default:
        throw SyntaxError(cur_.offset, "unexpected '" + cur_.text + "'");
    }
  }

  Formula quantified() {
    bool universal = cur_.kind == Tok::ForAll;
    std::string var;
    if (!cur_.text.empty() && cur_.text != "∀" && cur_.text != "∃") {
      var = cur_.text;  // ASCII form carries the variable
      advance();
    } else {
      advance();
      if (cur_.kind != Tok::Name) throw SyntaxError(cur_.offset, "expected bound variable");
      var = cur_.text;
      advance();
    }
    scope_.push_back(var);
    Formula body = implication();
    scope_.pop_back();
    return universal ? Formula::forall(var, body) : Formula::exists(var, body);
  }

  Formula atom() {
    std::string pred = cur_.text;
    std::size_t at = cur_.offset;
    advance();
    std::vector<Term> args;
    if (cur_.kind == Tok::LParen) {
      advance();
      while (true) {
        if (cur_.kind != Tok::Name) throw SyntaxError(cur_.offset, "expected term");
        bool bound = std::find(scope_.begin(), scope_.end(), cur_.text) != scope_.end();
        args.push_back(bound ? Term::variable(cur_.text) : Term::constant(cur_.text));
        advance();
        if (cur_.kind == Tok::Comma) {
          advance();
          continue;
        }
        expect(Tok::RParen, "')' or ','");
        break;
      }
    }
    auto [it, inserted] = arities_.emplace(pred, args.size());
    if (!inserted && it->second != args.size()) {
      (void)at;
      throw ArityError(pred, it->second, args.size());
    }
    return Formula::atom(std::move(pred), std::move(args));
  }

  Lexer lexer_;
  ArityTable& arities_;
  Token cur_;
  std::vector<std::string> scope_;
};

}  // namespace

Formula parse_formula(std::string_view text, ArityTable& arities) {
  Parser p(text, arities);
  return p.parse();
}

Formula parse_formula(std::string_view text) {
  ArityTable arities;
  return parse_formula(text, arities);
}

std::vector<Formula> parse_formulas(const std::vector<std::string>& texts) {
  ArityTable arities;
  std::vector<Formula> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(parse_formula(t, arities));
  return out;
}

// ---------------------------------------------------------------------------
// Transformations

namespace {

Formula rename_bound(const Formula& f, std::vector<std::pair<std::string, std::string>>& scope,
                     std::size_t& counter) {
  switch (f.kind()) {
    case Connective::Falsum:
      return f;
    case Connective::Atom: {
      std::vector<Term> args = f.args();
      for (auto& t : args) {
        if (!t.is_variable()) continue;
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
          if (it->first == t.name) {
            t.name = it->second;
            break;
          }
        }
      }
      return Formula::atom(f.name(), std::move(args));
    }
    case Connective::Not:
      return Formula::negation(rename_bound(f.lhs(), scope, counter));
    case Connective::ForAll:
    case Connective::Exists: {
      std::string fresh = "x" + std::to_string(++counter);
      scope.emplace_back(f.name(), fresh);
      Formula body = rename_bound(f.lhs(), scope, counter);
      scope.pop_back();
      return f.is(Connective::ForAll) ? Formula::forall(fresh, body) : Formula::exists(fresh, body);
    }
    case Connective::And: {
      Formula l = rename_bound(f.lhs(), scope, counter);
      return Formula::conjunction(l, rename_bound(f.rhs(), scope, counter));
    }
    case Connective::Or: {
      Formula l = rename_bound(f.lhs(), scope, counter);
      return Formula::disjunction(l, rename_bound(f.rhs(), scope, counter));
    }
    case Connective::Implies: {
      Formula l = rename_bound(f.lhs(), scope, counter);
      return Formula::implication(l, rename_bound(f.rhs(), scope, counter));
    }
  }
  return f;
}

template <typename TermFn>
Formula map_terms(const Formula& f, const TermFn& fn, std::vector<std::string>& bound) {
  switch (f.kind()) {
    case Connective::Falsum:
      return f;
    case Connective::Atom: {
      std::vector<Term> args = f.args();
      bool changed = false;
      for (auto& t : args) changed |= fn(t, bound);
      return changed ? Formula::atom(f.name(), std::move(args)) : f;
    }
    case Connective::Not:
      return Formula::negation(map_terms(f.lhs(), fn, bound));
    case Connective::ForAll:
    case Connective::Exists: {
      bound.push_back(f.name());
      Formula body = map_terms(f.lhs(), fn, bound);
      bound.pop_back();
      return f.is(Connective::ForAll) ? Formula::forall(f.name(), body)
                                      : Formula::exists(f.name(), body);
    }
    case Connective::And:
      return Formula::conjunction(map_terms(f.lhs(), fn, bound), map_terms(f.rhs(), fn, bound));
    case Connective::Or:
      return Formula::disjunction(map_terms(f.lhs(), fn, bound), map_terms(f.rhs(), fn, bound));
    case Connective::Implies:
      return Formula::implication(map_terms(f.lhs(), fn, bound), map_terms(f.rhs(), fn, bound));
  }
  return f;
}

}  // namespace

Formula normalize(const Formula& f) {
  std::vector<std::pair<std::string, std::string>> scope;
  std::size_t counter = 0;
  return rename_bound(f, scope, counter);
}

Formula instantiate(const Formula& f, const std::string& var, const std::string& constant) {
  std::vector<std::string> bound;
  auto fn = [&](Term& t, const std::vector<std::string>& b) {
    if (!t.is_variable() || t.name != var) return false;
    if (std::find(b.begin(), b.end(), var) != b.end()) return false;
    t = Term::constant(constant);
    return true;
  };
  return map_terms(f, fn, bound);
}

Formula abstract_constant(const Formula& f, const std::string& constant, const std::string& var) {
  std::vector<std::string> bound;
  auto fn = [&](Term& t, const std::vector<std::string>&) {
    if (t.is_variable() || t.name != constant) return false;
    t = Term::variable(var);
    return true;
  };
  return map_terms(f, fn, bound);
}

std::size_t Signature::max_arity() const {
  std::size_t m = 0;
  for (const auto& [_, a] : predicates) m = std::max(m, a);
  return m;
}

void collect_signature(const Formula& f, Signature& sig) {
  switch (f.kind()) {
    case Connective::Falsum:
      return;
    case Connective::Atom:
      sig.predicates.emplace(f.name(), f.args().size());
      for (const auto& t : f.args()) {
        if (!t.is_variable()) sig.constants.insert(t.name);
      }
      return;
    case Connective::ForAll:
    case Connective::Exists:
      sig.quantified = true;
      collect_signature(f.lhs(), sig);
      return;
    case Connective::Not:
      collect_signature(f.lhs(), sig);
      return;
    default:
      collect_signature(f.lhs(), sig);
      collect_signature(f.rhs(), sig);
  }
}

Signature signature_of(const std::vector<Formula>& fs) {
  Signature sig;
  for (const auto& f : fs) collect_signature(f, sig);
  return sig;
}

namespace {
void free_vars_into(const Formula& f, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Connective::Falsum:
      return;
    case Connective::Atom:
      for (const auto& t : f.args()) {
        if (t.is_variable() && std::find(bound.begin(), bound.end(), t.name) == bound.end()) {
          out.insert(t.name);
        }
      }
      return;
    case Connective::ForAll:
    case Connective::Exists:
      bound.push_back(f.name());
      free_vars_into(f.lhs(), bound, out);
      bound.pop_back();
      return;
    case Connective::Not:
      free_vars_into(f.lhs(), bound, out);
      return;
    default:
      free_vars_into(f.lhs(), bound, out);
      free_vars_into(f.rhs(), bound, out);
  }
}
}  // namespace

std::set<std::string> free_variables(const Formula& f) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  free_vars_into(f, bound, out);
  return out;
}

bool is_closed(const Formula& f) { return free_variables(f).empty(); }

std::size_t formula_depth(const Formula& f) {
  switch (f.kind()) {
    case Connective::Falsum:
    case Connective::Atom:
      return 0;
    case Connective::Not:
    case Connective::ForAll:
    case Connective::Exists:
      return 1 + formula_depth(f.lhs());
    default:
      return 1 + std::max(formula_depth(f.lhs()), formula_depth(f.rhs()));
  }
}

std::vector<Formula> subformulas(const Formula& f) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    out.push_back(g);
    if (g.is(Connective::Atom) || g.is(Connective::Falsum)) return;
    walk(g.lhs());
    if (g.is_binary()) walk(g.rhs());
  };
  walk(f);
  return out;
}

}  // namespace finelogic::logic
