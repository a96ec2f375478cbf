#include "support/gold_generator.hpp"

#include <algorithm>

namespace finelogic::testing {

using logic::Formula;
using logic::Term;

namespace {

const char* kAdjectives[] = {"red",   "bright", "calm",  "quiet", "heavy", "round", "sharp", "warm",
                             "fresh", "green",  "proud", "brave", "shiny", "small", "tall",  "wide",
                             "soft",  "bitter", "noisy", "plain", "rapid", "rough", "solid", "vivid"};
const char* kDegrees[] = {"", "quite ", "rather ", "slightly "};
const char* kEntities[] = {"the lamp", "the otter", "the kettle", "the violin", "the harbor", "the comet"};

int pick(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
bool coin(std::mt19937_64& rng) { return pick(rng, 2) == 1; }

Formula atom(const std::string& p, const std::string& c) { return Formula::atom(p, {Term::constant(c)}); }
Formula rule(const std::string& p, const Formula& head) {
  auto x = Term::variable("x");
  auto body = Formula::atom(p, {x});
  return Formula::forall("x", Formula::implication(body, head));
}
Formula rule(const std::string& p, const std::string& q, bool negate = false) {
  auto head = Formula::atom(q, {Term::variable("x")});
  return rule(p, negate ? Formula::negation(head) : head);
}

struct Ref {
  int fact = -1;  // index into facts
  int step = -1;  // index into steps
};

enum class GKind { Given, Derive, Assume, Contra, Reductio };

struct GStep {
  GKind kind;
  std::vector<Ref> refs;
  Formula formula;
  bool terminal_hypothesis = false;
};

std::string render(const std::vector<GStep>& steps, const std::vector<std::string>& fact_labels) {
  std::vector<std::string> labels(steps.size());
  int next_int = 1;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    switch (steps[i].kind) {
      case GKind::Given:
        labels[i] = fact_labels[static_cast<std::size_t>(steps[i].refs[0].fact)];
        break;
      case GKind::Assume:
        labels[i] = "assump1";
        break;
      case GKind::Contra:
        labels[i] = "⊥";
        break;
      default:
        labels[i] = steps[i].terminal_hypothesis ? "hypothesis" : "int" + std::to_string(next_int++);
    }
  }
  auto ref = [&](const Ref& r) {
    if (r.fact >= 0) return fact_labels[static_cast<std::size_t>(r.fact)];
    return steps[static_cast<std::size_t>(r.step)].kind == GKind::Contra ? "Step " + std::to_string(r.step + 1)
                                                                        : labels[static_cast<std::size_t>(r.step)];
  };
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    std::string refs;
    for (std::size_t k = 0; k < s.refs.size(); ++k) refs += (k ? ", " : "") + ref(s.refs[k]);
    out += "Step " + std::to_string(i + 1) + ": ";
    switch (s.kind) {
      case GKind::Given:
        out += "We restate a given fact:\n";
        break;
      case GKind::Assume:
        out += "Assume for contradiction:\n";
        break;
      case GKind::Contra:
        out += "From " + refs + ", we derive a contradiction:\n⊥\n";
        continue;
      case GKind::Reductio:
        out += "By reductio ad absurdum from " + refs + ":\n";
        break;
      case GKind::Derive:
        out += "From " + refs + ", we derive:\n";
        break;
    }
    out += labels[i] + ": " + logic::print_formula(s.formula) + "\n";
  }
  return out;
}

}  // namespace

sft::GoldProblem random_gold(std::mt19937_64& rng, const GoldOptions& o, const std::string& id) {
  using bench::Label;
  int d = std::max(0, o.depth);
  // predicate names in a random order so readings vary per problem
  std::vector<int> order(96);
  for (int i = 0; i < 96; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  sft::Glossary glossary;
  int npred = 0;
  auto new_pred = [&] {
    std::string name = "P" + std::to_string(npred);
    int r = order[static_cast<std::size_t>(npred++)];
    glossary.predicates[name] = std::string("x is ") + kDegrees[r / 24] + kAdjectives[r % 24];
    return name;
  };
  int e1 = pick(rng, 6);
  int e2 = (e1 + 1 + pick(rng, 5)) % 6;
  glossary.constants["c1"] = kEntities[e1];
  glossary.constants["c2"] = kEntities[e2];

  std::vector<Formula> facts;
  std::vector<GStep> steps;
  auto add_fact = [&](Formula f) {
    facts.push_back(std::move(f));
    return Ref{static_cast<int>(facts.size()) - 1, -1};
  };
  auto add_step = [&](GStep s) {
    steps.push_back(std::move(s));
    return Ref{-1, static_cast<int>(steps.size()) - 1};
  };

  std::vector<std::string> chain{new_pred()};
  for (int i = 0; i < d; ++i) chain.push_back(new_pred());
  Formula hypothesis = atom(chain.back(), "c1");

  if (o.label == Label::Unknown) {
    // one link of the chain is missing, so only a prefix is derivable
    int gap = d == 0 ? 0 : 1 + pick(rng, d);
    Ref cur = add_fact(atom(chain[0], "c1"));
    std::vector<Ref> rules(static_cast<std::size_t>(d + 1));
    for (int i = 1; i <= d; ++i) {
      if (i != gap) rules[static_cast<std::size_t>(i)] = add_fact(rule(chain[static_cast<std::size_t>(i - 1)], chain[static_cast<std::size_t>(i)]));
    }
    if (d == 0) hypothesis = atom(new_pred(), "c1");
    for (int i = 1; i < gap; ++i) {
      cur = add_step({GKind::Derive, {rules[static_cast<std::size_t>(i)], cur}, atom(chain[static_cast<std::size_t>(i)], "c1")});
    }
  } else if (d == 0) {
    Formula f = o.label == Label::T ? hypothesis : Formula::negation(hypothesis);
    Ref r = add_fact(f);
    add_step({GKind::Given, {r}, f});
  } else if (o.label == Label::F && o.reductio) {
    // derive the second-to-last link, then refute the hypothesis by contradiction
    Ref cur = add_fact(atom(chain[0], "c1"));
    for (int i = 1; i < d; ++i) {
      Ref r = add_fact(rule(chain[static_cast<std::size_t>(i - 1)], chain[static_cast<std::size_t>(i)]));
      cur = add_step({GKind::Derive, {r, cur}, atom(chain[static_cast<std::size_t>(i)], "c1")});
    }
    Ref clash = add_fact(rule(chain.back(), chain[static_cast<std::size_t>(d - 1)], true));
    Ref a = add_step({GKind::Assume, {}, hypothesis});
    Ref neg = add_step({GKind::Derive, {clash, a}, Formula::negation(atom(chain[static_cast<std::size_t>(d - 1)], "c1"))});
    Ref bot = add_step({GKind::Contra, {cur, neg}, Formula::falsum()});
    add_step({GKind::Reductio, {bot}, Formula::negation(hypothesis)});
  } else {
    Ref cur = add_fact(atom(chain[0], "c1"));
    for (int i = 1; i <= d; ++i) {
      bool last = i == d;
      Ref r = add_fact(rule(chain[static_cast<std::size_t>(i - 1)], chain[static_cast<std::size_t>(i)], last && o.label == Label::F));
      Formula f = atom(chain[static_cast<std::size_t>(i)], "c1");
      if (last && o.label == Label::F) f = Formula::negation(f);
      GStep s{GKind::Derive, {r, cur}, f};
      s.terminal_hypothesis = last && o.label == Label::T;
      cur = add_step(std::move(s));
    }
  }

  if (o.redundant && !steps.empty() && steps.back().kind != GKind::Given) {
    std::string p = new_pred(), q = new_pred();
    Ref base = add_fact(atom(p, "c2"));
    Ref r = add_fact(rule(p, q));
    // placed before the terminal step, outside any assumption block
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
      if (steps[i].kind == GKind::Assume) break;
      at = i + 1;
    }
    at = static_cast<std::size_t>(pick(rng, static_cast<int>(at) + 1));
    for (auto& s : steps) {
      for (auto& ref : s.refs) {
        if (ref.step >= static_cast<int>(at)) ++ref.step;
      }
    }
    steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(at), GStep{GKind::Derive, {r, base}, atom(q, "c2")});
  }
  if (o.distractors) {
    std::string p = new_pred(), q = new_pred();
    add_fact(atom(p, "c2"));
    add_fact(rule(q, chain[0]));
  }

  // shuffle fact order, then label
  std::vector<int> perm(facts.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::string> fact_labels(facts.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos) fact_labels[static_cast<std::size_t>(perm[pos])] = "fact" + std::to_string(pos + 1);

  bench::Problem p;
  p.id = id;
  p.dataset = o.dataset;
  p.label = o.label;
  p.depth = d;
  for (int idx : perm) {
    const auto& f = facts[static_cast<std::size_t>(idx)];
    std::string text = sft::read_formula(f, glossary);
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    p.facts.push_back(text + ".");
    p.facts_formula.push_back(logic::print_formula(f));
  }
  std::string h = sft::read_formula(hypothesis, glossary);
  h[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(h[0])));
  p.hypothesis = h + ".";
  p.hypothesis_formula = logic::print_formula(hypothesis);

  std::string text = render(steps, fact_labels);
  proof::ParseOptions opts;
  opts.problem_id = id;
  opts.facts = p.given_facts();
  auto chain_parsed = proof::parse_proof(text, opts);
  chain_parsed.final_label = bench::answer_for(o.label);
  p.gold_proof = std::move(chain_parsed);
  return {std::move(p), std::move(glossary)};
}

sft::GoldProblem random_gold(std::mt19937_64& rng, bench::DatasetKind dataset, int depth, bench::Label label,
                             const std::string& id) {
  GoldOptions o;
  o.dataset = dataset;
  o.depth = depth;
  o.label = label;
  o.redundant = pick(rng, 3) == 0;
  o.distractors = coin(rng);
  o.reductio = label == bench::Label::F && coin(rng);
  return random_gold(rng, o, id);
}

std::vector<sft::GoldProblem> gold_pool(std::uint64_t seed, bench::DatasetKind dataset, int max_depth,
                                        std::size_t per_depth, std::size_t unknown) {
  std::mt19937_64 rng(seed);
  std::vector<sft::GoldProblem> out;
  char buf[32];
  for (int d = 0; d <= max_depth; ++d) {
    for (std::size_t i = 0; i < per_depth; ++i) {
      std::snprintf(buf, sizeof buf, "g%02d_%05zu", d, i);
      out.push_back(random_gold(rng, dataset, d, coin(rng) ? bench::Label::T : bench::Label::F, buf));
    }
  }
  for (std::size_t i = 0; i < unknown; ++i) {
    std::snprintf(buf, sizeof buf, "u_%05zu", i);
    out.push_back(random_gold(rng, dataset, pick(rng, max_depth + 1), bench::Label::Unknown, buf));
  }
  return out;
}

}  // namespace finelogic::testing
