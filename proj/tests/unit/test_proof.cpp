#include <random>
#include <set>

#include "doctest.h"
#include "finelogic/proof/chain.hpp"
#include "support/proof_generators.hpp"

using namespace finelogic::proof;
using finelogic::logic::parse_formula;

namespace {

bool has_reason(const ProofChain& c, int ordinal, std::string_view fragment) {
  for (const auto& m : c.malformed) {
    if (m.ordinal == ordinal && m.reason.find(fragment) != std::string::npos) return true;
  }
  return false;
}

const char* kReductioChain =
    "fact1: ∀x (A(x) → B(x))\n"
    "fact2: ¬B(b)\n"
    "fact3: C(a)\n"
    "Step 1: Assume for contradiction:\n"
    "assump1: A(b)\n"
    "Step 2: From fact1, assump1, we derive:\n"
    "int1: B(b)\n"
    "Step 3: Contradiction:\n"
    "From int1 and fact2\n"
    "⊥\n"
    "Step 4: By reductio ad absurdum from Step 3:\n"
    "int2: ¬A(b)\n"
    "Step 5: From int2, fact3, we derive:\n"
    "hypothesis: ¬A(b) ∧ C(a)\n"
    "Final conclusion: __PROVED__\n";

}  // namespace

TEST_CASE("strip_preamble keeps what follows the last answer tag") {
  CHECK(strip_preamble("<think>maybe…</think>Step 1: …", "</think>") == "Step 1: …");
  CHECK(strip_preamble("no tag here", "</think>") == "no tag here");
  CHECK(strip_preamble("a</think>b</think>c", "</think>") == "c");
  CHECK(strip_preamble("x</think>") == "");
}

TEST_CASE("extract_answer: last well-formed marker wins") {
  CHECK(extract_answer("…Final conclusion: __PROVED__") == Answer::Proved);
  CHECK(extract_answer("…__PROVED__ … wait … __DISPROVED__") == Answer::Disproved);
  CHECK(extract_answer("no marker") == Answer::None);
  CHECK(extract_answer("__UNKNOWN__") == Answer::Unknown);
  CHECK(extract_answer("___PROVED__") == Answer::None);
  CHECK(extract_answer("__PROVED___") == Answer::None);
  CHECK(extract_answer("_PROVED_") == Answer::None);
  CHECK(extract_answer("__DISPROVED__ then __PROVED__") == Answer::Proved);
}

TEST_CASE("property: extract_answer ignores appended non-marker text") {
  std::mt19937_64 rng(3);
  const char* bases[] = {"x __PROVED__", "__DISPROVED__", "none", "__UNKNOWN__ y __PROVED__"};
  for (int i = 0; i < 500; ++i) {
    std::string base = bases[i % 4];
    std::string tail = finelogic::testing::random_noise(rng, 1 + static_cast<std::size_t>(i % 40));
    // strip anything that could form a marker
    std::string clean;
    for (char c : tail) clean += c == '_' ? '-' : c;
    CHECK(extract_answer(base + " " + clean) == extract_answer(base));
  }
}

TEST_CASE("parse_proof: derivation step with two premises") {
  auto c = parse_proof("Step 1: From fact1, fact2, we derive:\nint1: B(a)", Dialect::Symbolic);
  REQUIRE(c.steps.size() == 1);
  CHECK_FALSE(c.is_malformed());
  const auto& s = c.steps[0];
  CHECK(s.kind == StepKind::Derivation);
  CHECK(s.label == "int1");
  CHECK(s.premises == std::vector<std::string>{"fact1", "fact2"});
  CHECK(s.premise_ordinals == std::vector<int>{0, 0});
  CHECK(s.formula->identical(parse_formula("B(a)")));
}

TEST_CASE("parse_proof: assumption step") {
  auto c = parse_proof("Step 1: Assume for contradiction:\nassump1: A(b)", Dialect::Symbolic);
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].kind == StepKind::Assumption);
  CHECK(c.steps[0].label == "assump1");
  // the block is never closed
  CHECK(has_reason(c, 1, "never discharged"));
}

TEST_CASE("parse_proof: empty input is an empty well-formed chain") {
  auto c = parse_proof("", Dialect::Symbolic);
  CHECK(c.steps.empty());
  CHECK_FALSE(c.is_malformed());
  CHECK_FALSE(c.final_label);
}

TEST_CASE("parse_proof: reductio chain with preamble facts") {
  auto c = parse_proof(kReductioChain, Dialect::Symbolic);
  CHECK_FALSE(c.is_malformed());
  REQUIRE(c.steps.size() == 5);
  CHECK(c.facts.size() == 3);
  CHECK(c.final_label == Answer::Proved);
  CHECK(c.steps[2].kind == StepKind::Contradiction);
  CHECK(c.steps[2].label == "⊥");
  CHECK(c.steps[2].premises == std::vector<std::string>{"int1", "fact2"});
  const auto& d = c.steps[3];
  CHECK(d.kind == StepKind::ReductioDischarge);
  CHECK(d.premises == std::vector<std::string>{"⊥", "assump1"});
  CHECK(d.premise_ordinals == std::vector<int>{3, 1});
  CHECK(c.steps[4].kind == StepKind::FinalConclusion);
  CHECK(*c.terminal_index() == 4);
}

TEST_CASE("parse_proof: malformed steps are collected, not thrown") {
  auto fwd = parse_proof("Step 1: From Step 2, we derive:\nint1: A(a)\nStep 2: From fact1, we derive:\nint2: B(a)",
                         Dialect::Symbolic);
  CHECK(has_reason(fwd, 1, "does not precede"));

  auto undef = parse_proof("Step 1: From int7, we derive:\nint1: A(a)", Dialect::Symbolic);
  CHECK(has_reason(undef, 1, "undefined label int7"));

  auto bad = parse_proof("Step 1: From fact1, we derive:\nint1: A(a) ∧", Dialect::Symbolic);
  CHECK(has_reason(bad, 1, "cannot parse formula"));

  auto lonely = parse_proof("Step 1: By reductio ad absurdum from fact1:\nint1: ¬A(a)", Dialect::Symbolic);
  CHECK(has_reason(lonely, 1, "without an open assumption"));

  auto bare = parse_proof("Step 1: Obviously:\nint1: A(a)", Dialect::Symbolic);
  CHECK(has_reason(bare, 1, "cites no premises"));

  auto twice = parse_proof(
      "Step 1: From fact1, we derive:\nhypothesis: A(a)\nStep 2: From fact1, we derive:\nhypothesis: A(a)",
      Dialect::Symbolic);
  CHECK(has_reason(twice, 2, "second final-conclusion"));

  auto numbering = parse_proof("Step 2: From fact1, we derive:\nint1: A(a)", Dialect::Symbolic);
  CHECK(has_reason(numbering, 1, "expected 1"));

  auto noline = parse_proof("Step 1: From fact1 we get A(a).", Dialect::Symbolic);
  CHECK(has_reason(noline, 1, "no labeled formula line"));
  CHECK(noline.steps[0].label == "step1");

  // a step inside a closed block cannot be cited afterwards
  auto scoped = parse_proof(
      "Step 1: Assume for contradiction:\nassump1: A(a)\n"
      "Step 2: From assump1, fact1, we derive:\nint1: B(a)\n"
      "Step 3: From int1, fact2, we derive a contradiction:\n⊥\n"
      "Step 4: By reductio ad absurdum from Step 3:\nint2: ¬A(a)\n"
      "Step 5: From int1, we derive:\nint3: B(a)\n",
      Dialect::Symbolic);
  CHECK(has_reason(scoped, 5, "outside its assumption block"));
}

TEST_CASE("parse_proof: citations and labels") {
  // re-used label resolves to the most recent step carrying it
  auto c = parse_proof(
      "Step 1: From fact1, we derive:\nint1: A(a)\n"
      "Step 2: From fact2, we derive:\nint1: B(a)\n"
      "Step 3: From int1, we derive:\nint2: B(a) ∨ C(a)\n"
      "Step 4: From Step 1, we derive:\nint3: A(a) ∨ C(a)\n",
      Dialect::Symbolic);
  CHECK_FALSE(c.is_malformed());
  CHECK(c.steps[2].premise_ordinals == std::vector<int>{2});
  CHECK(c.steps[3].premises == std::vector<std::string>{"int1"});
  CHECK(c.steps[3].premise_ordinals == std::vector<int>{1});

  // mentioning the step's own label or the hypothesis is not a citation
  auto own = parse_proof("Step 1: From fact1, we derive int1 which supports the hypothesis:\nint1: A(a)",
                         Dialect::Symbolic);
  CHECK_FALSE(own.is_malformed());
  CHECK(own.steps[0].premises == std::vector<std::string>{"fact1"});

  // a fact list makes unknown fact labels an error
  auto known = parse_proof("fact1: A(a)\nStep 1: From fact9, we derive:\nint1: A(a)", Dialect::Symbolic);
  CHECK(has_reason(known, 1, "undefined label fact9"));

  // given-fact restatement
  auto given = parse_proof("fact1: A(a)\nStep 1: We restate a given fact:\nfact1: A(a)", Dialect::Symbolic);
  CHECK(given.steps[0].kind == StepKind::GivenFact);
  CHECK(given.steps[0].premises.empty());
}

TEST_CASE("parse_proof: natural dialect") {
  ParseOptions opts;
  opts.dialect = Dialect::Natural;
  opts.facts = {{"fact1", "Every cat is a mammal.", std::nullopt}, {"fact2", "Tom is a cat.", std::nullopt}};
  auto c = parse_proof(
      "Step 1: From fact1 and fact2, we derive:\nint1: Tom is a mammal.\n"
      "Step 2: Since  tom is a MAMMAL and every cat is a mammal, we derive:\nint2: Tom is an animal.\n",
      opts);
  CHECK_FALSE(c.is_malformed());
  REQUIRE(c.steps.size() == 2);
  CHECK(c.steps[0].conclusion_text == "Tom is a mammal.");
  CHECK_FALSE(c.steps[0].formula);
  CHECK(c.steps[0].premises == std::vector<std::string>{"fact1", "fact2"});
  // verbatim restatements after case/whitespace folding count as citations
  std::set<std::string> refs(c.steps[1].premises.begin(), c.steps[1].premises.end());
  CHECK(refs == std::set<std::string>{"fact1", "int1"});

  auto vague = parse_proof("Step 1: Clearly we get:\nint1: Tom is happy.", opts);
  CHECK(has_reason(vague, 1, "cites no premises"));
}

TEST_CASE("dependency_graph: edges follow citations") {
  auto c = parse_proof(
      "Step 1: From fact1, we derive:\nint1: A(a)\n"
      "Step 2: From int1, we derive:\nint2: A(a) ∨ B(a)\n"
      "Step 3: From fact2, we derive:\nint3: B(b) ∨ C(b)\n",
      Dialect::Symbolic);
  auto g = dependency_graph(c);
  auto f1 = *g.index_of({"fact1", 0});
  auto i1 = *g.index_of({"int1", 1});
  auto i2 = *g.index_of({"int2", 2});
  auto i3 = *g.index_of({"int3", 3});
  std::set<std::pair<std::size_t, std::size_t>> edges(g.edges.begin(), g.edges.end());
  CHECK(edges.count({f1, i1}));
  CHECK(edges.count({i1, i2}));
  CHECK(g.out_degree(i3) == 0);
  CHECK(g.out_degree(i2) == 0);
  CHECK(dependency_graph(parse_proof("", Dialect::Symbolic)).nodes.empty());

  ProofChain broken = c;
  broken.steps[0].premise_ordinals[0] = 2;
  broken.steps[0].premises[0] = "int2";
  CHECK_THROWS_AS(dependency_graph(broken), CycleDetected);
}

TEST_CASE("property: graph edges are exactly the premise citations") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    auto c = finelogic::testing::random_chain(rng);
    auto g = dependency_graph(c);
    std::multiset<std::pair<GraphNode, GraphNode>> from_graph;
    for (auto [a, b] : g.edges) from_graph.insert({g.nodes[a], g.nodes[b]});
    std::multiset<std::pair<GraphNode, GraphNode>> from_refs;
    for (const auto& s : c.steps) {
      for (std::size_t r = 0; r < s.premises.size(); ++r) {
        from_refs.insert({{s.premises[r], s.premise_ordinals[r]}, {s.label, s.ordinal}});
      }
    }
    CHECK(from_graph == from_refs);
    for (auto [a, b] : g.edges) CHECK(g.nodes[a].ordinal < g.nodes[b].ordinal);
  }
}

TEST_CASE("property: render then parse reproduces the chain") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 500; ++i) {
    auto c = finelogic::testing::random_chain(rng);
    std::string text = render_chain(c);
    ParseOptions opts;
    opts.problem_id = c.problem_id;
    auto back = parse_proof(text, opts);
    INFO(text);
    for (const auto& m : back.malformed) INFO(m.ordinal << ": " << m.reason);
    CHECK(back.malformed.empty());
    CHECK(same_structure(c, back));
  }
  auto fixed = parse_proof(kReductioChain, Dialect::Symbolic);
  CHECK(same_structure(fixed, parse_proof(render_chain(fixed), Dialect::Symbolic)));
}

TEST_CASE("property: JSON round trip") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto c = finelogic::testing::random_chain(rng);
    auto j = chain_to_json(c);
    auto back = chain_from_json(nlohmann::json::parse(j.dump()));
    CHECK(same_structure(c, back));
  }
  auto c = parse_proof(kReductioChain, Dialect::Symbolic);
  auto j = chain_to_json(c);
  CHECK(j["steps"][3]["kind"] == "reductio-discharge");
  CHECK(j["final_label"] == "PROVED");
  CHECK(j["malformed"] == false);
  CHECK(j["steps"][0]["conclusion"] == "A(b)");
}

TEST_CASE("property: parse_proof is total") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 2000; ++i) {
    std::string text = finelogic::testing::random_noise(rng, static_cast<std::size_t>(i % 300));
    CHECK_NOTHROW(parse_proof(text, i % 2 ? Dialect::Symbolic : Dialect::Natural));
  }
  // mutations of valid chains
  for (int i = 0; i < 300; ++i) {
    std::string text = render_chain(finelogic::testing::random_chain(rng));
    std::uniform_int_distribution<std::size_t> pos(0, text.size());
    for (int m = 0; m < 5; ++m) {
      std::size_t p = pos(rng);
      text.insert(p, finelogic::testing::random_noise(rng, 3));
      std::size_t q = std::uniform_int_distribution<std::size_t>(0, text.size() - 1)(rng);
      text.erase(q, 2);
    }
    CHECK_NOTHROW(parse_proof(text, Dialect::Symbolic));
  }
}
