#include <algorithm>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "finelogic/eval/step_evaluator.hpp"
#include "support/steps_fixture.hpp"
#include "support/stub_server.hpp"

using namespace finelogic;
using namespace finelogic::eval;
using proof::Dialect;
using proof::parse_proof;

namespace {

proof::ProofChain sym(const std::string& text, const std::string& id = "p") {
  proof::ParseOptions o;
  o.problem_id = id;
  return parse_proof(text, o);
}

ChainVerdict with_flags(std::initializer_list<std::array<bool, 3>> steps) {
  ChainVerdict v;
  for (auto f : steps) {
    StepVerdict s;
    s.valid = f[0] ? Verdict::True : Verdict::False;
    s.relevant = f[1] ? Verdict::True : Verdict::False;
    s.atomic = f[2] ? Verdict::True : Verdict::False;
    s.source = JudgeSource::Symbolic;
    v.steps.push_back(s);
  }
  return v;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("finelogic_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("eval_validity: symbolic examples") {
  EvaluatorConfig cfg;
  auto ump = sym("fact1: ∀x (A(x) → B(x))\nfact2: A(a)\nStep 1: From fact1, fact2, we derive:\nint1: B(a)");
  CHECK(eval_validity(ump.steps[0], ump, cfg) == Verdict::True);

  auto nonseq = sym("fact1: A(a)\nStep 1: From fact1, we derive:\nint1: C(a)");
  std::string note;
  CHECK(eval_validity(nonseq.steps[0], nonseq, cfg, &note) == Verdict::False);
  CHECK(note.find("countermodel") != std::string::npos);

  auto hop = sym("fact1: ∀x (A(x) → B(x))\nfact2: ∀x (B(x) → C(x))\nfact3: A(a)\n"
                 "Step 1: From fact1, fact2, fact3, we derive:\nint2: C(a)");
  CHECK(eval_validity(hop.steps[0], hop, cfg) == Verdict::True);

  // a cited fact without any known formula leaves the verdict open
  auto missing = sym("Step 1: From fact1, we derive:\nint1: A(a)");
  CHECK(eval_validity(missing.steps[0], missing, cfg) == Verdict::Unknown);
}

TEST_CASE("eval_validity: reductio and contradiction steps") {
  EvaluatorConfig cfg;
  auto c = sym(
      "fact1: ∀x (A(x) → B(x))\nfact2: ¬B(b)\n"
      "Step 1: Assume for contradiction:\nassump1: A(b)\n"
      "Step 2: From fact1, assump1, we derive:\nint1: B(b)\n"
      "Step 3: From int1, fact2, we derive a contradiction:\n⊥\n"
      "Step 4: By reductio ad absurdum from Step 3:\nhypothesis: ¬A(b)\n");
  REQUIRE_FALSE(c.is_malformed());
  for (const auto& s : c.steps) CHECK(eval_validity(s, c, cfg) == Verdict::True);
  for (const auto& s : c.steps) CHECK(eval_atomicity(s, c, cfg) == Verdict::True);

  auto wrong = sym(
      "fact1: ¬A(b)\n"
      "Step 1: Assume for contradiction:\nassump1: A(b)\n"
      "Step 2: Contradiction:\n⊥\n"
      "Step 3: By reductio ad absurdum from Step 2:\nint1: A(b)\n");
  REQUIRE_FALSE(wrong.is_malformed());
  // the uncited contradiction finds A(b) / ¬A(b) in scope
  CHECK(eval_validity(wrong.steps[1], wrong, cfg) == Verdict::True);
  CHECK(eval_validity(wrong.steps[2], wrong, cfg) == Verdict::False);

  auto no_pair = sym("fact1: A(a)\nStep 1: Contradiction:\n⊥\n");
  CHECK(eval_validity(no_pair.steps[0], no_pair, cfg) == Verdict::False);
}

TEST_CASE("eval_relevance") {
  auto c = sym(
      "fact1: A(a)\nfact2: ∀x (A(x) → B(x))\n"
      "Step 1: From fact1, fact2, we derive:\nint1: B(a)\n"
      "Step 2: From int1, fact1, we derive:\nint2: A(a) ∧ B(a)\n"
      "Step 3: From fact1, fact2, we derive:\nint3: B(a)\n"
      "Step 4: From int2, we derive:\nhypothesis: B(a) ∧ A(a)\n");
  auto rel = eval_relevance(c);
  CHECK(rel == std::vector<bool>{true, true, false, true});

  // reductio block members inherit relevance from the discharge
  auto r = sym(
      "fact1: ¬A(b)\n"
      "Step 1: Assume for contradiction:\nassump1: A(b)\n"
      "Step 2: From assump1, fact1, we derive a contradiction:\n⊥\n"
      "Step 3: From assump1, fact1, we derive a contradiction:\n⊥\n"
      "Step 4: By reductio ad absurdum from Step 2:\nhypothesis: ¬A(b)\n");
  CHECK(eval_relevance(r) == std::vector<bool>{true, true, true, true});
  CHECK(eval_relevance(sym("")).empty());
}

TEST_CASE("eval_atomicity: symbolic examples") {
  EvaluatorConfig cfg;
  auto conj = sym("fact1: P\nfact2: Q\nStep 1: From fact1, fact2, we derive:\nint1: P ∧ Q");
  CHECK(eval_atomicity(conj.steps[0], conj, cfg) == Verdict::True);
  auto fused = sym("fact1: ∀x (A(x) → B(x))\nfact2: ∀x (B(x) → C(x))\nfact3: A(a)\n"
                   "Step 1: From fact1, fact2, fact3, we derive:\nint1: C(a)");
  CHECK(eval_atomicity(fused.steps[0], fused, cfg) == Verdict::False);
  auto extra = sym("fact1: ∀x (A(x) → B(x))\nfact2: A(a)\nfact3: C(b)\n"
                   "Step 1: From fact1, fact2, fact3, we derive:\nint1: B(a)");
  CHECK(eval_validity(extra.steps[0], extra, cfg) == Verdict::True);
  CHECK(eval_atomicity(extra.steps[0], extra, cfg) == Verdict::False);
}

TEST_CASE("aggregate: worked examples") {
  auto good = with_flags({{true, true, true}, {true, true, true}});
  auto one_bad = with_flags({{true, true, true}, {false, true, true}});
  CHECK(aggregate({good, one_bad}).all_valid == 0.5);
  CHECK(aggregate({good, one_bad}).all_relevant == 1.0);
  auto na = with_flags({{true, true, false}});
  auto a = aggregate({with_flags({{true, true, true}}), na, na});
  CHECK(a.all_atomic == 1.0 / 3.0);

  ChainVerdict empty;
  empty.excluded = true;
  CHECK_THROWS_AS(aggregate({empty}), EmptyCohort);
  CHECK_THROWS_AS(aggregate({}), EmptyCohort);
  auto b = aggregate({empty, good});
  CHECK(b.chains == 1);
  CHECK(b.excluded == 1);
  CHECK(b.all_valid == 1.0);

  ChainVerdict broken;
  broken.malformed = true;
  auto m = aggregate({broken, good});
  CHECK(m.all_valid == 0.5);
  CHECK(m.all_relevant == 0.5);
  CHECK(m.all_atomic == 0.5);

  auto unk = with_flags({{true, true, true}, {true, true, true}});
  unk.steps[1].valid = Verdict::Unknown;
  auto u = aggregate({unk});
  CHECK(u.all_valid == 0.0);
  CHECK(u.unknown_valid_rate == 0.5);
}

TEST_CASE("property: aggregates are order invariant and monotone") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ChainVerdict> vs;
    int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      ChainVerdict v;
      int k = 1 + static_cast<int>(rng() % 5);
      for (int s = 0; s < k; ++s) {
        StepVerdict sv;
        sv.valid = coin(rng) ? Verdict::True : Verdict::False;
        sv.relevant = coin(rng) ? Verdict::True : Verdict::False;
        sv.atomic = coin(rng) ? Verdict::True : Verdict::Unknown;
        v.steps.push_back(sv);
      }
      vs.push_back(v);
    }
    auto base = aggregate(vs);
    auto shuffled = vs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = aggregate(shuffled);
    CHECK(again.all_valid == base.all_valid);
    CHECK(again.all_relevant == base.all_relevant);
    CHECK(again.all_atomic == base.all_atomic);

    auto flipped = vs;
    auto& chain = flipped[rng() % flipped.size()];
    auto& step = chain.steps[rng() % chain.steps.size()];
    if (step.valid == Verdict::False) step.valid = Verdict::True;
    if (step.atomic != Verdict::True) step.atomic = Verdict::True;
    if (step.relevant == Verdict::False) step.relevant = Verdict::True;
    auto up = aggregate(flipped);
    CHECK(up.all_valid >= base.all_valid);
    CHECK(up.all_relevant >= base.all_relevant);
    CHECK(up.all_atomic >= base.all_atomic);
  }
}

TEST_CASE("validity and answer correctness are independent") {
  EvaluatorConfig cfg;
  // right answer, invalid step
  auto lucky = sym("fact1: A(a)\nStep 1: From fact1, we derive:\nhypothesis: B(a)\nFinal conclusion: __PROVED__");
  auto v1 = evaluate_chain(lucky, cfg);
  CHECK_FALSE(v1.all_valid());
  CHECK(lucky.final_label == proof::Answer::Proved);
  // sound steps, wrong declared answer
  auto sound = sym(
      "fact1: A(a)\nStep 1: From fact1, we derive:\nhypothesis: A(a) ∨ B(a)\nFinal conclusion: __DISPROVED__");
  auto v2 = evaluate_chain(sound, cfg);
  CHECK(v2.all_valid());
  CHECK(sound.final_label == proof::Answer::Disproved);
}

TEST_CASE("evaluation is deterministic and the parallel path matches") {
  EvaluatorConfig cfg;
  std::vector<proof::ProofChain> chains = {
      sym("fact1: ∀x (A(x) → B(x))\nfact2: A(a)\nStep 1: From fact1, fact2, we derive:\nint1: B(a)", "a"),
      sym("fact1: A(a)\nStep 1: From fact1, we derive:\nint1: C(a)", "b"),
      sym("", "c"),
      sym("Step 1: nonsense", "d"),
  };
  auto s1 = evaluate_chains(chains, cfg);
  auto s2 = evaluate_chains(chains, cfg);
  auto p = evaluate_chains_parallel(chains, cfg);
  REQUIRE(s1.size() == p.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(verdict_to_json(s1[i]) == verdict_to_json(s2[i]));
    CHECK(verdict_to_json(s1[i]) == verdict_to_json(p[i]));
    CHECK(verdict_to_json(verdict_from_json(verdict_to_json(s1[i]))) == verdict_to_json(s1[i]));
  }
  CHECK(s1[2].excluded);
  CHECK(s1[3].malformed);
}

TEST_CASE("judge templates and reply parsing") {
  auto p = render_judge_prompt(JudgeKind::Validity, "fact1: Tom is a cat.\nint1: Tom is a mammal.",
                               "int2: Tom is an animal.");
  CHECK(p ==
        "Premises:\nfact1: Tom is a cat.\nint1: Tom is a mammal.\n\nConclusion:\nint2: Tom is an animal.\n\n"
        "Do the premises entail the conclusion? Answer true or false only.");
  auto a = render_judge_prompt(JudgeKind::Atomicity, "x", "y");
  CHECK(a == "Premises:\nx\n\nConclusion:\ny\n\nIs this inference atomic...? Answer true or false only.");

  CHECK(parse_judge_reply("True."));
  CHECK(parse_judge_reply("  **true**"));
  CHECK_FALSE(parse_judge_reply("FALSE"));
  CHECK_FALSE(parse_judge_reply("false, because"));
  CHECK_THROWS_AS(parse_judge_reply("It depends"), UnparseableJudgeReply);
  CHECK_THROWS_AS(parse_judge_reply("Truly"), UnparseableJudgeReply);
  CHECK_THROWS_AS(parse_judge_reply(""), UnparseableJudgeReply);
}

TEST_CASE("natural chains go through the remote judge") {
  testing::StubEndpoint stub([](const std::string& prompt) -> std::optional<std::string> {
    if (prompt.find("Tom is purple") != std::string::npos) return "false";
    if (prompt.find("Is this inference atomic") != std::string::npos) return "True.";
    return "true";
  });
  net::EndpointConfig ec;
  ec.url = stub.url();
  ec.model = "judge";
  ec.cache_dir = fresh_dir("judge_cache");
  ec.backoff = std::chrono::milliseconds(1);
  RemoteJudge judge(ec);
  EvaluatorConfig cfg;
  cfg.judge = &judge;

  proof::ParseOptions o;
  o.dialect = Dialect::Natural;
  o.facts = {{"fact1", "Every cat is a mammal.", std::nullopt}, {"fact2", "Tom is a cat.", std::nullopt}};
  auto c = parse_proof(
      "Step 1: From fact1, fact2, we derive:\nint1: Tom is a mammal.\n"
      "Step 2: From int1, we derive:\nhypothesis: Tom is purple.\n",
      o);
  auto v = evaluate_chain(c, cfg);
  REQUIRE(v.steps.size() == 2);
  CHECK(v.steps[0].valid == Verdict::True);
  CHECK(v.steps[0].atomic == Verdict::True);
  CHECK(v.steps[0].source == JudgeSource::Remote);
  CHECK(v.steps[1].valid == Verdict::False);
  CHECK(stub.requests() == 4);

  // a second pass is served from the cache
  auto again = evaluate_chain(c, cfg);
  CHECK(verdict_to_json(again) == verdict_to_json(v));
  CHECK(stub.requests() == 4);
  CHECK(judge.client().cache_hits() == 4);

  // without a judge the natural steps are skipped and unknown
  EvaluatorConfig none;
  auto skipped = evaluate_chain(c, none);
  CHECK(skipped.steps[0].source == JudgeSource::Skipped);
  CHECK(skipped.steps[0].valid == Verdict::Unknown);
  CHECK(skipped.steps[0].relevant == Verdict::Unknown);
  CHECK(skipped.steps[0].atomic == Verdict::Unknown);
  std::filesystem::remove_all(ec.cache_dir);
}

TEST_CASE("unreachable or confused judge yields unknown verdicts") {
  std::atomic<int> calls{0};
  testing::StubEndpoint down([&](const std::string&) -> std::optional<std::string> {
    ++calls;
    return std::nullopt;
  });
  net::EndpointConfig ec;
  ec.url = down.url();
  ec.backoff = std::chrono::milliseconds(1);
  RemoteJudge judge(ec);
  EvaluatorConfig cfg;
  cfg.judge = &judge;
  proof::ParseOptions o;
  o.dialect = Dialect::Natural;
  auto c = parse_proof("Step 1: From fact1, we derive:\nint1: Tom is a mammal.", o);
  std::string note;
  CHECK(eval_validity(c.steps[0], c, cfg, &note) == Verdict::Unknown);
  CHECK(calls.load() == 3);
  CHECK(note.find("after 3 attempts") != std::string::npos);

  testing::StubEndpoint vague([](const std::string&) -> std::optional<std::string> { return "It depends"; });
  ec.url = vague.url();
  RemoteJudge judge2(ec);
  cfg.judge = &judge2;
  CHECK(eval_validity(c.steps[0], c, cfg, &note) == Verdict::Unknown);
  CHECK(note.find("no leading true/false") != std::string::npos);
}

TEST_CASE("fixture corpus reproduces hand-computed verdicts and aggregates") {
  auto fx = testing::load_steps_fixture();
  REQUIRE(fx.entries.size() == 20);
  EvaluatorConfig cfg;
  auto verdicts = evaluate_chains_parallel(fx.chains(), cfg);
  auto flag = [](Verdict v) { return v == Verdict::True ? 'T' : v == Verdict::False ? 'F' : 'U'; };
  for (std::size_t i = 0; i < fx.entries.size(); ++i) {
    const auto& e = fx.entries[i];
    const auto& v = verdicts[i];
    INFO(e.id);
    CHECK(v.malformed == e.expect.value("malformed", false));
    CHECK(v.excluded == e.expect.value("excluded", false));
    if (!e.expect.contains("steps")) continue;
    REQUIRE(v.steps.size() == e.expect["steps"].size());
    for (std::size_t k = 0; k < v.steps.size(); ++k) {
      std::string got{flag(v.steps[k].valid), flag(v.steps[k].relevant), flag(v.steps[k].atomic)};
      INFO("step ", k + 1);
      CHECK(got == e.expect["steps"][k].get<std::string>());
    }
  }
  auto a = aggregate(verdicts);
  const auto& x = fx.expected;
  CHECK(a.chains == x["chains"].get<std::size_t>());
  CHECK(a.excluded == x["excluded"].get<std::size_t>());
  CHECK(a.malformed == x["malformed"].get<std::size_t>());
  auto ratio = [&](const char* k) { return x[k][0].get<double>() / x[k][1].get<double>(); };
  CHECK(a.all_valid == ratio("all_valid"));
  CHECK(a.all_relevant == ratio("all_relevant"));
  CHECK(a.all_atomic == ratio("all_atomic"));
  CHECK(a.unknown_valid_rate == x["unknown_valid_rate"].get<double>());
  CHECK(a.unknown_atomic_rate == x["unknown_atomic_rate"].get<double>());

  // redundant confirmation step and fused two-rule step
  const auto& cs = x["case_study"];
  auto it = std::find_if(fx.entries.begin(), fx.entries.end(), [&](const auto& e) { return e.id == cs["id"]; });
  const auto& v = verdicts[static_cast<std::size_t>(it - fx.entries.begin())];
  CHECK(v.steps[cs["irrelevant_step"].get<std::size_t>() - 1].relevant == Verdict::False);
  CHECK(v.steps[cs["non_atomic_step"].get<std::size_t>() - 1].atomic == Verdict::False);
  CHECK(v.steps[cs["non_atomic_step"].get<std::size_t>() - 1].valid == Verdict::True);
}
