// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "finelogic/bench/harness.hpp"
#include "finelogic/eval/step_evaluator.hpp"
#include "finelogic/logic/entailment.hpp"
#include "finelogic/logic/semantics.hpp"
#include "finelogic/probe/css.hpp"
#include "finelogic/probe/logistic.hpp"
#include "finelogic/reward/reward.hpp"
#include "finelogic/sft/forge.hpp"
#include "support/bench_fixture.hpp"
#include "support/gold_generator.hpp"
#include "support/logic_generators.hpp"
#include "support/steps_fixture.hpp"
#include "support/stub_server.hpp"

using namespace finelogic;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

Outcome formula_round_trip() {
  auto start = Clock::now();
  std::mt19937_64 rng(1);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    auto f = testing::random_formula(rng, 5);
    if (!(logic::parse_formula(logic::print_formula(f)) == logic::normalize(f))) ++bad;
  }
  double t = seconds_since(start);
  return {bad == 0 && t < 5.0, "1000 formulas, " + std::to_string(bad) + " mismatches, " + fmt(t) + " s"};
}

Outcome entailment_oracle() {
  auto start = Clock::now();
  std::mt19937_64 rng(2);
  int n = 500, disagree = 0, unknown = 0, definite = 0;
  for (int i = 0; i < n; ++i) {
    auto inst = testing::random_monadic_instance(rng);
    auto v = logic::entails(inst.premises, inst.conclusion);
    if (v.status == logic::EntailmentStatus::Unknown) {
      ++unknown;
      continue;
    }
    auto o = logic::semantic_entails_bruteforce(inst.premises, inst.conclusion, 3);
    if (o.outcome == logic::SemanticOutcome::Inconclusive) continue;
    ++definite;
    bool entailed = o.outcome == logic::SemanticOutcome::Entailed;
    if (entailed != (v.status == logic::EntailmentStatus::Valid)) ++disagree;
  }
  double t = seconds_since(start);
  double rate = static_cast<double>(unknown) / n;
  return {disagree == 0 && rate < 0.05 && t < 60.0,
          std::to_string(n) + " instances, " + std::to_string(definite) + " compared, " + std::to_string(disagree) +
              " disagreements, unknown rate " + fmt(rate) + ", " + fmt(t) + " s"};
}

Outcome stepwise_aggregates() {
  auto fx = testing::load_steps_fixture();
  auto verdicts = eval::evaluate_chains(fx.chains(), {});
  auto flag = [](eval::Verdict v) { return v == eval::Verdict::True ? 'T' : v == eval::Verdict::False ? 'F' : 'U'; };
  int step_mismatch = 0;
  for (std::size_t i = 0; i < fx.entries.size(); ++i) {
    const auto& e = fx.entries[i].expect;
    if (!e.contains("steps")) continue;
    if (verdicts[i].steps.size() != e["steps"].size()) {
      ++step_mismatch;
      continue;
    }
    for (std::size_t k = 0; k < verdicts[i].steps.size(); ++k) {
      const auto& s = verdicts[i].steps[k];
      std::string got{flag(s.valid), flag(s.relevant), flag(s.atomic)};
      step_mismatch += got != e["steps"][k].get<std::string>();
    }
  }
  auto a = eval::aggregate(verdicts);
  const auto& x = fx.expected;
  auto ratio = [&](const char* k) { return x[k][0].get<double>() / x[k][1].get<double>(); };
  bool agg = a.chains == x["chains"].get<std::size_t>() && a.all_valid == ratio("all_valid") &&
             a.all_relevant == ratio("all_relevant") && a.all_atomic == ratio("all_atomic");
  const auto& cs = x["case_study"];
  std::size_t idx = 0;
  while (fx.entries[idx].id != cs["id"]) ++idx;
  const auto& v = verdicts[idx];
  bool case_study = v.steps[cs["irrelevant_step"].get<std::size_t>() - 1].relevant == eval::Verdict::False &&
                    v.steps[cs["non_atomic_step"].get<std::size_t>() - 1].atomic == eval::Verdict::False;
  return {step_mismatch == 0 && agg && case_study,
          std::to_string(fx.entries.size()) + " chains, AllValid " + fmt(a.all_valid) + ", AllRelevant " +
              fmt(a.all_relevant) + ", AllAtomic " + fmt(a.all_atomic) + ", " + std::to_string(step_mismatch) +
              " step mismatches, case study " + (case_study ? "flagged" : "missed")};
}

Outcome css_oracle() {
  auto start = Clock::now();
  std::vector<probe::PredictionTrace> all;
  int bad = 0;
  for (int k = 1; k <= 6; ++k) {
    std::vector<probe::PredictionTrace> group;
    double sum = 0;
    for (int mask = 0; mask < (1 << k); ++mask) {
      probe::PredictionTrace t{"k" + std::to_string(k) + "_" + std::to_string(mask), {}};
      for (int i = 0; i < k; ++i) t.correct.push_back((mask >> i) & 1);
      // smallest τ whose suffix τ..K is all correct
      int span = 0;
      for (int tau = 1; tau <= k; ++tau) {
        bool ok = true;
        for (int j = tau; j <= k; ++j) ok = ok && t.correct[static_cast<std::size_t>(j - 1)];
        if (ok) {
          span = k - tau;
          break;
        }
      }
      bad += probe::css_span(t) != static_cast<std::size_t>(span);
      sum += span;
      group.push_back(t);
      all.push_back(t);
    }
    bad += probe::css_score(group) != sum / static_cast<double>(group.size());
  }
  double t = seconds_since(start);
  return {bad == 0 && all.size() == 126 && t < 1.0,
          std::to_string(all.size()) + " traces, " + std::to_string(bad) + " mismatches, " + fmt(t, 4) + " s"};
}

Outcome balanced_accuracy_checks() {
  // 10 positives with 8 hits, 10 negatives with 6 rejections
  std::vector<bool> labels, preds;
  for (int i = 0; i < 10; ++i) {
    labels.push_back(true);
    preds.push_back(i < 8);
  }
  for (int i = 0; i < 10; ++i) {
    labels.push_back(false);
    preds.push_back(i >= 6);
  }
  double ba = probe::balanced_accuracy(preds, labels);
  std::vector<bool> all_pos(labels.size(), true);
  double half = probe::balanced_accuracy(all_pos, labels);
  double perfect = probe::balanced_accuracy(labels, labels);
  bool ok = std::abs(ba - 0.7) < 1e-12 && half == 0.5 && perfect == 1.0;
  return {ok, "TPR 0.8 / TNR 0.6 gives " + fmt(ba, 6) + ", constant predictor " + fmt(half) + ", perfect " +
                  fmt(perfect)};
}

struct Gauss {
  Eigen::MatrixXd x;
  std::vector<bool> y;
  std::vector<std::string> groups;
};

Gauss gaussians(std::mt19937_64& rng, int per_class, int d, double half) {
  std::normal_distribution<double> g;
  Gauss out{Eigen::MatrixXd(2 * per_class, d), {}, {}};
  for (int i = 0; i < 2 * per_class; ++i) {
    bool pos = i % 2 == 0;
    for (int j = 0; j < d; ++j) out.x(i, j) = g(rng) + (pos ? half : -half);
    out.y.push_back(pos);
    out.groups.push_back("g" + std::to_string(i));
  }
  return out;
}

Outcome probe_sanity() {
  std::mt19937_64 rng(3);
  auto train = gaussians(rng, 300, 16, 0.5);
  auto test = gaussians(rng, 300, 16, 0.5);
  probe::ProbeOptions opts;
  opts.seed = 11;
  auto p = probe::train_probe(train.x, train.y, train.groups, opts);
  double ba = probe::balanced_accuracy(p.predict_all(test.x), test.y);
  auto again = probe::train_probe(train.x, train.y, train.groups, opts);
  bool same = again.c == p.c && again.weights == p.weights && again.bias == p.bias;
  auto shuffled = train.y;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto null = probe::train_probe(train.x, shuffled, train.groups, opts);
  double null_ba = probe::balanced_accuracy(null.predict_all(test.x), test.y);
  return {ba >= 0.95 && std::abs(null_ba - 0.5) <= 0.1 && same,
          "separable " + fmt(ba) + ", permuted " + fmt(null_ba) + ", repeat run " + (same ? "identical" : "differs")};
}

Outcome sft_corpus() {
  auto start = Clock::now();
  auto fld_pool = testing::gold_pool(4, bench::DatasetKind::FLD, 15, 510, 1520);
  auto pq_pool = testing::gold_pool(5, bench::DatasetKind::ProntoQA, 3, 820, 0);
  std::size_t fld_n = 0, pq_n = 0, checked = 0, failures = 0;
  for (auto style : {sft::Style::SymbStruct, sft::Style::SymbFilter, sft::Style::SymbDirect}) {
    for (int which = 0; which < 2; ++which) {
      auto corpus = which == 0 ? sft::build_corpus(fld_pool, style, sft::fld_manifest(), 1)
                               : sft::build_corpus(pq_pool, style, sft::prontoqa_manifest(), 1);
      (which == 0 ? fld_n : pq_n) = corpus.samples.size();
      std::vector<proof::ProofChain> chains;
      for (const auto& s : corpus.samples) chains.push_back(proof::parse_proof(s.target, proof::Dialect::Symbolic));
      auto verdicts = eval::evaluate_chains_parallel(chains, {});
      for (std::size_t i = 0; i < chains.size(); ++i) {
        if (chains[i].empty()) continue;  // an UNKNOWN sample without partial steps
        ++checked;
        bool ok = verdicts[i].all_valid() && verdicts[i].all_atomic();
        if (style == sft::Style::SymbFilter) ok = ok && verdicts[i].all_relevant();
        failures += !ok;
      }
    }
  }
  double t = seconds_since(start);
  return {fld_n == 9500 && pq_n == 3200 && failures == 0,
          "FLD " + std::to_string(fld_n) + ", ProntoQA " + std::to_string(pq_n) + ", " + std::to_string(checked) +
              " symbolic targets re-checked, " + std::to_string(failures) + " unsound, " + fmt(t, 1) + " s"};
}

Outcome reward_checks() {
  reward::RewardInputs worked{1, 0.5, 1.0, 0.25, 0.5};
  double r = reward::compute_reward(worked, {0.4, 0.2, 0.2, 0.2});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0), w(0.0, 2.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    reward::RewardInputs in{static_cast<double>(rng() % 2), u(rng), u(rng), u(rng), u(rng)};
    reward::RewardWeights wt{w(rng), w(rng), w(rng), w(rng)};
    auto up = in;
    double* fields[] = {&up.valid, &up.relevant, &up.atomic};
    switch (rng() % 5) {
      case 0:
        up.acc = 1;
        break;
      case 4:
        up.css = *up.css + (1 - *up.css) * u(rng);
        break;
      default: {
        double* f = fields[rng() % 3];
        *f += (1 - *f) * u(rng);
      }
    }
    violations += reward::compute_reward(up, wt) < reward::compute_reward(in, wt);
  }
  return {std::abs(r - 1.55) < 1e-12 && violations == 0,
          "worked example " + fmt(r, 6) + ", " + std::to_string(violations) + " monotonicity violations in 10000"};
}

Outcome bench_harness() {
  auto fx = testing::load_bench_fixture();
  std::ifstream ein(testing::fixture_dir() / "bench/expected.json");
  auto expected = nlohmann::json::parse(ein);
  testing::StubEndpoint stub([&](const std::string& p) { return fx.reply(p); });
  net::EndpointConfig cfg;
  cfg.url = stub.url();
  cfg.model = "stub";
  cfg.cache_dir = testing::scratch_dir("acceptance_bench");
  std::size_t cold_calls = 0, warm_calls = 0;
  std::vector<bench::EvalRecord> cold, warm;
  {
    net::CompletionClient client(cfg);
    cold = bench::run_eval(fx.problems, client, bench::PromptMode::Cot);
    cold_calls = client.network_calls();
  }
  {
    net::CompletionClient client(cfg);
    warm = bench::run_eval(fx.problems, client, bench::PromptMode::Cot);
    warm_calls = client.network_calls();
  }
  bool ok = cold_calls == fx.problems.size() && warm_calls == 0;
  for (std::size_t i = 0; i < cold.size(); ++i) {
    ok = ok && cold[i].correct == expected["correct"][i].get<bool>() && warm[i].raw_output == cold[i].raw_output;
  }
  double acc = bench::accuracy(cold);
  double abst = bench::abstention_rate(cold);
  ok = ok && acc == expected["accuracy"][0].get<double>() / expected["accuracy"][1].get<double>() &&
       abst == expected["abstention"][0].get<double>() / expected["abstention"][1].get<double>();
  auto rows = bench::accuracy_by_depth(cold, fx.problems);
  ok = ok && rows.size() == expected["bins"].size();
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    const auto& b = expected["bins"][i];
    double want = b["correct"].get<double>() / b["count"].get<double>();
    ok = rows[i].bin.name() == b["bin"] && rows[i].count == b["count"].get<std::size_t>() &&
         rows[i].accuracy && *rows[i].accuracy == want;
  }
  return {ok, "accuracy " + fmt(acc) + ", abstention " + fmt(abst) + ", " + std::to_string(rows.size()) +
                  " depth bins, cold calls " + std::to_string(cold_calls) + ", warm calls " +
                  std::to_string(warm_calls)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"formula round trip", formula_round_trip},
      {"entailment oracle agreement", entailment_oracle},
      {"stepwise aggregates", stepwise_aggregates},
      {"CSS oracle equivalence", css_oracle},
      {"balanced accuracy", balanced_accuracy_checks},
      {"probe sanity", probe_sanity},
      {"SFT corpus", sft_corpus},
      {"reward", reward_checks},
      {"benchmark harness", bench_harness},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
