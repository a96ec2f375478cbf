#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "finelogic/cli/app.hpp"
#include "support/bench_fixture.hpp"
#include "support/gold_generator.hpp"
#include "support/steps_fixture.hpp"
#include "support/stub_server.hpp"

using namespace finelogic;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "finelogic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

fs::path fresh(const std::string& name) {
  auto d = testing::scratch_dir("cli_" + name);
  fs::create_directories(d);
  return d;
}

/// Copies the steps fixture into an eval-steps input with gold labels.
fs::path steps_input(const fs::path& dir) {
  auto fx = testing::load_steps_fixture();
  std::ofstream f(dir / "chains_in.jsonl");
  for (std::size_t i = 0; i < fx.entries.size(); ++i) {
    f << json{{"problem_id", fx.entries[i].id}, {"text", fx.entries[i].text}, {"gold", i % 2 ? "F" : "T"}}.dump()
      << '\n';
  }
  return dir / "chains_in.jsonl";
}

}  // namespace

TEST_CASE("cli: eval-bench writes reports and reruns from the cache") {
  auto fx = testing::load_bench_fixture();
  testing::StubEndpoint stub([&](const std::string& p) { return fx.reply(p); });
  auto dir = fresh("bench");
  write_file(dir / "run.yaml", "out: run\nseed: 3\njobs: 2\n"
                               "datasets:\n  - kind: FLD\n    path: " +
                                   (testing::fixture_dir() / "bench/problems.jsonl").string() +
                                   "\nbench:\n  mode: cot\n"
                                   "generator:\n  url: " +
                                   stub.url() + "\n  model: stub\n  cache_dir: cache\n");
  auto r1 = invoke({"eval-bench", "--config", (dir / "run.yaml").string()});
  INFO(r1.err);
  REQUIRE(r1.code == 0);
  auto run = dir / "run/eval-bench";
  for (const char* f : {"records_FLD.jsonl", "accuracy.csv", "accuracy.json", "depth_FLD.csv", "depth_FLD.json",
                        "manifest.json"}) {
    CHECK(fs::exists(run / f));
  }
  auto acc = load_json(run / "accuracy.json");
  CHECK(acc[0]["accuracy"].get<double>() == doctest::Approx(7.0 / 12));
  CHECK(acc[0]["N"] == 12);
  CHECK(stub.requests() == 12);
  auto manifest = load_json(run / "manifest.json");
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["command"] == "eval-bench");
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["outputs"].contains("accuracy.csv"));

  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(run)) first[e.path().filename()] = slurp(e.path());
  auto r2 = invoke({"eval-bench", "--config", (dir / "run.yaml").string()});
  REQUIRE(r2.code == 0);
  CHECK(stub.requests() == 12);
  CHECK(r2.out.find("network calls 0") != std::string::npos);
  for (const auto& [name, text] : first) CHECK_MESSAGE(slurp(run / name) == text, name);
}

TEST_CASE("cli: validation errors, dry runs and partial completion") {
  auto dir = fresh("errors");
  write_file(dir / "missing.yaml", "out: run\ndatasets:\n  - kind: FLD\n    path: nowhere.jsonl\n"
                                   "generator:\n  url: http://127.0.0.1:9/complete\n");
  auto r = invoke({"eval-bench", "--config", (dir / "missing.yaml").string()});
  CHECK(r.code == 2);
  auto e = json::parse(r.err.substr(0, r.err.find('\n')));
  CHECK(e["error"] == "ConfigError");
  CHECK(e["exit_code"] == 2);
  CHECK(fs::exists(dir / "run/eval-bench/error.json"));

  auto dry = invoke({"eval-bench", "--config", (dir / "missing.yaml").string(), "--dry-run", "--seed", "9"});
  CHECK(dry.code == 0);
  auto resolved = json::parse(dry.out);
  CHECK(resolved["seed"] == 9);
  CHECK(resolved["generator"]["url"] == "http://127.0.0.1:9/complete");

  CHECK(invoke({"eval-bench"}).code == 2);
  CHECK(invoke({"no-such-command"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);

  write_file(dir / "secret.yaml", "generator:\n  url: http://x\n  api_key: hunter2\n");
  auto s = invoke({"eval-bench", "--config", (dir / "secret.yaml").string()});
  CHECK(s.code == 2);
  CHECK(s.err.find("api_key_env") != std::string::npos);

  write_file(dir / "unset.yaml", "generator:\n  url: ${FINELOGIC_SURELY_UNSET_VAR}\n");
  auto u = invoke({"eval-bench", "--config", (dir / "unset.yaml").string()});
  CHECK(u.code == 2);
  CHECK(u.err.find("FINELOGIC_SURELY_UNSET_VAR") != std::string::npos);

  // one problem's request fails at the endpoint
  auto fx = testing::load_bench_fixture();
  testing::StubEndpoint stub([&](const std::string& p) -> std::optional<std::string> {
    if (p.find("p05") != std::string::npos) return std::nullopt;
    return fx.reply(p);
  });
  ::setenv("FINELOGIC_TEST_STUB_URL", stub.url().c_str(), 1);
  write_file(dir / "partial.yaml", "out: partial\ndatasets:\n  - kind: FLD\n    path: " +
                                       (testing::fixture_dir() / "bench/problems.jsonl").string() +
                                       "\ngenerator:\n  url: ${FINELOGIC_TEST_STUB_URL}\n  attempts: 1\n"
                                       "  backoff_ms: 1\n  api_key_env: FINELOGIC_TEST_KEY\n");
  ::setenv("FINELOGIC_TEST_KEY", "very-secret-token", 1);
  auto p = invoke({"eval-bench", "--config", (dir / "partial.yaml").string()});
  CHECK(p.code == 3);
  auto records = slurp(dir / "partial/eval-bench/records_FLD.jsonl");
  CHECK(records.find("\"error\"") != std::string::npos);
  auto manifest = slurp(dir / "partial/eval-bench/manifest.json");
  CHECK(manifest.find("very-secret-token") == std::string::npos);
  CHECK(manifest.find("FINELOGIC_TEST_KEY") != std::string::npos);
  CHECK(load_json(dir / "partial/eval-bench/manifest.json")["exit_code"] == 3);
}

TEST_CASE("cli: eval-steps reproduces the fixture aggregates and feeds reward") {
  auto dir = fresh("steps");
  auto input = steps_input(dir);
  write_file(dir / "run.yaml", "out: run\nsteps:\n  input: " + input.string() +
                                   "\nreward:\n  mode: all-or-nothing\n  weights: {w_v: 0.4, w_r: 0.2, w_a: 0.2, w_c: 0.2}\n");
  auto r = invoke({"eval-steps", "--config", (dir / "run.yaml").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  auto fx = testing::load_steps_fixture();
  auto a = load_json(dir / "run/eval-steps/aggregate.json");
  INFO(a.dump());
  CHECK(a["N"] == fx.expected["chains"]);
  CHECK(a["excluded_empty"] == fx.expected["excluded"]);
  CHECK(a["AllValid"].get<double>() == fx.expected["all_valid"][0].get<double>() / fx.expected["all_valid"][1].get<double>());
  CHECK(a["AllAtomic"].get<double>() == fx.expected["all_atomic"][0].get<double>() / fx.expected["all_atomic"][1].get<double>());

  auto rw = invoke({"reward", "--config", (dir / "run.yaml").string()});
  INFO(rw.err);
  REQUIRE(rw.code == 0);
  std::ifstream in(dir / "run/reward/rewards.jsonl");
  std::string line;
  std::vector<json> rows;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  REQUIRE(rows.size() == 20);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i]["sample_id"] == fx.entries[i].id);
  // c01 has no answer marker, so only its sound steps count
  CHECK(rows[0]["R_acc"] == 0.0);
  CHECK(rows[0]["R_total"].get<double>() == doctest::Approx(0.8));
  CHECK(rows[0]["R_css"].is_null());
  // c12 is malformed and earns nothing from its steps
  CHECK(rows[11]["R_valid"] == 0.0);

  // reward with a verdicts file that lost a row
  auto broken = dir / "broken";
  fs::create_directories(broken);
  fs::copy_file(dir / "run/eval-steps/chains.jsonl", broken / "chains.jsonl");
  std::ifstream vin(dir / "run/eval-steps/verdicts.jsonl");
  std::ofstream vout(broken / "verdicts.jsonl");
  std::getline(vin, line);
  while (std::getline(vin, line)) vout << line << '\n';
  vout.close();
  write_file(dir / "broken.yaml", "out: run2\nreward:\n  steps: " + broken.string() + "\n");
  auto b = invoke({"reward", "--config", (dir / "broken.yaml").string()});
  CHECK(b.code == 2);
  CHECK(b.err.find("AlignmentError") != std::string::npos);
}

TEST_CASE("cli: natural chains without a judge report unknowns with a warning") {
  auto dir = fresh("natural");
  std::ofstream(dir / "in.jsonl") << json{{"problem_id", "n1"},
                                          {"output", "Step 1: From fact1, we derive:\nint1: Tom is a mammal."}}
                                         .dump()
                                  << '\n';
  write_file(dir / "run.yaml", "out: run\nsteps:\n  input: in.jsonl\n  dialect: natural\n");
  auto r = invoke({"eval-steps", "--config", (dir / "run.yaml").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  auto a = load_json(dir / "run/eval-steps/aggregate.json");
  CHECK(a["unknown_valid_rate"] == 1.0);
}

TEST_CASE("cli: probe is deterministic and refuses leaky splits") {
  auto dir = fresh("probe");
  auto pdir = testing::fixture_dir() / "probe";
  write_file(dir / "run.yaml", "out: run\nseed: 5\nprobe:\n  dump: " + (pdir / "synthetic_dump.jsonl").string() +
                                   "\n  split: " + (pdir / "split.json").string() + "\n  c_grid: [0.1, 1, 10]\n  folds: 3\n");
  auto r1 = invoke({"probe", "--config", (dir / "run.yaml").string()});
  INFO(r1.err);
  REQUIRE(r1.code == 0);
  auto first = slurp(dir / "run/probe/report.json");
  auto rep = json::parse(first);
  CHECK(rep["probe"]["folds"] == 3);
  CHECK(rep["probe"]["seed"] == 5);
  CHECK(rep["rows"].size() == 3);
  for (const auto& row : rep["rows"]) CHECK(row.contains("C"));
  REQUIRE(invoke({"probe", "--config", (dir / "run.yaml").string(), "--jobs", "1"}).code == 0);
  CHECK(slurp(dir / "run/probe/report.json") == first);

  write_file(dir / "leak.yaml", "out: leak\nprobe:\n  dump: " + (pdir / "synthetic_dump.jsonl").string() +
                                    "\n  split: " + (pdir / "leaky_split.json").string() + "\n");
  auto l = invoke({"probe", "--config", (dir / "leak.yaml").string()});
  CHECK(l.code == 2);
  CHECK(l.err.find("SplitLeakage") != std::string::npos);

  write_file(dir / "bad.yaml", "out: bad\nprobe:\n  dump: " + (pdir / "bad_width_dump.jsonl").string() +
                                   "\n  split: " + (pdir / "split.json").string() + "\n");
  CHECK(invoke({"probe", "--config", (dir / "bad.yaml").string()}).code == 2);
  CHECK(fs::exists(dir / "bad/probe/dump_report.json"));
}

TEST_CASE("cli: gen-sft, instance export and report merge") {
  auto dir = fresh("sft");
  std::mt19937_64 rng(8);
  {
    std::ofstream f(dir / "golds.jsonl");
    for (int i = 0; i < 24; ++i) {
      auto g = testing::random_gold(rng, bench::DatasetKind::FLD, 2 + i % 4, i % 3 ? bench::Label::T : bench::Label::F,
                                    "g" + std::to_string(i));
      f << sft::gold_to_json(g).dump() << '\n';
    }
  }
  write_file(dir / "all.yaml", "out: run\nsft:\n  golds: golds.jsonl\n  manifest: all\n  styles: [NL, SymbFilter]\n"
                               "probe:\n  instances:\n    source: golds.jsonl\n    tasks: [CSS, NSD]\n");
  auto r = invoke({"gen-sft", "--config", (dir / "all.yaml").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "run/gen-sft/sft_NL.jsonl"));
  CHECK(fs::exists(dir / "run/gen-sft/sft_SymbFilter.jsonl"));
  CHECK_FALSE(fs::exists(dir / "run/gen-sft/sft_SymbStruct.jsonl"));
  CHECK(load_json(dir / "run/gen-sft/corpus.json")["styles"]["NL"]["total"] == 24);

  write_file(dir / "fld.yaml", "out: run\nsft:\n  golds: golds.jsonl\n  manifest: fld\n");
  auto s = invoke({"gen-sft", "--config", (dir / "fld.yaml").string()});
  CHECK(s.code == 2);
  CHECK(s.err.find("ManifestShortfall") != std::string::npos);

  auto p = invoke({"probe", "--config", (dir / "all.yaml").string()});
  INFO(p.err);
  REQUIRE(p.code == 0);
  auto inst = load_json(dir / "run/probe/instances_report.json");
  CHECK(inst["per_task"]["CSS"].get<int>() > 0);
  CHECK(inst["problems"] == 24);

  auto m1 = invoke({"report", "--config", (dir / "all.yaml").string()});
  REQUIRE(m1.code == 0);
  auto text = slurp(dir / "run/report/summary.txt");
  auto csv = slurp(dir / "run/report/summary.csv");
  CHECK(text.find("NL samples: 24") != std::string::npos);
  REQUIRE(invoke({"report", "--config", (dir / "all.yaml").string()}).code == 0);
  CHECK(slurp(dir / "run/report/summary.txt") == text);
  CHECK(slurp(dir / "run/report/summary.csv") == csv);
}
