#include "commands.hpp"

#include <omp.h>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "finelogic/eval/step_evaluator.hpp"
#include "finelogic/probe/suite.hpp"
#include "finelogic/probe/tasks.hpp"
#include "finelogic/util/hash.hpp"

namespace finelogic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path& Context::input(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw ConfigError("input not found: " + p.string());
  inputs[p.string()] = util::sha256_file(p);
  return p;
}

fs::path Context::output(const std::string& name) {
  outputs.push_back(name);
  return dir / name;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::ifstream in(p);
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw bench::SchemaError(n, std::string(p.filename()) + ": " + e.what());
    }
  }
  return out;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string file_stem(std::string name) {
  for (auto& ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return name;
}

std::map<std::string, bench::Problem> problems_by_id(Context& ctx) {
  std::map<std::string, bench::Problem> out;
  for (const auto& d : ctx.cfg.datasets) {
    for (auto& p : bench::load_dataset(ctx.input(d.path), d.kind, d.check_manifest)) out.emplace(p.id, std::move(p));
  }
  return out;
}

}  // namespace

int cmd_eval_bench(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.datasets.empty()) throw ConfigError("eval-bench needs at least one entry under datasets");
  if (!cfg.generator) throw ConfigError("eval-bench needs a generator endpoint");
  std::vector<std::string> exemplars;
  for (const auto& p : cfg.exemplars) exemplars.push_back(read_text(ctx.input(p)));
  std::vector<std::pair<const DatasetEntry*, std::vector<bench::Problem>>> sets;
  for (const auto& d : cfg.datasets) sets.emplace_back(&d, bench::load_dataset(ctx.input(d.path), d.kind, d.check_manifest));
  if (cfg.mode == bench::PromptMode::FewShot && exemplars.empty()) {
    throw ConfigError("few-shot mode needs bench.exemplars");
  }

  net::CompletionClient client(*cfg.generator);
  std::vector<bench::ReportRow> rows;
  std::size_t errors = 0;
  for (const auto& [d, problems] : sets) {
    auto records = bench::run_eval(problems, client, cfg.mode, exemplars, cfg.jobs);
    std::string stem = file_stem(d->name);
    {
      auto f = open_out(ctx.output("records_" + stem + ".jsonl"));
      for (const auto& r : records) {
        auto j = bench::record_to_json(r);
        j.erase("latency_ms");  // wall-clock time would make reruns differ
        f << j.dump() << '\n';
        errors += r.error.has_value();
      }
    }
    auto row = bench::summarize(records, d->kind, cfg.mode);
    row.dataset = d->name;
    rows.push_back(row);
    bool has_depth = std::any_of(problems.begin(), problems.end(), [](const auto& p) { return p.depth.has_value(); });
    if (has_depth) {
      auto depth = bench::accuracy_by_depth(records, problems);
      auto f = open_out(ctx.output("depth_" + stem + ".csv"));
      bench::write_depth_csv(f, row, depth);
      write_json(ctx.output("depth_" + stem + ".json"), bench::depth_to_json(row, depth));
    }
  }
  {
    auto f = open_out(ctx.output("accuracy.csv"));
    bench::write_report_csv(f, rows);
  }
  write_json(ctx.output("accuracy.json"), bench::report_to_json(rows));
  for (const auto& r : rows) {
    ctx.out << r.dataset << ": accuracy " << fixed(r.accuracy, 4) << " over " << r.n << " problems\n";
  }
  ctx.out << "network calls " << client.network_calls() << ", cache hits " << client.cache_hits() << "\n";
  if (errors) {
    ctx.err << errors << " records failed at the endpoint\n";
    return kPartial;
  }
  return kOk;
}

int cmd_eval_steps(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.steps_input) throw ConfigError("eval-steps needs steps.input");
  auto rows = read_jsonl(ctx.input(*cfg.steps_input));
  auto problems = problems_by_id(ctx);

  std::vector<proof::ProofChain> chains;
  std::vector<std::optional<bench::Label>> golds;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string id = r.value("problem_id", r.value("id", ""));
    if (id.empty()) throw bench::SchemaError(i + 1, "record has no problem_id");
    std::optional<bench::Label> gold;
    const bench::Problem* problem = nullptr;
    if (auto it = problems.find(id); it != problems.end()) {
      problem = &it->second;
      gold = problem->label;
    }
    if (r.contains("gold") && r["gold"].is_string()) {
      gold = bench::label_from_name(r["gold"].get<std::string>());
      if (!gold) throw bench::SchemaError(i + 1, "unknown gold label " + r["gold"].dump());
    }
    proof::ProofChain chain;
    if (r.contains("chain")) {
      chain = proof::chain_from_json(r["chain"]);
    } else {
      std::string text;
      for (const char* k : {"raw_output", "output", "text", "proof"}) {
        if (r.contains(k) && r[k].is_string()) {
          text = r[k].get<std::string>();
          break;
        }
      }
      proof::ParseOptions o;
      o.dialect = cfg.dialect;
      o.problem_id = id;
      if (problem) o.facts = problem->given_facts();
      chain = proof::parse_proof(proof::strip_preamble(text), o);
    }
    chain.problem_id = id;
    chains.push_back(std::move(chain));
    golds.push_back(gold);
  }

  std::optional<eval::RemoteJudge> judge;
  if (cfg.judge) judge.emplace(*cfg.judge);
  bool natural = std::any_of(chains.begin(), chains.end(),
                             [](const auto& c) { return c.dialect == proof::Dialect::Natural; });
  if (natural && !judge) {
    ctx.err << "warning: natural-dialect chains without a judge endpoint; their validity and atomicity stay unknown\n";
  }
  eval::EvaluatorConfig ec;
  ec.budget = cfg.budget;
  ec.judge = judge ? &*judge : nullptr;
  auto verdicts = eval::evaluate_chains_parallel(chains, ec);
  {
    auto cf = open_out(ctx.output("chains.jsonl"));
    auto vf = open_out(ctx.output("verdicts.jsonl"));
    for (std::size_t i = 0; i < chains.size(); ++i) {
      cf << json{{"problem_id", chains[i].problem_id},
                 {"gold", golds[i] ? json(bench::label_name(*golds[i])) : json(nullptr)},
                 {"chain", proof::chain_to_json(chains[i])}}
                .dump()
         << '\n';
      vf << eval::verdict_to_json(verdicts[i]).dump() << '\n';
    }
  }
  eval::Aggregate a;
  try {
    a = eval::aggregate(verdicts);
  } catch (const eval::EmptyCohort& e) {
    throw ConfigError(std::string("eval-steps: ") + e.what());
  }
  write_json(ctx.output("aggregate.json"), eval::aggregate_to_json(a));
  {
    auto f = open_out(ctx.output("aggregate.csv"));
    f << "N,excluded,malformed,AllValid,AllRelevant,AllAtomic,unknown-valid-rate,unknown-atomic-rate\n"
      << a.chains << ',' << a.excluded << ',' << a.malformed << ',' << fixed(a.all_valid) << ','
      << fixed(a.all_relevant) << ',' << fixed(a.all_atomic) << ',' << fixed(a.unknown_valid_rate) << ','
      << fixed(a.unknown_atomic_rate) << '\n';
  }
  ctx.out << "AllValid " << fixed(a.all_valid, 4) << ", AllRelevant " << fixed(a.all_relevant, 4) << ", AllAtomic "
          << fixed(a.all_atomic, 4) << " over " << a.chains << " chains\n";
  return kOk;
}

int cmd_probe(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.dump && !cfg.instance_source) throw ConfigError("probe needs probe.dump or probe.instances.source");
  if (cfg.dump && !cfg.split) throw ConfigError("probe.dump needs probe.split");

  if (cfg.instance_source) {
    auto problems = bench::load_dataset(ctx.input(*cfg.instance_source), cfg.instance_kind, false);
    std::sort(problems.begin(), problems.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<probe::InstanceSpec> specs;
    json skipped = json::array();
    std::map<std::string, std::size_t> counts;
    for (const auto& p : problems) {
      for (const auto& name : cfg.instance_tasks) {
        auto task = *probe::task_from_name(name);
        try {
          std::vector<probe::InstanceSpec> built;
          if (task == probe::Task::CSS) built = probe::build_css_prefixes(p);
          if (task == probe::Task::RFI) built = probe::build_rfi_instances(p, cfg.seed);
          if (task == probe::Task::NSD) built = probe::build_nsd_instances(p, cfg.seed);
          counts[name] += built.size();
          specs.insert(specs.end(), built.begin(), built.end());
        } catch (const std::invalid_argument& e) {
          skipped.push_back({{"problem_id", p.id}, {"task", name}, {"reason", e.what()}});
        }
      }
    }
    probe::write_instances(ctx.output("instances.jsonl"), specs);
    write_json(ctx.output("instances_report.json"),
               {{"problems", problems.size()}, {"instances", specs.size()}, {"per_task", counts}, {"skipped", skipped}});
    ctx.out << "wrote " << specs.size() << " probing instances, skipped " << skipped.size() << " problem-task pairs\n";
  }

  if (cfg.dump) {
    auto report = probe::validate_dump(ctx.input(*cfg.dump));
    json dump_json = {{"valid", report.valid},
                      {"records", report.records},
                      {"dim", report.dim},
                      {"per_task", report.per_task},
                      {"violations", report.violations}};
    if (!report.valid) {
      write_json(ctx.output("dump_report.json"), dump_json);
      throw ConfigError("dump failed validation with " + std::to_string(report.violations.size()) +
                        " violations; see dump_report.json");
    }
    auto split = probe::load_split(ctx.input(*cfg.split));
    probe::check_split(split);
    probe::SuiteOptions so;
    so.probe.c_grid = cfg.c_grid;
    so.probe.folds = cfg.folds;
    so.probe.seed = cfg.seed;
    so.reading = cfg.reading;
    auto rows = probe::run_probing_suite(*cfg.dump, split, so);
    json out = {{"dump", dump_json},
                {"split", {{"train", split.train.size()}, {"test", split.test.size()}}},
                {"probe",
                 {{"c_grid", cfg.c_grid},
                  {"folds", cfg.folds},
                  {"seed", cfg.seed},
                  {"reading", cfg.reading == probe::CssReading::Suffix ? "suffix" : "local"},
                  {"model", "L2 logistic regression"}}},
                {"rows", probe::suite_to_json(rows)}};
    write_json(ctx.output("report.json"), out);
    auto f = open_out(ctx.output("report.csv"));
    f << "task,train,test,C,balanced-accuracy,css\n";
    for (const auto& r : rows) {
      f << probe::task_name(r.task) << ',' << r.train_records << ',' << r.test_records << ',' << r.c << ','
        << fixed(r.balanced_accuracy) << ',' << (r.css ? fixed(*r.css) : "") << '\n';
      ctx.out << probe::task_name(r.task) << ": balanced accuracy " << fixed(r.balanced_accuracy, 4) << " (C=" << r.c
              << ")\n";
    }
  }
  return kOk;
}

int cmd_gen_sft(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.golds) throw ConfigError("gen-sft needs sft.golds");
  auto golds = sft::load_gold_pool(ctx.input(*cfg.golds));
  for (const auto& g : golds) sft::check_glossary(g);
  json counts = json::object();
  for (auto style : cfg.styles) {
    std::string name(sft::style_name(style));
    sft::Corpus corpus;
    if (cfg.sft_manifest == "all") {
      std::vector<const sft::GoldProblem*> order;
      for (const auto& g : golds) order.push_back(&g);
      std::sort(order.begin(), order.end(), [](auto a, auto b) { return a->problem.id < b->problem.id; });
      corpus.samples.resize(order.size());
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t i = 0; i < order.size(); ++i) corpus.samples[i] = sft::generate(*order[i], style);
      for (const auto& s : corpus.samples) {
        ++corpus.report.counts[{name, s.depth.value_or(-1), std::string(bench::label_name(s.label))}];
      }
      corpus.report.total = corpus.samples.size();
    } else {
      auto manifest = cfg.sft_manifest == "fld" ? sft::fld_manifest() : sft::prontoqa_manifest();
      corpus = sft::build_corpus(golds, style, manifest, cfg.seed);
    }
    sft::write_corpus(ctx.output("sft_" + name + ".jsonl"), corpus.samples);
    counts[name] = corpus.report.to_json();
    ctx.out << name << ": " << corpus.samples.size() << " samples\n";
  }
  write_json(ctx.output("corpus.json"), {{"manifest", cfg.sft_manifest}, {"styles", counts}});
  return kOk;
}

int cmd_reward(Context& ctx) {
  const auto& cfg = ctx.cfg;
  fs::path steps = cfg.reward_steps ? *cfg.reward_steps : cfg.out / "eval-steps";
  auto chain_rows = read_jsonl(ctx.input(steps / "chains.jsonl"));
  auto verdict_rows = read_jsonl(ctx.input(steps / "verdicts.jsonl"));
  std::map<std::string, eval::ChainVerdict> by_id;
  for (const auto& v : verdict_rows) {
    auto cv = eval::verdict_from_json(v);
    by_id[cv.problem_id] = std::move(cv);
  }
  std::vector<proof::ProofChain> chains;
  std::vector<eval::ChainVerdict> verdicts;
  std::vector<proof::Answer> gold;
  for (const auto& r : chain_rows) {
    std::string id = r.at("problem_id");
    auto it = by_id.find(id);
    if (it == by_id.end()) throw reward::AlignmentError("no verdict for sample " + id);
    if (!r.contains("gold") || r["gold"].is_null()) throw ConfigError("no gold label for sample " + id);
    chains.push_back(proof::chain_from_json(r["chain"]));
    chains.back().problem_id = id;
    verdicts.push_back(it->second);
    gold.push_back(bench::answer_for(*bench::label_from_name(r["gold"].get<std::string>())));
    by_id.erase(it);
  }
  if (!by_id.empty()) throw reward::AlignmentError("verdict for unknown sample " + by_id.begin()->first);

  std::map<std::string, probe::PredictionTrace> traces;
  if (cfg.traces) {
    for (const auto& t : read_jsonl(ctx.input(*cfg.traces))) {
      probe::PredictionTrace tr{t.at("problem_id"), t.at("correct").get<std::vector<bool>>()};
      traces[tr.problem_id] = std::move(tr);
    }
  }
  reward::RewardBatchOptions opts;
  opts.weights = cfg.weights;
  opts.mode = cfg.reward_mode;
  opts.reading = cfg.reading;
  auto records = reward::reward_batch(chains, verdicts, gold, traces, opts);
  reward::write_rewards(ctx.output("rewards.jsonl"), records);
  double sum = 0;
  for (const auto& r : records) sum += r.total;
  double mean = records.empty() ? 0.0 : sum / static_cast<double>(records.size());
  write_json(ctx.output("summary.json"), {{"samples", records.size()},
                                          {"mean_reward", mean},
                                          {"mode", reward::mode_name(cfg.reward_mode)},
                                          {"weights",
                                           {{"w_v", cfg.weights.w_v},
                                            {"w_r", cfg.weights.w_r},
                                            {"w_a", cfg.weights.w_a},
                                            {"w_c", cfg.weights.w_c}}}});
  ctx.out << "mean reward " << fixed(mean, 4) << " over " << records.size() << " samples\n";
  return kOk;
}

int cmd_report(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<fs::path> roots = cfg.report_inputs.empty() ? std::vector<fs::path>{cfg.out} : cfg.report_inputs;
  // (section, key, value) rows in a stable order
  std::vector<std::array<std::string, 3>> rows;
  std::vector<fs::path> files;
  for (const auto& root : roots) {
    if (!fs::is_directory(root)) throw ConfigError("report input is not a directory: " + root.string());
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      if (fs::equivalent(e.path().parent_path(), ctx.dir)) continue;
      auto name = e.path().filename().string();
      if (name == "accuracy.json" || name == "aggregate.json" || name == "report.json" || name == "corpus.json" ||
          name == "summary.json") {
        files.push_back(e.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    json j = json::parse(in);
    ctx.input(f);
    std::string where = fs::relative(f.parent_path(), roots.front()).string();
    auto name = f.filename().string();
    auto add = [&](const std::string& key, const json& v) {
      rows.push_back({where, key, v.is_string() ? v.get<std::string>() : v.dump()});
    };
    if (name == "accuracy.json") {
      for (const auto& r : j) {
        add(r.value("dataset", "") + " accuracy", r["accuracy"]);
        add(r.value("dataset", "") + " abstention-rate", r["abstention-rate"]);
        add(r.value("dataset", "") + " N", r["N"]);
      }
    } else if (name == "aggregate.json") {
      for (auto it = j.begin(); it != j.end(); ++it) add(it.key(), it.value());
    } else if (name == "report.json" && j.contains("rows")) {
      for (const auto& r : j["rows"]) {
        std::string task = r.value("task", "");
        add(task + " balanced-accuracy", r["balanced_accuracy"]);
        if (r.contains("css") && !r["css"].is_null()) add(task + " css", r["css"]);
      }
    } else if (name == "corpus.json") {
      for (auto it = j["styles"].begin(); it != j["styles"].end(); ++it) add(it.key() + " samples", it.value()["total"]);
    } else if (name == "summary.json") {
      add("mean reward", j["mean_reward"]);
      add("samples", j["samples"]);
    }
  }
  {
    auto f = open_out(ctx.output("summary.csv"));
    f << "section,key,value\n";
    for (const auto& r : rows) f << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  }
  {
    auto f = open_out(ctx.output("summary.txt"));
    std::string current;
    for (const auto& r : rows) {
      if (r[0] != current) {
        f << (current.empty() ? "" : "\n") << "[" << r[0] << "]\n";
        current = r[0];
      }
      f << "  " << r[1] << ": " << r[2] << '\n';
    }
  }
  ctx.out << "merged " << files.size() << " reports\n";
  return kOk;
}

}  // namespace finelogic::cli
