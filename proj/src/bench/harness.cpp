#include <atomic>
#include <chrono>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "finelogic/bench/harness.hpp"
#include "finelogic/bench/prompts.hpp"

namespace finelogic::bench {

namespace {

std::size_t count_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    n += !space && !in_word;
    in_word = !space;
  }
  return n;
}

std::string fixed(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string_view mode_name(PromptMode m) {
  switch (m) {
    case PromptMode::Direct:
      return "direct";
    case PromptMode::Cot:
      return "cot";
    case PromptMode::FewShot:
      return "fewshot";
  }
  return "direct";
}

std::optional<PromptMode> mode_from_name(std::string_view s) {
  if (s == "direct") return PromptMode::Direct;
  if (s == "cot") return PromptMode::Cot;
  if (s == "fewshot") return PromptMode::FewShot;
  return std::nullopt;
}

std::string build_prompt(const Problem& problem, PromptMode mode, const std::vector<std::string>& exemplars) {
  std::map<std::string, std::string> values{{"facts", format_facts(problem.facts)},
                                            {"hypothesis", problem.hypothesis}};
  switch (mode) {
    case PromptMode::Direct:
      return fill_template(kDirectReasoning, values);
    case PromptMode::Cot:
      return fill_template(kCotReasoning, values);
    case PromptMode::FewShot: {
      if (exemplars.empty()) throw MissingExemplar("few-shot prompt for " + problem.id + " needs an exemplar");
      std::string example;
      for (std::size_t i = 0; i < exemplars.size(); ++i) {
        if (i) example += "\n\n";
        example += exemplars[i];
      }
      values["example"] = example;
      return fill_template(kFewShotReasoning, values);
    }
  }
  return {};
}

EvalRecord score_output(const Problem& problem, std::string raw_output) {
  EvalRecord r;
  r.problem_id = problem.id;
  r.gold = problem.label;
  r.predicted = proof::extract_answer(proof::strip_preamble(raw_output));
  r.correct = answer_matches(r.predicted, r.gold);
  r.output_tokens = count_tokens(raw_output);
  r.raw_output = std::move(raw_output);
  return r;
}

std::vector<EvalRecord> run_eval(const std::vector<Problem>& problems, net::CompletionClient& client, PromptMode mode,
                                 const std::vector<std::string>& exemplars, std::size_t jobs) {
  std::vector<std::string> prompts;
  prompts.reserve(problems.size());
  for (const auto& p : problems) prompts.push_back(build_prompt(p, mode, exemplars));

  std::vector<EvalRecord> records(problems.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      auto start = std::chrono::steady_clock::now();
      EvalRecord r;
      try {
        r = score_output(problems[i], client.complete(prompts[i]));
      } catch (const net::EndpointError& e) {
        r.problem_id = problems[i].id;
        r.gold = problems[i].label;
        r.error = e.what();
      }
      r.prompt_tokens = count_tokens(prompts[i]);
      r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      records[i] = std::move(r);
    }
  };
  std::size_t n = std::max<std::size_t>(1, std::min(jobs, problems.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return records;
}

double accuracy(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw EmptyCohort("accuracy over zero records");
  std::size_t correct = 0;
  for (const auto& r : records) correct += r.correct;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double abstention_rate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw EmptyCohort("abstention rate over zero records");
  std::size_t none = 0;
  for (const auto& r : records) none += r.predicted == proof::Answer::None;
  return static_cast<double>(none) / static_cast<double>(records.size());
}

std::vector<DepthBin> default_depth_bins() { return {{0, 3}, {4, 7}, {8, 11}, {12, 15}, {16, 19}}; }

std::vector<DepthRow> accuracy_by_depth(const std::vector<EvalRecord>& records, const std::vector<Problem>& problems,
                                        const std::vector<DepthBin>& bins) {
  std::map<std::string, const Problem*> by_id;
  for (const auto& p : problems) by_id[p.id] = &p;
  std::vector<DepthRow> rows;
  for (const auto& b : bins) rows.push_back({b, 0, 0, std::nullopt});
  for (const auto& r : records) {
    auto it = by_id.find(r.problem_id);
    if (it == by_id.end() || !it->second->depth) throw DepthMissing("no depth for problem " + r.problem_id);
    int d = *it->second->depth;
    for (auto& row : rows) {
      if (d >= row.bin.lo && d <= row.bin.hi) {
        ++row.count;
        row.correct += r.correct;
        break;
      }
    }
  }
  for (auto& row : rows) {
    if (row.count) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.count);
  }
  return rows;
}

ReportRow summarize(const std::vector<EvalRecord>& records, DatasetKind dataset, PromptMode mode) {
  return {std::string(dataset_name(dataset)), std::string(mode_name(mode)), records.size(), accuracy(records),
          abstention_rate(records)};
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "dataset,mode,N,accuracy,abstention-rate\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.mode << ',' << r.n << ',' << fixed(r.accuracy) << ',' << fixed(r.abstention_rate)
        << '\n';
  }
}

nlohmann::json report_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"dataset", r.dataset},
                   {"mode", r.mode},
                   {"N", r.n},
                   {"accuracy", r.accuracy},
                   {"abstention-rate", r.abstention_rate}});
  }
  return out;
}

void write_depth_csv(std::ostream& out, const ReportRow& summary, const std::vector<DepthRow>& rows) {
  out << "dataset,mode,N,accuracy,abstention-rate,bin,count\n";
  for (const auto& r : rows) {
    out << summary.dataset << ',' << summary.mode << ',' << summary.n << ','
        << (r.accuracy ? fixed(*r.accuracy) : std::string()) << ',' << fixed(summary.abstention_rate) << ','
        << r.bin.name() << ',' << r.count << '\n';
  }
}

nlohmann::json depth_to_json(const ReportRow& summary, const std::vector<DepthRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"dataset", summary.dataset},
                   {"mode", summary.mode},
                   {"N", summary.n},
                   {"accuracy", r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr)},
                   {"abstention-rate", summary.abstention_rate},
                   {"bin", r.bin.name()},
                   {"count", r.count}});
  }
  return out;
}

nlohmann::json record_to_json(const EvalRecord& r) {
  nlohmann::json j = {{"problem_id", r.problem_id},
                      {"raw_output", r.raw_output},
                      {"predicted", proof::answer_name(r.predicted)},
                      {"gold", label_name(r.gold)},
                      {"correct", r.correct},
                      {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
                      {"latency_ms", r.latency_ms},
                      {"prompt_tokens", r.prompt_tokens},
                      {"output_tokens", r.output_tokens}};
  return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.problem_id = j.at("problem_id").get<std::string>();
  r.raw_output = j.value("raw_output", "");
  r.predicted = proof::answer_from_name(j.value("predicted", "NONE")).value_or(proof::Answer::None);
  r.gold = label_from_name(j.at("gold").get<std::string>()).value_or(Label::Unknown);
  r.correct = j.at("correct").get<bool>();
  if (j.contains("error") && j.at("error").is_string()) r.error = j.at("error").get<std::string>();
  r.latency_ms = j.value("latency_ms", 0.0);
  r.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
  r.output_tokens = j.value("output_tokens", std::size_t{0});
  return r;
}

}  // namespace finelogic::bench
