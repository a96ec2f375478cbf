#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "finelogic/probe/suite.hpp"

namespace finelogic::probe {

namespace {

struct TaskData {
  Eigen::MatrixXd x;
  std::vector<bool> y;
  std::vector<const RepresentationRecord*> records;
};

TaskData gather(const Dump& dump, Task task, const std::set<std::string>& ids) {
  TaskData t;
  for (const auto& r : dump.records) {
    if (r.task == task && ids.count(r.problem_id)) t.records.push_back(&r);
  }
  t.x.resize(static_cast<Eigen::Index>(t.records.size()), static_cast<Eigen::Index>(dump.header.dim));
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& v = t.records[i]->vector;
    for (std::size_t j = 0; j < v.size(); ++j) {
      t.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
    t.y.push_back(t.records[i]->label == positive_label(task));
  }
  return t;
}

SuiteRow run_task(const Dump& dump, Task task, const std::set<std::string>& train_ids,
                  const std::set<std::string>& test_ids, const SuiteOptions& opts) {
  TaskData train = gather(dump, task, train_ids);
  TaskData test = gather(dump, task, test_ids);
  std::vector<std::string> groups;
  for (const auto* r : train.records) groups.push_back(r->problem_id);
  Probe probe = train_probe(train.x, train.y, groups, opts.probe);
  std::vector<bool> pred = probe.predict_all(test.x);

  SuiteRow row;
  row.task = task;
  row.train_records = train.records.size();
  row.test_records = test.records.size();
  row.c = probe.c;
  row.balanced_accuracy = balanced_accuracy(pred, test.y);
  if (task == Task::CSS) {
    std::map<std::string, std::map<int, bool>> steps;
    for (std::size_t i = 0; i < test.records.size(); ++i) {
      steps[test.records[i]->problem_id][test.records[i]->step_index] = pred[i] == test.y[i];
    }
    std::vector<PredictionTrace> traces;
    for (auto& [id, by_step] : steps) {
      PredictionTrace t{id, {}};
      for (auto [idx, ok] : by_step) t.correct.push_back(ok);
      traces.push_back(std::move(t));
    }
    row.css = css_score(traces, opts.reading);
  }
  return row;
}

}  // namespace

void check_split(const SplitManifest& split) {
  std::set<std::string> train(split.train.begin(), split.train.end());
  for (const auto& id : split.test) {
    if (train.count(id)) throw SplitLeakage("problem " + id + " is in both the train and test splits");
  }
}

SplitManifest load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto j = nlohmann::json::parse(in);
  SplitManifest s{j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>()};
  check_split(s);
  return s;
}

nlohmann::json split_to_json(const SplitManifest& split) { return {{"train", split.train}, {"test", split.test}}; }

std::vector<SuiteRow> run_probing_suite(const Dump& dump, const SplitManifest& split, const SuiteOptions& opts) {
  check_split(split);
  std::set<std::string> train(split.train.begin(), split.train.end());
  std::set<std::string> test(split.test.begin(), split.test.end());
  std::vector<Task> tasks;
  for (Task t : {Task::CSS, Task::RFI, Task::NSD}) {
    if (std::any_of(dump.records.begin(), dump.records.end(), [&](const auto& r) { return r.task == t; })) {
      tasks.push_back(t);
    }
  }
  std::vector<std::optional<SuiteRow>> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  SuiteOptions serial = opts;
  serial.probe.parallel = false;
#pragma omp parallel for schedule(static, 1)
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      rows[i] = run_task(dump, tasks[i], train, test, serial);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  std::vector<SuiteRow> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*rows[i]));
  }
  return out;
}

std::vector<SuiteRow> run_probing_suite(const std::filesystem::path& dump_path, const SplitManifest& split,
                                        const SuiteOptions& opts) {
  check_split(split);
  return run_probing_suite(read_dump(dump_path), split, opts);
}

nlohmann::json suite_to_json(const std::vector<SuiteRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"task", task_name(r.task)},
                   {"train_records", r.train_records},
                   {"test_records", r.test_records},
                   {"C", r.c},
                   {"balanced_accuracy", r.balanced_accuracy},
                   {"css", r.css ? nlohmann::json(*r.css) : nlohmann::json(nullptr)}});
  }
  return out;
}

}  // namespace finelogic::probe
