#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/probe/css.hpp"
#include "finelogic/probe/dump.hpp"
#include "finelogic/probe/logistic.hpp"

namespace finelogic::probe {

class SplitLeakage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Throws SplitLeakage if an id appears in both lists.
void check_split(const SplitManifest& split);
SplitManifest load_split(const std::filesystem::path& path);
nlohmann::json split_to_json(const SplitManifest& split);

struct SuiteRow {
  Task task = Task::CSS;
  std::size_t train_records = 0;
  std::size_t test_records = 0;
  double c = 0;
  double balanced_accuracy = 0;
  /// CSS span over the test problems; CSS rows only.
  std::optional<double> css;
};

struct SuiteOptions {
  ProbeOptions probe;
  CssReading reading = CssReading::Suffix;
};

/// Trains one probe per task present in the dump on the training split and
/// scores it on the test split. Rows follow the order CSS, RFI, NSD.
std::vector<SuiteRow> run_probing_suite(const Dump& dump, const SplitManifest& split, const SuiteOptions& opts = {});
std::vector<SuiteRow> run_probing_suite(const std::filesystem::path& dump_path, const SplitManifest& split,
                                        const SuiteOptions& opts = {});

nlohmann::json suite_to_json(const std::vector<SuiteRow>& rows);

}  // namespace finelogic::probe
