#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/bench/dataset.hpp"
#include "finelogic/bench/harness.hpp"
#include "finelogic/logic/entailment.hpp"
#include "finelogic/net/completion_client.hpp"
#include "finelogic/probe/css.hpp"
#include "finelogic/proof/chain.hpp"
#include "finelogic/reward/reward.hpp"
#include "finelogic/sft/forge.hpp"

namespace finelogic::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInternal = 1, kInvalid = 2, kPartial = 3 };

/// Bad configuration or inputs; exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetEntry {
  std::string name;
  bench::DatasetKind kind = bench::DatasetKind::Custom;
  std::filesystem::path path;
  bool check_manifest = false;
};

struct RunConfig {
  std::filesystem::path out = "runs/default";
  std::uint64_t seed = 0;
  std::size_t jobs = 4;

  std::vector<DatasetEntry> datasets;
  bench::PromptMode mode = bench::PromptMode::Cot;
  std::vector<std::filesystem::path> exemplars;
  std::optional<net::EndpointConfig> generator;
  std::optional<net::EndpointConfig> judge;
  logic::SearchBudget budget;

  // eval-steps
  std::optional<std::filesystem::path> steps_input;
  proof::Dialect dialect = proof::Dialect::Symbolic;

  // probe
  std::optional<std::filesystem::path> dump;
  std::optional<std::filesystem::path> split;
  std::vector<double> c_grid{0.01, 0.1, 1, 10, 100};
  int folds = 5;
  probe::CssReading reading = probe::CssReading::Suffix;
  std::optional<std::filesystem::path> instance_source;  // dataset with gold proofs
  bench::DatasetKind instance_kind = bench::DatasetKind::FLD;
  std::vector<std::string> instance_tasks{"CSS", "RFI", "NSD"};

  // gen-sft
  std::optional<std::filesystem::path> golds;
  std::vector<sft::Style> styles{sft::Style::NL, sft::Style::SymbStruct, sft::Style::SymbFilter,
                                 sft::Style::SymbDirect};
  std::string sft_manifest = "fld";  // fld, prontoqa or all

  // reward
  std::optional<std::filesystem::path> reward_steps;  // an eval-steps output directory
  std::optional<std::filesystem::path> traces;
  reward::RewardWeights weights;
  reward::RewardMode reward_mode = reward::RewardMode::Fractional;

  // report
  std::vector<std::filesystem::path> report_inputs;
};

/// Replaces ${NAME} with the environment value; ${NAME:-fallback} supplies a
/// default. Throws ConfigError for unset names without a default.
std::string interpolate_env(const std::string& text);

/// Parses the YAML file. Relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Resolved configuration; never holds credentials, only the names of the
/// variables that carry them.
nlohmann::json config_to_json(const RunConfig& c);

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace finelogic::cli
