#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finelogic/eval/step_evaluator.hpp"
#include "finelogic/probe/css.hpp"
#include "finelogic/proof/chain.hpp"

namespace finelogic::reward {

class OutOfRangeComponent : public std::invalid_argument {
 public:
  OutOfRangeComponent(std::string component, double value)
      : std::invalid_argument(component + " out of range: " + std::to_string(value)),
        component_(std::move(component)),
        value_(value) {}
  const std::string& component() const { return component_; }
  double value() const { return value_; }

 private:
  std::string component_;
  double value_;
};

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RewardWeights {
  double w_v = 0.4;
  double w_r = 0.2;
  double w_a = 0.2;
  double w_c = 0.2;
};

struct RewardInputs {
  double acc = 0;  // 0 or 1
  double valid = 0;
  double relevant = 0;
  double atomic = 0;
  std::optional<double> css;  // absent contributes nothing
};

enum class RewardMode { Fractional, AllOrNothing };

std::string_view mode_name(RewardMode m);
std::optional<RewardMode> reward_mode_from_name(std::string_view s);

/// Throws OutOfRangeComponent naming the first bad weight.
void check_weights(const RewardWeights& w);
/// Throws OutOfRangeComponent naming the first bad component.
void check_inputs(const RewardInputs& in);

/// acc + w_v valid + w_r relevant + w_a atomic + w_c css.
double compute_reward(const RewardInputs& in, const RewardWeights& w);

/// (K − τ) / max(K − 1, 1); absent for an empty trace.
std::optional<double> normalized_css(const probe::PredictionTrace& trace,
                                     probe::CssReading reading = probe::CssReading::Suffix);

/// Step-verdict components of one chain. Empty or malformed chains score 0.
RewardInputs step_components(const eval::ChainVerdict& v, RewardMode mode);

struct RewardRecord {
  std::string sample_id;
  RewardInputs inputs;
  double total = 0;
};

struct RewardBatchOptions {
  RewardWeights weights;
  RewardMode mode = RewardMode::Fractional;
  probe::CssReading reading = probe::CssReading::Suffix;
};

/// One record per chain. `gold[i]` is the expected answer of chain i; traces
/// are matched by problem id. Throws AlignmentError when the inputs disagree
/// in length, order or step count.
std::vector<RewardRecord> reward_batch(std::span<const proof::ProofChain> chains,
                                       std::span<const eval::ChainVerdict> verdicts,
                                       std::span<const proof::Answer> gold,
                                       const std::map<std::string, probe::PredictionTrace>& traces,
                                       const RewardBatchOptions& opts = {});

nlohmann::json record_to_json(const RewardRecord& r);
void write_rewards(const std::filesystem::path& path, const std::vector<RewardRecord>& records);

}  // namespace finelogic::reward
