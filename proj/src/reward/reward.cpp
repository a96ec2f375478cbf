#include "finelogic/reward/reward.hpp"

#include <cmath>
#include <fstream>

namespace finelogic::reward {

namespace {

void check_unit(const char* name, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw OutOfRangeComponent(name, v);
}

double fraction(const std::vector<eval::StepVerdict>& steps, eval::Verdict eval::StepVerdict::*field) {
  std::size_t yes = 0;
  for (const auto& s : steps) yes += s.*field == eval::Verdict::True;
  return static_cast<double>(yes) / static_cast<double>(steps.size());
}

}  // namespace

std::string_view mode_name(RewardMode m) { return m == RewardMode::Fractional ? "fractional" : "all-or-nothing"; }

std::optional<RewardMode> reward_mode_from_name(std::string_view s) {
  if (s == "fractional") return RewardMode::Fractional;
  if (s == "all-or-nothing") return RewardMode::AllOrNothing;
  return std::nullopt;
}

void check_weights(const RewardWeights& w) {
  std::pair<const char*, double> all[] = {{"w_v", w.w_v}, {"w_r", w.w_r}, {"w_a", w.w_a}, {"w_c", w.w_c}};
  for (auto [name, v] : all) {
    if (!std::isfinite(v) || v < 0.0) throw OutOfRangeComponent(name, v);
  }
}

void check_inputs(const RewardInputs& in) {
  if (in.acc != 0.0 && in.acc != 1.0) throw OutOfRangeComponent("R_acc", in.acc);
  check_unit("R_valid", in.valid);
  check_unit("R_relevant", in.relevant);
  check_unit("R_atomic", in.atomic);
  if (in.css) check_unit("R_css", *in.css);
}

double compute_reward(const RewardInputs& in, const RewardWeights& w) {
  check_inputs(in);
  check_weights(w);
  return in.acc + w.w_v * in.valid + w.w_r * in.relevant + w.w_a * in.atomic + w.w_c * in.css.value_or(0.0);
}

std::optional<double> normalized_css(const probe::PredictionTrace& trace, probe::CssReading reading) {
  if (trace.correct.empty()) return std::nullopt;
  auto k = static_cast<double>(trace.steps());
  return static_cast<double>(probe::css_span(trace, reading)) / std::max(k - 1.0, 1.0);
}

RewardInputs step_components(const eval::ChainVerdict& v, RewardMode mode) {
  RewardInputs in;
  if (v.malformed || v.steps.empty()) return in;
  if (mode == RewardMode::AllOrNothing) {
    in.valid = v.all_valid() ? 1.0 : 0.0;
    in.relevant = v.all_relevant() ? 1.0 : 0.0;
    in.atomic = v.all_atomic() ? 1.0 : 0.0;
  } else {
    in.valid = fraction(v.steps, &eval::StepVerdict::valid);
    in.relevant = fraction(v.steps, &eval::StepVerdict::relevant);
    in.atomic = fraction(v.steps, &eval::StepVerdict::atomic);
  }
  return in;
}

std::vector<RewardRecord> reward_batch(std::span<const proof::ProofChain> chains,
                                       std::span<const eval::ChainVerdict> verdicts,
                                       std::span<const proof::Answer> gold,
                                       const std::map<std::string, probe::PredictionTrace>& traces,
                                       const RewardBatchOptions& opts) {
  if (chains.size() != verdicts.size() || chains.size() != gold.size()) {
    throw AlignmentError("got " + std::to_string(chains.size()) + " chains, " + std::to_string(verdicts.size()) +
                         " verdicts and " + std::to_string(gold.size()) + " gold answers");
  }
  check_weights(opts.weights);
  std::vector<RewardRecord> out(chains.size());
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& c = chains[i];
    const auto& v = verdicts[i];
    if (v.problem_id != c.problem_id) {
      throw AlignmentError("verdict " + std::to_string(i) + " is for " + v.problem_id + ", chain is " + c.problem_id);
    }
    if (!v.malformed && v.steps.size() != c.steps.size()) {
      throw AlignmentError(c.problem_id + ": " + std::to_string(v.steps.size()) + " verdicts for " +
                           std::to_string(c.steps.size()) + " steps");
    }
    RewardRecord& r = out[i];
    r.sample_id = c.problem_id;
    r.inputs = step_components(v, opts.mode);
    r.inputs.acc = c.final_label && *c.final_label == gold[i] ? 1.0 : 0.0;
    if (auto t = traces.find(c.problem_id); t != traces.end()) r.inputs.css = normalized_css(t->second, opts.reading);
    r.total = compute_reward(r.inputs, opts.weights);
  }
  return out;
}

nlohmann::json record_to_json(const RewardRecord& r) {
  return {{"sample_id", r.sample_id},
          {"R_acc", r.inputs.acc},
          {"R_valid", r.inputs.valid},
          {"R_relevant", r.inputs.relevant},
          {"R_atomic", r.inputs.atomic},
          {"R_css", r.inputs.css ? nlohmann::json(*r.inputs.css) : nlohmann::json(nullptr)},
          {"R_total", r.total}};
}

void write_rewards(const std::filesystem::path& path, const std::vector<RewardRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

}  // namespace finelogic::reward
