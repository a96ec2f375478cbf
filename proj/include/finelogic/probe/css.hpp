#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace finelogic::probe {

class EmptyTrace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-step probe outcomes for one problem; correct[i] is step i + 1.
struct PredictionTrace {
  std::string problem_id;
  std::vector<bool> correct;
  std::size_t steps() const { return correct.size(); }
};

enum class CssReading {
  /// τ is the first step from which every later prediction is correct.
  Suffix,
  /// τ is the first step predicted correctly after a miss (or step 1).
  Local,
};

/// K − τ, or 0 when no τ exists.
std::size_t css_span(const PredictionTrace& trace, CssReading reading = CssReading::Suffix);
/// Mean span over the traces.
double css_score(const std::vector<PredictionTrace>& traces, CssReading reading = CssReading::Suffix);

}  // namespace finelogic::probe
