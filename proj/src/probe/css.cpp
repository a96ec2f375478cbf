#include "finelogic/probe/css.hpp"

namespace finelogic::probe {

std::size_t css_span(const PredictionTrace& trace, CssReading reading) {
  std::size_t k = trace.steps();
  if (k == 0) throw EmptyTrace("trace for " + trace.problem_id + " is empty");
  if (reading == CssReading::Local) {
    for (std::size_t i = 0; i < k; ++i) {
      if (trace.correct[i]) return k - (i + 1);
    }
    return 0;
  }
  if (!trace.correct[k - 1]) return 0;
  std::size_t tau = k;  // 1-based
  while (tau > 1 && trace.correct[tau - 2]) --tau;
  return k - tau;
}

double css_score(const std::vector<PredictionTrace>& traces, CssReading reading) {
  if (traces.empty()) throw EmptyTrace("no traces");
  double total = 0;
  for (const auto& t : traces) total += static_cast<double>(css_span(t, reading));
  return total / static_cast<double>(traces.size());
}

}  // namespace finelogic::probe
