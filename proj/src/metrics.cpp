#include "schubert/metrics.hpp"

#include <cmath>
#include <limits>

namespace schubert::model {

Metrics regression_metrics(std::span<const double> labels, std::span<const double> predictions) {
  if (labels.empty()) throw InvalidInput("metrics need at least one example");
  if (labels.size() != predictions.size()) {
    throw InvalidInput("metrics need one prediction per label");
  }
  const double n = static_cast<double>(labels.size());
  double mean = 0.0;
  for (const double y : labels) mean += y;
  mean /= n;

  double ss_res = 0.0;
  double abs_sum = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double e = labels[i] - predictions[i];
    ss_res += e * e;
    abs_sum += std::abs(e);
    ss_tot += (labels[i] - mean) * (labels[i] - mean);
  }

  Metrics m;
  m.n = labels.size();
  m.mse = ss_res / n;
  m.mae = abs_sum / n;
  if (ss_tot == 0.0) {
    m.r2 = std::numeric_limits<double>::quiet_NaN();
    throw DegenerateLabels(m);
  }
  m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

}  // namespace schubert::model
