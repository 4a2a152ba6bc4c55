#pragma once

#include <cstddef>
#include <span>

#include "schubert/error.hpp"

namespace schubert::model {

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// R^2 is undefined when every label is equal. The exception still carries
/// MSE and MAE; its r2 field is NaN.
class DegenerateLabels : public Error {
 public:
  explicit DegenerateLabels(const Metrics& partial)
      : Error("all labels are equal; R^2 is undefined"), metrics_(partial) {}
  const Metrics& metrics() const noexcept { return metrics_; }

 private:
  Metrics metrics_;
};

/// MSE, MAE and R^2 = 1 - SS_res / SS_tot with SS_tot around the label mean.
Metrics regression_metrics(std::span<const double> labels, std::span<const double> predictions);

}  // namespace schubert::model
