#pragma once

#include <cstdint>
#include <span>

#include "schubert/gru.hpp"

namespace schubert::model {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment accumulators, shaped like the parameters.
struct AdamState {
  GruParams m;
  GruParams v;

  static AdamState zeros_like(const GruParams& params);
};

/// One bias-corrected Adam update on flat arrays; `t` is the 1-based step.
void adam_update(std::span<double> x, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamConfig& config);

void adam_step(GruParams& params, const GruParams& grads, AdamState& state, std::uint64_t t,
               const AdamConfig& config);

}  // namespace schubert::model
