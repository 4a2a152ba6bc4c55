#include "schubert/adam.hpp"

#include <cmath>

#include "schubert/error.hpp"

namespace schubert::model {

AdamState AdamState::zeros_like(const GruParams& params) {
  return {GruParams::zeros(params.dim_in(), params.hidden()),
          GruParams::zeros(params.dim_in(), params.hidden())};
}

void adam_update(std::span<double> x, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamConfig& config) {
  if (t < 1) throw InvalidInput("Adam step counter starts at 1");
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = grad[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    x[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(GruParams& params, const GruParams& grads, AdamState& state, std::uint64_t t,
               const AdamConfig& config) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (g[k].size() != p[k].size() || m[k].size() != p[k].size()) {
      throw InvalidInput("Adam state and gradients must match the parameter shapes");
    }
    adam_update(p[k], g[k], m[k], v[k], t, config);
  }
}

}  // namespace schubert::model
