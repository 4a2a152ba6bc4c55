#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "schubert/chunking.hpp"
#include "schubert/rng.hpp"

namespace schubert::model {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Trainable tensors of the GRU and its scalar linear head.
///
/// Input matrices are dim_in x hidden and applied transposed (W^T x), so the
/// gate pre-activation for step t is W^T x_t + U^T h_{t-1} + b.
struct GruParams {
  Matrix w_z, w_r, w_h;  // dim_in x hidden
  Matrix u_z, u_r, u_h;  // hidden x hidden
  Vector b_z, b_r, b_h;  // hidden
  Vector w_out;          // hidden
  double b_out = 0.0;

  static GruParams zeros(Eigen::Index dim_in, Eigen::Index hidden);

  Eigen::Index dim_in() const { return w_z.rows(); }
  Eigen::Index hidden() const { return w_z.cols(); }
  std::size_t parameter_count() const;

  /// Every tensor as a flat view, in field order. Matrix storage is Eigen's
  /// column-major layout.
  std::array<std::span<double>, 11> tensors();
  std::array<std::span<const double>, 11> tensors() const;

  bool all_finite() const;
  bool operator==(const GruParams& o) const;
};

/// Xavier-uniform input and output weights, Xavier-normal recurrent
/// weights, zero biases. Deterministic in `seed`.
GruParams init_params(Eigen::Index dim_in, Eigen::Index hidden, std::uint64_t seed);

enum class Mode { train, eval };

/// Activations kept for backpropagation through time. Index t of h is the
/// state after t steps; h[0] is the zero initial state.
struct ForwardCache {
  Matrix inputs;  // T x dim_in
  std::vector<Vector> h, z, r, candidate;
  Vector dropout_mask;  // ones in eval mode
  double prediction = 0.0;
};

/// Runs the GRU over the chunk rows of `inputs`, applies inverted dropout
/// (train mode only) to the last hidden state and the linear head.
/// Throws InvalidInput for an empty sequence or a width mismatch.
ForwardCache forward(const GruParams& params, const Matrix& inputs, Mode mode, double dropout_p,
                     Rng& rng);

/// Prediction only, eval mode.
double predict(const GruParams& params, const Matrix& inputs);

/// Converts a document's chunk vectors to a T x dim matrix in double precision.
Matrix to_matrix(const chunking::ChunkEmbeddings& doc);

/// Adds d(output)/d(params) * upstream to `grads` via backpropagation through time.
void accumulate_gradients(const GruParams& params, const ForwardCache& cache, double upstream,
                          GruParams& grads);

/// Mean absolute error over the batch.
double mae_loss(std::span<const ForwardCache> caches, std::span<const double> labels);

/// Exact gradient of the batch-mean MAE. The subgradient at zero residual is 0.
GruParams backward(const GruParams& params, std::span<const ForwardCache> caches,
                   std::span<const double> labels);

}  // namespace schubert::model
