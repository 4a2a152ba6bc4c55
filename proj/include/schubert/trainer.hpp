#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "schubert/adam.hpp"
#include "schubert/chunking.hpp"
#include "schubert/gru.hpp"
#include "schubert/metrics.hpp"

namespace schubert::model {

/// Defaults follow the SChuBERT training setup: Adam at 1e-3, 30 epochs,
/// batches of 12, dropout 0.3 and a 512-unit GRU, trained on MAE.
struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 12;
  double dropout_p = 0.3;
  int hidden = 512;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_mae = 0.0;
  double train_mse = 0.0;
  std::optional<double> val_mae;
  std::optional<double> val_mse;
};

struct TrainResult {
  GruParams final_params;
  /// Parameters at the epoch with the lowest validation MAE (first on ties).
  std::optional<GruParams> best_params;
  std::optional<int> best_epoch;
  std::vector<EpochRecord> history;
};

/// Mini-batch Adam on mean MAE. Each epoch reshuffles with the seeded
/// generator and keeps the final short batch. Every item must carry a label
/// and share one embedding dim. Fully deterministic in the config.
TrainResult train(const std::vector<chunking::ChunkEmbeddings>& train_set,
                  const std::vector<chunking::ChunkEmbeddings>& validation_set,
                  const TrainConfig& config);

/// Eval-mode predictions, one per item.
std::vector<double> predict_all(const GruParams& params,
                                const std::vector<chunking::ChunkEmbeddings>& items);

/// Throws DegenerateLabels when every label is equal.
Metrics evaluate(const GruParams& params, const std::vector<chunking::ChunkEmbeddings>& dataset);

/// JSON-lines, one object per epoch.
void write_history(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace schubert::model
