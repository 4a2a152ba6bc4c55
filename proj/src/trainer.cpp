#include "schubert/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "schubert/error.hpp"

namespace schubert::model {

namespace {

using chunking::ChunkEmbeddings;

struct Example {
  Matrix inputs;
  double label = 0.0;
};

std::vector<Example> prepare(const std::vector<ChunkEmbeddings>& items, std::uint32_t dim,
                             const char* role) {
  std::vector<Example> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (item.dim != dim) {
      throw InvalidInput(std::string(role) + " item " + item.doc_id + " has dim " +
                         std::to_string(item.dim) + ", expected " + std::to_string(dim));
    }
    if (!item.label) throw InvalidInput(std::string(role) + " item " + item.doc_id + " has no label");
    if (item.n_chunks() == 0) throw InvalidInput(std::string(role) + " item " + item.doc_id + " is empty");
    out.push_back({to_matrix(item), *item.label});
  }
  return out;
}

std::pair<double, double> mae_mse(const GruParams& params, const std::vector<Example>& data) {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const auto& ex : data) {
    const double e = predict(params, ex.inputs) - ex.label;
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(data.size());
  return {abs_sum / n, sq_sum / n};
}

}  // namespace

TrainResult train(const std::vector<ChunkEmbeddings>& train_set,
                  const std::vector<ChunkEmbeddings>& validation_set, const TrainConfig& config) {
  if (train_set.empty()) throw InvalidInput("training set is empty");
  if (config.epochs < 0) throw InvalidInput("epochs must be >= 0");
  if (config.batch_size < 1) throw InvalidInput("batch size must be >= 1");
  if (config.hidden < 1) throw InvalidInput("hidden size must be >= 1");
  if (!(config.dropout_p >= 0.0 && config.dropout_p < 1.0)) {
    throw InvalidInput("dropout must lie in [0, 1)");
  }

  const std::uint32_t dim = train_set.front().dim;
  const auto train_data = prepare(train_set, dim, "training");
  const auto val_data = prepare(validation_set, dim, "validation");

  TrainResult result;
  result.final_params = init_params(dim, config.hidden, config.seed);
  GruParams& params = result.final_params;
  AdamState state = AdamState::zeros_like(params);
  const AdamConfig adam = config.adam();
  // Independent stream for shuffling and dropout masks.
  Rng rng(text::splitmix64(config.seed ^ 0x5348554245525431ULL));

  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::uint64_t step = 0;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<ForwardCache> caches;
  std::vector<double> labels;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      caches.clear();
      labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train_data[order[k]];
        caches.push_back(forward(params, ex.inputs, Mode::train, config.dropout_p, rng));
        labels.push_back(ex.label);
      }
      const GruParams grads = backward(params, caches, labels);
      adam_step(params, grads, state, ++step, adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    std::tie(rec.train_mae, rec.train_mse) = mae_mse(params, train_data);
    if (!val_data.empty()) {
      const auto [vmae, vmse] = mae_mse(params, val_data);
      rec.val_mae = vmae;
      rec.val_mse = vmse;
      if (vmae < best_val) {
        best_val = vmae;
        result.best_params = params;
        result.best_epoch = epoch;
      }
    }
    if (!params.all_finite()) throw InvalidInput("training diverged (non-finite parameters)");
    spdlog::debug("epoch {} train_mae={:.6f} val_mae={}", epoch, rec.train_mae,
                  rec.val_mae ? std::to_string(*rec.val_mae) : "n/a");
    result.history.push_back(rec);
  }
  return result;
}

std::vector<double> predict_all(const GruParams& params, const std::vector<ChunkEmbeddings>& items) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(predict(params, to_matrix(item)));
  return out;
}

Metrics evaluate(const GruParams& params, const std::vector<ChunkEmbeddings>& dataset) {
  if (dataset.empty()) throw InvalidInput("evaluation set is empty");
  std::vector<double> labels;
  labels.reserve(dataset.size());
  for (const auto& item : dataset) {
    if (!item.label) throw InvalidInput("evaluation item " + item.doc_id + " has no label");
    labels.push_back(*item.label);
  }
  const auto preds = predict_all(params, dataset);
  return regression_metrics(labels, preds);
}

void write_history(std::ostream& out, const std::vector<EpochRecord>& history) {
  for (const auto& rec : history) {
    nlohmann::ordered_json j;
    j["epoch"] = rec.epoch;
    j["train_mae"] = rec.train_mae;
    j["val_mae"] = rec.val_mae ? nlohmann::ordered_json(*rec.val_mae) : nlohmann::ordered_json();
    j["train_mse"] = rec.train_mse;
    j["val_mse"] = rec.val_mse ? nlohmann::ordered_json(*rec.val_mse) : nlohmann::ordered_json();
    out << j.dump() << '\n';
  }
}

}  // namespace schubert::model
