#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "sigseg/classifier.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

void validate(const TrainConfig& c) {
  if (!(c.learning_rate >= 0.0) || !(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0) ||
      !(c.epsilon > 0.0) || c.batch_size < 1) {
    throw Error(ErrorCode::BadConfig, "need learning_rate >= 0, beta1/beta2 in (0,1), epsilon > 0, batch_size >= 1");
  }
}

double train_step(CnnLstmModel& model, std::span<const ClassWindow* const> batch, const TrainConfig& config,
                  AdamState& state) {
  validate(config);
  if (batch.empty()) throw Error(ErrorCode::EmptyDataset, "empty batch");
  for (const auto* w : batch) {
    if (!w->label) throw Error(ErrorCode::UnlabeledSample, "training window has no label");
  }
  const std::size_t n = model.layout.total();
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }

  // Gradients are summed in batch order so the result is schedule-independent.
  std::vector<double> grad(n, 0.0);
  double total_loss = 0.0;
  std::vector<double> probs;
  for (const auto* w : batch) {
    const auto g = backward(model, *w, *w->label, &probs);
    total_loss += loss(probs, *w->label);
    for (std::size_t i = 0; i < n; ++i) grad[i] += g[i];
  }
  const double scale = 1.0 / static_cast<double>(batch.size());

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = grad[i] * scale;
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * gi;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * gi * gi;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    model.params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  return total_loss * scale;
}

DatasetStats evaluate_windows(const CnnLstmModel& model, std::span<const ClassWindow> dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no windows to evaluate");
  DatasetStats stats;
  std::size_t correct = 0;
  for (const auto& w : dataset) {
    if (!w.label) throw Error(ErrorCode::UnlabeledSample, "evaluation window has no label");
    const auto probs = forward(model, w);
    stats.loss += loss(probs, *w.label);
    if (argmax_class(probs) == *w.label) ++correct;
  }
  stats.loss /= static_cast<double>(dataset.size());
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  return stats;
}

TrainResult train(CnnLstmModel model, std::span<const ClassWindow> dataset, const TrainConfig& config) {
  validate(config);
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no training windows");
  for (const auto& w : dataset) {
    if (!w.label) throw Error(ErrorCode::UnlabeledSample, "training window has no label");
    if (*w.label < 0 || static_cast<std::size_t>(*w.label) >= model.shape.classes) {
      throw Error(ErrorCode::BadLabel, "label " + std::to_string(*w.label) + " outside [0, " +
                                           std::to_string(model.shape.classes) + ")");
    }
  }

  TrainResult result{std::move(model), {}};
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  AdamState adam;
  std::vector<const ClassWindow*> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
        batch.push_back(&dataset[order[k]]);
      }
      train_step(result.model, batch, config, adam);
    }
    const auto stats = evaluate_windows(result.model, dataset);
    result.history.push_back({epoch, stats.loss, stats.accuracy});
  }
  return result;
}

void write_history_csv(std::span<const EpochStats> history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "epoch,loss,accuracy\n";
  char line[96];
  for (const auto& e : history) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", e.epoch, e.loss, e.accuracy);
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace sigseg
