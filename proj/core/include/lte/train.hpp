#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lte/dataset.hpp"
#include "lte/model.hpp"
#include "lte/tensor.hpp"

namespace lte {

struct TrainConfig {
  int patch = 48;
  double scale_min = 1.0;
  double scale_max = 4.0;
  int batch = 4;
  int epochs = 30;
  int iters_per_epoch = 200;
  double lr0 = 1e-4;
  std::vector<int> decay_epochs{15, 25};
  double decay_factor = 0.5;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

// Inference-time cell floor: the smallest training cell, 2 / scale_max latent
// pixels, taken analytically rather than tracked over sampled scales.
Cell training_min_cell(const TrainConfig& config);

// lr0 * decay_factor^(number of decay epochs <= epoch); epochs count from 0.
double learning_rate(const TrainConfig& config, int epoch);

// Mean absolute error between equal-shaped predictions and targets.
Tensor l1_loss(const Tensor& pred, const Tensor& target);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
};

// One bias-corrected Adam update from each parameter's .grad (a missing grad
// counts as zero). Moment buffers are created on the first call.
void adam_step(std::span<Tensor> params, AdamState& state, double lr);

struct TrainState {
  AdamState optim;
  int epoch = 0;  // next epoch to run
};

struct IterationRecord {
  int epoch = 0;
  int iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;  // wall time of this iteration
};

struct EpochMetrics {
  double mean_loss = 0.0;
  std::vector<double> losses;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

// Model-space predictions for a training pair, Q x 3, with history.
Tensor predict_pair(const SrModel& model, const TrainPair& pair);

// Runs config.iters_per_epoch minibatches of config.batch pairs, each pair
// with its own scale drawn from U(scale_min, scale_max). Iteration i of epoch
// e draws from a stream derived from (seed, e, i), so results depend only on
// the seed and the model state, not on how the run was split or resumed.
// Advances state.epoch.
EpochMetrics train_epoch(SrModel& model, const Dataset& dataset, const TrainConfig& config, TrainState& state,
                         const IterationCallback& on_iteration = {});

}  // namespace lte
