#include "lte/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lte/error.hpp"
#include "lte/ops.hpp"

namespace lte {

void TrainConfig::validate() const {
  std::vector<std::string> bad;
  if (patch < 1) bad.push_back("train.patch");
  if (!(scale_min >= 1.0) || !(scale_min <= scale_max)) bad.push_back("train.scale_min");
  if (!(scale_max >= 1.0)) bad.push_back("train.scale_max");
  if (batch < 1) bad.push_back("train.batch");
  if (epochs < 0) bad.push_back("train.epochs");
  if (iters_per_epoch < 1) bad.push_back("train.iters_per_epoch");
  if (!(lr0 > 0.0)) bad.push_back("train.lr0");
  if (!std::is_sorted(decay_epochs.begin(), decay_epochs.end()) ||
      std::adjacent_find(decay_epochs.begin(), decay_epochs.end()) != decay_epochs.end()) {
    bad.push_back("train.decay_epochs");
  }
  if (!(decay_factor > 0.0)) bad.push_back("train.decay_factor");
  if (!bad.empty()) throw ConfigError("invalid training configuration", bad);
}

Cell training_min_cell(const TrainConfig& config) {
  const auto c = static_cast<float>(2.0 / config.scale_max);
  return {c, c};
}

double learning_rate(const TrainConfig& config, int epoch) {
  const auto passed = std::count_if(config.decay_epochs.begin(), config.decay_epochs.end(),
                                    [epoch](int e) { return e <= epoch; });
  return config.lr0 * std::pow(config.decay_factor, static_cast<double>(passed));
}

Tensor l1_loss(const Tensor& pred, const Tensor& target) { return ops::l1_loss(pred, target); }

void adam_step(std::span<Tensor> params, AdamState& state, double lr) {
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(static_cast<std::size_t>(p.numel()), 0.0f);
      state.v.emplace_back(static_cast<std::size_t>(p.numel()), 0.0f);
    }
  }
  if (state.m.size() != params.size()) throw InvalidArgument("adam_step: parameter list changed");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto data = params[i].data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != data.size()) throw InvalidArgument("adam_step: parameter shape changed");
    const bool has_grad = params[i].has_grad();
    const auto grad = params[i].grad();
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double g = has_grad ? grad[k] : 0.0;
      const double mk = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      const double vk = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = lr * (mk / bc1) / (std::sqrt(vk / bc2) + state.eps);
      data[k] = static_cast<float>(data[k] - update);
    }
  }
}

Tensor predict_pair(const SrModel& model, const TrainPair& pair) {
  const LatentState state = prepare_latent(model, to_model_space(pair.lr), pair.cell);
  return query_rgb(model, state, pair.coords);
}

EpochMetrics train_epoch(SrModel& model, const Dataset& dataset, const TrainConfig& config, TrainState& state,
                         const IterationCallback& on_iteration) {
  if (dataset.empty()) throw InvalidArgument("train_epoch: empty dataset");
  config.validate();
  std::vector<Tensor> params;
  for (auto& p : model.parameters()) params.push_back(p.tensor);

  const int epoch = state.epoch;
  const double lr = learning_rate(config, epoch);
  const std::uint64_t stream_base = derive_seed(config.seed, 0x7261696eULL);
  EpochMetrics metrics;
  for (int it = 0; it < config.iters_per_epoch; ++it) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(derive_seed(stream_base, static_cast<std::uint64_t>(epoch) * static_cast<std::uint64_t>(config.iters_per_epoch) +
                                         static_cast<std::uint64_t>(it)));
    for (Tensor& p : params) p.zero_grad();

    Tensor total;
    for (int b = 0; b < config.batch; ++b) {
      const Image& hr = dataset.images[static_cast<std::size_t>(rng.below(dataset.size()))];
      const double r = rng.uniform(config.scale_min, config.scale_max);
      const TrainPair pair = sample_train_pair(hr, r, config.patch, rng);
      std::vector<float> gt(pair.gt.size());
      std::transform(pair.gt.begin(), pair.gt.end(), gt.begin(), [](float v) { return v - 0.5f; });
      const Tensor target = Tensor::from_vector({static_cast<std::int64_t>(pair.coords.size()), 3}, gt);
      const Tensor loss = l1_loss(predict_pair(model, pair), target);
      total = total.defined() ? ops::add(total, loss) : loss;
    }
    if (config.batch > 1) total = ops::scale(total, 1.0f / static_cast<float>(config.batch));
    const double loss_value = total.item();
    if (!std::isfinite(loss_value)) throw NumericError("training loss is not finite");
    backward(total);
    adam_step(params, state.optim, lr);

    metrics.losses.push_back(loss_value);
    if (on_iteration) {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      on_iteration({epoch, it, loss_value, lr, seconds});
    }
  }
  double sum = 0.0;
  for (double l : metrics.losses) sum += l;
  metrics.mean_loss = sum / static_cast<double>(metrics.losses.size());
  ++state.epoch;
  return metrics;
}

}  // namespace lte
