#include "lte/estimator.hpp"

#include <cmath>
#include <numbers>

#include "lte/error.hpp"
#include "lte/ops.hpp"

namespace lte {

namespace {
constexpr double kFrequencyInitStd = 0.02;
}

TextureEstimator::TextureEstimator(int latent_channels, const LteConfig& config, Rng& rng) : config_(config) {
  if (config.K < 1) throw InvalidArgument("texture estimator: K must be >= 1");
  const int k = config.frequency_count();
  if (!config.ablation.no_amplitude) amplitude = make_conv(latent_channels, 2 * k, 3, rng);
  frequency = make_conv(latent_channels, 2 * k, 3, rng);
  fill_normal(frequency.weight, kFrequencyInitStd, rng);
  if (!config.ablation.no_phase) phase = make_linear(2, k, rng);
}

AmpFreq TextureEstimator::estimate_amp_freq(const FeatureMap& z) const {
  AmpFreq af;
  if (amplitude.weight.defined()) af.amplitude = amplitude.forward(z.tensor);
  af.frequency = frequency.forward(z.tensor);
  return af;
}

Tensor TextureEstimator::estimate_phase(Cell cell, Cell min_cell) const {
  const int k = config_.frequency_count();
  const Cell clamped = clamp_cell(cell, min_cell);
  if (!phase.weight.defined()) return Tensor::zeros({k});
  const std::array<float, 2> c{clamped.cy, clamped.cx};
  const Tensor input = Tensor::from_vector({1, 2}, c);
  return ops::reshape(phase.forward(input), {k});
}

Tensor TextureEstimator::features(const AmpFreq& af, const QueryBatch& qb, int neighbor, const Tensor& phase_values) const {
  const auto index = qb.neighbor_index(neighbor);
  Tensor a;
  if (af.amplitude.defined()) a = ops::gather_pixels(af.amplitude, index);
  const Tensor f = ops::gather_pixels(af.frequency, index);
  return ops::fourier_features(a, f, qb.neighbor_delta(neighbor), phase_values);
}

std::array<Tensor, kNeighbors> TextureEstimator::lte_forward(const FeatureMap& z, const QueryBatch& qb,
                                                             Cell min_cell) const {
  if (z.height() != qb.latent_h || z.width() != qb.latent_w) {
    throw InvalidArgument("lte_forward: query batch was built for a different latent size");
  }
  const AmpFreq af = estimate_amp_freq(z);
  const Tensor p = estimate_phase(relative_cell(qb.cell, qb.latent_h, qb.latent_w), min_cell);
  std::array<Tensor, kNeighbors> out;
  for (int j = 0; j < kNeighbors; ++j) out[static_cast<std::size_t>(j)] = features(af, qb, j, p);
  return out;
}

void TextureEstimator::collect(std::vector<NamedTensor>& out, const std::string& prefix) const {
  if (amplitude.weight.defined()) amplitude.collect(out, prefix + ".amplitude");
  frequency.collect(out, prefix + ".frequency");
  if (phase.weight.defined()) phase.collect(out, prefix + ".phase");
}

std::vector<float> fourier_map(std::span<const float> amplitude, std::span<const float> frequency,
                               std::array<float, 2> delta, std::span<const float> phase, bool no_amplitude) {
  const std::size_t k = phase.size();
  if (frequency.size() != 2 * k || (!no_amplitude && amplitude.size() != 2 * k)) {
    throw InvalidArgument("fourier_map: expected 2K amplitudes and frequencies for K phases");
  }
  auto finite = [](std::span<const float> v) {
    for (float x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!finite(frequency) || !finite(phase) || !finite(delta) || (!no_amplitude && !finite(amplitude))) {
    throw NumericError("fourier_map: non-finite input");
  }
  std::vector<float> out(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const float t = std::numbers::pi_v<float> * (frequency[i] * delta[0] + frequency[k + i] * delta[1] + phase[i]);
    out[i] = (no_amplitude ? 1.0f : amplitude[i]) * std::cos(t);
    out[k + i] = (no_amplitude ? 1.0f : amplitude[k + i]) * std::sin(t);
  }
  return out;
}

}  // namespace lte
