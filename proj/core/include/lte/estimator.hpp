#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "lte/coords.hpp"
#include "lte/encoder.hpp"
#include "lte/layers.hpp"

namespace lte {

// Component switches for ablation runs.
struct AblationFlags {
  bool no_amplitude = false;  // amplitudes fixed to one
  bool half_freq = false;     // ceil(K / 2) frequencies, decided at construction
  bool no_phase = false;      // phase fixed to zero
  bool no_skip = false;       // no bilinear LR skip on the output

  bool operator==(const AblationFlags&) const = default;
};

struct LteConfig {
  int K = 32;
  AblationFlags ablation;

  int frequency_count() const { return ablation.half_freq ? (K + 1) / 2 : K; }
  int feature_dim() const { return 2 * frequency_count(); }
};

// Per-latent Fourier information. Both maps are 2K x H x W; frequency
// channels [0, K) are f_y and [K, 2K) are f_x. amplitude is undefined when
// amplitudes are ablated.
struct AmpFreq {
  Tensor amplitude;
  Tensor frequency;
};

// Amplitude (h_a) and frequency (h_f) estimators are 3x3 convolutions over
// the latent map, equivalent to fully connected layers on 3x3-unfolded
// latents; the phase estimator (h_p) is one fully connected layer over the
// clamped cell.
class TextureEstimator {
 public:
  TextureEstimator(int latent_channels, const LteConfig& config, Rng& rng);

  AmpFreq estimate_amp_freq(const FeatureMap& z) const;

  // `cell` and `min_cell` in latent-pixel units (see relative_cell). Returns
  // K phases; zeros without history when phase is ablated.
  Tensor estimate_phase(Cell cell, Cell min_cell) const;

  // Q x 2K features for neighbour j: Fourier information gathered at each
  // query's j-th latent (nearest-neighbour upsampling of the maps) combined
  // with that neighbour's local offset and the shared phase.
  Tensor features(const AmpFreq& af, const QueryBatch& qb, int neighbor, const Tensor& phase) const;

  // All four neighbours at once.
  std::array<Tensor, kNeighbors> lte_forward(const FeatureMap& z, const QueryBatch& qb, Cell min_cell) const;

  const LteConfig& config() const { return config_; }
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;

  Conv2dLayer amplitude;  // empty under no_amplitude
  Conv2dLayer frequency;
  LinearLayer phase;      // empty under no_phase

 private:
  LteConfig config_;
};

// Single-query reference of the sinusoidal map:
//   t = pi (F delta + phase),  out = A * [cos t; sin t]
// `amplitude` and `frequency` hold 2K values (frequency: K f_y then K f_x).
// With no_amplitude the amplitudes are taken as ones and `amplitude` may be
// empty. Throws NumericError on non-finite input.
std::vector<float> fourier_map(std::span<const float> amplitude, std::span<const float> frequency,
                               std::array<float, 2> delta, std::span<const float> phase, bool no_amplitude);

}  // namespace lte
