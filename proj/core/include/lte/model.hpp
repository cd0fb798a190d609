#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lte/coords.hpp"
#include "lte/decoder.hpp"
#include "lte/encoder.hpp"
#include "lte/estimator.hpp"
#include "lte/tensor.hpp"

namespace lte {

struct ModelConfig {
  EncoderConfig encoder;
  LteConfig lte;
  int decoder_hidden = 64;
  DecoderVariant decoder_variant = DecoderVariant::mlp;
  // Smallest training cell in latent-pixel units, 2 / scale_max.
  Cell min_cell{0.5f, 0.5f};
};

// Encoder, texture estimator and decoder for arbitrary-scale SR.
class SrModel {
 public:
  SrModel(const ModelConfig& config, std::uint64_t seed);
  SrModel(const ModelConfig& config, Encoder encoder, TextureEstimator estimator, Decoder decoder);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }

  Encoder encoder;
  TextureEstimator estimator;
  Decoder decoder;

  // All learnable tensors with stable dotted names.
  std::vector<NamedTensor> parameters() const;

  // Copy whose decoder is re-laid out as 1x1 convolutions.
  SrModel to_lteplus() const;
  // Inverse of to_lteplus.
  SrModel to_mlp() const;

 private:
  ModelConfig config_;
};

// Per-image state reused across query chunks.
struct LatentState {
  Tensor lr;  // 3 x H x W, model space
  FeatureMap z;
  AmpFreq fourier;
  Tensor phase;
  Cell cell;  // output cell, normalized units
  bool cell_clamped = false;

  int height() const { return z.height(); }
  int width() const { return z.width(); }
};

// Encodes `lr` and estimates the Fourier maps and phase for output cell `cell`.
LatentState prepare_latent(const SrModel& model, const Tensor& lr, Cell cell);

// Q x 3 model-space colours at `queries`: the local ensemble of decoded
// texture features plus, unless ablated, the bilinear LR skip.
Tensor query_rgb(const SrModel& model, const LatentState& state, std::span<const Coord> queries);

// Bilinear LR colour at the same four-neighbour geometry, Q x 3, no history.
Tensor bilinear_skip(const Tensor& lr, const QueryBatch& qb);

struct ForwardStats {
  bool cell_clamped = false;
  std::int64_t launches = 0;
  // Peak tensor bytes allocated by the query loop above its starting level.
  std::int64_t query_peak_bytes = 0;
};

struct SrOutput {
  Tensor image;  // 3 x out_h x out_w, model space, unclipped
  ForwardStats stats;
};

// Differentiable when grad mode is on.
SrOutput sr_forward(const SrModel& model, const Tensor& lr, int out_h, int out_w);

// Inference in chunks of `chunk` output pixels (row-major). Runs without
// graph construction and never holds more than one chunk of query tensors.
SrOutput sr_forward_chunked(const SrModel& model, const Tensor& lr, int out_h, int out_w, std::int64_t chunk);

}  // namespace lte
