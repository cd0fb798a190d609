#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "lte/rng.hpp"
#include "lte/tensor.hpp"

namespace lte {

enum class DecoderVariant { mlp, conv1x1 };

struct DecoderConfig {
  static constexpr int kLayers = 4;
  int in_dim = 64;
  int hidden = 64;
  int out_dim = 3;
  DecoderVariant variant = DecoderVariant::mlp;
};

// f_theta: four affine layers with ReLU between them and none after the last.
// The mlp variant stores M x N weights and runs on Q x N rows; the conv1x1
// variant (LTE+) stores the same weights as M x N x 1 x 1 kernels and runs
// on an N x 1 x Q channel-first map.
class Decoder {
 public:
  struct Layer {
    Tensor weight;
    Tensor bias;
  };

  Decoder(const DecoderConfig& config, Rng& rng);
  Decoder(const DecoderConfig& config, std::vector<Layer> layers);

  // Q x in_dim -> Q x out_dim.
  Tensor decode(const Tensor& features) const;

  const DecoderConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;

 private:
  DecoderConfig config_;
  std::vector<Layer> layers_;
};

// Weight-preserving re-layout of an mlp decoder as 1x1 convolutions.
Decoder convert_to_lteplus(const Decoder& mlp);
// Inverse re-layout.
Decoder convert_to_mlp(const Decoder& conv);

// Weighted sum of per-neighbour colours. Throws InvalidArgument unless the
// weights sum to 1 within 1e-6.
std::array<float, 3> ensemble(std::span<const std::array<float, 3>, 4> rgb, std::span<const float, 4> weights);

}  // namespace lte
