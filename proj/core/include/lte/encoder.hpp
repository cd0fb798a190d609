#pragma once

#include <string>
#include <vector>

#include "lte/layers.hpp"
#include "lte/rng.hpp"
#include "lte/tensor.hpp"

namespace lte {

struct EncoderConfig {
  int in_channels = 3;
  int width = 32;
  int n_resblocks = 4;
  float res_scale = 1.0f;
};

// Latent map aligned 1:1 with the LR pixel grid, width x H x W.
struct FeatureMap {
  Tensor tensor;

  int channels() const { return static_cast<int>(tensor.dim(0)); }
  int height() const { return static_cast<int>(tensor.dim(1)); }
  int width() const { return static_cast<int>(tensor.dim(2)); }
};

// EDSR-baseline body without the upsampler:
//   head = conv3x3(img)
//   body = n_resblocks x [x + res_scale * conv3x3(relu(conv3x3(x)))]
//   z    = conv3x3(body) + head
class Encoder {
 public:
  Encoder(const EncoderConfig& config, Rng& rng);

  // img: in_channels x H x W in model space. Shapes are preserved.
  FeatureMap encode(const Tensor& img) const;

  // Receptive-field radius in pixels.
  int receptive_radius() const { return 2 * config_.n_resblocks + 2; }

  const EncoderConfig& config() const { return config_; }
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;

  Conv2dLayer head;
  struct ResBlock {
    Conv2dLayer conv1;
    Conv2dLayer conv2;
  };
  std::vector<ResBlock> blocks;
  Conv2dLayer tail;

 private:
  EncoderConfig config_;
};

}  // namespace lte
