#include "lte/decoder.hpp"

#include <cmath>

#include "lte/error.hpp"
#include "lte/layers.hpp"
#include "lte/ops.hpp"

namespace lte {

Decoder::Decoder(const DecoderConfig& config, Rng& rng) : config_(config) {
  config_.variant = DecoderVariant::mlp;
  if (config.in_dim < 1 || config.hidden < 1 || config.out_dim < 1) {
    throw InvalidArgument("decoder: dimensions must be positive");
  }
  const std::array<int, DecoderConfig::kLayers + 1> dims{config.in_dim, config.hidden, config.hidden, config.hidden,
                                                         config.out_dim};
  for (int i = 0; i < DecoderConfig::kLayers; ++i) {
    LinearLayer l = make_linear(dims[static_cast<std::size_t>(i)], dims[static_cast<std::size_t>(i + 1)], rng);
    layers_.push_back({l.weight, l.bias});
  }
  if (config.variant == DecoderVariant::conv1x1) *this = convert_to_lteplus(*this);
}

Decoder::Decoder(const DecoderConfig& config, std::vector<Layer> layers)
    : config_(config), layers_(std::move(layers)) {
  if (layers_.size() != DecoderConfig::kLayers) throw InvalidArgument("decoder: expected 4 layers");
}

Tensor Decoder::decode(const Tensor& features) const {
  if (features.rank() != 2 || features.dim(1) != config_.in_dim) {
    throw InvalidArgument("decode: expected Q x " + std::to_string(config_.in_dim) + " features, got " +
                          shape_str(features.shape()));
  }
  const std::int64_t q = features.dim(0);
  if (config_.variant == DecoderVariant::mlp) {
    Tensor x = features;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = ops::linear(x, layers_[i].weight, layers_[i].bias);
      if (i + 1 < layers_.size()) x = ops::relu(x);
    }
    return x;
  }
  Tensor x = ops::reshape(ops::transpose(features), {config_.in_dim, 1, q});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = ops::conv2d(x, layers_[i].weight, layers_[i].bias, 0);
    if (i + 1 < layers_.size()) x = ops::relu(x);
  }
  return ops::transpose(ops::reshape(x, {config_.out_dim, q}));
}

void Decoder::collect(std::vector<NamedTensor>& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string p = prefix + ".layers." + std::to_string(i);
    out.push_back({p + ".weight", layers_[i].weight});
    out.push_back({p + ".bias", layers_[i].bias});
  }
}

Decoder convert_to_lteplus(const Decoder& mlp) {
  if (mlp.config().variant != DecoderVariant::mlp) throw InvalidArgument("convert_to_lteplus: decoder is not an mlp");
  DecoderConfig config = mlp.config();
  config.variant = DecoderVariant::conv1x1;
  std::vector<Decoder::Layer> layers;
  for (const auto& layer : mlp.layers()) {
    const Shape& s = layer.weight.shape();
    Tensor w = Tensor::from_vector({s[0], s[1], 1, 1}, layer.weight.data(), layer.weight.requires_grad());
    Tensor b = Tensor::from_vector(layer.bias.shape(), layer.bias.data(), layer.bias.requires_grad());
    layers.push_back({w, b});
  }
  return Decoder(config, std::move(layers));
}

Decoder convert_to_mlp(const Decoder& conv) {
  if (conv.config().variant != DecoderVariant::conv1x1) throw InvalidArgument("convert_to_mlp: decoder is not conv1x1");
  DecoderConfig config = conv.config();
  config.variant = DecoderVariant::mlp;
  std::vector<Decoder::Layer> layers;
  for (const auto& layer : conv.layers()) {
    const Shape& s = layer.weight.shape();
    Tensor w = Tensor::from_vector({s[0], s[1]}, layer.weight.data(), layer.weight.requires_grad());
    Tensor b = Tensor::from_vector(layer.bias.shape(), layer.bias.data(), layer.bias.requires_grad());
    layers.push_back({w, b});
  }
  return Decoder(config, std::move(layers));
}

std::array<float, 3> ensemble(std::span<const std::array<float, 3>, 4> rgb, std::span<const float, 4> weights) {
  double total = 0.0;
  for (float w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-6) throw InvalidArgument("ensemble: weights must sum to 1");
  std::array<float, 3> out{};
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t c = 0; c < 3; ++c) out[c] += weights[j] * rgb[j][c];
  }
  return out;
}

}  // namespace lte
