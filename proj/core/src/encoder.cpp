#include "lte/encoder.hpp"

#include "lte/error.hpp"
#include "lte/ops.hpp"

namespace lte {

Encoder::Encoder(const EncoderConfig& config, Rng& rng) : config_(config) {
  if (config.in_channels < 1 || config.width < 1 || config.n_resblocks < 0) {
    throw InvalidArgument("encoder: width >= 1 and n_resblocks >= 0 required");
  }
  head = make_conv(config.in_channels, config.width, 3, rng);
  blocks.reserve(static_cast<std::size_t>(config.n_resblocks));
  for (int i = 0; i < config.n_resblocks; ++i) {
    ResBlock block;
    block.conv1 = make_conv(config.width, config.width, 3, rng);
    block.conv2 = make_conv(config.width, config.width, 3, rng);
    blocks.push_back(std::move(block));
  }
  tail = make_conv(config.width, config.width, 3, rng);
}

FeatureMap Encoder::encode(const Tensor& img) const {
  const Tensor h = head.forward(img);
  Tensor x = h;
  for (const auto& block : blocks) {
    Tensor r = block.conv2.forward(ops::relu(block.conv1.forward(x)));
    if (config_.res_scale != 1.0f) r = ops::scale(r, config_.res_scale);
    x = ops::add(x, r);
  }
  return {ops::add(tail.forward(x), h)};
}

void Encoder::collect(std::vector<NamedTensor>& out, const std::string& prefix) const {
  head.collect(out, prefix + ".head");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = prefix + ".body." + std::to_string(i);
    blocks[i].conv1.collect(out, p + ".conv1");
    blocks[i].conv2.collect(out, p + ".conv2");
  }
  tail.collect(out, prefix + ".tail");
}

}  // namespace lte
