#include "lte/layers.hpp"

#include <cmath>

#include "lte/ops.hpp"

namespace lte {

Tensor Conv2dLayer::forward(const Tensor& input) const { return ops::conv2d(input, weight, bias, padding); }

void Conv2dLayer::collect(std::vector<NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Tensor LinearLayer::forward(const Tensor& input) const { return ops::linear(input, weight, bias); }

void LinearLayer::collect(std::vector<NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
}

void fill_normal(Tensor& t, double stddev, Rng& rng) {
  for (float& v : t.data()) v = static_cast<float>(stddev * rng.normal());
}

Conv2dLayer make_conv(int in_channels, int out_channels, int kernel, Rng& rng) {
  Conv2dLayer layer;
  layer.weight = Tensor::zeros({out_channels, in_channels, kernel, kernel}, true);
  layer.bias = Tensor::zeros({out_channels}, true);
  layer.padding = kernel / 2;
  fill_uniform(layer.weight, 1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel)), rng);
  return layer;
}

LinearLayer make_linear(int in_features, int out_features, Rng& rng) {
  LinearLayer layer;
  layer.weight = Tensor::zeros({out_features, in_features}, true);
  layer.bias = Tensor::zeros({out_features}, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  fill_uniform(layer.weight, bound, rng);
  fill_uniform(layer.bias, bound, rng);
  return layer;
}

}  // namespace lte
