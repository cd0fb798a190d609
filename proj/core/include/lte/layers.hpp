#pragma once

#include <string>
#include <vector>

#include "lte/rng.hpp"
#include "lte/tensor.hpp"

namespace lte {

struct Conv2dLayer {
  Tensor weight;  // C_out x C_in x k x k
  Tensor bias;    // C_out
  int padding = 0;

  Tensor forward(const Tensor& input) const;
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

struct LinearLayer {
  Tensor weight;  // out x in
  Tensor bias;    // out

  Tensor forward(const Tensor& input) const;
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

void fill_uniform(Tensor& t, double bound, Rng& rng);
void fill_normal(Tensor& t, double stddev, Rng& rng);

// Kaiming-uniform over fan-in with a = sqrt(5) (bound 1/sqrt(fan_in)), zero
// bias, "same" padding.
Conv2dLayer make_conv(int in_channels, int out_channels, int kernel, Rng& rng);

// Uniform(+-1/sqrt(fan_in)) weight and bias.
LinearLayer make_linear(int in_features, int out_features, Rng& rng);

}  // namespace lte
