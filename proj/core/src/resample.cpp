#include "lte/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lte/error.hpp"

namespace lte {

double bicubic_kernel(double x) {
  constexpr double a = -0.5;
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return a * (((t - 5.0) * t + 8.0) * t - 4.0);
  return 0.0;
}

namespace {

struct Taps {
  int count = 0;
  std::vector<int> index;      // out x count
  std::vector<double> weight;  // out x count
};

Taps axis_taps(int in, int out, bool cubic) {
  Taps taps;
  taps.count = cubic ? 4 : 2;
  taps.index.resize(static_cast<std::size_t>(out) * taps.count);
  taps.weight.resize(taps.index.size());
  const double ratio = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double src = (i + 0.5) * ratio - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const int first = static_cast<int>(base) - (cubic ? 1 : 0);
    for (int k = 0; k < taps.count; ++k) {
      const std::size_t slot = static_cast<std::size_t>(i) * taps.count + k;
      taps.index[slot] = std::clamp(first + k, 0, in - 1);
      if (cubic) {
        taps.weight[slot] = bicubic_kernel(t - (k - 1));
      } else {
        taps.weight[slot] = k == 0 ? 1.0 - t : t;
      }
    }
  }
  return taps;
}

Image resize_separable(const Image& img, int out_h, int out_w, bool cubic) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resize: output dims must be positive");
  if (img.empty()) throw InvalidArgument("resize: empty image");
  const Taps ty = axis_taps(img.height, out_h, cubic);
  const Taps tx = axis_taps(img.width, out_w, cubic);
  Image out(out_h, out_w);
  std::vector<double> rows(static_cast<std::size_t>(img.height) * out_w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < out_w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < tx.count; ++k) {
          const std::size_t slot = static_cast<std::size_t>(x) * tx.count + k;
          acc += tx.weight[slot] * img.at(c, y, tx.index[slot]);
        }
        rows[static_cast<std::size_t>(y) * out_w + x] = acc;
      }
    }
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < ty.count; ++k) {
          const std::size_t slot = static_cast<std::size_t>(y) * ty.count + k;
          acc += ty.weight[slot] * rows[static_cast<std::size_t>(ty.index[slot]) * out_w + x];
        }
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace

Image resize_bicubic(const Image& img, int out_h, int out_w) { return resize_separable(img, out_h, out_w, true); }

Image resize_bilinear(const Image& img, int out_h, int out_w) { return resize_separable(img, out_h, out_w, false); }

}  // namespace lte
