#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lte/image.hpp"
#include "lte/model.hpp"
#include "test_util.hpp"

namespace lte::testing {

inline ModelConfig micro_config(int width = 4, int blocks = 1, int k = 4, int hidden = 8) {
  ModelConfig c;
  c.encoder.width = width;
  c.encoder.n_resblocks = blocks;
  c.lte.K = k;
  c.decoder_hidden = hidden;
  c.min_cell = {0.5f, 0.5f};
  return c;
}

inline void zero_final_layer(SrModel& m) {
  auto& last = m.decoder.layers().back();
  std::fill(last.weight.data().begin(), last.weight.data().end(), 0.0f);
  std::fill(last.bias.data().begin(), last.bias.data().end(), 0.0f);
}

// Model whose decoder returns the neighbour's stored LR colour: the encoder
// copies the image into latent channels 0..2, the amplitude estimator copies
// those channels out, frequencies are zero so each feature is (A, 0), and the
// decoder passes the first three features through (shifted by +1 around the
// ReLUs).
inline SrModel stored_value_model(bool skip) {
  ModelConfig c = micro_config(3, 0, 3, 3);
  c.lte.ablation.no_phase = true;
  c.lte.ablation.no_skip = !skip;
  SrModel m(c, 99);
  auto zero = [](Tensor& t) { std::fill(t.data().begin(), t.data().end(), 0.0f); };
  auto centre_identity = [&](Conv2dLayer& conv, int n) {
    zero(conv.weight);
    zero(conv.bias);
    const auto cin = conv.weight.dim(1);
    for (int o = 0; o < n; ++o) conv.weight.data()[static_cast<std::size_t>((o * cin + o) * 9 + 4)] = 1.0f;
  };
  centre_identity(m.encoder.head, 3);
  zero(m.encoder.tail.weight);
  zero(m.encoder.tail.bias);
  centre_identity(m.estimator.amplitude, 3);
  zero(m.estimator.frequency.weight);
  zero(m.estimator.frequency.bias);
  auto& layers = m.decoder.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    zero(layers[i].weight);
    const auto in = layers[i].weight.dim(1);
    for (int o = 0; o < 3; ++o) layers[i].weight.data()[static_cast<std::size_t>(o * in + o)] = 1.0f;
    const float b = i == 0 ? 1.0f : (i + 1 == layers.size() ? -1.0f : 0.0f);
    std::fill(layers[i].bias.data().begin(), layers[i].bias.data().end(), b);
  }
  return m;
}

// Independent reference for sr_forward: plain loops in double, one query at
// a time, with the neighbour geometry recomputed from first principles.
inline std::vector<double> naive_sr_forward(const SrModel& model, const Tensor& lr, int out_h, int out_w) {
  const auto& cfg = model.config();
  const int h = static_cast<int>(lr.dim(1)), w = static_cast<int>(lr.dim(2));
  const int width = cfg.encoder.width;
  auto conv_d = [&](const std::vector<double>& in, int cin, const Conv2dLayer& layer) {
    const int cout = static_cast<int>(layer.weight.dim(0));
    std::vector<double> out(static_cast<std::size_t>(cout) * h * w);
    const auto wt = layer.weight.data();
    const auto b = layer.bias.data();
    for (int o = 0; o < cout; ++o) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double acc = b[static_cast<std::size_t>(o)];
          for (int c = 0; c < cin; ++c) {
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const int sy = y + ky - 1, sx = x + kx - 1;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                acc += in[(static_cast<std::size_t>(c) * h + sy) * w + sx] *
                       wt[((static_cast<std::size_t>(o) * cin + c) * 3 + ky) * 3 + kx];
              }
            }
          }
          out[(static_cast<std::size_t>(o) * h + y) * w + x] = acc;
        }
      }
    }
    return out;
  };
  std::vector<double> img(lr.data().begin(), lr.data().end());
  const std::vector<double> head = conv_d(img, 3, model.encoder.head);
  std::vector<double> x = head;
  for (const auto& block : model.encoder.blocks) {
    std::vector<double> r = conv_d(x, width, block.conv1);
    for (double& v : r) v = std::max(v, 0.0);
    r = conv_d(r, width, block.conv2);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += cfg.encoder.res_scale * r[i];
  }
  std::vector<double> z = conv_d(x, width, model.encoder.tail);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += head[i];

  const int k = cfg.lte.frequency_count();
  std::vector<double> amp;
  if (model.estimator.amplitude.weight.defined()) amp = conv_d(z, width, model.estimator.amplitude);
  const std::vector<double> freq = conv_d(z, width, model.estimator.frequency);

  const double cell_y = 2.0 / out_h * h, cell_x = 2.0 / out_w * w;
  const double cy = std::max(cell_y, static_cast<double>(cfg.min_cell.cy));
  const double cx = std::max(cell_x, static_cast<double>(cfg.min_cell.cx));
  std::vector<double> phase(static_cast<std::size_t>(k), 0.0);
  if (model.estimator.phase.weight.defined()) {
    const auto pw = model.estimator.phase.weight.data();
    const auto pb = model.estimator.phase.bias.data();
    for (int i = 0; i < k; ++i) {
      phase[static_cast<std::size_t>(i)] =
          pw[static_cast<std::size_t>(2 * i)] * cy + pw[static_cast<std::size_t>(2 * i + 1)] * cx + pb[static_cast<std::size_t>(i)];
    }
  }

  auto decode = [&](std::vector<double> v) {
    const auto& layers = model.decoder.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto wt = layers[l].weight.data();
      const auto b = layers[l].bias.data();
      const auto m = static_cast<std::size_t>(layers[l].weight.dim(0));
      const auto n = static_cast<std::size_t>(layers[l].weight.dim(1));
      std::vector<double> out(m);
      for (std::size_t o = 0; o < m; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < n; ++i) acc += wt[o * n + i] * v[i];
        out[o] = l + 1 < layers.size() ? std::max(acc, 0.0) : acc;
      }
      v = std::move(out);
    }
    return v;
  };

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<double> out(3 * static_cast<std::size_t>(out_h) * out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double qy = -1.0 + (2.0 * oy + 1.0) / out_h;
      const double qx = -1.0 + (2.0 * ox + 1.0) / out_w;
      // Continuous latent position, neighbours at floor and floor + 1.
      const double uy = (qy + 1.0) * h / 2.0 - 0.5, ux = (qx + 1.0) * w / 2.0 - 0.5;
      const double fy = std::floor(uy + 1e-9), fx = std::floor(ux + 1e-9);
      const double ty = std::max(0.0, uy - fy), tx = std::max(0.0, ux - fx);
      double rgb[3] = {0, 0, 0}, skip[3] = {0, 0, 0}, wsum = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double wj = (a ? ty : 1.0 - ty) * (b ? tx : 1.0 - tx);
          wsum += wj;
          const int ry = std::clamp(static_cast<int>(fy) + a, 0, h - 1);
          const int rx = std::clamp(static_cast<int>(fx) + b, 0, w - 1);
          const double dy = (qy - (-1.0 + (2.0 * ry + 1.0) / h)) * h;
          const double dx = (qx - (-1.0 + (2.0 * rx + 1.0) / w)) * w;
          const std::size_t p = static_cast<std::size_t>(ry) * w + rx;
          std::vector<double> feat(2 * static_cast<std::size_t>(k));
          for (int i = 0; i < k; ++i) {
            const auto ki = static_cast<std::size_t>(i);
            const double t = std::numbers::pi * (freq[ki * plane + p] * dy + freq[(k + ki) * plane + p] * dx + phase[ki]);
            const double ac = amp.empty() ? 1.0 : amp[ki * plane + p];
            const double as = amp.empty() ? 1.0 : amp[(k + ki) * plane + p];
            feat[ki] = ac * std::cos(t);
            feat[k + ki] = as * std::sin(t);
          }
          const auto c = decode(feat);
          for (int ch = 0; ch < 3; ++ch) {
            rgb[ch] += wj * c[static_cast<std::size_t>(ch)];
            skip[ch] += wj * img[static_cast<std::size_t>(ch) * plane + p];
          }
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        double v = rgb[ch] / wsum;
        if (!cfg.lte.ablation.no_skip) v += skip[ch] / wsum;
        out[(static_cast<std::size_t>(ch) * out_h + oy) * out_w + ox] = v;
      }
    }
  }
  return out;
}

// End-to-end gradient check: autograd through the float pipeline against
// central differences of naive_sr_forward, which runs in double so the
// differences are free of float32 noise. Steps that straddle a ReLU kink
// are retried smaller; the actual stored step is used as the denominator.
// Covers every parameter; the LR skip carries no history, so the input
// itself is not checked.
inline GradCheck oracle_grad_check(SrModel& model, const Tensor& lr, int out_h, int out_w, Rng& rng, float eps = 1e-6f) {
  auto params = model.parameters();
  std::vector<Tensor> inputs;
  for (auto& p : params) inputs.push_back(p.tensor);
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  const Tensor out = sr_forward(model, lr, out_h, out_w).image;
  std::vector<float> proj(static_cast<std::size_t>(out.numel()));
  for (float& v : proj) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  backward(ops::sum(ops::mul(out, Tensor::from_vector(out.shape(), proj))));

  auto loss = [&] {
    const auto o = naive_sr_forward(model, lr, out_h, out_w);
    double acc = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) acc += o[i] * proj[i];
    return acc;
  };
  const double l0 = loss();
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto& t : inputs) {
    const std::vector<float> analytic = t.has_grad() ? std::vector<float>(t.grad().begin(), t.grad().end())
                                                     : std::vector<float>(static_cast<std::size_t>(t.numel()), 0.0f);
    auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const float saved = data[i];
      double numeric = 0.0;
      // A ReLU kink inside [x - h, x + h] shows up as one-sided slopes that
      // disagree; shrink h until they agree or the step stops shrinking.
      for (float h = eps;; h *= 0.1f) {
        const float up = saved + h, down = saved - h;
        if (up == saved || down == saved) break;  // keep the last usable step
        data[i] = up;
        const double lu = loss();
        data[i] = down;
        const double ld = loss();
        data[i] = saved;
        numeric = (lu - ld) / (static_cast<double>(up) - static_cast<double>(down));
        const double fwd = (lu - l0) / (static_cast<double>(up) - saved);
        const double bwd = (l0 - ld) / (static_cast<double>(saved) - down);
        if (std::abs(fwd - bwd) <= 1e-4 + 1e-2 * std::abs(numeric)) break;
      }
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += static_cast<double>(analytic[i]) * analytic[i];
      n2 += numeric * numeric;
    }
  }
  for (auto& t : inputs) t.set_requires_grad(false);
  GradCheck g;
  g.analytic_norm = std::sqrt(a2);
  g.numeric_norm = std::sqrt(n2);
  g.rel_error = std::sqrt(diff2) / std::max({g.analytic_norm, g.numeric_norm, 1e-12});
  return g;
}

}  // namespace lte::testing
