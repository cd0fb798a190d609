#include "lte/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lte/error.hpp"

namespace lte::ops {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ImplPtr = std::shared_ptr<detail::TensorImpl>;

struct Output {
  Tensor tensor;
  detail::Node* node = nullptr;
};

// Allocates the result and, when differentiation is live, the graph node.
Output make_output(Shape shape, std::initializer_list<const Tensor*> inputs, const char* name) {
  Output out{Tensor::zeros(std::move(shape)), nullptr};
  if (!grad_enabled()) return out;
  bool tracked = false;
  for (const Tensor* t : inputs) tracked = tracked || (t->defined() && t->requires_grad());
  if (!tracked) return out;
  auto node = std::make_shared<detail::Node>();
  node->name = name;
  for (const Tensor* t : inputs) {
    if (t->defined()) node->inputs.push_back(t->impl());
  }
  out.tensor.impl()->requires_grad = true;
  out.tensor.impl()->grad_fn = node;
  out.node = node.get();
  return out;
}

// Null when the input does not take gradients.
float* grad_of(const ImplPtr& impl) { return impl && impl->requires_grad ? impl->grad_buffer() : nullptr; }

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.defined() && b.defined(), std::string(op) + ": undefined operand");
  require(a.shape() == b.shape(),
          std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void im2col(const float* src, std::int64_t channels, std::int64_t h, std::int64_t w, int k, int pad,
            std::int64_t out_h, std::int64_t out_w, float* col) {
  const std::int64_t cols = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* dst = col + ((c * k + ky) * k + kx) * cols;
        for (std::int64_t oy = 0; oy < out_h; ++oy) {
          const std::int64_t iy = oy + ky - pad;
          float* row = dst + oy * out_w;
          if (iy < 0 || iy >= h) {
            std::fill(row, row + out_w, 0.0f);
            continue;
          }
          const float* in = src + (c * h + iy) * w;
          for (std::int64_t ox = 0; ox < out_w; ++ox) {
            const std::int64_t ix = ox + kx - pad;
            row[ox] = (ix >= 0 && ix < w) ? in[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im_add(const float* col, std::int64_t channels, std::int64_t h, std::int64_t w, int k, int pad,
                std::int64_t out_h, std::int64_t out_w, float* dst) {
  const std::int64_t cols = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* src = col + ((c * k + ky) * k + kx) * cols;
        for (std::int64_t oy = 0; oy < out_h; ++oy) {
          const std::int64_t iy = oy + ky - pad;
          if (iy < 0 || iy >= h) continue;
          float* out = dst + (c * h + iy) * w;
          const float* row = src + oy * out_w;
          for (std::int64_t ox = 0; ox < out_w; ++ox) {
            const std::int64_t ix = ox + kx - pad;
            if (ix >= 0 && ix < w) out[ix] += row[ox];
          }
        }
      }
    }
  }
}

template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, const char* name, Fwd fwd, Deriv deriv) {
  require(x.defined(), std::string(name) + ": undefined operand");
  auto [out, node] = make_output(x.shape(), {&x}, name);
  const auto in = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = fwd(in[i]);
  if (node) {
    node->backward = [xi = x.impl(), deriv](std::span<const float> g) {
      float* gx = grad_of(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xi->data[i]);
    };
  }
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding) {
  require(input.defined() && weight.defined(), "conv2d: undefined operand");
  require(input.rank() == 3, "conv2d: input must be C x H x W, got " + shape_str(input.shape()));
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3),
          "conv2d: weight must be C_out x C_in x k x k, got " + shape_str(weight.shape()));
  require(weight.dim(1) == input.dim(0), "conv2d: weight expects " + std::to_string(weight.dim(1)) +
                                             " input channels, input has " + std::to_string(input.dim(0)));
  require(padding >= 0, "conv2d: negative padding");
  const std::int64_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::int64_t cout = weight.dim(0);
  const int k = static_cast<int>(weight.dim(2));
  require(!bias.defined() || bias.shape() == Shape{cout}, "conv2d: bias must have C_out entries");
  const std::int64_t out_h = h + 2 * padding - k + 1, out_w = w + 2 * padding - k + 1;
  require(out_h >= 1 && out_w >= 1, "conv2d: kernel larger than padded input");

  const std::int64_t rows = cin * k * k, cols = out_h * out_w;
  const bool direct = k == 1 && padding == 0;
  auto col = std::make_shared<TrackedVector<float>>();
  if (!direct) {
    col->resize(static_cast<std::size_t>(rows * cols));
    im2col(input.data().data(), cin, h, w, k, padding, out_h, out_w, col->data());
  }

  auto [out, node] = make_output({cout, out_h, out_w}, {&input, &weight, &bias}, "conv2d");
  {
    const float* col_ptr = direct ? input.data().data() : col->data();
    MatMap om(out.data().data(), cout, cols);
    om.noalias() = ConstMatMap(weight.data().data(), cout, rows) * ConstMatMap(col_ptr, rows, cols);
    if (bias.defined()) {
      const auto b = bias.data();
      for (std::int64_t o = 0; o < cout; ++o) om.row(o).array() += b[static_cast<std::size_t>(o)];
    }
  }
  if (node) {
    if (direct) col.reset();
    node->backward = [xi = input.impl(), wi = weight.impl(), bi = bias.impl(), col, direct, cin, h, w, k,
                      padding, out_h, out_w, cout, rows, cols](std::span<const float> g) {
      ConstMatMap gm(g.data(), cout, cols);
      ConstMatMap wm(wi->data.data(), cout, rows);
      const float* col_ptr = direct ? xi->data.data() : col->data();
      if (float* gw = grad_of(wi)) {
        MatMap(gw, cout, rows).noalias() += gm * ConstMatMap(col_ptr, rows, cols).transpose();
      }
      if (float* gb = grad_of(bi)) {
        for (std::int64_t o = 0; o < cout; ++o) {
          float acc = 0.0f;
          for (std::int64_t i = 0; i < cols; ++i) acc += g[static_cast<std::size_t>(o * cols + i)];
          gb[o] += acc;
        }
      }
      if (float* gx = grad_of(xi)) {
        if (direct) {
          MatMap(gx, rows, cols).noalias() += wm.transpose() * gm;
        } else {
          TrackedVector<float> dcol(static_cast<std::size_t>(rows * cols));
          MatMap(dcol.data(), rows, cols).noalias() = wm.transpose() * gm;
          col2im_add(dcol.data(), cin, h, w, k, padding, out_h, out_w, gx);
        }
      }
    };
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.defined() && b.defined(), "matmul: undefined operand");
  require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be matrices");
  require(a.dim(1) == b.dim(0), "matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                                    shape_str(b.shape()));
  const std::int64_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  auto [out, node] = make_output({m, p}, {&a, &b}, "matmul");
  MatMap(out.data().data(), m, p).noalias() =
      ConstMatMap(a.data().data(), m, n) * ConstMatMap(b.data().data(), n, p);
  if (node) {
    node->backward = [ai = a.impl(), bi = b.impl(), m, n, p](std::span<const float> g) {
      ConstMatMap gm(g.data(), m, p);
      if (float* ga = grad_of(ai)) MatMap(ga, m, n).noalias() += gm * ConstMatMap(bi->data.data(), n, p).transpose();
      if (float* gb = grad_of(bi)) MatMap(gb, n, p).noalias() += ConstMatMap(ai->data.data(), m, n).transpose() * gm;
    };
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(x.defined() && weight.defined(), "linear: undefined operand");
  require(x.rank() == 2 && weight.rank() == 2, "linear: expects Q x N input and M x N weight");
  require(x.dim(1) == weight.dim(1), "linear: input width " + std::to_string(x.dim(1)) +
                                         " does not match weight " + shape_str(weight.shape()));
  const std::int64_t q = x.dim(0), n = x.dim(1), m = weight.dim(0);
  require(!bias.defined() || bias.shape() == Shape{m}, "linear: bias must have M entries");
  auto [out, node] = make_output({q, m}, {&x, &weight, &bias}, "linear");
  MatMap om(out.data().data(), q, m);
  om.noalias() = ConstMatMap(x.data().data(), q, n) * ConstMatMap(weight.data().data(), m, n).transpose();
  if (bias.defined()) {
    Eigen::Map<const Eigen::RowVectorXf> b(bias.data().data(), m);
    om.rowwise() += b;
  }
  if (node) {
    node->backward = [xi = x.impl(), wi = weight.impl(), bi = bias.impl(), q, n, m](std::span<const float> g) {
      ConstMatMap gm(g.data(), q, m);
      if (float* gx = grad_of(xi)) MatMap(gx, q, n).noalias() += gm * ConstMatMap(wi->data.data(), m, n);
      if (float* gw = grad_of(wi)) MatMap(gw, m, n).noalias() += gm.transpose() * ConstMatMap(xi->data.data(), q, n);
      if (float* gb = grad_of(bi)) {
        for (std::int64_t r = 0; r < q; ++r) {
          for (std::int64_t c = 0; c < m; ++c) gb[c] += g[static_cast<std::size_t>(r * m + c)];
        }
      }
    };
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto [out, node] = make_output(a.shape(), {&a, &b}, "add");
  const auto x = a.data(), y = b.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  if (node) {
    node->backward = [ai = a.impl(), bi = b.impl()](std::span<const float> g) {
      for (const auto& t : {ai, bi}) {
        if (float* gt = grad_of(t)) {
          for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
        }
      }
    };
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto [out, node] = make_output(a.shape(), {&a, &b}, "mul");
  const auto x = a.data(), y = b.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  if (node) {
    node->backward = [ai = a.impl(), bi = b.impl()](std::span<const float> g) {
      if (float* ga = grad_of(ai)) {
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bi->data[i];
      }
      if (float* gb = grad_of(bi)) {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ai->data[i];
      }
    };
  }
  return out;
}

Tensor scale(const Tensor& x, float factor) {
  return unary(x, "scale", [factor](float v) { return v * factor; }, [factor](float) { return factor; });
}

Tensor relu(const Tensor& x) {
  return unary(x, "relu", [](float v) { return v > 0.0f ? v : 0.0f; }, [](float v) { return v > 0.0f ? 1.0f : 0.0f; });
}

Tensor sin(const Tensor& x) {
  return unary(x, "sin", [](float v) { return std::sin(v); }, [](float v) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary(x, "cos", [](float v) { return std::cos(v); }, [](float v) { return -std::sin(v); });
}

Tensor resize_nearest(const Tensor& input, int out_h, int out_w) {
  require(input.defined() && input.rank() == 3, "resize_nearest: input must be C x H x W");
  require(out_h >= 1 && out_w >= 1, "resize_nearest: output dims must be positive");
  const std::int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  auto source = [](std::int64_t i, std::int64_t in, std::int64_t out) {
    const auto s = static_cast<std::int64_t>(std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(in) /
                                                        static_cast<double>(out)));
    return std::min(s, in - 1);
  };
  std::vector<std::int64_t> ys(static_cast<std::size_t>(out_h)), xs(static_cast<std::size_t>(out_w));
  for (int i = 0; i < out_h; ++i) ys[static_cast<std::size_t>(i)] = source(i, h, out_h);
  for (int i = 0; i < out_w; ++i) xs[static_cast<std::size_t>(i)] = source(i, w, out_w);

  auto [out, node] = make_output({c, out_h, out_w}, {&input}, "resize_nearest");
  const auto in = input.data();
  auto o = out.data();
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        o[static_cast<std::size_t>((ch * out_h + y) * out_w + x)] =
            in[static_cast<std::size_t>((ch * h + ys[static_cast<std::size_t>(y)]) * w + xs[static_cast<std::size_t>(x)])];
      }
    }
  }
  if (node) {
    node->backward = [xi = input.impl(), ys, xs, c, h, w, out_h, out_w](std::span<const float> g) {
      float* gx = grad_of(xi);
      for (std::int64_t ch = 0; ch < c; ++ch) {
        for (int y = 0; y < out_h; ++y) {
          for (int x = 0; x < out_w; ++x) {
            gx[(ch * h + ys[static_cast<std::size_t>(y)]) * w + xs[static_cast<std::size_t>(x)]] +=
                g[static_cast<std::size_t>((ch * out_h + y) * out_w + x)];
          }
        }
      }
    };
  }
  return out;
}

Tensor unfold3x3(const Tensor& input) {
  require(input.defined() && input.rank() == 3, "unfold3x3: input must be C x H x W");
  const std::int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  auto [out, node] = make_output({9 * c, h, w}, {&input}, "unfold3x3");
  // Visits every (output, source) pair; `fn(out_index, in_index)`.
  auto for_each_tap = [c, h, w](auto&& fn) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const std::int64_t block = (dy + 1) * 3 + (dx + 1);
        for (std::int64_t ch = 0; ch < c; ++ch) {
          for (std::int64_t y = 0; y < h; ++y) {
            const std::int64_t sy = y + dy;
            if (sy < 0 || sy >= h) continue;
            for (std::int64_t x = 0; x < w; ++x) {
              const std::int64_t sx = x + dx;
              if (sx < 0 || sx >= w) continue;
              fn(((block * c + ch) * h + y) * w + x, (ch * h + sy) * w + sx);
            }
          }
        }
      }
    }
  };
  const auto in = input.data();
  auto o = out.data();
  for_each_tap([&](std::int64_t oi, std::int64_t ii) { o[static_cast<std::size_t>(oi)] = in[static_cast<std::size_t>(ii)]; });
  if (node) {
    node->backward = [xi = input.impl(), for_each_tap](std::span<const float> g) {
      float* gx = grad_of(xi);
      for_each_tap([&](std::int64_t oi, std::int64_t ii) { gx[ii] += g[static_cast<std::size_t>(oi)]; });
    };
  }
  return out;
}

Tensor gather_pixels(const Tensor& input, std::span<const std::int32_t> pixel_index) {
  require(input.defined() && input.rank() == 3, "gather_pixels: input must be C x H x W");
  require(!pixel_index.empty(), "gather_pixels: no indices");
  const std::int64_t c = input.dim(0), hw = input.dim(1) * input.dim(2);
  const auto q = static_cast<std::int64_t>(pixel_index.size());
  for (auto idx : pixel_index) {
    if (idx < 0 || idx >= hw) throw std::out_of_range("gather_pixels: latent index out of range");
  }
  auto [out, node] = make_output({q, c}, {&input}, "gather_pixels");
  const auto in = input.data();
  auto o = out.data();
  for (std::int64_t i = 0; i < q; ++i) {
    const std::int64_t p = pixel_index[static_cast<std::size_t>(i)];
    for (std::int64_t ch = 0; ch < c; ++ch) o[static_cast<std::size_t>(i * c + ch)] = in[static_cast<std::size_t>(ch * hw + p)];
  }
  if (node) {
    node->backward = [xi = input.impl(), index = std::vector<std::int32_t>(pixel_index.begin(), pixel_index.end()), c,
                      hw](std::span<const float> g) {
      float* gx = grad_of(xi);
      for (std::size_t i = 0; i < index.size(); ++i) {
        for (std::int64_t ch = 0; ch < c; ++ch) gx[ch * hw + index[i]] += g[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)];
      }
    };
  }
  return out;
}

Tensor fourier_features(const Tensor& amplitude, const Tensor& frequency, std::span<const float> delta,
                        const Tensor& phase) {
  require(frequency.defined() && frequency.rank() == 2 && frequency.dim(1) % 2 == 0,
          "fourier_features: frequency must be Q x 2K");
  const std::int64_t q = frequency.dim(0), k = frequency.dim(1) / 2;
  require(!amplitude.defined() || amplitude.shape() == frequency.shape(),
          "fourier_features: amplitude must match frequency shape " + shape_str(frequency.shape()));
  require(static_cast<std::int64_t>(delta.size()) == 2 * q, "fourier_features: delta must be Q x 2");
  require(!phase.defined() || phase.numel() == k, "fourier_features: phase must have K entries");

  auto all_finite = [](std::span<const float> v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
  };
  if (!all_finite(frequency.data()) || !all_finite(delta) || (amplitude.defined() && !all_finite(amplitude.data())) ||
      (phase.defined() && !all_finite(phase.data()))) {
    throw NumericError("fourier_features: non-finite input");
  }

  constexpr float kPi = std::numbers::pi_v<float>;
  auto [out, node] = make_output({q, 2 * k}, {&amplitude, &frequency, &phase}, "fourier_features");
  const auto f = frequency.data();
  const float* a = amplitude.defined() ? amplitude.data().data() : nullptr;
  const float* p = phase.defined() ? phase.data().data() : nullptr;
  auto o = out.data();
  for (std::int64_t i = 0; i < q; ++i) {
    const float dy = delta[static_cast<std::size_t>(2 * i)], dx = delta[static_cast<std::size_t>(2 * i + 1)];
    const std::int64_t row = i * 2 * k;
    for (std::int64_t j = 0; j < k; ++j) {
      const float t = kPi * (f[static_cast<std::size_t>(row + j)] * dy + f[static_cast<std::size_t>(row + k + j)] * dx + (p ? p[j] : 0.0f));
      const float ac = a ? a[row + j] : 1.0f;
      const float as = a ? a[row + k + j] : 1.0f;
      o[static_cast<std::size_t>(row + j)] = ac * std::cos(t);
      o[static_cast<std::size_t>(row + k + j)] = as * std::sin(t);
    }
  }
  if (node) {
    node->backward = [ai = amplitude.impl(), fi = frequency.impl(), pi = phase.impl(),
                      d = std::vector<float>(delta.begin(), delta.end()), q, k](std::span<const float> g) {
      const float* a = ai ? ai->data.data() : nullptr;
      const float* f = fi->data.data();
      const float* p = pi ? pi->data.data() : nullptr;
      float* ga = grad_of(ai);
      float* gf = grad_of(fi);
      float* gp = grad_of(pi);
      for (std::int64_t i = 0; i < q; ++i) {
        const float dy = d[static_cast<std::size_t>(2 * i)], dx = d[static_cast<std::size_t>(2 * i + 1)];
        const std::int64_t row = i * 2 * k;
        for (std::int64_t j = 0; j < k; ++j) {
          const float t = kPi * (f[row + j] * dy + f[row + k + j] * dx + (p ? p[j] : 0.0f));
          const float c = std::cos(t), s = std::sin(t);
          const float gc = g[static_cast<std::size_t>(row + j)], gs = g[static_cast<std::size_t>(row + k + j)];
          if (ga) {
            ga[row + j] += gc * c;
            ga[row + k + j] += gs * s;
          }
          const float ac = a ? a[row + j] : 1.0f;
          const float as = a ? a[row + k + j] : 1.0f;
          const float dt = kPi * (gs * as * c - gc * ac * s);
          if (gf) {
            gf[row + j] += dt * dy;
            gf[row + k + j] += dt * dx;
          }
          if (gp) gp[j] += dt;
        }
      }
    };
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  require(x.defined() && x.rank() == 2, "transpose: expects a matrix");
  const std::int64_t m = x.dim(0), n = x.dim(1);
  auto [out, node] = make_output({n, m}, {&x}, "transpose");
  MatMap(out.data().data(), n, m) = ConstMatMap(x.data().data(), m, n).transpose();
  if (node) {
    node->backward = [xi = x.impl(), m, n](std::span<const float> g) {
      MatMap(grad_of(xi), m, n) += ConstMatMap(g.data(), n, m).transpose();
    };
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(x.defined(), "reshape: undefined operand");
  require(shape_numel(shape) == x.numel(), "reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  auto [out, node] = make_output(std::move(shape), {&x}, "reshape");
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
  if (node) {
    node->backward = [xi = x.impl()](std::span<const float> g) {
      float* gx = grad_of(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    };
  }
  return out;
}

Tensor sum(const Tensor& x) {
  require(x.defined(), "sum: undefined operand");
  auto [out, node] = make_output({}, {&x}, "sum");
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  out.data()[0] = static_cast<float>(acc);
  if (node) {
    node->backward = [xi = x.impl()](std::span<const float> g) {
      float* gx = grad_of(xi);
      for (std::size_t i = 0; i < xi->data.size(); ++i) gx[i] += g[0];
    };
  }
  return out;
}

Tensor l1_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "l1_loss");
  auto [out, node] = make_output({}, {&pred, &target}, "l1_loss");
  const auto p = pred.data(), t = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(static_cast<double>(p[i]) - t[i]);
  const double n = static_cast<double>(p.size());
  out.data()[0] = static_cast<float>(acc / n);
  if (node) {
    node->backward = [pi = pred.impl(), ti = target.impl(), n](std::span<const float> g) {
      const float step = static_cast<float>(g[0] / n);
      float* gp = grad_of(pi);
      float* gt = grad_of(ti);
      for (std::size_t i = 0; i < pi->data.size(); ++i) {
        const float d = pi->data[i] - ti->data[i];
        const float s = d > 0.0f ? step : (d < 0.0f ? -step : 0.0f);
        if (gp) gp[i] += s;
        if (gt) gt[i] -= s;
      }
    };
  }
  return out;
}

}  // namespace lte::ops
