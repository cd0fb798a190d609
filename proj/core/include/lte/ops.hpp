#pragma once

#include <cstdint>
#include <span>

#include "lte/tensor.hpp"

// Differentiable operations. Every op checks shapes, throws InvalidArgument on
// mismatch, and records a graph node when grad mode is on and an input
// requires grad. Reductions run in a fixed order, so results are
// bit-reproducible.
namespace lte::ops {

// input C_in x H x W, weight C_out x C_in x k x k, bias C_out (may be
// undefined). Stride 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding);

// a M x N times b N x P.
Tensor matmul(const Tensor& a, const Tensor& b);

// x Q x N, weight M x N, bias M (may be undefined) -> x * weight^T + bias.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);
Tensor relu(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);

// C x H x W -> C x out_h x out_w; source index floor((i + 0.5) * H / out_h).
Tensor resize_nearest(const Tensor& input, int out_h, int out_w);

// C x H x W -> 9C x H x W. Block b = (dy + 1) * 3 + (dx + 1) holds the input
// shifted by (dy, dx), zero outside the image.
Tensor unfold3x3(const Tensor& input);

// C x H x W sampled at flat pixel indices (row * W + col) -> Q x C.
Tensor gather_pixels(const Tensor& input, std::span<const std::int32_t> pixel_index);

// Sinusoidal feature map for Q queries and K frequencies:
//   t[q,k]   = pi * (F[q,k] * dy[q] + F[q,K+k] * dx[q] + phase[k])
//   out[q,k] = A[q,k] cos t,  out[q,K+k] = A[q,K+k] sin t
// amplitude Q x 2K (undefined means all ones), frequency Q x 2K with f_y in
// [0, K) and f_x in [K, 2K), delta Q x 2 interleaved (dy, dx), phase K
// (undefined means zero). Non-finite inputs raise NumericError.
Tensor fourier_features(const Tensor& amplitude, const Tensor& frequency, std::span<const float> delta,
                        const Tensor& phase);

// M x N -> N x M.
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

// Scalar sum of all elements.
Tensor sum(const Tensor& x);

// Mean absolute error; gradient sign(pred - target) / N.
Tensor l1_loss(const Tensor& pred, const Tensor& target);

}  // namespace lte::ops
