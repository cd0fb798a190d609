#pragma once

#include "lte/image.hpp"

namespace lte {

// Keys cubic convolution kernel with a = -0.5.
double bicubic_kernel(double x);

// Separable resizers with centre-aligned sampling: output pixel i reads source
// position (i + 0.5) * in / out - 0.5, borders replicate. No antialiasing
// prefilter when downsampling.
Image resize_bicubic(const Image& img, int out_h, int out_w);
Image resize_bilinear(const Image& img, int out_h, int out_w);

}  // namespace lte
