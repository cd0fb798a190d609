#pragma once

#include <filesystem>
#include <vector>

#include "lte/tensor.hpp"

namespace lte {

// Planar 3 x H x W float image in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, float fill = 0.0f);

  float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  bool empty() const { return data.empty(); }
};

Image crop(const Image& img, int y, int x, int h, int w);
Image clip01(const Image& img);
// Per-pixel channel mean, H x W.
std::vector<float> grayscale(const Image& img);

// Model space is [0, 1] shifted by -0.5.
Tensor to_model_space(const Image& img);
Image from_model_space(const Tensor& t);

// PNG (8-bit RGB, RGBA, gray) and binary PPM (P6, maxval 255). The format is
// chosen by magic bytes on read and by extension (.png / .ppm) on write.
// Throws IoError.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace lte
