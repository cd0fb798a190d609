#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lte/coords.hpp"
#include "lte/image.hpp"
#include "lte/rng.hpp"

namespace lte {

// One training sample: an LR patch plus `patch * patch` HR pixels drawn from
// the crop it was downsampled from.
struct TrainPair {
  Image lr;
  std::vector<Coord> coords;  // normalized to the crop frame
  std::vector<float> gt;      // Q x 3, [0, 1]
  Cell cell;                  // make_cell over the crop
  int crop_h = 0;
  int crop_w = 0;
};

// Crops floor(r * patch) square from `hr` at a random offset, bicubic-resizes
// it to patch x patch, and samples patch^2 distinct crop pixels as targets.
TrainPair sample_train_pair(const Image& hr, double r, int patch, Rng& rng);

// I(y, x) = 0.5 + contrast * cos(2 pi (fy * y + fx * x) + phase) with y, x the
// pixel centres in [0, 1); frequencies are in cycles per image.
struct SyntheticTextureSpec {
  double fy = 0.0;
  double fx = 0.0;
  double contrast = 0.25;
  double phase = 0.0;
  int height = 64;
  int width = 64;
};

// Throws InvalidArgument when a frequency reaches the Nyquist limit.
Image gen_sinusoid(const SyntheticTextureSpec& spec);

struct Dataset {
  std::vector<std::filesystem::path> paths;
  std::vector<Image> images;

  bool empty() const { return images.empty(); }
  std::size_t size() const { return images.size(); }
};

// Image files in `dir` (.png / .ppm, sorted by name), or the paths listed one
// per line in `split`; relative entries resolve against `dir`.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               const std::optional<std::filesystem::path>& split = std::nullopt);
Dataset load_dataset(const std::filesystem::path& dir,
                     const std::optional<std::filesystem::path>& split = std::nullopt);

}  // namespace lte
