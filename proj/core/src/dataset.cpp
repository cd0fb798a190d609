#include "lte/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "lte/error.hpp"
#include "lte/resample.hpp"

namespace lte {

TrainPair sample_train_pair(const Image& hr, double r, int patch, Rng& rng) {
  if (patch < 1) throw InvalidArgument("sample_train_pair: patch must be positive");
  if (!(r >= 1.0)) throw InvalidArgument("sample_train_pair: scale must be >= 1");
  const int size = static_cast<int>(std::floor(r * patch));
  if (hr.height < size || hr.width < size) {
    throw InvalidArgument("sample_train_pair: image " + std::to_string(hr.height) + "x" + std::to_string(hr.width) +
                          " smaller than crop " + std::to_string(size));
  }
  const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(hr.height - size + 1)));
  const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(hr.width - size + 1)));

  TrainPair pair;
  const Image hr_crop = crop(hr, y0, x0, size, size);
  pair.lr = resize_bicubic(hr_crop, patch, patch);
  pair.crop_h = size;
  pair.crop_w = size;
  pair.cell = make_cell(size, size);

  // Partial Fisher-Yates: the first patch^2 slots are a uniform sample
  // without replacement.
  const std::size_t total = static_cast<std::size_t>(size) * size;
  const std::size_t count = static_cast<std::size_t>(patch) * patch;
  std::vector<std::uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(order[i], order[j]);
  }
  pair.coords.reserve(count);
  pair.gt.reserve(3 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const int y = static_cast<int>(order[i] / static_cast<std::uint32_t>(size));
    const int x = static_cast<int>(order[i] % static_cast<std::uint32_t>(size));
    pair.coords.push_back({pixel_center(y, size), pixel_center(x, size)});
    for (int c = 0; c < 3; ++c) pair.gt.push_back(hr_crop.at(c, y, x));
  }
  return pair;
}

Image gen_sinusoid(const SyntheticTextureSpec& spec) {
  if (spec.height < 1 || spec.width < 1) throw InvalidArgument("gen_sinusoid: size must be positive");
  if (std::abs(spec.fy) >= spec.height / 2.0 || std::abs(spec.fx) >= spec.width / 2.0) {
    throw InvalidArgument("gen_sinusoid: frequency at or above Nyquist");
  }
  Image img(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    const double py = (y + 0.5) / spec.height;
    for (int x = 0; x < spec.width; ++x) {
      const double px = (x + 0.5) / spec.width;
      const double v =
          0.5 + spec.contrast * std::cos(2.0 * std::numbers::pi * (spec.fy * py + spec.fx * px) + spec.phase);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>(v);
    }
  }
  return img;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               const std::optional<std::filesystem::path>& split) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  if (split) {
    std::ifstream in(*split);
    if (!in) throw IoError("cannot open split list " + split->string());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      fs::path p(line);
      out.push_back(p.is_absolute() ? p : dir / p);
    }
    return out;
  }
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& split) {
  Dataset ds;
  ds.paths = list_images(dir, split);
  ds.images.reserve(ds.paths.size());
  for (const auto& p : ds.paths) ds.images.push_back(read_image(p));
  return ds;
}

}  // namespace lte
