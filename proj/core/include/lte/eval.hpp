#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lte/image.hpp"
#include "lte/model.hpp"

namespace lte {

// Value written in place of +inf PSNR (identical images).
inline constexpr double kPsnrCap = 999.0;

// 10 log10(1 / MSE) over all three channels after cropping `border` pixels
// from every side. Identical images give +inf.
double psnr(const Image& a, const Image& b, int border);

// Same on BT.601 luma (the benchmark-set convention), one channel.
double psnr_y(const Image& a, const Image& b, int border);
// Border crop used by eval_set: ceil(scale) + 6.
int eval_border(double scale);

// floor(n * r) with a guard against representation error in r.
int scaled_dim(int n, double r);

// Centred 16-point DFT magnitude of a grayscale patch: entry (v, u) for
// vertical frequency v and horizontal frequency u, both in [-8, 7].
struct Spectrum {
  static constexpr int kTaps = 16;
  std::array<double, kTaps * kTaps> magnitude{};

  double at(int v, int u) const { return magnitude[static_cast<std::size_t>((v + 8) * kTaps + (u + 8))]; }
};

// 16 x 16 grayscale input, row-major.
Spectrum dft16(std::span<const float> gray);
// Channel-mean of the centre 16 x 16 crop.
Spectrum dft16(const Image& patch);

inline constexpr double kScatterDomain = 1.5;

// One estimated frequency: (f_x, f_y) in cycles per latent pixel and the
// norm of its cosine/sine amplitude pair.
struct ScatterRow {
  float fx = 0.0f;
  float fy = 0.0f;
  float mag = 0.0f;
  bool in_domain = false;  // both |f| <= 1.5
};

struct FreqScatter {
  int height = 0;
  int width = 0;
  int k = 0;
  std::vector<ScatterRow> rows;  // pixel-major (row-major pixels), then k
};

// Runs encoder and amplitude/frequency estimators on `lr` ([0, 1] image).
FreqScatter export_scatter(const SrModel& model, const Image& lr);

// CSV: header `fx,fy,mag,in_domain`, LF endings, 9 significant digits.
void write_scatter_csv(std::ostream& out, const FreqScatter& scatter);
void write_scatter_csv(const std::filesystem::path& path, const FreqScatter& scatter);

// Chunked inference on a [0, 1] image, clipped to [0, 1].
Image super_resolve(const SrModel& model, const Image& lr, int out_h, int out_w, std::int64_t chunk);

struct PsnrRow {
  double scale = 0.0;
  std::string image;
  double psnr_db = 0.0;  // NaN when the image could not be evaluated
  bool ok = true;
};

struct ScaleMean {
  double scale = 0.0;
  double psnr_db = 0.0;
  int count = 0;
};

struct PsnrTable {
  std::vector<PsnrRow> rows;  // scale-major, images in input order
  std::vector<ScaleMean> means;
};

enum class PsnrChannel { rgb, y };

struct NamedImage {
  std::string name;
  Image image;
};

// For each scale: GT is cropped at the top left to floor(s * floor(H / s))
// rows (likewise columns), LR = bicubic(crop, floor(H / s), floor(W / s)),
// and the SR output at the crop size is scored against the crop with border
// eval_border(s). `threads` workers share the frozen model; rows come out in
// the same order and with the same values for any thread count.
PsnrTable eval_images(const SrModel& model, std::span<const NamedImage> images, std::span<const double> scales,
                      std::int64_t chunk, int threads = 1, PsnrChannel channel = PsnrChannel::rgb);

// Same over files; unreadable files produce NaN rows with ok = false and are
// left out of the means.
PsnrTable eval_set(const SrModel& model, std::span<const std::filesystem::path> images, std::span<const double> scales,
                   std::int64_t chunk, int threads = 1, PsnrChannel channel = PsnrChannel::rgb);

// CSV `scale,image,psnr_db`; per-scale means appear as image `mean`.
void write_psnr_csv(std::ostream& out, const PsnrTable& table);

}  // namespace lte
