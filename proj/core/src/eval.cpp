#include "lte/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <thread>

#include "lte/error.hpp"
#include "lte/resample.hpp"

namespace lte {

double psnr(const Image& a, const Image& b, int border) {
  if (a.height != b.height || a.width != b.width) throw InvalidArgument("psnr: image dims differ");
  if (border < 0) throw InvalidArgument("psnr: negative border");
  const int h = a.height - 2 * border, w = a.width - 2 * border;
  if (h < 1 || w < 1) throw InvalidArgument("psnr: border crops the whole image");
  double sse = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = border; y < border + h; ++y) {
      for (int x = border; x < border + w; ++x) {
        const double d = static_cast<double>(a.at(c, y, x)) - b.at(c, y, x);
        sse += d * d;
      }
    }
  }
  const double mse = sse / (3.0 * h * w);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double psnr_y(const Image& a, const Image& b, int border) {
  if (a.height != b.height || a.width != b.width) throw InvalidArgument("psnr_y: image dims differ");
  if (border < 0) throw InvalidArgument("psnr_y: negative border");
  const int h = a.height - 2 * border, w = a.width - 2 * border;
  if (h < 1 || w < 1) throw InvalidArgument("psnr_y: border crops the whole image");
  // BT.601 studio-range luma; the +16 offset cancels in the difference.
  constexpr double kr = 65.481 / 255.0, kg = 128.553 / 255.0, kb = 24.966 / 255.0;
  double sse = 0.0;
  for (int y = border; y < border + h; ++y) {
    for (int x = border; x < border + w; ++x) {
      const double d = kr * (static_cast<double>(a.at(0, y, x)) - b.at(0, y, x)) +
                       kg * (static_cast<double>(a.at(1, y, x)) - b.at(1, y, x)) +
                       kb * (static_cast<double>(a.at(2, y, x)) - b.at(2, y, x));
      sse += d * d;
    }
  }
  const double mse = sse / (static_cast<double>(h) * w);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

int eval_border(double scale) { return static_cast<int>(std::ceil(scale)) + 6; }

int scaled_dim(int n, double r) { return static_cast<int>(std::floor(n * r + 1e-9)); }

Spectrum dft16(std::span<const float> gray) {
  constexpr int n = Spectrum::kTaps;
  if (gray.size() != static_cast<std::size_t>(n * n)) throw InvalidArgument("dft16: expected 16 x 16 samples");
  Spectrum s;
  for (int v = -n / 2; v < n / 2; ++v) {
    for (int u = -n / 2; u < n / 2; ++u) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double angle = -2.0 * std::numbers::pi * static_cast<double>(v * y + u * x) / n;
          acc += static_cast<double>(gray[static_cast<std::size_t>(y * n + x)]) * std::polar(1.0, angle);
        }
      }
      s.magnitude[static_cast<std::size_t>((v + n / 2) * n + (u + n / 2))] = std::abs(acc);
    }
  }
  return s;
}

Spectrum dft16(const Image& patch) {
  constexpr int n = Spectrum::kTaps;
  if (patch.height < n || patch.width < n) throw InvalidArgument("dft16: image smaller than 16 x 16");
  const Image centre = crop(patch, (patch.height - n) / 2, (patch.width - n) / 2, n, n);
  const std::vector<float> gray = grayscale(centre);
  return dft16(std::span<const float>(gray));
}

FreqScatter export_scatter(const SrModel& model, const Image& lr) {
  NoGradGuard no_grad;
  const FeatureMap z = model.encoder.encode(to_model_space(lr));
  const AmpFreq af = model.estimator.estimate_amp_freq(z);
  FreqScatter out;
  out.height = z.height();
  out.width = z.width();
  out.k = model.config().lte.frequency_count();
  const std::size_t plane = static_cast<std::size_t>(out.height) * static_cast<std::size_t>(out.width);
  const auto k = static_cast<std::size_t>(out.k);
  const auto f = af.frequency.data();
  out.rows.reserve(plane * k);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t i = 0; i < k; ++i) {
      ScatterRow row;
      row.fy = f[i * plane + p];
      row.fx = f[(k + i) * plane + p];
      if (af.amplitude.defined()) {
        const auto a = af.amplitude.data();
        row.mag = std::hypot(a[i * plane + p], a[(k + i) * plane + p]);
      } else {
        row.mag = std::numbers::sqrt2_v<float>;
      }
      row.in_domain = std::abs(row.fx) <= kScatterDomain && std::abs(row.fy) <= kScatterDomain;
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_scatter_csv(std::ostream& out, const FreqScatter& scatter) {
  out << "fx,fy,mag,in_domain\n";
  char line[96];
  for (const auto& r : scatter.rows) {
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%d\n", static_cast<double>(r.fx), static_cast<double>(r.fy),
                  static_cast<double>(r.mag), r.in_domain ? 1 : 0);
    out << line;
  }
}

void write_scatter_csv(const std::filesystem::path& path, const FreqScatter& scatter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_scatter_csv(out, scatter);
  if (!out) throw IoError("failed writing " + path.string());
}

Image super_resolve(const SrModel& model, const Image& lr, int out_h, int out_w, std::int64_t chunk) {
  const SrOutput sr = sr_forward_chunked(model, to_model_space(lr), out_h, out_w, chunk);
  return clip01(from_model_space(sr.image));
}

namespace {

double evaluate_one(const SrModel& model, const Image& gt, double scale, std::int64_t chunk, PsnrChannel channel) {
  const int lr_h = std::max(1, scaled_dim(gt.height, 1.0 / scale));
  const int lr_w = std::max(1, scaled_dim(gt.width, 1.0 / scale));
  const int out_h = std::min(gt.height, scaled_dim(lr_h, scale));
  const int out_w = std::min(gt.width, scaled_dim(lr_w, scale));
  // Downsample the crop, not the full image, so LR and SR cover the same
  // extent when the size is not a multiple of the scale.
  const Image ref = crop(gt, 0, 0, out_h, out_w);
  const Image lr = resize_bicubic(ref, lr_h, lr_w);
  const Image sr = super_resolve(model, lr, out_h, out_w, chunk);
  return channel == PsnrChannel::y ? psnr_y(sr, ref, eval_border(scale)) : psnr(sr, ref, eval_border(scale));
}

void fill_means(PsnrTable& table, std::span<const double> scales) {
  for (double s : scales) {
    ScaleMean m{s, 0.0, 0};
    for (const auto& r : table.rows) {
      if (r.scale == s && r.ok) {
        m.psnr_db += std::min(r.psnr_db, kPsnrCap);
        ++m.count;
      }
    }
    m.psnr_db = m.count ? m.psnr_db / m.count : std::numeric_limits<double>::quiet_NaN();
    table.means.push_back(m);
  }
}

}  // namespace

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers. Each job writes
// only its own slot, so the result does not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

PsnrTable eval_loaded(const SrModel& model, std::span<const std::string> names,
                      std::span<const Image* const> images, std::span<const double> scales, std::int64_t chunk,
                      int threads, PsnrChannel channel) {
  for (double s : scales) {
    if (!(s > 0.0)) throw InvalidArgument("eval: scales must be positive");
  }
  PsnrTable table;
  for (double s : scales) {
    for (std::size_t i = 0; i < images.size(); ++i) {
      table.rows.push_back({s, names[i], std::numeric_limits<double>::quiet_NaN(), images[i] != nullptr});
    }
  }
  parallel_for(table.rows.size(), threads, [&](std::size_t r) {
    const Image* img = images[r % images.size()];
    if (img) table.rows[r].psnr_db = evaluate_one(model, *img, table.rows[r].scale, chunk, channel);
  });
  fill_means(table, scales);
  return table;
}

}  // namespace

PsnrTable eval_images(const SrModel& model, std::span<const NamedImage> images, std::span<const double> scales,
                      std::int64_t chunk, int threads, PsnrChannel channel) {
  std::vector<std::string> names;
  std::vector<const Image*> ptrs;
  for (const auto& img : images) {
    names.push_back(img.name);
    ptrs.push_back(&img.image);
  }
  return eval_loaded(model, names, ptrs, scales, chunk, threads, channel);
}

PsnrTable eval_set(const SrModel& model, std::span<const std::filesystem::path> images, std::span<const double> scales,
                   std::int64_t chunk, int threads, PsnrChannel channel) {
  std::vector<std::optional<Image>> loaded;
  std::vector<std::string> names;
  for (const auto& p : images) {
    names.push_back(p.filename().string());
    try {
      loaded.emplace_back(read_image(p));
    } catch (const IoError&) {
      loaded.emplace_back(std::nullopt);
    }
  }
  std::vector<const Image*> ptrs;
  for (const auto& img : loaded) ptrs.push_back(img ? &*img : nullptr);
  return eval_loaded(model, names, ptrs, scales, chunk, threads, channel);
}

void write_psnr_csv(std::ostream& out, const PsnrTable& table) {
  out << "scale,image,psnr_db\n";
  char buf[64];
  auto number = [&buf](double v) {
    if (std::isnan(v)) return std::string("nan");
    std::snprintf(buf, sizeof buf, "%.4f", std::min(v, kPsnrCap));
    return std::string(buf);
  };
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%g", r.scale);
    out << buf << ',' << r.image << ',' << number(r.psnr_db) << '\n';
  }
  for (const auto& m : table.means) {
    std::snprintf(buf, sizeof buf, "%g", m.scale);
    out << buf << ",mean," << number(m.psnr_db) << '\n';
  }
}

}  // namespace lte
