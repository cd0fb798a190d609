// Acceptance suite: one PASS/FAIL line per criterion.
//
//   lte_acceptance            run all ten
//   lte_acceptance 2 5        run a subset
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lte/checkpoint.hpp"
#include "lte/coords.hpp"
#include "lte/dataset.hpp"
#include "lte/eval.hpp"
#include "lte/image.hpp"
#include "lte/model.hpp"
#include "lte/ops.hpp"
#include "lte/resample.hpp"
#include "lte/train.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace lte;
using namespace lte::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void note(const std::string& s) {
  std::fprintf(stderr, "    %s\n", s.c_str());
  std::fflush(stderr);
}

// Desk-scale architecture shared by the training criteria.
ModelConfig desk_model() {
  ModelConfig c;
  c.encoder.width = 16;
  c.encoder.n_resblocks = 2;
  c.lte.K = 16;
  c.decoder_hidden = 64;
  return c;
}

TrainConfig desk_train(int iters, double scale_min, double scale_max, std::uint64_t seed) {
  TrainConfig t;
  t.patch = 16;
  t.scale_min = scale_min;
  t.scale_max = scale_max;
  t.batch = 4;
  t.epochs = 10;
  t.iters_per_epoch = iters / 10;
  t.lr0 = 1e-3;
  t.decay_epochs = {7};
  t.decay_factor = 0.5;
  t.seed = seed;
  return t;
}

SrModel train_model(ModelConfig c, const Dataset& data, const TrainConfig& t, std::uint64_t init_seed) {
  c.min_cell = training_min_cell(t);
  SrModel m(c, init_seed);
  TrainState st;
  for (int e = 0; e < t.epochs; ++e) train_epoch(m, data, t, st);
  return m;
}

// Two oriented colour sinusoids on grey, f_lo to f_hi cycles per 16 px.
Image synthetic_texture(Rng& rng, int n, double f_lo, double f_hi) {
  Image img(n, n, 0.5f);
  for (int s = 0; s < 2; ++s) {
    const double th = rng.uniform(0.0, std::numbers::pi);
    const double f = rng.uniform(f_lo, f_hi) / 16.0;
    const double ph = rng.uniform(0.0, 6.28);
    const double a = rng.uniform(0.08, 0.15);
    double col[3];
    for (double& x : col) x = rng.uniform(0.6, 1.0);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double v = a * std::cos(2.0 * std::numbers::pi * f * (std::cos(th) * x + std::sin(th) * y) + ph);
        for (int c = 0; c < 3; ++c) img.at(c, y, x) += static_cast<float>(v * col[c]);
      }
    }
  }
  return img;
}

// 1.5 to 4.5 cycles per 16 px is past the LR Nyquist limit from x4 (x3 at the
// top end); the band-limited set stays below it at x4.
Dataset texture_set(std::uint64_t seed, int count, bool band_limited = false) {
  Dataset d;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    d.images.push_back(band_limited ? synthetic_texture(rng, 64, 0.5, 1.75) : synthetic_texture(rng, 64, 1.5, 4.5));
    d.paths.push_back("texture" + std::to_string(i));
  }
  return d;
}

std::vector<NamedImage> named(const Dataset& d) {
  std::vector<NamedImage> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back({d.paths[i].string(), d.images[i]});
  return out;
}

// Mean PSNR of bicubic upsampling under the eval_images protocol.
double bicubic_psnr(std::span<const NamedImage> images, double s) {
  double sum = 0.0;
  for (const auto& img : images) {
    const int lh = scaled_dim(img.image.height, 1.0 / s), lw = scaled_dim(img.image.width, 1.0 / s);
    const int oh = scaled_dim(lh, s), ow = scaled_dim(lw, s);
    const Image ref = crop(img.image, 0, 0, oh, ow);
    const Image up = clip01(resize_bicubic(resize_bicubic(ref, lh, lw), oh, ow));
    sum += psnr(up, ref, eval_border(s));
  }
  return sum / static_cast<double>(images.size());
}

// ------------------------------------------------------------------ 1

Outcome gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kSeeds = 20;
  using Inputs = std::vector<Tensor>;
  struct Case {
    std::string name;
    std::function<Inputs(Rng&)> inputs;
    std::function<Tensor(const Inputs&, Rng&)> fn;
  };
  auto away_from_zero = [](Tensor t) {
    for (float& v : t.data()) v = v < 0 ? v - 0.05f : v + 0.05f;
    return t;
  };
  std::vector<std::int32_t> gather_idx{7, 0, 3, 7, 11, 5};
  std::vector<float> delta(12);
  const std::vector<Case> cases{
      {"conv2d pad1",
       [](Rng& r) {
         return Inputs{random_tensor({2, 5, 4}, r, -1, 1, true), random_tensor({3, 2, 3, 3}, r, -1, 1, true),
                       random_tensor({3}, r, -1, 1, true)};
       },
       [](const Inputs& in, Rng&) { return ops::conv2d(in[0], in[1], in[2], 1); }},
      {"conv2d pad0",
       [](Rng& r) {
         return Inputs{random_tensor({2, 5, 6}, r, -1, 1, true), random_tensor({2, 2, 3, 3}, r, -1, 1, true),
                       random_tensor({2}, r, -1, 1, true)};
       },
       [](const Inputs& in, Rng&) { return ops::conv2d(in[0], in[1], in[2], 0); }},
      {"matmul", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, -1, 1, true), random_tensor({4, 5}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::matmul(in[0], in[1]); }},
      {"linear",
       [](Rng& r) {
         return Inputs{random_tensor({6, 4}, r, -1, 1, true), random_tensor({3, 4}, r, -1, 1, true),
                       random_tensor({3}, r, -1, 1, true)};
       },
       [](const Inputs& in, Rng&) { return ops::linear(in[0], in[1], in[2]); }},
      {"add", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, -1, 1, true), random_tensor({3, 4}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::add(in[0], in[1]); }},
      {"mul", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, -1, 1, true), random_tensor({3, 4}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::mul(in[0], in[1]); }},
      {"scale", [](Rng& r) { return Inputs{random_tensor({7}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::scale(in[0], -1.7f); }},
      {"relu", [&](Rng& r) { return Inputs{away_from_zero(random_tensor({12}, r, -1, 1, true))}; },
       [](const Inputs& in, Rng&) { return ops::relu(in[0]); }},
      {"sin", [](Rng& r) { return Inputs{random_tensor({9}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::sin(in[0]); }},
      {"cos", [](Rng& r) { return Inputs{random_tensor({9}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::cos(in[0]); }},
      {"resize_nearest", [](Rng& r) { return Inputs{random_tensor({2, 3, 2}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::resize_nearest(in[0], 5, 7); }},
      {"unfold3x3", [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::unfold3x3(in[0]); }},
      {"gather_pixels", [](Rng& r) { return Inputs{random_tensor({3, 3, 4}, r, -1, 1, true)}; },
       [&](const Inputs& in, Rng&) { return ops::gather_pixels(in[0], gather_idx); }},
      {"fourier_features",
       [&](Rng& r) {
         for (float& d : delta) d = static_cast<float>(r.uniform(-2, 2));
         return Inputs{random_tensor({6, 8}, r, -1, 1, true), random_tensor({6, 8}, r, -1, 1, true),
                       random_tensor({4}, r, -1, 1, true)};
       },
       [&](const Inputs& in, Rng&) { return ops::fourier_features(in[0], in[1], delta, in[2]); }},
      {"fourier_features (no amplitude)",
       [&](Rng& r) {
         for (float& d : delta) d = static_cast<float>(r.uniform(-2, 2));
         return Inputs{random_tensor({6, 8}, r, -1, 1, true), random_tensor({4}, r, -1, 1, true)};
       },
       [&](const Inputs& in, Rng&) { return ops::fourier_features(Tensor(), in[0], delta, in[1]); }},
      {"transpose", [](Rng& r) { return Inputs{random_tensor({3, 5}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::transpose(in[0]); }},
      {"reshape", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::reshape(in[0], {2, 3, 2}); }},
      {"sum", [](Rng& r) { return Inputs{random_tensor({3, 4}, r, -1, 1, true)}; },
       [](const Inputs& in, Rng&) { return ops::sum(in[0]); }},
      {"l1_loss",
       [](Rng& r) {
         Tensor p = random_tensor({5, 3}, r, -1, 1, true);
         for (float& v : p.data()) v = v < 0 ? v - 0.05f : v + 0.05f;  // target is zero; keep away from the tie
         return Inputs{p};
       },
       [](const Inputs& in, Rng&) { return ops::l1_loss(in[0], Tensor::zeros({5, 3})); }},
  };

  double worst_op = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    for (int seed = 0; seed < kSeeds; ++seed) {
      Rng rng(1000 + static_cast<std::uint64_t>(seed));
      const Inputs in = c.inputs(rng);
      const double e = grad_check([&](const Inputs& x) { return c.fn(x, rng); }, in, rng).rel_error;
      if (e > worst_op) {
        worst_op = e;
        worst_name = c.name;
      }
    }
  }
  double worst_e2e = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    SrModel m(micro_config(4, 1, 4, 8), 2000 + static_cast<std::uint64_t>(seed));
    Rng rng(3000 + static_cast<std::uint64_t>(seed));
    const Tensor lr = random_tensor({3, 6, 6}, rng, -0.5, 0.5);
    worst_e2e = std::max(worst_e2e, oracle_grad_check(m, lr, 12, 12, rng).rel_error);
  }
  const double secs = seconds_since(t0);
  return {worst_op < 1e-3 && worst_e2e < 1e-3 && secs < 60.0,
          std::to_string(cases.size()) + " ops x " + std::to_string(kSeeds) + " seeds worst rel err " +
              fmt("%.2e", worst_op) + " (" + worst_name + "); end-to-end worst " + fmt("%.2e", worst_e2e) + "; " +
              fmt("%.1f s", secs)};
}

// ------------------------------------------------------------------ 2

// Direct bilinear interpolation in double: centre-aligned sampling,
// replicated borders, written without the library resampler.
double bilinear_oracle(const Image& img, int c, int oy, int ox, int out_h, int out_w) {
  auto axis = [](int o, int out, int in, int& i0, int& i1, double& t) {
    const double src = (o + 0.5) * static_cast<double>(in) / out - 0.5;
    const double f = std::floor(src);
    t = src - f;
    i0 = std::clamp(static_cast<int>(f), 0, in - 1);
    i1 = std::clamp(static_cast<int>(f) + 1, 0, in - 1);
  };
  int y0, y1, x0, x1;
  double ty, tx;
  axis(oy, out_h, img.height, y0, y1, ty);
  axis(ox, out_w, img.width, x0, x1, tx);
  return (1 - ty) * ((1 - tx) * img.at(c, y0, x0) + tx * img.at(c, y0, x1)) +
         ty * ((1 - tx) * img.at(c, y1, x0) + tx * img.at(c, y1, x1));
}

Outcome local_ensemble_oracle() {
  const SrModel m = stored_value_model(false);
  Rng rng(42);
  double worst = 0.0, worst_wsum = 0.0;
  const int sizes[][4] = {{5, 7, 11, 16}, {8, 8, 16, 16}, {6, 9, 17, 13}, {4, 4, 4, 4},  {7, 5, 30, 9},
                          {9, 9, 26, 26}, {3, 6, 8, 20},  {10, 7, 23, 15}, {6, 6, 6, 19}, {5, 8, 12, 31}};
  for (const auto& s : sizes) {
    const Image img = random_image(s[0], s[1], rng);
    const Tensor out = sr_forward(m, to_model_space(img), s[2], s[3]).image;
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < s[2]; ++y) {
        for (int x = 0; x < s[3]; ++x) {
          const double got = out.data()[(static_cast<std::size_t>(c) * s[2] + y) * s[3] + x] + 0.5;
          worst = std::max(worst, std::abs(got - bilinear_oracle(img, c, y, x, s[2], s[3])));
        }
      }
    }
    const CoordGrid grid = make_grid(s[2], s[3]);
    const QueryBatch qb = build_query_batch(grid, s[0], s[1]);
    for (std::int64_t q = 0; q < qb.size; ++q) {
      double w = 0.0;
      for (int j = 0; j < kNeighbors; ++j) w += qb.neighbor_weight(j)[static_cast<std::size_t>(q)];
      worst_wsum = std::max(worst_wsum, std::abs(w - 1.0));
    }
  }
  return {worst <= 1e-6 && worst_wsum <= 1e-6,
          "10 images, max |sr - bilinear oracle| " + fmt("%.2e", worst) + ", max |sum w - 1| " + fmt("%.2e", worst_wsum)};
}

// ------------------------------------------------------------------ 3

Outcome lteplus_equivalence() {
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int width = 4 + static_cast<int>(rng.below(13));
    const int k = 2 + static_cast<int>(rng.below(15));
    const int hidden = 8 + static_cast<int>(rng.below(57));
    const SrModel mlp(micro_config(width, 1 + static_cast<int>(rng.below(2)), k, hidden), 500 + static_cast<std::uint64_t>(i));
    const SrModel plus = mlp.to_lteplus();
    const int h = 5 + static_cast<int>(rng.below(8)), w = 5 + static_cast<int>(rng.below(8));
    const Tensor lr = random_tensor({3, h, w}, rng, -0.5, 0.5);
    const double r = rng.uniform(1.0, 4.0);
    const int oh = scaled_dim(h, r), ow = scaled_dim(w, r);
    const Tensor a = sr_forward_chunked(mlp, lr, oh, ow, 9216).image;
    const Tensor b = sr_forward_chunked(plus, lr, oh, ow, 9216).image;
    worst = std::max(worst, max_abs_diff(a.data(), b.data()));
  }
  return {worst <= 1e-6, "10 random models, max |mlp - conv1x1| " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------ 4

Outcome chunk_invariance() {
  const SrModel m(micro_config(8, 1, 8, 16), 11);
  Rng rng(12);
  const Tensor lr = random_tensor({3, 48, 48}, rng, -0.5, 0.5);
  const Tensor ref = sr_forward_chunked(m, lr, 96, 96, 96 * 96).image;
  double worst = 0.0;
  for (std::int64_t chunk : {1, 64, 9216}) {
    worst = std::max(worst, max_abs_diff(sr_forward_chunked(m, lr, 96, 96, chunk).image.data(), ref.data()));
  }

  // 624 x 624 output at x2.
  const Tensor big = random_tensor({3, 312, 312}, rng, -0.5, 0.5);
  const std::int64_t full = 624LL * 624;
  const SrOutput a = sr_forward_chunked(m, big, 624, 624, 9216);
  const SrOutput b = sr_forward_chunked(m, big, 624, 624, full);
  worst = std::max(worst, max_abs_diff(a.image.data(), b.image.data()));
  const double ratio = static_cast<double>(b.stats.query_peak_bytes) / static_cast<double>(a.stats.query_peak_bytes);
  return {worst <= 1e-6 && ratio >= 10.0,
          "chunks {1,64,9216,full} max diff " + fmt("%.2e", worst) + "; 624x624 peak " +
              fmt("%.1f MiB", b.stats.query_peak_bytes / 1048576.0) + " full vs " +
              fmt("%.2f MiB", a.stats.query_peak_bytes / 1048576.0) + " at 9216 (" + fmt("%.1fx", ratio) + ")"};
}

// ------------------------------------------------------------------ 5

// Vertical stripes vary along x.
Image stripes(bool vertical, double cycles_per_16px, double phase, double contrast, int n) {
  SyntheticTextureSpec s;
  s.height = n;
  s.width = n;
  s.contrast = contrast;
  s.phase = phase;
  (vertical ? s.fx : s.fy) = cycles_per_16px * n / 16.0;
  return gen_sinusoid(s);
}

// Amplitude-weighted mean of |f_x| and |f_y|.
std::pair<double, double> frequency_centroid(const FreqScatter& sc) {
  double wx = 0.0, wy = 0.0, w = 0.0;
  for (const auto& r : sc.rows) {
    wx += r.mag * std::abs(r.fx);
    wy += r.mag * std::abs(r.fy);
    w += r.mag;
  }
  return {wx / w, wy / w};
}

Outcome frequency_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  Dataset data;
  Rng rng(11);
  for (int i = 0; i < 12; ++i) {
    data.images.push_back(stripes(i % 2 == 0, 2 + (i / 2) % 3, rng.uniform(0.0, 6.28), rng.uniform(0.15, 0.3), 64));
    data.paths.push_back("stripes" + std::to_string(i));
  }
  const TrainConfig t = desk_train(1000, 1.0, 4.0, 2);
  ModelConfig c = desk_model();
  c.min_cell = training_min_cell(t);
  const SrModel init(c, 5);
  const SrModel m = train_model(desk_model(), data, t, 5);

  // Held-out phase, x2 LR.
  const Image v_lr = resize_bicubic(stripes(true, 3, 1.0, 0.25, 64), 32, 32);
  const Image h_lr = resize_bicubic(stripes(false, 3, 1.0, 0.25, 64), 32, 32);
  const auto [v0x, v0y] = frequency_centroid(export_scatter(init, v_lr));
  const auto [vx, vy] = frequency_centroid(export_scatter(m, v_lr));
  const auto [hx, hy] = frequency_centroid(export_scatter(m, h_lr));
  const double rv = vx / vy, rh = hy / hx;
  return {rv >= 2.0 && rh >= 2.0,
          "vertical |fx|/|fy| " + fmt("%.2f", rv) + " (init " + fmt("%.2f", v0x / v0y) + "), horizontal |fy|/|fx| " +
              fmt("%.2f", rh) + "; " + fmt("%.0f s", seconds_since(t0))};
}

// ------------------------------------------------------------------ 6

Outcome overfit_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const Image gt = read_image(fs::path(LTE_TEST_DATA_DIR) / "astronaut_48.ppm");
  Dataset data;
  data.images.push_back(gt);
  data.paths.push_back("astronaut_48.ppm");
  TrainConfig t = desk_train(1000, 2.0, 2.0, 1);
  t.patch = 24;  // the x2 crop is the whole image
  t.batch = 1;
  t.decay_epochs = {7, 9};
  t.decay_factor = 0.3;
  const SrModel m = train_model(desk_model(), data, t, 3);
  const std::vector<NamedImage> images{{"astronaut", gt}};
  const std::vector<double> scales{2.0};
  const double model_db = eval_images(m, images, scales, 9216).rows[0].psnr_db;
  const double bicubic_db = bicubic_psnr(images, 2.0);
  const double secs = seconds_since(t0);
  return {model_db >= 35.0 && model_db > bicubic_db && secs <= 600.0,
          "x2 PSNR " + fmt("%.2f dB", model_db) + " vs bicubic " + fmt("%.2f dB", bicubic_db) + "; " +
              fmt("%.0f s", secs)};
}

// ------------------------------------------------------------------ 7

Outcome ablation_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset val = texture_set(999, 6);
  const std::vector<NamedImage> val_images = named(val);
  const std::vector<double> scales{2.0, 3.0, 4.0};
  const char* names[] = {"LTE", "LTE(-P)", "LTE(-A)"};
  double sums[3] = {0.0, 0.0, 0.0};
  constexpr int kSeeds = 3;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const Dataset train = texture_set(100 + static_cast<std::uint64_t>(seed), 16);
    std::string line = "seed " + std::to_string(seed) + ":";
    for (int v = 0; v < 3; ++v) {
      ModelConfig c = desk_model();
      c.lte.ablation.no_phase = v == 1;
      c.lte.ablation.no_amplitude = v == 2;
      const SrModel m = train_model(c, train, desk_train(1500, 1.0, 4.0, 50 + static_cast<std::uint64_t>(seed)),
                                    70 + static_cast<std::uint64_t>(seed));
      double mean = 0.0;
      for (const auto& s : eval_images(m, val_images, scales, 9216).means) mean += s.psnr_db;
      mean /= static_cast<double>(scales.size());
      sums[v] += mean;
      line += std::string(" ") + names[v] + " " + fmt("%.3f", mean);
    }
    note(line);
  }
  for (double& s : sums) s /= kSeeds;
  return {sums[0] >= sums[1] && sums[0] >= sums[2],
          "mean over 3 seeds, x2/x3/x4: LTE " + fmt("%.3f", sums[0]) + " dB, -P " + fmt("%.3f", sums[1]) + " dB, -A " +
              fmt("%.3f", sums[2]) + " dB; " + fmt("%.0f s", seconds_since(t0))};
}

// ------------------------------------------------------------------ 8

Outcome out_of_scale() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset train = texture_set(200, 16, true);
  const std::vector<NamedImage> val = named(texture_set(999, 6, true));
  const TrainConfig t = desk_train(1500, 1.0, 3.0, 60);
  const SrModel m = train_model(desk_model(), train, t, 80);
  const std::vector<double> scales{4.0};
  const double model_db = eval_images(m, val, scales, 9216).means[0].psnr_db;
  const double bicubic_db = bicubic_psnr(val, 4.0);
  const Tensor lr = to_model_space(resize_bicubic(val[0].image, 16, 16));
  const bool clamped_x4 = sr_forward_chunked(m, lr, 64, 64, 9216).stats.cell_clamped;
  const bool clamped_x2 = sr_forward_chunked(m, lr, 32, 32, 9216).stats.cell_clamped;
  return {model_db > bicubic_db && clamped_x4 && !clamped_x2,
          "trained x1-x3, x4 PSNR " + fmt("%.2f dB", model_db) + " vs bicubic " + fmt("%.2f dB", bicubic_db) +
              "; cell clamped at x4: " + (clamped_x4 ? "yes" : "no") + ", at x2: " + (clamped_x2 ? "yes" : "no") + "; " +
              fmt("%.0f s", seconds_since(t0))};
}

// ------------------------------------------------------------------ 9

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "lte_acceptance_determinism";
  fs::remove_all(root);
  const Dataset d = texture_set(300, 4);
  const std::string lte = std::string("'") + LTE_CLI_PATH + "'";
  // Identical trees, so the runs differ only in where they live.
  for (const char* run_dir : {"a", "b", "c"}) {
    const fs::path dir = root / run_dir;
    fs::create_directories(dir / "data");
    for (std::size_t i = 0; i < d.size(); ++i) write_image(dir / "data" / ("t" + std::to_string(i) + ".png"), d.images[i]);
    std::ofstream(dir / "cfg.json") << R"({
      "model": {"encoder": {"width": 8, "n_resblocks": 1}, "K": 8, "decoder_hidden": 16},
      "train": {"patch": 16, "batch": 2, "epochs": 3, "iters_per_epoch": 10, "decay_epochs": [2], "seed": 17},
      "data": {"dataset": "data", "val_dataset": "data", "val_scales": [2, 3]},
      "output": {"dir": "out"}
    })";
    const std::string cd = "cd '" + dir.string() + "' && ";
    const std::string seed = std::string(run_dir) == "c" ? " --seed 18" : "";
    if (run(cd + lte + " train -c cfg.json" + seed + " 2>/dev/null") != 0) return {false, "lte train failed"};
    if (run(cd + lte + " scatter -m out/model.ltec -i data/t0.png -o out/scatter.csv 2>/dev/null") != 0) {
      return {false, "lte scatter failed"};
    }
  }

  int compared = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::directory_iterator(root / "a" / "out")) {
    const std::string name = entry.path().filename().string();
    if (name == "timing.tsv") continue;  // wall-clock seconds
    ++compared;
    if (file_bytes(entry.path()) != file_bytes(root / "b" / "out" / name)) differing.push_back(name);
  }
  const bool seed_matters = file_bytes(root / "a" / "out" / "model.ltec") != file_bytes(root / "c" / "out" / "model.ltec");
  std::string detail = std::to_string(compared) + " artifacts (checkpoints, logs, scatter CSV) compared";
  if (!differing.empty()) {
    detail += "; differing:";
    for (const auto& n : differing) detail += " " + n;
  } else {
    detail += ", all bit-identical";
  }
  detail += std::string("; other seed differs: ") + (seed_matters ? "yes" : "no");
  return {differing.empty() && compared >= 8 && seed_matters, detail};
}

// ------------------------------------------------------------------ 10

// Keys cubic with a = -0.5, written out in its textbook piecewise form.
double keys(double x) {
  const double a = -0.5, t = std::abs(x);
  if (t < 1.0) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2.0) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0.0;
}

// Dense n_out x n_in weight matrix: every input sample contributes, with
// out-of-range taps folded onto the nearest edge sample.
std::vector<double> dense_bicubic_weights(int in, int out) {
  std::vector<double> w(static_cast<std::size_t>(out) * in, 0.0);
  for (int o = 0; o < out; ++o) {
    const double src = (o + 0.5) * in / static_cast<double>(out) - 0.5;
    for (int m = static_cast<int>(std::floor(src)) - 3; m <= static_cast<int>(std::floor(src)) + 4; ++m) {
      w[static_cast<std::size_t>(o) * in + std::clamp(m, 0, in - 1)] += keys(src - m);
    }
  }
  return w;
}

Outcome resampler_fidelity() {
  Rng rng(77);
  double worst_resize_db = 1e9;
  const int dims[][4] = {{17, 23, 40, 9}, {48, 48, 24, 24}, {64, 64, 21, 21}, {10, 12, 37, 29}, {33, 8, 11, 50},
                         {5, 5, 5, 5},    {31, 30, 93, 90}, {64, 40, 16, 10}, {7, 19, 20, 20},  {50, 50, 113, 77}};
  for (const auto& d : dims) {
    const Image img = random_image(d[0], d[1], rng);
    const Image got = resize_bicubic(img, d[2], d[3]);
    const auto wy = dense_bicubic_weights(d[0], d[2]);
    const auto wx = dense_bicubic_weights(d[1], d[3]);
    long double sse = 0.0L;
    for (int c = 0; c < 3; ++c) {
      for (int oy = 0; oy < d[2]; ++oy) {
        for (int ox = 0; ox < d[3]; ++ox) {
          long double acc = 0.0L;
          for (int y = 0; y < d[0]; ++y) {
            const double a = wy[static_cast<std::size_t>(oy) * d[0] + y];
            if (a == 0.0) continue;
            for (int x = 0; x < d[1]; ++x) acc += static_cast<long double>(a) * wx[static_cast<std::size_t>(ox) * d[1] + x] * img.at(c, y, x);
          }
          const long double diff = got.at(c, oy, ox) - acc;
          sse += diff * diff;
        }
      }
    }
    const double mse = static_cast<double>(sse / (3.0L * d[2] * d[3]));
    worst_resize_db = std::min(worst_resize_db, mse == 0.0 ? 999.0 : -10.0 * std::log10(mse));
  }

  double worst_dft = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> patch(256);
    for (float& v : patch) v = static_cast<float>(rng.uniform());
    const Spectrum s = dft16(patch);
    double peak = 0.0, err = 0.0;
    for (int v = -8; v < 8; ++v) {
      for (int u = -8; u < 8; ++u) {
        std::complex<long double> acc = 0.0L;
        for (int y = 0; y < 16; ++y) {
          for (int x = 0; x < 16; ++x) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> * (v * y + u * x) / 16.0L;
            acc += static_cast<long double>(patch[static_cast<std::size_t>(y * 16 + x)]) *
                   std::complex<long double>(std::cos(ang), std::sin(ang));
          }
        }
        const double ref = static_cast<double>(std::abs(acc));
        peak = std::max(peak, ref);
        err = std::max(err, std::abs(s.at(v, u) - ref));
      }
    }
    worst_dft = std::max(worst_dft, err / peak);
  }

  double worst_psnr = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 12 + static_cast<int>(rng.below(30)), w = 12 + static_cast<int>(rng.below(30));
    const int border = static_cast<int>(rng.below(5));
    const Image a = random_image(h, w, rng);
    Image b = a;
    const double amp = std::pow(10.0, rng.uniform(-4.0, -0.5));
    for (float& v : b.data) v = std::clamp(v + static_cast<float>(rng.uniform(-amp, amp)), 0.0f, 1.0f);
    long double sse = 0.0L;
    long n = 0;
    for (int c = 0; c < 3; ++c) {
      for (int y = border; y < h - border; ++y) {
        for (int x = border; x < w - border; ++x, ++n) {
          const long double d = static_cast<long double>(a.at(c, y, x)) - b.at(c, y, x);
          sse += d * d;
        }
      }
    }
    const double ref = static_cast<double>(-10.0L * std::log10(sse / n));
    worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b, border) - ref));
  }
  return {worst_resize_db >= 120.0 && worst_dft < 1e-9 && worst_psnr <= 1e-6,
          "bicubic vs dense oracle min " + fmt("%.1f dB", worst_resize_db) + "; dft16 max rel err " +
              fmt("%.2e", worst_dft) + "; psnr max |diff| " + fmt("%.2e dB", worst_psnr)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion all[] = {
      {1, "gradient integrity", gradient_integrity},   {2, "local-ensemble oracle", local_ensemble_oracle},
      {3, "LTE+ equivalence", lteplus_equivalence},     {4, "chunk invariance", chunk_invariance},
      {5, "frequency recovery", frequency_recovery},   {6, "overfit sanity", overfit_sanity},
      {7, "ablation ordering", ablation_ordering},      {8, "out-of-scale generalization", out_of_scale},
      {9, "determinism", determinism},                 {10, "resampler fidelity", resampler_fidelity},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
