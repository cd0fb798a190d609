// lte: train, super-resolve, evaluate, export frequency scatter, benchmark.
//
// Exit codes: 0 ok, 2 bad config / usage, 3 I/O, 4 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lte/checkpoint.hpp"
#include "lte/config.hpp"
#include "lte/dataset.hpp"
#include "lte/error.hpp"
#include "lte/eval.hpp"
#include "lte/image.hpp"
#include "lte/model.hpp"
#include "lte/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Worker cap: hardware threads, lowered by LTE_THREADS.
int worker_count() {
  const int hw = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const char* env = std::getenv("LTE_THREADS");
  if (!env || !*env) return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw lte::ConfigError("LTE_THREADS must be a positive integer", {"LTE_THREADS"});
  return static_cast<int>(std::min<long>(v, hw));
}

// "HxW" -> (H, W)
std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  int h = 0, w = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    h = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    w = std::stoi(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw lte::ConfigError("--out-size expects HxW, got '" + s + "'", {"out-size"});
  }
  if (h < 1 || w < 1) throw lte::ConfigError("--out-size must be positive", {"out-size"});
  return {h, w};
}

lte::SrModel with_variant(lte::SrModel model, const std::string& variant) {
  const auto have = model.config().decoder_variant;
  if (variant.empty()) return model;
  if (variant == "mlp") return have == lte::DecoderVariant::mlp ? model : model.to_mlp();
  if (variant == "conv1x1") return have == lte::DecoderVariant::conv1x1 ? model : model.to_lteplus();
  throw lte::ConfigError("--variant must be mlp or conv1x1", {"variant"});
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary | mode);
  if (!out) throw lte::IoError("cannot write " + p.string());
  return out;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  fs::path config;
  fs::path resume;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // raw "--a.b value" tokens
};

// Splices "--a.b value" pairs into the document. Values parse as JSON when
// they can ("8", "[2,3]", "true"), otherwise they are taken as strings.
void apply_overrides(json& doc, const std::vector<std::string>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& flag = tokens[i];
    if (flag.rfind("--", 0) != 0 || flag.find('.') == std::string::npos) {
      throw CLI::ExtrasError({flag});
    }
    std::string key = flag.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= tokens.size()) throw lte::ConfigError("override " + flag + " needs a value", {key});
      value = tokens[++i];
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    json* node = &doc;
    std::size_t start = 1;
    while (true) {
      const auto slash = pointer.find('/', start);
      const std::string part = pointer.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
      if (!node->is_object()) throw lte::ConfigError("override " + flag + " descends into a non-object", {key});
      if (slash == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = slash + 1;
    }
  }
}

json load_config_doc(const fs::path& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw lte::IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded()) throw lte::ConfigError("config " + path.string() + " is not valid JSON");
  return doc;
}

fs::path epoch_checkpoint(const fs::path& dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "ckpt_epoch_%04d.ltec", epoch);
  return dir / name;
}

// Keeps the header and rows of epochs before `epoch` so a resumed run
// continues the file as if it had never stopped.
void truncate_log(const fs::path& path, int epoch, const std::string& header) {
  std::vector<std::string> keep{header};
  if (std::ifstream in(path); in) {
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        first = false;
        continue;
      }
      if (line.empty()) continue;
      if (std::stoi(line.substr(0, line.find('\t'))) < epoch) keep.push_back(line);
    }
  }
  auto out = open_out(path);
  for (const auto& l : keep) out << l << '\n';
}

double best_val_so_far(const fs::path& path) {
  double best = -std::numeric_limits<double>::infinity();
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto tab = line.rfind('\t');
    if (tab != std::string::npos) best = std::max(best, std::stod(line.substr(tab + 1)));
  }
  return best;
}

int cmd_train(const TrainArgs& args) {
  json doc = load_config_doc(args.config);
  apply_overrides(doc, args.overrides);
  if (args.seed) doc["train"]["seed"] = *args.seed;
  const lte::RunConfig cfg = lte::parse_run_config(doc);
  const int threads = worker_count();

  if (cfg.data.dataset.empty()) throw lte::ConfigError("data.dataset is required for training", {"data.dataset"});
  if (!fs::is_directory(cfg.data.dataset)) throw lte::IoError("dataset directory not found: " + cfg.data.dataset);
  const lte::Dataset data = lte::load_dataset(
      cfg.data.dataset, cfg.data.split.empty() ? std::nullopt : std::optional<fs::path>(cfg.data.split));
  if (data.empty()) throw lte::IoError("no images in " + cfg.data.dataset);
  std::vector<fs::path> val_files;
  if (!cfg.data.val_dataset.empty()) {
    val_files = lte::list_images(cfg.data.val_dataset,
                                 cfg.data.val_split.empty() ? std::nullopt : std::optional<fs::path>(cfg.data.val_split));
  }

  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);

  lte::SrModel model(cfg.resolved_model(), lte::derive_seed(cfg.train.seed, 0x6d6f64656cULL));
  lte::TrainState state;
  if (!args.resume.empty()) {
    lte::LoadedCheckpoint ck = lte::load_checkpoint(args.resume);
    if (!ck.train) throw lte::CheckpointError(args.resume.string() + " carries no optimizer state");
    model = std::move(ck.model);
    state = std::move(*ck.train);
    std::cerr << "resuming from " << args.resume.string() << " at epoch " << state.epoch << "\n";
  }
  {
    auto out = open_out(dir / "config.json");
    out << lte::to_json(cfg).dump(2) << '\n';
  }

  const fs::path log_path = dir / "train_log.tsv";
  const fs::path timing_path = dir / "timing.tsv";
  const fs::path val_path = dir / "val.tsv";
  truncate_log(log_path, state.epoch, "epoch\titer\tloss\tlr");
  truncate_log(timing_path, state.epoch, "epoch\titer\tseconds");
  std::string val_header = "epoch";
  for (double s : cfg.data.val_scales) val_header += "\tx" + fmt("%g", s);
  val_header += "\tmean";
  if (!val_files.empty()) truncate_log(val_path, state.epoch, val_header);
  double best = val_files.empty() ? 0.0 : best_val_so_far(val_path);

  auto log = open_out(log_path, std::ios::app);
  auto timing = open_out(timing_path, std::ios::app);

  if (state.epoch == 0 && args.resume.empty()) lte::save_training(epoch_checkpoint(dir, 0), model, state);

  while (state.epoch < cfg.train.epochs) {
    const int epoch = state.epoch;
    const auto start = std::chrono::steady_clock::now();
    const lte::EpochMetrics m = lte::train_epoch(model, data, cfg.train, state, [&](const lte::IterationRecord& r) {
      log << r.epoch << '\t' << r.iteration << '\t' << fmt("%.9g", r.loss) << '\t' << fmt("%.9g", r.lr) << '\n';
      timing << r.epoch << '\t' << r.iteration << '\t' << fmt("%.6f", r.seconds) << '\n';
    });
    log.flush();
    timing.flush();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "epoch " << epoch + 1 << "/" << cfg.train.epochs << "  loss " << fmt("%.5f", m.mean_loss) << "  lr "
              << fmt("%.3g", lte::learning_rate(cfg.train, epoch)) << "  " << fmt("%.1f", secs) << "s\n";

    lte::save_training(epoch_checkpoint(dir, state.epoch), model, state);
    if (!val_files.empty()) {
      const lte::PsnrTable t = lte::eval_set(model, val_files, cfg.data.val_scales, cfg.output.chunk, threads);
      double mean = 0.0;
      std::string row = std::to_string(epoch);
      for (const auto& s : t.means) {
        row += '\t' + fmt("%.4f", s.psnr_db);
        mean += s.psnr_db;
      }
      mean /= static_cast<double>(std::max<std::size_t>(t.means.size(), 1));
      row += '\t' + fmt("%.4f", mean);
      open_out(val_path, std::ios::app) << row << '\n';
      std::cerr << "  val mean psnr " << fmt("%.3f", mean) << " dB\n";
      if (mean > best) {
        best = mean;
        lte::save_model(dir / "best.ltec", model);
      }
    }
  }
  lte::save_training(dir / "last.ltec", model, state);
  lte::save_model(dir / "model.ltec", model);
  std::cerr << "wrote " << (dir / "model.ltec").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- sr

struct SrArgs {
  fs::path checkpoint, input, output;
  double scale = 0.0;
  std::string out_size;
  std::int64_t chunk = 9216;
  std::string variant;
};

std::pair<int, int> target_size(const lte::Image& lr, double scale, const std::string& out_size) {
  if (!out_size.empty()) return parse_size(out_size);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw lte::ConfigError("--scale must be positive", {"scale"});
  const int h = lte::scaled_dim(lr.height, scale), w = lte::scaled_dim(lr.width, scale);
  if (h < 1 || w < 1) throw lte::ConfigError("--scale produces an empty image", {"scale"});
  return {h, w};
}

int cmd_sr(const SrArgs& a) {
  if (a.chunk < 1) throw lte::ConfigError("--chunk must be positive", {"chunk"});
  const lte::SrModel model = with_variant(lte::load_model(a.checkpoint), a.variant);
  const lte::Image lr = lte::read_image(a.input);
  const auto [h, w] = target_size(lr, a.scale, a.out_size);
  const auto t0 = std::chrono::steady_clock::now();
  const lte::SrOutput sr = lte::sr_forward_chunked(model, lte::to_model_space(lr), h, w, a.chunk);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  ensure_parent(a.output);
  lte::write_image(a.output, lte::clip01(lte::from_model_space(sr.image)));
  std::cerr << lr.height << "x" << lr.width << " -> " << h << "x" << w << " in " << fmt("%.1f", ms) << " ms, "
            << sr.stats.launches << " chunk(s)" << (sr.stats.cell_clamped ? ", cell clamped" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  fs::path checkpoint, dataset, split, output = "psnr.csv";
  std::vector<double> scales{2.0, 3.0, 4.0};
  std::int64_t chunk = 9216;
  bool y_channel = false;
};

int cmd_eval(const EvalArgs& a) {
  if (a.chunk < 1) throw lte::ConfigError("--chunk must be positive", {"chunk"});
  for (double s : a.scales) {
    if (!(s > 0.0)) throw lte::ConfigError("--scales must be positive", {"scales"});
  }
  const lte::SrModel model = lte::load_model(a.checkpoint);
  std::vector<fs::path> files;
  if (fs::is_directory(a.dataset)) {
    files = lte::list_images(a.dataset, a.split.empty() ? std::nullopt : std::optional<fs::path>(a.split));
  } else if (fs::exists(a.dataset)) {
    files.push_back(a.dataset);
  } else {
    throw lte::IoError("dataset not found: " + a.dataset.string());
  }
  const lte::PsnrTable t = lte::eval_set(model, files, a.scales, a.chunk, worker_count(),
                                         a.y_channel ? lte::PsnrChannel::y : lte::PsnrChannel::rgb);
  for (const auto& r : t.rows) {
    if (!r.ok) std::cerr << "warning: could not read " << r.image << " (x" << r.scale << ")\n";
  }
  auto out = open_out(a.output);
  lte::write_psnr_csv(out, t);
  for (const auto& m : t.means) std::cerr << "x" << m.scale << "  " << fmt("%.3f", m.psnr_db) << " dB (" << m.count << ")\n";
  return 0;
}

// ---------------------------------------------------------------- scatter

int cmd_scatter(const fs::path& checkpoint, const fs::path& input, const fs::path& output) {
  const lte::SrModel model = lte::load_model(checkpoint);
  const lte::FreqScatter sc = lte::export_scatter(model, lte::read_image(input));
  ensure_parent(output);
  lte::write_scatter_csv(output, sc);
  std::cerr << sc.rows.size() << " rows (" << sc.height << "x" << sc.width << "x" << sc.k << ")\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  fs::path checkpoint, input, output = "bench.csv";
  double scale = 2.0;
  std::string out_size;
  std::vector<std::int64_t> chunks{1, 64, 9216, 0};
  int repeats = 1;
};

int cmd_bench(const BenchArgs& a) {
  if (a.repeats < 1) throw lte::ConfigError("--repeats must be positive", {"repeats"});
  const lte::SrModel base = lte::load_model(a.checkpoint);
  const lte::Image img = lte::read_image(a.input);
  const auto [h, w] = target_size(img, a.scale, a.out_size);
  const lte::Tensor lr = lte::to_model_space(img);
  const std::int64_t full = static_cast<std::int64_t>(h) * w;

  auto out = open_out(a.output);
  out << "variant,chunk,ms,peak_bytes,launches,checksum,max_diff,match\n";
  std::vector<float> reference;
  bool all_match = true;
  for (const std::string variant : {"mlp", "conv1x1"}) {
    const lte::SrModel model = with_variant(base, variant);
    for (std::int64_t c : a.chunks) {
      if (c < 0) throw lte::ConfigError("--chunks entries must be >= 0 (0 = all queries)", {"chunks"});
      const std::int64_t chunk = c == 0 ? full : c;
      double best_ms = std::numeric_limits<double>::infinity();
      lte::SrOutput sr;
      for (int r = 0; r < a.repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        sr = lte::sr_forward_chunked(model, lr, h, w, chunk);
        best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      }
      const auto v = sr.image.data();
      double sum = 0.0, diff = 0.0;
      for (float x : v) sum += x;
      if (reference.empty()) reference.assign(v.begin(), v.end());
      for (std::size_t i = 0; i < v.size(); ++i) diff = std::max(diff, std::abs(static_cast<double>(v[i]) - reference[i]));
      const bool match = diff <= 1e-6;
      all_match = all_match && match;
      out << variant << ',' << chunk << ',' << fmt("%.3f", best_ms) << ',' << sr.stats.query_peak_bytes << ','
          << sr.stats.launches << ',' << fmt("%.6e", sum / static_cast<double>(v.size())) << ',' << fmt("%.3g", diff)
          << ',' << (match ? 1 : 0) << '\n';
      std::cerr << variant << " chunk " << chunk << ": " << fmt("%.1f", best_ms) << " ms, peak "
                << fmt("%.2f", static_cast<double>(sr.stats.query_peak_bytes) / (1 << 20)) << " MiB\n";
    }
  }
  std::cerr << (all_match ? "outputs agree across chunks and variants\n" : "warning: outputs differ by more than 1e-6\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arbitrary-scale super-resolution with local texture estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lte 0.1.0");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model from a JSON run config");
  t->add_option("-c,--config", train.config, "Run config (JSON); omitted keys take defaults");
  t->add_option("--resume", train.resume, "Continue from a training checkpoint");
  t->add_option("--seed", train.seed, "Overrides train.seed");
  t->allow_extras();
  t->footer("Any config key can be overridden as --section.key value, e.g. --train.epochs 5 --model.K 16");

  SrArgs sr;
  auto* s = app.add_subcommand("sr", "Super-resolve one image");
  s->add_option("-m,--checkpoint", sr.checkpoint, "Model checkpoint")->required();
  s->add_option("-i,--input", sr.input, "LR image (.png / .ppm)")->required();
  s->add_option("-o,--output", sr.output, "Output image (.png / .ppm)")->required();
  auto* scale_opt = s->add_option("-s,--scale", sr.scale, "Scale factor r; output is floor(r*H) x floor(r*W)");
  auto* size_opt = s->add_option("--out-size", sr.out_size, "Explicit output size HxW (anisotropic allowed)");
  scale_opt->excludes(size_opt);
  s->add_option("--chunk", sr.chunk, "Queries per decoder launch")->capture_default_str();
  s->add_option("--variant", sr.variant, "Decoder layout: mlp or conv1x1")->check(CLI::IsMember({"mlp", "conv1x1"}));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "PSNR of a checkpoint over a dataset");
  e->add_option("-m,--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  e->add_option("-d,--dataset", ev.dataset, "Directory of GT images, or a single image")->required();
  e->add_option("--split", ev.split, "File listing image paths, one per line");
  e->add_option("--scales", ev.scales, "Scale factors")->delimiter(',')->capture_default_str();
  e->add_option("--chunk", ev.chunk, "Queries per decoder launch")->capture_default_str();
  e->add_option("-o,--output", ev.output, "CSV path")->capture_default_str();
  e->add_flag("--y-channel", ev.y_channel, "PSNR on BT.601 luma instead of RGB");

  fs::path sc_ckpt, sc_in, sc_out = "scatter.csv";
  auto* sc = app.add_subcommand("scatter", "Export estimated frequencies as CSV");
  sc->add_option("-m,--checkpoint", sc_ckpt, "Model checkpoint")->required();
  sc->add_option("-i,--input", sc_in, "LR image")->required();
  sc->add_option("-o,--output", sc_out, "CSV path")->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time chunked querying for mlp and conv1x1 decoders");
  b->add_option("-m,--checkpoint", bench.checkpoint, "Model checkpoint")->required();
  b->add_option("-i,--input", bench.input, "LR image")->required();
  auto* bscale = b->add_option("-s,--scale", bench.scale, "Scale factor")->capture_default_str();
  auto* bsize = b->add_option("--out-size", bench.out_size, "Explicit output size HxW");
  bscale->excludes(bsize);
  b->add_option("--chunks", bench.chunks, "Chunk sizes, 0 = all queries")->delimiter(',')->capture_default_str();
  b->add_option("--repeats", bench.repeats, "Timed runs per setting (best is kept)")->capture_default_str();
  b->add_option("-o,--output", bench.output, "CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*t) {
      train.overrides = t->remaining();
      return cmd_train(train);
    }
    if (*s) {
      if (scale_opt->count() == 0 && size_opt->count() == 0) {
        throw lte::ConfigError("sr needs --scale or --out-size", {"scale"});
      }
      return cmd_sr(sr);
    }
    if (*e) return cmd_eval(ev);
    if (*sc) return cmd_scatter(sc_ckpt, sc_in, sc_out);
    if (*b) return cmd_bench(bench);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n" << t->help();
    return kExitConfig;
  } catch (const lte::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const lte::InvalidArgument& err) {
    std::cerr << "invalid argument: " << err.what() << "\n";
    return kExitConfig;
  } catch (const lte::IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const lte::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
