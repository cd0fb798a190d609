#include "lte/config.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "lte/error.hpp"

namespace lte {

using nlohmann::json;

namespace {

constexpr const char* kAblationNames[] = {"no_amplitude", "half_freq", "no_phase", "no_skip"};
constexpr const char* kAblationShort[] = {"A", "F", "P", "L"};

// Collects schema violations so one error reports all of them.
class Parser {
 public:
  void object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      bad(path);
      return;
    }
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) bad(join(path, key));
    }
  }

  template <class T>
  void get(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const json& v = j.at(key);
    const std::string full = join(path, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return bad(full);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return bad(full);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return bad(full);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return bad(full);
    }
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      bad(full);
    }
  }

  template <class T>
  void get_list(const json& j, const std::string& path, const char* key, std::vector<T>& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const json& v = j.at(key);
    const std::string full = join(path, key);
    if (!v.is_array()) return bad(full);
    std::vector<T> items;
    for (const auto& e : v) {
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) return bad(full);
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!e.is_number()) return bad(full);
      } else {
        if (!e.is_string()) return bad(full);
      }
      items.push_back(e.get<T>());
    }
    out = std::move(items);
  }

  void bad(const std::string& key) { bad_.push_back(key); }
  void check(bool ok, const std::string& key) {
    if (!ok) bad(key);
  }

  const std::vector<std::string>& errors() const { return bad_; }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<std::string> bad_;
};

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  return doc.contains(key) ? doc.at(key) : empty;
}

}  // namespace

std::string ablation_name(int index) { return kAblationNames[index]; }

AblationFlags parse_ablation(const std::vector<std::string>& names) {
  AblationFlags f;
  std::vector<std::string> bad;
  for (const auto& n : names) {
    int hit = -1;
    for (int i = 0; i < 4; ++i) {
      if (n == kAblationNames[i] || n == kAblationShort[i]) hit = i;
    }
    switch (hit) {
      case 0: f.no_amplitude = true; break;
      case 1: f.half_freq = true; break;
      case 2: f.no_phase = true; break;
      case 3: f.no_skip = true; break;
      default: bad.push_back("model.ablation." + n);
    }
  }
  if (!bad.empty()) throw ConfigError("unknown ablation flag", bad);
  return f;
}

std::vector<std::string> ablation_names(const AblationFlags& flags) {
  std::vector<std::string> out;
  const bool on[] = {flags.no_amplitude, flags.half_freq, flags.no_phase, flags.no_skip};
  for (int i = 0; i < 4; ++i) {
    if (on[i]) out.emplace_back(kAblationNames[i]);
  }
  return out;
}

ModelConfig RunConfig::resolved_model() const {
  ModelConfig m = model;
  m.min_cell = c_tr ? Cell{*c_tr, *c_tr} : training_min_cell(train);
  return m;
}

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  Parser p;
  p.object(doc, "", {"model", "train", "data", "output"});
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object", p.errors());

  const json& model = section(doc, "model");
  p.object(model, "model", {"encoder", "K", "decoder_hidden", "decoder_variant", "ablation", "c_tr"});
  const json& enc = section(model, "encoder");
  p.object(enc, "model.encoder", {"width", "n_resblocks", "res_scale"});
  p.get(enc, "model.encoder", "width", c.model.encoder.width);
  p.get(enc, "model.encoder", "n_resblocks", c.model.encoder.n_resblocks);
  p.get(enc, "model.encoder", "res_scale", c.model.encoder.res_scale);
  p.get(model, "model", "K", c.model.lte.K);
  p.get(model, "model", "decoder_hidden", c.model.decoder_hidden);
  std::string variant = c.model.decoder_variant == DecoderVariant::conv1x1 ? "conv1x1" : "mlp";
  p.get(model, "model", "decoder_variant", variant);
  if (variant == "mlp") {
    c.model.decoder_variant = DecoderVariant::mlp;
  } else if (variant == "conv1x1") {
    c.model.decoder_variant = DecoderVariant::conv1x1;
  } else {
    p.bad("model.decoder_variant");
  }
  std::vector<std::string> ablation;
  p.get_list(model, "model", "ablation", ablation);
  try {
    c.model.lte.ablation = parse_ablation(ablation);
  } catch (const ConfigError&) {
    p.bad("model.ablation");
  }
  if (model.is_object() && model.contains("c_tr") && !model.at("c_tr").is_null()) {
    float v = 0.0f;
    p.get(model, "model", "c_tr", v);
    c.c_tr = v;
    p.check(v > 0.0f, "model.c_tr");
  }
  p.check(c.model.encoder.width >= 1, "model.encoder.width");
  p.check(c.model.encoder.n_resblocks >= 0, "model.encoder.n_resblocks");
  p.check(c.model.lte.K >= 1, "model.K");
  p.check(c.model.decoder_hidden >= 1, "model.decoder_hidden");

  const json& train = section(doc, "train");
  p.object(train, "train",
           {"patch", "scale_min", "scale_max", "batch", "epochs", "iters_per_epoch", "lr0", "decay_epochs",
            "decay_factor", "seed"});
  auto& t = c.train;
  p.get(train, "train", "patch", t.patch);
  p.get(train, "train", "scale_min", t.scale_min);
  p.get(train, "train", "scale_max", t.scale_max);
  p.get(train, "train", "batch", t.batch);
  p.get(train, "train", "epochs", t.epochs);
  p.get(train, "train", "iters_per_epoch", t.iters_per_epoch);
  p.get(train, "train", "lr0", t.lr0);
  p.get_list(train, "train", "decay_epochs", t.decay_epochs);
  p.get(train, "train", "decay_factor", t.decay_factor);
  p.get(train, "train", "seed", t.seed);
  try {
    t.validate();
  } catch (const ConfigError& e) {
    for (const auto& k : e.keys()) p.bad(k);
  }

  const json& data = section(doc, "data");
  p.object(data, "data", {"dataset", "split", "val_dataset", "val_split", "val_scales"});
  p.get(data, "data", "dataset", c.data.dataset);
  p.get(data, "data", "split", c.data.split);
  p.get(data, "data", "val_dataset", c.data.val_dataset);
  p.get(data, "data", "val_split", c.data.val_split);
  p.get_list(data, "data", "val_scales", c.data.val_scales);
  for (double s : c.data.val_scales) p.check(s > 0.0, "data.val_scales");

  const json& output = section(doc, "output");
  p.object(output, "output", {"dir", "chunk"});
  p.get(output, "output", "dir", c.output.dir);
  p.get(output, "output", "chunk", c.output.chunk);
  p.check(c.output.chunk >= 1, "output.chunk");

  if (!p.errors().empty()) {
    std::vector<std::string> keys = p.errors();
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::string msg = "invalid configuration keys:";
    for (const auto& k : keys) msg += " " + k;
    throw ConfigError(msg, keys);
  }
  return c;
}

RunConfig parse_run_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str());
}

json to_json(const RunConfig& c) {
  json model = {
      {"encoder",
       {{"width", c.model.encoder.width},
        {"n_resblocks", c.model.encoder.n_resblocks},
        {"res_scale", c.model.encoder.res_scale}}},
      {"K", c.model.lte.K},
      {"decoder_hidden", c.model.decoder_hidden},
      {"decoder_variant", c.model.decoder_variant == DecoderVariant::conv1x1 ? "conv1x1" : "mlp"},
      {"ablation", ablation_names(c.model.lte.ablation)},
  };
  model["c_tr"] = c.c_tr ? json(*c.c_tr) : json(nullptr);
  const auto& t = c.train;
  return {
      {"model", model},
      {"train",
       {{"patch", t.patch},
        {"scale_min", t.scale_min},
        {"scale_max", t.scale_max},
        {"batch", t.batch},
        {"epochs", t.epochs},
        {"iters_per_epoch", t.iters_per_epoch},
        {"lr0", t.lr0},
        {"decay_epochs", t.decay_epochs},
        {"decay_factor", t.decay_factor},
        {"seed", t.seed}}},
      {"data",
       {{"dataset", c.data.dataset},
        {"split", c.data.split},
        {"val_dataset", c.data.val_dataset},
        {"val_split", c.data.val_split},
        {"val_scales", c.data.val_scales}}},
      {"output", {{"dir", c.output.dir}, {"chunk", c.output.chunk}}},
  };
}

}  // namespace lte
