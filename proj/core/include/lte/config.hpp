#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lte/model.hpp"
#include "lte/train.hpp"

namespace lte {

struct DataConfig {
  std::string dataset;
  std::string split;
  std::string val_dataset;
  std::string val_split;
  std::vector<double> val_scales{2.0, 3.0, 4.0};
};

struct OutputConfig {
  std::string dir = "runs/default";
  std::int64_t chunk = 9216;
};

// One JSON document describing a training run. Every section and key is
// optional; missing keys keep the defaults below, unknown keys are errors.
struct RunConfig {
  ModelConfig model;
  // Inference cell floor in latent pixels; 2 / train.scale_max when unset.
  std::optional<float> c_tr;
  TrainConfig train;
  DataConfig data;
  OutputConfig output;

  // Model config with min_cell resolved.
  ModelConfig resolved_model() const;
};

// Throws ConfigError; keys() lists every offending dotted key.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

std::string ablation_name(int index);
// Parses "no_amplitude", "half_freq", "no_phase", "no_skip" and the short
// forms "A", "F", "P", "L". Throws ConfigError.
AblationFlags parse_ablation(const std::vector<std::string>& names);
std::vector<std::string> ablation_names(const AblationFlags& flags);

}  // namespace lte
