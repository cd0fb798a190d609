#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lte/model.hpp"
#include "lte/tensor.hpp"
#include "lte/train.hpp"

namespace lte {

// Container layout, all integers little-endian:
//   "LTEC" | version u32 | count u32
//   count x { name_len u16 | name | rank u8 | dims u32[rank] | f32[numel] }
//   crc32 u32 over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_tensors(std::span<const NamedTensor> tensors);
// Throws CrcMismatchError, UnsupportedVersionError or CheckpointError.
std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes);

// Written to a temporary sibling and renamed into place.
void write_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_tensors(const std::filesystem::path& path);

// Model parameters plus meta.arch, meta.min_cell and meta.ablation.
std::vector<NamedTensor> model_tensors(const SrModel& model);
// Adds optim.m.*, optim.v.*, optim.step and train.epoch.
std::vector<NamedTensor> training_tensors(const SrModel& model, const TrainState& state);

// Throws MissingTensorError when a parameter or meta tensor is absent.
SrModel model_from_tensors(std::span<const NamedTensor> tensors);
// Empty when the checkpoint carries no optimizer state.
std::optional<TrainState> train_state_from_tensors(const SrModel& model, std::span<const NamedTensor> tensors);

void save_model(const std::filesystem::path& path, const SrModel& model);
SrModel load_model(const std::filesystem::path& path);

void save_training(const std::filesystem::path& path, const SrModel& model, const TrainState& state);

struct LoadedCheckpoint {
  SrModel model;
  std::optional<TrainState> train;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lte
