#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lmol/model/params.hpp"
#include "lmol/numcore/adam.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct OptimizerState {
  std::uint64_t steps = 0;
  std::vector<std::vector<real>> first, second;  // aligned with ModelParams::tensors()
};

struct Checkpoint {
  ModelParams params;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::optional<OptimizerState> optimizer;
};

// Layout (little-endian): "LMOL", u32 version, u32 config field count, the
// config fields as u32 (real-valued fields as float bits), u64 step, u64 seed,
// u64 optimizer step count, u32 tensor count, then per tensor u32 name length,
// name, u32 rank, u32 dims, float32 data. Optimizer moments are stored as
// tensors named "adam.m/<param>" and "adam.v/<param>". Written atomically.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, std::uint64_t step,
                     std::uint64_t seed, const Adam* optimizer = nullptr);

// Validates the whole file before building anything. Throws IoError when
// unreadable, FormatError for bad magic, version, truncation or tensors that
// contradict the stored config, and ShapeError when `expected` is given and
// differs from the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

// Copies stored moments into an optimizer built over params.tensors().
void restore_optimizer(const OptimizerState& state, Adam& optimizer);

}  // namespace lmol
