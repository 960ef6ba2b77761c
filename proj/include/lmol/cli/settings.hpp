#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lmol/model/config.hpp"
#include "lmol/train/trainer.hpp"

namespace lmol::cli {

// Ordered key=value pairs. Lines are trimmed, `#` starts a comment, blank
// lines are ignored. Throws ConfigError for a line without '=', an empty key
// or a key given twice.
using Settings = std::map<std::string, std::string>;
Settings parse_settings(std::string_view text);
Settings read_settings(const std::filesystem::path& path);

// Everything `lmol train` needs. Relative paths are resolved against the
// directory of the settings file.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path vocab;
  std::filesystem::path out_dir;
  ModelConfig model = ModelConfig::desk();  // d_voc and n_numeric are filled from data
  TrainConfig train;
  double split_ratio = 0.9;
  std::vector<std::string> conditions;  // dataset columns fed as numeric conditions, in order
};

// Keys: dataset, vocab, out_dir, model (preset desk|paper), model.<field>,
// train.<field>, split_ratio, condition.<i>.name. Unknown keys and malformed
// values throw ConfigError.
RunConfig make_run_config(const Settings& settings, const std::filesystem::path& base_dir);

// Text form of the resolved configuration, readable by parse_settings.
std::string describe(const RunConfig& config);

}  // namespace lmol::cli
