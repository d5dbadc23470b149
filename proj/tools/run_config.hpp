#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gin/analytics/forest.hpp"
#include "gin/gan/training.hpp"
#include "gin/vpgen/vpgen.hpp"

namespace gin::cli {

inline constexpr std::uint64_t kDefaultSeed = 2024;

struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  std::size_t latent_dim = 10;
  std::size_t image_size = 32;
  std::size_t n_base = 168;
  bool augment = true;
  gan::GanConfig gan;
  gan::InverseConfig inverse;
  analytics::ForestConfig forest;
  std::size_t folds = 4;
  std::size_t isomap_k = 8;
  vpgen::GenerationTarget target;
  std::size_t max_attempts = vpgen::kDefaultMaxAttempts;
  std::size_t count = 1;
  std::size_t grid_dim_x = 0;
  std::size_t grid_dim_y = 1;
  std::size_t grid_steps = 5;
  double grid_min = -1.0;
  double grid_max = 1.0;
  double grid_fixed = 0.0;
  std::filesystem::path data_dir = "data";
  std::filesystem::path model_dir = "models";
  std::filesystem::path out_dir = "out";

  void validate() const;
};

// Every setting has one key usable both in a config file ("gan_lr = 1e-4")
// and as a flag ("--gan-lr 1e-4").
struct SettingInfo {
  std::string key;
  std::string help;
};
const std::vector<SettingInfo>& settings();

// Throws ValidationError for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// defaults < GIN_SEED (seed only) < config file < flags.
RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& flags, const char* env_seed);

}  // namespace gin::cli
