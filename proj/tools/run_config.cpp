#include "run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "gin/error.hpp"
#include "gin/io/csv.hpp"

namespace gin::cli {

namespace {

std::size_t to_size(const std::string& v, const std::string& key) {
  const long long n = io::parse_int(v, key);
  if (n < 0) throw ValidationError(key + " must be non-negative, got " + v);
  return static_cast<std::size_t>(n);
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  std::uint64_t n = 0;
  try {
    n = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-') throw ValidationError(key + ": '" + v + "' is not an unsigned integer");
  return n;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ValidationError(key + ": '" + v + "' is not a boolean");
}

struct Setting {
  SettingInfo info;
  std::function<void(RunConfig&, const std::string&)> apply;
};

const std::vector<Setting>& table() {
  static const std::vector<Setting> t = [] {
    std::vector<Setting> s;
    auto add = [&](std::string key, std::string help, std::function<void(RunConfig&, const std::string&)> f) {
      s.push_back({{std::move(key), std::move(help)}, std::move(f)});
    };
    add("seed", "master random seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v, "seed"); });
    add("latent_dim", "feature-space dimension (1-20)", [](RunConfig& c, const std::string& v) {
      c.latent_dim = to_size(v, "latent_dim");
    });
    add("image_size", "image side in pixels", [](RunConfig& c, const std::string& v) { c.image_size = to_size(v, "image_size"); });
    add("n_base", "number of base records", [](RunConfig& c, const std::string& v) { c.n_base = to_size(v, "n_base"); });
    add("augment", "add 9 rotated copies per record", [](RunConfig& c, const std::string& v) { c.augment = to_bool(v, "augment"); });
    add("gan_iterations", "generator updates", [](RunConfig& c, const std::string& v) {
      c.gan.iterations = to_size(v, "gan_iterations");
    });
    add("gan_batch", "GAN batch size", [](RunConfig& c, const std::string& v) { c.gan.batch = to_size(v, "gan_batch"); });
    add("gan_hidden", "hidden units per GAN layer", [](RunConfig& c, const std::string& v) { c.gan.hidden = to_size(v, "gan_hidden"); });
    add("n_critic", "critic updates per generator update", [](RunConfig& c, const std::string& v) {
      c.gan.n_critic = to_size(v, "n_critic");
    });
    add("clip_c", "critic weight clip", [](RunConfig& c, const std::string& v) { c.gan.clip_c = io::parse_double(v, "clip_c"); });
    add("gan_lr", "GAN RMSProp learning rate", [](RunConfig& c, const std::string& v) {
      c.gan.learning_rate = io::parse_double(v, "gan_lr");
    });
    add("inv_iterations", "inverse training steps", [](RunConfig& c, const std::string& v) {
      c.inverse.iterations = to_size(v, "inv_iterations");
    });
    add("inv_batch", "inverse batch size", [](RunConfig& c, const std::string& v) { c.inverse.batch = to_size(v, "inv_batch"); });
    add("inv_lr", "inverse RMSProp learning rate", [](RunConfig& c, const std::string& v) {
      c.inverse.learning_rate = io::parse_double(v, "inv_lr");
    });
    add("trees", "random forest size", [](RunConfig& c, const std::string& v) { c.forest.n_trees = to_size(v, "trees"); });
    add("max_depth", "maximum tree depth", [](RunConfig& c, const std::string& v) { c.forest.max_depth = to_size(v, "max_depth"); });
    add("min_leaf", "minimum samples per leaf", [](RunConfig& c, const std::string& v) { c.forest.min_leaf = to_size(v, "min_leaf"); });
    add("folds", "cross-validation folds", [](RunConfig& c, const std::string& v) { c.folds = to_size(v, "folds"); });
    add("isomap_k", "Isomap neighbours", [](RunConfig& c, const std::string& v) { c.isomap_k = to_size(v, "isomap_k"); });
    add("target", "high, low or boundary", [](RunConfig& c, const std::string& v) { c.target.kind = vpgen::parse_target_kind(v); });
    add("tau_high", "acceptance threshold for high targets", [](RunConfig& c, const std::string& v) {
      c.target.tau_high = io::parse_double(v, "tau_high");
    });
    add("tau_low", "acceptance threshold for low targets", [](RunConfig& c, const std::string& v) {
      c.target.tau_low = io::parse_double(v, "tau_low");
    });
    add("beta", "boundary half-width", [](RunConfig& c, const std::string& v) { c.target.beta = io::parse_double(v, "beta"); });
    add("max_attempts", "rejection-sampling budget per patient", [](RunConfig& c, const std::string& v) {
      c.max_attempts = to_size(v, "max_attempts");
    });
    add("count", "virtual patients to generate", [](RunConfig& c, const std::string& v) { c.count = to_size(v, "count"); });
    add("dims", "grid dimensions, e.g. 0,1", [](RunConfig& c, const std::string& v) {
      const auto parts = io::split_csv_line(v);
      if (parts.size() != 2) throw ValidationError("dims: expected two comma-separated indices, got '" + v + "'");
      c.grid_dim_x = to_size(parts[0], "dims");
      c.grid_dim_y = to_size(parts[1], "dims");
    });
    add("steps", "grid steps per axis", [](RunConfig& c, const std::string& v) { c.grid_steps = to_size(v, "steps"); });
    add("grid_min", "lower end of both grid axes", [](RunConfig& c, const std::string& v) {
      c.grid_min = io::parse_double(v, "grid_min");
    });
    add("grid_max", "upper end of both grid axes", [](RunConfig& c, const std::string& v) {
      c.grid_max = io::parse_double(v, "grid_max");
    });
    add("grid_fixed", "value of the coordinates not on the grid", [](RunConfig& c, const std::string& v) {
      c.grid_fixed = io::parse_double(v, "grid_fixed");
    });
    add("data", "dataset directory", [](RunConfig& c, const std::string& v) { c.data_dir = v; });
    add("models", "model directory", [](RunConfig& c, const std::string& v) { c.model_dir = v; });
    add("out", "output directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; });
    return s;
  }();
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
  gan::validate_latent_dim(latent_dim);
  if (image_size < synth::kMinImageSize) {
    throw ValidationError("image_size must be >= " + std::to_string(synth::kMinImageSize));
  }
  if (n_base < 8) throw ValidationError("n_base must be >= 8, got " + std::to_string(n_base));
  gan.validate();
  inverse.validate();
  forest.validate();
  if (folds < 2) throw ValidationError("folds must be >= 2");
  if (isomap_k < 2) throw ValidationError("isomap_k must be >= 2 for a 2-D embedding");
  target.validate();
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  if (count < 1) throw ValidationError("count must be >= 1");
}

const std::vector<SettingInfo>& settings() {
  static const std::vector<SettingInfo> infos = [] {
    std::vector<SettingInfo> v;
    for (const auto& s : table()) v.push_back(s.info);
    return v;
  }();
  return infos;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& s : table()) {
    if (s.info.key == key) {
      try {
        s.apply(cfg, value);
      } catch (const FormatError& e) {
        throw ValidationError(e.what());
      }
      return;
    }
  }
  throw ValidationError("unknown setting '" + key + "'");
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& flags, const char* env_seed) {
  RunConfig cfg;
  if (env_seed != nullptr && *env_seed != '\0') apply_setting(cfg, "seed", env_seed);
  if (config_file) {
    for (const auto& [k, v] : read_config_file(*config_file)) apply_setting(cfg, k, v);
  }
  for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
  cfg.gan.latent_dim = cfg.latent_dim;
  cfg.validate();
  return cfg;
}

}  // namespace gin::cli
