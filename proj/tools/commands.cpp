#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "gin/analytics/cross_validation.hpp"
#include "gin/analytics/isomap.hpp"
#include "gin/error.hpp"
#include "gin/io/csv.hpp"
#include "gin/io/dataset_io.hpp"
#include "gin/io/model_file.hpp"
#include "gin/io/pgm.hpp"
#include "run_config.hpp"

namespace gin::cli {

namespace fs = std::filesystem;

namespace {

// Sub-streams of the master seed, one per pipeline stage.
enum Stream : std::uint64_t { kGanStream = 1, kInverseStream, kCvStream, kForestStream, kGenerateStream };

Rng stream(const RunConfig& cfg, Stream s) { return Rng(derive_seed(cfg.seed, s)); }

struct Context {
  std::ostream& out;
  RunConfig cfg;
  bool force = false;
};

void guard_output(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw ValidationError("'" + path.string() + "' already exists; pass --force to overwrite");
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create directory '" + dir.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw ValidationError("write to '" + path.string() + "' failed");
}

template <typename Model, typename Load>
Model load_model(const fs::path& path, Load load) {
  if (!fs::exists(path)) throw ValidationError("model file '" + path.string() + "' not found");
  try {
    return load(io::read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

gan::GanModel load_gan(const RunConfig& cfg) {
  return load_model<gan::GanModel>(cfg.model_dir / "gan.ginm", io::deserialize_gan);
}
gan::InverseModel load_inverse(const RunConfig& cfg) {
  return load_model<gan::InverseModel>(cfg.model_dir / "inverse.ginm", io::deserialize_inverse);
}
analytics::ForestModel load_forest(const RunConfig& cfg) {
  return load_model<analytics::ForestModel>(cfg.model_dir / "forest.ginm", io::deserialize_forest);
}

synth::Dataset load_dataset(const RunConfig& cfg) {
  if (!fs::is_directory(cfg.data_dir)) throw ValidationError("dataset directory '" + cfg.data_dir.string() + "' not found");
  return io::read_dataset(cfg.data_dir);
}

synth::Dataset base_records(const synth::Dataset& data) {
  synth::Dataset base;
  base.seed = data.seed;
  for (const auto& r : data.records) {
    if (!r.augmented_from) base.records.push_back(r);
  }
  return base;
}

int cmd_synth(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = cfg.data_dir;
  guard_output(dir / "manifest.csv", ctx.force);
  const synth::Dataset data = synth::make_dataset(cfg.n_base, cfg.image_size, cfg.seed, cfg.augment);
  ensure_dir(dir);
  if (ctx.force && fs::exists(dir / "images")) fs::remove_all(dir / "images");
  io::write_dataset(dir, data);
  std::size_t high = 0;
  for (const auto& r : data.records) high += r.pvl_label == synth::Pvl::high ? 1 : 0;
  ctx.out << "wrote " << data.records.size() << " records (" << data.base_count() << " base"
          << (cfg.augment ? ", augmented x10" : "") << ") to " << dir.string() << "\n"
          << "class balance: " << high << " high PVL, " << data.records.size() - high << " low PVL\n";
  return kSuccess;
}

int cmd_train(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = cfg.model_dir;
  for (const char* f : {"gan.ginm", "inverse.ginm", "train_log.csv"}) guard_output(dir / f, ctx.force);
  const synth::Dataset data = load_dataset(cfg);
  if (data.records.front().image.height != cfg.image_size) {
    throw ValidationError("dataset images are " + std::to_string(data.records.front().image.height) +
                          " px, config expects image_size " + std::to_string(cfg.image_size));
  }
  ensure_dir(dir);

  Rng gan_rng = stream(cfg, kGanStream);
  const auto gan = gan::train_gan(data, cfg.gan, gan_rng);
  const auto& g_last = gan.log.records.back();
  ctx.out << "gan: " << cfg.gan.iterations << " iterations, critic loss " << io::format_number(*g_last.critic_loss)
          << ", generator loss " << io::format_number(*g_last.gen_loss) << "\n";

  Rng inv_rng = stream(cfg, kInverseStream);
  const auto inv = gan::train_inverse(gan.model, cfg.inverse, inv_rng);
  ctx.out << "inverse: " << cfg.inverse.iterations << " iterations, mse "
          << io::format_number(*inv.log.records.back().inverse_mse) << "\n";

  io::write_file_bytes(dir / "gan.ginm", io::serialize(gan.model));
  io::write_file_bytes(dir / "inverse.ginm", io::serialize(inv.model));
  std::ostringstream log;
  gan::write_training_log(log, gan::concat_logs(gan.log, inv.log));
  write_text(dir / "train_log.csv", log.str());
  ctx.out << "wrote gan.ginm, inverse.ginm, train_log.csv to " << dir.string() << "\n";
  return kSuccess;
}

std::string metrics_csv(const analytics::FoldMetrics& m) {
  using io::format_number;
  std::string s = "fold,accuracy,sensitivity,specificity,auc,tp,tn,fp,fn\n";
  for (const auto& f : m.folds) {
    s += std::to_string(f.fold) + "," + format_number(f.accuracy) + "," + format_number(f.sensitivity) + "," +
         format_number(f.specificity) + "," + format_number(f.roc.auc) + "," + std::to_string(f.confusion.tp) + "," +
         std::to_string(f.confusion.tn) + "," + std::to_string(f.confusion.fp) + "," + std::to_string(f.confusion.fn) +
         "\n";
  }
  s += "mean," + format_number(m.mean_accuracy) + "," + format_number(m.mean_sensitivity) + "," +
       format_number(m.mean_specificity) + "," + format_number(m.mean_auc) + ",,,,\n";
  return s;
}

std::string metrics_summary(const analytics::FoldMetrics& m, std::size_t rows, std::size_t trees) {
  char line[160];
  std::string s;
  std::snprintf(line, sizeof line, "%zu-fold cross-validation, %zu records, %zu trees\n", m.folds.size(), rows, trees);
  s += line;
  std::snprintf(line, sizeof line, "mean accuracy    %.4f\nmean sensitivity %.4f\nmean specificity %.4f\n",
                m.mean_accuracy, m.mean_sensitivity, m.mean_specificity);
  s += line;
  s += "fold AUC        ";
  for (const auto& f : m.folds) {
    std::snprintf(line, sizeof line, " %.4f", f.roc.auc);
    s += line;
  }
  std::snprintf(line, sizeof line, "\nmean AUC         %.4f\n", m.mean_auc);
  s += line;
  return s;
}

int cmd_analyze(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = cfg.out_dir;
  std::vector<fs::path> outputs{dir / "features.csv", dir / "isomap.csv", dir / "metrics.csv", dir / "metrics.txt",
                                cfg.model_dir / "forest.ginm"};
  for (std::size_t f = 0; f < cfg.folds; ++f) outputs.push_back(dir / ("roc_fold" + std::to_string(f) + ".csv"));
  for (const auto& p : outputs) guard_output(p, ctx.force);

  const auto inv = load_inverse(cfg);
  const synth::Dataset base = base_records(load_dataset(cfg));
  const auto features = analytics::extract_features(inv, base);
  ensure_dir(dir);

  std::string text = "id";
  for (std::size_t c = 0; c < features.cols; ++c) text += ",f" + std::to_string(c);
  text += ",label\n";
  for (std::size_t r = 0; r < features.rows; ++r) {
    text += std::to_string(features.ids[r]);
    for (float v : features.row(r)) text += "," + io::format_number(v);
    text += "," + std::to_string(features.labels[r]) + "\n";
  }
  write_text(dir / "features.csv", text);

  const auto coords = analytics::isomap(features, cfg.isomap_k, 2);
  text = "id,x,y,label\n";
  for (std::size_t r = 0; r < coords.rows; ++r) {
    text += std::to_string(features.ids[r]) + "," + io::format_number(coords.at(r, 0)) + "," +
            io::format_number(coords.at(r, 1)) + "," + std::to_string(features.labels[r]) + "\n";
  }
  write_text(dir / "isomap.csv", text);

  Rng cv_rng = stream(cfg, kCvStream);
  const auto metrics = analytics::cross_validate(features, cfg.forest, cfg.folds, cv_rng);
  write_text(dir / "metrics.csv", metrics_csv(metrics));
  const std::string summary = metrics_summary(metrics, features.rows, cfg.forest.n_trees);
  write_text(dir / "metrics.txt", summary);
  for (const auto& f : metrics.folds) {
    text = "threshold,fpr,tpr\n";
    for (const auto& p : f.roc.points) {
      text += io::format_number(p.threshold) + "," + io::format_number(p.fpr) + "," + io::format_number(p.tpr) + "\n";
    }
    write_text(dir / ("roc_fold" + std::to_string(f.fold) + ".csv"), text);
  }

  // The forest used for guided generation sees every base record.
  Rng forest_rng = stream(cfg, kForestStream);
  const auto forest = analytics::train_forest(features, cfg.forest, forest_rng);
  io::write_file_bytes(cfg.model_dir / "forest.ginm", io::serialize(forest));

  ctx.out << summary << "wrote features.csv, isomap.csv, metrics.csv, metrics.txt and ROC curves to " << dir.string()
          << "; forest.ginm to " << cfg.model_dir.string() << "\n";
  return kSuccess;
}

int cmd_generate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = cfg.out_dir;
  guard_output(dir / "virtual.csv", ctx.force);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "vp_%03zu.pgm", i);
    guard_output(dir / name, ctx.force);
  }
  const auto gan = load_gan(cfg);
  const auto forest = load_forest(cfg);
  Rng rng = stream(cfg, kGenerateStream);
  std::vector<vpgen::VirtualPatient> patients;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    patients.push_back(vpgen::guided_sample(gan, forest, cfg.target, rng, cfg.max_attempts));
  }

  ensure_dir(dir);
  std::string csv = "id,target,proba,attempts";
  for (std::size_t j = 0; j < gan.latent_dim; ++j) csv += ",u" + std::to_string(j);
  csv += "\n";
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const auto& vp = patients[i];
    char name[32];
    std::snprintf(name, sizeof name, "vp_%03zu.pgm", i);
    io::write_pgm(dir / name, vp.image);
    csv += std::to_string(i) + "," + vpgen::to_string(vp.target) + "," + io::format_number(vp.predicted_proba) + "," +
           std::to_string(vp.attempts);
    for (float v : vp.u.values) csv += "," + io::format_number(v);
    csv += "\n";
  }
  write_text(dir / "virtual.csv", csv);

  std::size_t attempts = 0;
  for (const auto& vp : patients) attempts += vp.attempts;
  ctx.out << "generated " << patients.size() << " " << vpgen::to_string(cfg.target.kind) << " virtual patients in "
          << attempts << " draws (acceptance rate "
          << io::format_number(static_cast<double>(patients.size()) / static_cast<double>(attempts)) << ")\n";
  if (fs::exists(cfg.model_dir / "inverse.ginm")) {
    const auto inv = load_inverse(cfg);
    std::size_t kept = 0;
    double worst = 0.0;
    for (const auto& vp : patients) {
      const auto report = vpgen::classify_virtual(forest, inv, vp);
      kept += report.class_kept ? 1 : 0;
      worst = std::max(worst, report.linf_distance);
    }
    ctx.out << "re-extraction: " << kept << "/" << patients.size() << " keep their predicted class, max |u' - u| "
            << io::format_number(worst) << "\n";
  }
  return kSuccess;
}

int cmd_grid(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path path = cfg.out_dir / "grid.pgm";
  guard_output(path, ctx.force);
  const auto gan = load_gan(cfg);
  vpgen::GridSpec spec;
  spec.dim_x = cfg.grid_dim_x;
  spec.dim_y = cfg.grid_dim_y;
  spec.x = {static_cast<float>(cfg.grid_min), static_cast<float>(cfg.grid_max), cfg.grid_steps};
  spec.y = spec.x;
  spec.fixed.assign(gan.latent_dim >= 2 ? gan.latent_dim - 2 : 0, static_cast<float>(cfg.grid_fixed));
  const auto grid = vpgen::feature_grid(gan, spec);
  ensure_dir(cfg.out_dir);
  io::write_pgm(path, grid.montage);
  ctx.out << "wrote " << grid.tiles.size() << "-tile montage (" << grid.montage.width << "x" << grid.montage.height
          << ") to " << path.string() << "\n";
  return kSuccess;
}

int cmd_reconstruct(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = cfg.out_dir;
  guard_output(dir / "mse.csv", ctx.force);
  const auto gan = load_gan(cfg);
  const auto inv = load_inverse(cfg);
  const synth::Dataset data = load_dataset(cfg);
  ensure_dir(dir);

  std::string csv = "id,mse\n";
  double total = 0.0;
  for (const auto& r : data.records) {
    const auto rec = gan::reconstruct(gan, inv, r.image);
    const std::size_t s = r.image.height;
    GrayImage pair(s, 2 * s + 1, 1.0f);
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        pair.at(y, x) = r.image.at(y, x);
        pair.at(y, s + 1 + x) = rec.image.at(y, x);
      }
    }
    char name[40];
    std::snprintf(name, sizeof name, "recon_%06zu.pgm", r.id);
    io::write_pgm(dir / name, pair);
    csv += std::to_string(r.id) + "," + io::format_number(rec.mse) + "\n";
    total += rec.mse;
  }
  write_text(dir / "mse.csv", csv);
  ctx.out << "reconstructed " << data.records.size() << " records, mean mse "
          << io::format_number(total / static_cast<double>(data.records.size())) << "\n";
  return kSuccess;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

struct Subcommand {
  CLI::App* app;
  std::vector<std::string> keys;
  int (*handler)(Context&);
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative invertible networks: synthetic valve images, feature-space analytics, virtual patients"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  bool force = false;
  app.add_option("--config", config_path, "flat 'key = value' settings file")->check(CLI::ExistingFile);
  app.add_flag("--force", force, "overwrite existing outputs");

  const std::vector<std::string> common{"seed", "latent_dim", "image_size"};
  auto keys = [&](std::vector<std::string> extra) {
    extra.insert(extra.begin(), common.begin(), common.end());
    return extra;
  };
  std::vector<Subcommand> subs{
      {app.add_subcommand("synth", "render a labelled synthetic dataset"), keys({"n_base", "data"}), cmd_synth},
      {app.add_subcommand("train", "train the GAN, then the inverse network"),
       keys({"data", "models", "gan_iterations", "gan_batch", "gan_hidden", "n_critic", "clip_c", "gan_lr",
             "inv_iterations", "inv_batch", "inv_lr"}),
       cmd_train},
      {app.add_subcommand("analyze", "features, Isomap, cross-validated random forest"),
       keys({"data", "models", "out", "trees", "max_depth", "min_leaf", "folds", "isomap_k"}), cmd_analyze},
      {app.add_subcommand("generate", "outcome-guided virtual patients"),
       keys({"models", "out", "target", "tau_high", "tau_low", "beta", "max_attempts", "count"}), cmd_generate},
      {app.add_subcommand("grid", "feature-space cross-section montage"),
       keys({"models", "out", "dims", "steps", "grid_min", "grid_max", "grid_fixed"}), cmd_grid},
      {app.add_subcommand("reconstruct", "generate(invert(x)) for every record"), keys({"models", "data", "out"}),
       cmd_reconstruct},
  };
  CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suites");

  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> help;
  for (const auto& s : settings()) help[s.key] = s.help;
  for (auto& sub : subs) {
    for (const auto& key : sub.keys) options.emplace_back(key, sub.app->add_option(flag_name(key), values[key], help.at(key)));
  }
  // synth takes --augment / --no-augment as a switch.
  bool augment_flag = true;
  CLI::Option* augment_opt = subs[0].app->add_flag("--augment,!--no-augment", augment_flag, "add 9 rotated copies per record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  try {
    if (selftest->parsed()) return run_selftest(out) ? kSuccess : kRuntimeFailure;
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) flags[key] = values[key];
    }
    if (augment_opt->count() > 0) flags["augment"] = augment_flag ? "true" : "false";
    std::optional<fs::path> config_file;
    if (!config_path.empty()) config_file = config_path;
    Context ctx{out, resolve_config(config_file, flags, std::getenv("GIN_SEED")), force};
    for (auto& sub : subs) {
      if (sub.app->parsed()) return sub.handler(ctx);
    }
    return kValidationFailure;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace gin::cli
