#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "gin/io/model_file.hpp"
#include "run_config.hpp"

using namespace gin;
using namespace gin::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("gin_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) { return io::read_file_bytes(p); }

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct EnvSeed {
  explicit EnvSeed(const char* value) {
    if (value) setenv("GIN_SEED", value, 1);
    else unsetenv("GIN_SEED");
  }
  ~EnvSeed() { unsetenv("GIN_SEED"); }
};

const std::vector<std::string> kSmallTrain{"--image-size", "16", "--latent-dim", "3", "--gan-iterations", "3",
                                           "--gan-hidden", "16", "--inv-iterations", "3", "--gan-batch", "4",
                                           "--inv-batch", "4"};

}  // namespace

TEST(Config, Precedence) {
  TempDir dir("precedence");
  const fs::path file = dir.path() / "run.cfg";
  write_text(file, "# comment\nseed = 5\n\ntrees = 40  # inline\nlatent_dim=4\n");

  EXPECT_EQ(resolve_config(std::nullopt, {}, nullptr).seed, kDefaultSeed);
  EXPECT_EQ(resolve_config(std::nullopt, {}, "9").seed, 9u);
  const auto from_file = resolve_config(file, {}, "9");
  EXPECT_EQ(from_file.seed, 5u);
  EXPECT_EQ(from_file.forest.n_trees, 40u);
  EXPECT_EQ(from_file.latent_dim, 4u);
  EXPECT_EQ(from_file.gan.latent_dim, 4u);
  const auto flagged = resolve_config(file, {{"seed", "7"}, {"latent_dim", "6"}}, "9");
  EXPECT_EQ(flagged.seed, 7u);
  EXPECT_EQ(flagged.latent_dim, 6u);
  EXPECT_EQ(flagged.forest.n_trees, 40u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("seed 5\n", "x"), ValidationError);
  EXPECT_THROW(parse_config_text("= 5\n", "x"), ValidationError);
  RunConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "no_such_key", "1"), ValidationError);
  EXPECT_THROW(apply_setting(cfg, "trees", "many"), ValidationError);
  EXPECT_THROW(apply_setting(cfg, "seed", "-3"), ValidationError);
  EXPECT_THROW(resolve_config(std::nullopt, {{"latent_dim", "25"}}, nullptr), ValidationError);
  EXPECT_THROW(resolve_config(std::nullopt, {{"folds", "1"}}, nullptr), ValidationError);
  EXPECT_THROW(resolve_config(std::nullopt, {{"gan_lr", "0"}}, nullptr), ValidationError);
  EXPECT_THROW(resolve_config(std::nullopt, {}, "abc"), ValidationError);
}

TEST(Config, EveryKeyHasAFlag) {
  RunConfig cfg;
  for (const auto& s : settings()) {
    EXPECT_FALSE(s.help.empty()) << s.key;
    EXPECT_EQ(s.key.find('-'), std::string::npos) << s.key;
  }
  EXPECT_GE(settings().size(), 30u);
}

TEST(Cli, ExitCodes) {
  TempDir dir("exit");
  EXPECT_EQ(invoke({}).code, kValidationFailure);
  EXPECT_EQ(invoke({"frobnicate"}).code, kValidationFailure);
  EXPECT_EQ(invoke({"synth", "--n-base", "4", "--data", dir / "d"}).code, kValidationFailure);
  EXPECT_EQ(invoke({"synth", "--latent-dim", "25", "--data", dir / "d"}).code, kValidationFailure);
  EXPECT_EQ(invoke({"--help"}).code, kSuccess);
  const auto missing = invoke({"train", "--data", dir / "none", "--models", dir / "m"});
  EXPECT_EQ(missing.code, kValidationFailure);
  EXPECT_FALSE(missing.err.empty());
}

TEST(Cli, SynthDeterministicAndForce) {
  TempDir dir("synth");
  const std::vector<std::string> base{"synth", "--n-base", "12", "--image-size", "16", "--seed", "3"};
  auto args = base;
  args.insert(args.end(), {"--data", dir / "a"});
  ASSERT_EQ(invoke(args).code, kSuccess);
  auto args_b = base;
  args_b.insert(args_b.end(), {"--data", dir / "b"});
  ASSERT_EQ(invoke(args_b).code, kSuccess);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path() / "a")) {
    if (!e.is_regular_file()) continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir.path() / "b" / fs::relative(e.path(), dir.path() / "a"))) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 12u * 10 + 1);

  EXPECT_EQ(invoke(args).code, kValidationFailure);
  args.insert(args.begin(), "--force");
  EXPECT_EQ(invoke(args).code, kSuccess);
}

TEST(Cli, EnvSeedOnlyWithoutFlag) {
  TempDir dir("env");
  const std::vector<std::string> common{"synth", "--n-base", "8", "--image-size", "16", "--no-augment"};
  auto run_into = [&](const std::string& sub, std::vector<std::string> extra) {
    auto args = common;
    args.insert(args.end(), extra.begin(), extra.end());
    args.insert(args.end(), {"--data", dir / sub});
    EXPECT_EQ(invoke(args).code, kSuccess);
    return slurp(dir.path() / sub / "manifest.csv");
  };
  const auto flagged = run_into("flag", {"--seed", "11"});
  {
    EnvSeed env("11");
    EXPECT_EQ(run_into("env", {}), flagged);
    EXPECT_NE(run_into("env_overridden", {"--seed", "12"}), flagged);
  }
  EXPECT_NE(run_into("default", {}), flagged);
}

TEST(Cli, SmallPipeline) {
  TempDir dir("pipeline");
  const auto data = dir / "data", models = dir / "models", out = dir / "out";
  ASSERT_EQ(invoke({"synth", "--n-base", "40", "--image-size", "16", "--no-augment", "--data", data}).code, kSuccess);

  auto train = kSmallTrain;
  train.insert(train.begin(), "train");
  train.insert(train.end(), {"--data", data, "--models", models});
  const auto trained = invoke(train);
  ASSERT_EQ(trained.code, kSuccess) << trained.err;
  for (const char* f : {"gan.ginm", "inverse.ginm", "train_log.csv"}) EXPECT_TRUE(fs::exists(fs::path(models) / f)) << f;
  EXPECT_EQ(io::peek_kind(slurp(fs::path(models) / "gan.ginm")), io::ModelKind::gan);

  std::ifstream log(fs::path(models) / "train_log.csv");
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, gan::kTrainingLogHeader);

  const std::vector<std::string> dims{"--image-size", "16", "--latent-dim", "3"};
  auto analyze = std::vector<std::string>{"analyze", "--trees", "3", "--folds", "2", "--isomap-k", "4"};
  analyze.insert(analyze.end(), dims.begin(), dims.end());
  analyze.insert(analyze.end(), {"--data", data, "--models", models, "--out", out});
  const auto analyzed = invoke(analyze);
  ASSERT_EQ(analyzed.code, kSuccess) << analyzed.err;
  for (const char* f : {"features.csv", "isomap.csv", "metrics.csv", "metrics.txt", "roc_fold0.csv", "roc_fold1.csv"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  EXPECT_TRUE(fs::exists(fs::path(models) / "forest.ginm"));

  auto generate = std::vector<std::string>{"generate", "--target", "low", "--tau-low", "0.4", "--count", "3"};
  generate.insert(generate.end(), dims.begin(), dims.end());
  generate.insert(generate.end(), {"--models", models, "--out", out});
  const auto generated = invoke(generate);
  ASSERT_EQ(generated.code, kSuccess) << generated.err;
  for (const char* f : {"vp_000.pgm", "vp_002.pgm", "virtual.csv"}) EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;

  // Three pure trees can only vote 0, 1/3, 2/3 or 1.
  auto impossible = std::vector<std::string>{"generate", "--target", "boundary", "--beta", "1e-9", "--max-attempts",
                                             "50"};
  impossible.insert(impossible.end(), dims.begin(), dims.end());
  impossible.insert(impossible.end(), {"--models", models, "--out", dir / "out2"});
  const auto exhausted = invoke(impossible);
  EXPECT_EQ(exhausted.code, kRuntimeFailure);
  EXPECT_NE(exhausted.err.find("50"), std::string::npos) << exhausted.err;

  auto grid = std::vector<std::string>{"grid", "--dims", "0,2", "--steps", "3"};
  grid.insert(grid.end(), dims.begin(), dims.end());
  grid.insert(grid.end(), {"--models", models, "--out", out});
  const auto gridded = invoke(grid);
  ASSERT_EQ(gridded.code, kSuccess) << gridded.err;
  EXPECT_TRUE(fs::exists(fs::path(out) / "grid.pgm"));

  auto recon = std::vector<std::string>{"reconstruct"};
  recon.insert(recon.end(), dims.begin(), dims.end());
  recon.insert(recon.end(), {"--data", data, "--models", models, "--out", dir / "recon"});
  const auto reconstructed = invoke(recon);
  ASSERT_EQ(reconstructed.code, kSuccess) << reconstructed.err;
  EXPECT_TRUE(fs::exists(fs::path(dir / "recon") / "mse.csv"));

  // A model of the wrong kind where the GAN is expected.
  fs::copy_file(fs::path(models) / "forest.ginm", fs::path(models) / "gan.ginm", fs::copy_options::overwrite_existing);
  grid.insert(grid.begin(), "--force");
  EXPECT_EQ(invoke(grid).code, kRuntimeFailure);
}

TEST(Cli, Selftest) {
  const auto r = invoke({"selftest"});
  EXPECT_EQ(r.code, kSuccess) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}
