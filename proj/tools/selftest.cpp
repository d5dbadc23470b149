#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "commands.hpp"
#include "gin/analytics/forest.hpp"
#include "gin/analytics/isomap.hpp"
#include "gin/analytics/roc.hpp"
#include "gin/io/model_file.hpp"
#include "gin/nn/grad_check.hpp"
#include "gin/nn/optimizer.hpp"
#include "gin/synth/valve.hpp"

namespace gin::cli {

namespace {

using nn::LayerSpec;

nn::Tensor random_input(Rng& rng, nn::Shape shape) {
  nn::Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

double check_net(std::vector<LayerSpec> layers, nn::Shape sample, std::size_t batch, std::uint64_t seed) {
  Rng rng(seed);
  nn::Network net(std::move(layers), sample);
  net.initialize(rng);
  sample.insert(sample.begin(), batch);
  return nn::grad_check(net, random_input(rng, sample), 1e-3).max_relative_error;
}

bool gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    worst = std::max(worst, check_net({LayerSpec::dense(5, 4), LayerSpec::leaky_relu(0.2f), LayerSpec::dense(4, 3),
                                       LayerSpec::sigmoid()},
                                      {5}, 3, seed));
    worst = std::max(worst, check_net({LayerSpec::dense(4, 6), LayerSpec::batch_norm(6), LayerSpec::relu(),
                                       LayerSpec::dense(6, 2), LayerSpec::tanh()},
                                      {4}, 5, seed));
    worst = std::max(worst, check_net({LayerSpec::conv2d(1, 2, 3, 2, 1), LayerSpec::batch_norm(2),
                                       LayerSpec::leaky_relu(0.2f), LayerSpec::flatten(), LayerSpec::dense(8, 2)},
                                      {1, 4, 4}, 3, seed));
  }
  return worst < 1e-2;
}

bool rmsprop_example() {
  nn::Params params, grads;
  params.add({"w", nn::ParamRole::weight, 0, nn::Tensor({1}, std::vector<float>{1.0f})});
  grads.add({"w", nn::ParamRole::weight, 0, nn::Tensor({1}, std::vector<float>{2.0f})});
  nn::Optimizer opt({nn::Algorithm::rmsprop, 0.01, 0.9, 1e-8});
  opt.step(params, grads);
  const double expected = 1.0 - 0.01 * 2.0 / std::sqrt(0.4 + 1e-8);
  return std::abs(opt.accumulators()[0].value.data()[0] - 0.4) < 1e-7 &&
         std::abs(params[0].value.data()[0] - expected) < 1e-6;
}

bool clipping() {
  Rng rng(3);
  nn::Network net({LayerSpec::dense(6, 6), LayerSpec::batch_norm(6)}, {6});
  net.initialize(rng);
  nn::clip_params(net.params(), 0.01f);
  const nn::Params once = net.params();
  nn::clip_params(net.params(), 0.01f);
  bool bounded = true;
  for (const auto& p : net.params()) {
    if (!nn::is_trainable(p.role)) continue;
    for (float v : p.value.data()) bounded = bounded && std::abs(v) <= 0.01f;
  }
  return bounded && once == net.params();
}

bool auc_pairwise() {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.index(8)) / 8.0;
      labels[i] = static_cast<int>(rng.index(2));
    }
    labels[0] = 0;
    labels[1] = 1;
    double pairs = 0.0, wins = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[i] != 1 || labels[j] != 0) continue;
        pairs += 1.0;
        wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
      }
    }
    if (std::abs(analytics::roc_auc(scores, labels).auc - wins / pairs) > 1e-12) return false;
  }
  return true;
}

bool isomap_line() {
  analytics::Matrix pts(5, 10);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t c = 0; c < 10; ++c) pts.at(i, c) = static_cast<double>(i) * (0.1 + 0.05 * static_cast<double>(c));
  }
  const auto e = analytics::isomap(pts, 2, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double orig = 0.0, emb = 0.0;
      for (std::size_t c = 0; c < 10; ++c) orig += std::pow(pts.at(i, c) - pts.at(j, c), 2);
      for (std::size_t c = 0; c < 2; ++c) emb += std::pow(e.at(i, c) - e.at(j, c), 2);
      if (std::abs(std::sqrt(orig) - std::sqrt(emb)) > 1e-6) return false;
    }
  }
  return true;
}

bool model_round_trip() {
  Rng rng(5);
  const auto gan = gan::make_gan(3, 16, 8, 0.01f, rng);
  const auto inv = gan::make_inverse(3, 16, rng);
  std::vector<float> values;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const float a = static_cast<float>(rng.uniform(-1, 1)), b = static_cast<float>(rng.uniform(-1, 1));
    values.insert(values.end(), {a, b, 0.0f});
    labels.push_back(a + b > 0 ? 1 : 0);
  }
  analytics::ForestConfig fc;
  fc.n_trees = 5;
  const auto forest = analytics::train_forest(analytics::make_features(3, values, labels), fc, rng);
  const std::string g = io::serialize(gan), i = io::serialize(inv), f = io::serialize(forest);
  return io::serialize(io::deserialize_gan(g)) == g && io::serialize(io::deserialize_inverse(i)) == i &&
         io::serialize(io::deserialize_forest(f)) == f && io::deserialize_forest(f) == forest;
}

bool synth_determinism() {
  const auto a = synth::make_dataset(8, 16, 99, true);
  const auto b = synth::make_dataset(8, 16, 99, true);
  bool same = a.records.size() == 80 && b.records.size() == 80;
  for (std::size_t i = 0; same && i < a.records.size(); ++i) same = a.records[i].image == b.records[i].image;
  const GrayImage& img = a.records[0].image;
  return same && synth::rotate_image(img, 0.0) == img;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<std::pair<std::string, std::function<bool()>>> checks{
      {"gradients match finite differences", gradients},
      {"rmsprop hand example", rmsprop_example},
      {"weight clipping bounded and idempotent", clipping},
      {"trapezoidal AUC equals pairwise statistic", auc_pairwise},
      {"isomap preserves collinear distances", isomap_line},
      {"model files round-trip byte for byte", model_round_trip},
      {"dataset generation deterministic", synth_determinism},
  };
  bool all = true;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      out << "  (" << e.what() << ")\n";
    }
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    all = all && ok;
  }
  return all;
}

}  // namespace gin::cli
