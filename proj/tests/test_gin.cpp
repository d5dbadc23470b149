#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gin/gan/training.hpp"
#include "gin/io/model_file.hpp"
#include "gin/nn/params.hpp"
#include "support.hpp"

using namespace gin;
using namespace gin::gan;

namespace {

GanModel tiny_gan(std::uint64_t seed, std::size_t d = 2, std::size_t size = 8) {
  Rng rng(seed);
  return make_gan(d, size, 16, 0.01f, rng);
}

nn::Tensor tiny_real(std::uint64_t seed, std::size_t n = 12, std::size_t size = 8) {
  Rng rng(seed);
  return test::random_tensor(rng, {n, size * size}, 0.0, 1.0);
}

GanConfig tiny_cfg(std::size_t iterations = 20) {
  GanConfig cfg;
  cfg.latent_dim = 2;
  cfg.hidden = 16;
  cfg.iterations = iterations;
  cfg.batch = 4;
  cfg.learning_rate = 5e-4;
  return cfg;
}

void zero_final_layer(nn::Network& net) {
  std::size_t last = 0;
  for (const auto& p : net.params()) last = std::max(last, p.layer);
  for (auto& p : net.params())
    if (p.layer == last) std::fill(p.value.data().begin(), p.value.data().end(), 0.0f);
}

}  // namespace

TEST(SampleLatent, SupportAndMean) {
  Rng rng(11);
  const std::size_t d = 5, n = 100000;
  std::vector<double> sum(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = sample_latent(rng, d);
    ASSERT_EQ(u.dim(), d);
    for (std::size_t j = 0; j < d; ++j) {
      ASSERT_GE(u.values[j], -1.0f);
      ASSERT_LE(u.values[j], 1.0f);
      sum[j] += u.values[j];
    }
  }
  for (double s : sum) EXPECT_LT(std::abs(s / n), 0.02);
}

TEST(SampleLatent, Deterministic) {
  Rng a(5), b(5);
  EXPECT_EQ(sample_latent(a, 10), sample_latent(b, 10));
}

TEST(SampleLatent, DimensionBounds) {
  Rng rng(1);
  EXPECT_THROW(sample_latent(rng, 0), ValidationError);
  EXPECT_THROW(sample_latent(rng, 21), ValidationError);
  EXPECT_NO_THROW(sample_latent(rng, 20));
}

TEST(Generate, DeterministicAndInRange) {
  const auto gan = tiny_gan(3);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto u = sample_latent(rng, 2);
    const auto a = generate(gan, u);
    EXPECT_EQ(a, generate(gan, u));
    EXPECT_EQ(a.height, 8u);
    EXPECT_EQ(a.width, 8u);
    for (float v : a.pixels) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Generate, ZeroFinalLayerGivesHalf) {
  auto gan = tiny_gan(3);
  zero_final_layer(gan.generator);
  Rng rng(9);
  const auto img = generate(gan, sample_latent(rng, 2));
  for (float v : img.pixels) EXPECT_EQ(v, 0.5f);
}

TEST(Generate, DimensionMismatch) {
  const auto gan = tiny_gan(3);
  Rng rng(1);
  EXPECT_THROW(generate(gan, sample_latent(rng, 3)), ValidationError);
}

TEST(Generate, SaturatedStillInRange) {
  auto gan = tiny_gan(8);
  for (auto& p : gan.generator.params())
    for (float& v : p.value.data()) v *= 400.0f;
  Rng rng(2);
  for (int i = 0; i < 10; ++i)
    for (float v : generate(gan, sample_latent(rng, 2)).pixels) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
}

TEST(TrainGan, CriticStaysClipped) {
  auto cfg = tiny_cfg(15);
  std::size_t calls = 0;
  double worst = 0.0;
  const auto observer = [&](const GanModel& m, std::size_t) {
    ++calls;
    for (const auto& p : m.critic.params())
      for (float v : p.value.data()) worst = std::max(worst, static_cast<double>(std::abs(v)));
  };
  Rng rng(21);
  const auto out = train_gan(tiny_gan(1), tiny_real(2), cfg, rng, observer);
  EXPECT_EQ(calls, cfg.iterations * cfg.n_critic);
  EXPECT_LE(worst, cfg.clip_c);
  EXPECT_EQ(out.log.records.size(), cfg.iterations);
}

TEST(TrainGan, LogIsMonotoneAndFinite) {
  Rng rng(21);
  const auto out = train_gan(tiny_gan(1), tiny_real(2), tiny_cfg(10), rng);
  for (std::size_t i = 0; i < out.log.records.size(); ++i) {
    const auto& r = out.log.records[i];
    EXPECT_EQ(r.iteration, i + 1);
    ASSERT_TRUE(r.critic_loss && r.gen_loss);
    EXPECT_TRUE(std::isfinite(*r.critic_loss));
    EXPECT_TRUE(std::isfinite(*r.gen_loss));
    EXPECT_FALSE(r.inverse_mse);
  }
}

TEST(TrainGan, Deterministic) {
  Rng a(33), b(33);
  const auto x = train_gan(tiny_gan(1), tiny_real(2), tiny_cfg(), a);
  const auto y = train_gan(tiny_gan(1), tiny_real(2), tiny_cfg(), b);
  EXPECT_EQ(io::serialize(x.model), io::serialize(y.model));
}

TEST(TrainGan, FromDatasetDeterministic) {
  const auto data = synth::make_dataset(8, 16, 17, false);
  auto cfg = tiny_cfg(5);
  Rng a(3), b(3);
  EXPECT_EQ(io::serialize(train_gan(data, cfg, a).model), io::serialize(train_gan(data, cfg, b).model));
}

TEST(TrainGan, NanDataNamesIteration) {
  auto real = tiny_real(2);
  real.data()[5] = std::numeric_limits<float>::quiet_NaN();
  Rng rng(1);
  try {
    train_gan(tiny_gan(1), real, tiny_cfg(), rng);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
  }
}

TEST(TrainGan, Validation) {
  Rng rng(1);
  auto cfg = tiny_cfg();
  cfg.batch = 1;
  EXPECT_THROW(train_gan(tiny_gan(1), tiny_real(2), cfg, rng), ValidationError);
  cfg = tiny_cfg();
  cfg.iterations = 0;
  EXPECT_THROW(train_gan(tiny_gan(1), tiny_real(2), cfg, rng), ValidationError);
  EXPECT_THROW(train_gan(synth::Dataset{}, tiny_cfg(), rng), ValidationError);
  EXPECT_THROW(train_gan(tiny_gan(1), tiny_real(2, 12, 6), tiny_cfg(), rng), ValidationError);
}

TEST(TrainInverse, DecreasesAndFreezesGenerator) {
  const auto gan = tiny_gan(5, 2, 8);
  const auto before = nn::fingerprint(gan.generator.params());
  InverseConfig cfg;
  cfg.iterations = 200;
  cfg.batch = 16;
  Rng rng(6);
  const auto out = train_inverse(gan, cfg, rng);
  EXPECT_EQ(nn::fingerprint(gan.generator.params()), before);
  ASSERT_EQ(out.log.records.size(), cfg.iterations);
  EXPECT_LT(*out.log.records.back().inverse_mse, *out.log.records.front().inverse_mse);
  for (const auto& r : out.log.records) {
    EXPECT_FALSE(r.critic_loss);
    EXPECT_TRUE(std::isfinite(*r.inverse_mse));
  }
}

TEST(TrainInverse, Deterministic) {
  const auto gan = tiny_gan(5, 2, 8);
  InverseConfig cfg;
  cfg.iterations = 20;
  Rng a(6), b(6);
  EXPECT_EQ(io::serialize(train_inverse(gan, cfg, a).model), io::serialize(train_inverse(gan, cfg, b).model));
}

// Fixed affine map from d=2 to a 4x4 image. The map has full column rank, so
// least squares recovers u exactly; the trained regressor has to get close.
TEST(TrainInverse, LinearToy) {
  Rng rng(3);
  std::vector<double> a(16 * 2);
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  const auto render = [&](const nn::Tensor& u) {
    nn::Tensor img({u.dim(0), 16});
    for (std::size_t n = 0; n < u.dim(0); ++n)
      for (std::size_t p = 0; p < 16; ++p) {
        double s = 0.5;
        for (std::size_t j = 0; j < 2; ++j) s += 0.25 * a[p * 2 + j] * u.data()[n * 2 + j];
        img.data()[n * 16 + p] = static_cast<float>(s);
      }
    return img;
  };
  // Least-squares oracle via the 2x2 normal equations.
  const auto lstsq = [&](const nn::Tensor& img) {
    double m00 = 0, m01 = 0, m11 = 0, r0 = 0, r1 = 0;
    for (std::size_t p = 0; p < 16; ++p) {
      const double c0 = 0.25 * a[p * 2], c1 = 0.25 * a[p * 2 + 1], y = img.data()[p] - 0.5;
      m00 += c0 * c0, m01 += c0 * c1, m11 += c1 * c1, r0 += c0 * y, r1 += c1 * y;
    }
    const double det = m00 * m11 - m01 * m01;
    return std::array<double, 2>{(m11 * r0 - m01 * r1) / det, (m00 * r1 - m01 * r0) / det};
  };

  Rng init(4);
  auto model = make_inverse(2, 4, init);
  InverseConfig cfg;
  cfg.iterations = 3000;
  cfg.batch = 64;
  cfg.learning_rate = 2e-4;
  Rng train_rng(5);
  const auto trained = train_inverse(std::move(model), render, cfg, train_rng);

  Rng eval(8);
  double oracle = 0.0, learned = 0.0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    const auto u = sample_latent(eval, 2);
    const auto img = render(nn::Tensor({1, 2}, u.values));
    const auto ls = lstsq(img);
    const auto v = invert(trained.model, GrayImage(4, 4, std::vector<float>(img.data().begin(), img.data().end())));
    for (int j = 0; j < 2; ++j) {
      oracle += std::pow(ls[j] - u.values[j], 2) / (2.0 * n);
      learned += std::pow(v.values[j] - u.values[j], 2) / (2.0 * n);
    }
  }
  EXPECT_LT(oracle, 1e-10);
  EXPECT_LT(learned, 1e-3);
}

TEST(Invert, ClampedForBrightInputs) {
  Rng rng(2);
  const auto inv = make_inverse(3, 8, rng);
  for (float level : {0.0f, 1.0f, 1e3f, -1e3f, 1e6f}) {
    const GrayImage img(8, 8, level);
    const auto u = invert(inv, img);
    EXPECT_EQ(u, invert(inv, img));
    for (float v : u.values) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Invert, SizeMismatch) {
  Rng rng(2);
  const auto inv = make_inverse(3, 8, rng);
  EXPECT_THROW(invert(inv, GrayImage(6, 6)), ValidationError);
}

TEST(Reconstruct, ReportedMseMatches) {
  const auto gan = tiny_gan(5, 3, 8);
  Rng rng(2);
  const auto inv = make_inverse(3, 8, rng);
  for (int i = 0; i < 10; ++i) {
    const auto img = tiny_real(100 + i, 1);
    const GrayImage x(8, 8, std::vector<float>(img.data().begin(), img.data().end()));
    const auto r = reconstruct(gan, inv, x);
    double expect = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) expect += std::pow(double(r.image.pixels[p]) - x.pixels[p], 2);
    expect /= static_cast<double>(x.size());
    EXPECT_NEAR(r.mse, expect, 1e-7);
    EXPECT_EQ(r.image, generate(gan, invert(inv, x)));
  }
}

TEST(Reconstruct, IncompatibleModels) {
  const auto gan = tiny_gan(5, 3, 8);
  Rng rng(2);
  EXPECT_THROW(reconstruct(gan, make_inverse(2, 8, rng), GrayImage(8, 8)), ValidationError);
}

TEST(TrainingLog, CsvAndConcat) {
  TrainingLog a, b;
  a.records.push_back({1, 0.5, -0.25, std::nullopt, 1.0});
  b.records.push_back({1, std::nullopt, std::nullopt, 0.125, 2.0});
  const auto joined = concat_logs(a, b);
  ASSERT_EQ(joined.records.size(), 2u);
  EXPECT_EQ(joined.records[1].iteration, 2u);
  std::ostringstream out;
  write_training_log(out, joined);
  EXPECT_EQ(out.str(), std::string(kTrainingLogHeader) + "\n1,0.5,-0.25,,1\n2,,,0.125,2\n");
}
