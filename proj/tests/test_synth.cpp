#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gin/error.hpp"
#include "gin/io/dataset_io.hpp"
#include "gin/io/pgm.hpp"
#include "gin/synth/valve.hpp"

using namespace gin;
using namespace gin::synth;

namespace {

ValveParams base_params() {
  ValveParams p;
  p.theta = 0.7;
  p.eccentricity = 0.8;
  p.radius = 0.65;
  p.calcification = 0.4;
  p.nodule_angle = 2.0;
  p.noise_sigma = 0.0;
  return p;
}

double mean_abs_diff(const GrayImage& a, const GrayImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return s / static_cast<double>(a.size());
}

// Mean over pixels within `radius` of the center.
double central_mean(const GrayImage& img, double radius) {
  const double c = (static_cast<double>(img.width) - 1.0) / 2.0;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      if (std::hypot(x - c, y - c) <= radius) {
        s += img.at(y, x);
        ++n;
      }
    }
  }
  return s / static_cast<double>(n);
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gin_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Render, NoCalcificationStaysBelowWallCeiling) {
  ValveParams p = base_params();
  p.calcification = 0.0;
  for (double ecc : {0.6, 0.8, 1.0}) {
    p.eccentricity = ecc;
    for (float v : render_valve(p, 32).pixels) EXPECT_LE(v, kWallCeiling);
  }
}

TEST(Render, PeriodicInTheta) {
  ValveParams p = base_params();
  ValveParams q = p;
  q.theta = p.theta + 2.0 * std::numbers::pi;
  EXPECT_EQ(render_valve(p, 32), render_valve(q, 32));
  q.nodule_angle = p.nodule_angle - 2.0 * std::numbers::pi;
  EXPECT_EQ(render_valve(p, 32), render_valve(q, 32));
}

TEST(Render, MeanIntensityNonDecreasingInCalcification) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    ValveParams p = sample_params(s);
    p.noise_sigma = 0.0;
    double prev = -1.0;
    for (int i = 0; i <= 10; ++i) {
      p.calcification = i / 10.0;
      const double m = render_valve(p, 32).mean();
      EXPECT_GE(m, prev) << "seed " << s << " calcification " << p.calcification;
      prev = m;
    }
  }
}

TEST(Render, PixelsInUnitRangeAndFinite) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    ValveParams p = sample_params(s);
    p.noise_sigma = 0.05;
    for (float v : render_valve(p, 24, s).pixels) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(Render, RejectsSmallImagesAndBadParams) {
  EXPECT_THROW(render_valve(base_params(), 15), ValidationError);
  ValveParams p = base_params();
  p.eccentricity = 0.5;
  EXPECT_THROW(render_valve(p, 32), ValidationError);
}

TEST(Label, ThresholdIsStrict) {
  ValveParams p = base_params();
  p.calcification = 1.0;
  EXPECT_EQ(label_pvl(p), Pvl::high);
  p.calcification = 0.0;
  EXPECT_EQ(label_pvl(p), Pvl::low);
  p.calcification = 0.55;
  EXPECT_EQ(label_pvl(p), Pvl::low);
  p.calcification = std::nextafter(0.55, 1.0);
  EXPECT_EQ(label_pvl(p), Pvl::high);
}

TEST(Label, DependsOnlyOnCalcification) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    ValveParams a = sample_params(s), b = sample_params(s + 1000);
    b.calcification = a.calcification;
    EXPECT_EQ(label_pvl(a), label_pvl(b));
  }
}

TEST(Rotate, ZeroAngleIsIdentity) {
  ValveParams p = base_params();
  p.noise_sigma = 0.03;
  const GrayImage img = render_valve(p, 32, 5);
  EXPECT_EQ(rotate_image(img, 0.0), img);
}

TEST(Rotate, SymmetricDiskUnchangedAwayFromEdge) {
  const std::size_t n = 33;
  const double c = 16.0, radius = 10.0;
  GrayImage disk(n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) disk.at(y, x) = std::hypot(x - c, y - c) < radius ? 0.7f : 0.0f;
  for (double angle : {0.1, 0.5, 1.3, 3.0}) {
    const GrayImage r = rotate_image(disk, angle);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        if (std::abs(std::hypot(x - c, y - c) - radius) < 2.0) continue;
        EXPECT_NEAR(r.at(y, x), disk.at(y, x), 1e-6);
      }
  }
}

TEST(Rotate, ForwardBackLossSmallOnSmoothCorpus) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    ValveParams p = sample_params(s);
    p.noise_sigma = 0.0;
    const GrayImage img = render_valve(p, 32);
    EXPECT_LT(mean_abs_diff(rotate_image(rotate_image(img, 0.2), -0.2), img), 0.02) << "seed " << s;
  }
}

TEST(Rotate, PreservesCentralMeanWithin2Percent) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GrayImage img = render_valve(sample_params(s), 32, s);
    const double before = central_mean(img, 13.0);
    for (double deg : {-15.0, -9.0, 3.0, 12.0, 15.0}) {
      const double after = central_mean(rotate_image(img, deg * std::numbers::pi / 180.0), 13.0);
      EXPECT_NEAR(after, before, 0.02 * before) << "seed " << s << " angle " << deg;
    }
  }
}

TEST(Rotate, MatchesRenderingAtRotatedTheta) {
  ValveParams p = base_params();
  const double angle = 12.0 * std::numbers::pi / 180.0;
  ValveParams q = p;
  q.theta += angle;
  q.nodule_angle = p.nodule_angle;
  EXPECT_LT(mean_abs_diff(rotate_image(render_valve(p, 32), angle), render_valve(q, 32)), 0.02);
}

TEST(Rotate, NonSquareThrows) { EXPECT_THROW(rotate_image(GrayImage(4, 5), 0.1), ValidationError); }

TEST(Augment, TenCopiesFirstIdenticalLabelsShared) {
  PatientRecord r;
  r.id = 40;
  r.params = base_params();
  r.params.calcification = 0.8;
  r.pvl_label = label_pvl(r.params);
  r.image = render_valve(r.params, 32);
  const auto out = augment(r);
  ASSERT_EQ(out.size(), 10u);
  EXPECT_EQ(out[0].image, r.image);
  EXPECT_FALSE(out[0].augmented_from);
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_EQ(out[k].pvl_label, Pvl::high);
    EXPECT_EQ(out[k].id, 40 + k);
    EXPECT_EQ(out[k].base_id(), 40u);
  }
}

TEST(Dataset, DeterministicAndCounts) {
  const Dataset a = make_dataset(168, 32, 7, true);
  EXPECT_EQ(a.records.size(), 1680u);
  EXPECT_EQ(a.base_count(), 168u);
  const Dataset b = make_dataset(168, 32, 7, true);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    ASSERT_EQ(a.records[i].image, b.records[i].image);
    ASSERT_EQ(a.records[i].params, b.records[i].params);
  }
  EXPECT_EQ(make_dataset(20, 16, 7, false).records.size(), 20u);
  EXPECT_THROW(make_dataset(4, 32, 7, false), ValidationError);
  for (const auto& r : a.records) EXPECT_EQ(r.pvl_label, label_pvl(r.params));
}

TEST(Dataset, HighFractionMatchesBetaTail) {
  // P(X > 0.55) for X ~ Beta(2, 3), density 12 x (1 - x)^2, by composite Simpson.
  const auto pdf = [](double x) { return 12.0 * x * (1.0 - x) * (1.0 - x); };
  const int m = 2000;
  const double a = 0.55, h = (1.0 - a) / m;
  double tail = pdf(a) + pdf(1.0);
  for (int i = 1; i < m; ++i) tail += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  tail *= h / 3.0;
  EXPECT_NEAR(tail, 0.24148125, 1e-9);  // closed form 1 - (6a^2 - 8a^3 + 3a^4)

  const Dataset d = make_dataset(2000, 16, 11, false);
  double high = 0.0;
  for (const auto& r : d.records) high += r.pvl_label == Pvl::high ? 1.0 : 0.0;
  EXPECT_NEAR(high / 2000.0, tail, 0.05);
}

TEST(Pgm, RoundTripWithinQuantization) {
  const GrayImage img = render_valve(base_params(), 20, 3);
  std::stringstream buf;
  io::write_pgm(buf, img);
  const GrayImage back = io::read_pgm(buf);
  ASSERT_EQ(back.height, 20u);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_EQ(back.pixels[i], std::round(img.pixels[i] * 255.0f) / 255.0f);
  }
}

TEST(Pgm, ParsesAsciiAndCommentsRejectsTruncation) {
  std::stringstream ascii("P2\n# comment\n2 1\n255\n0 255\n");
  const GrayImage img = io::read_pgm(ascii);
  EXPECT_EQ(img.pixels, (std::vector<float>{0.0f, 1.0f}));
  std::stringstream truncated(std::string("P5\n4 4\n255\n") + std::string(10, '\x10'));
  EXPECT_THROW(io::read_pgm(truncated), FormatError);
}

TEST(DatasetIo, RoundTripAndByteIdenticalRewrites) {
  const Dataset d = make_dataset(10, 16, 3, true);
  const auto dir1 = temp_dir("ds1"), dir2 = temp_dir("ds2");
  io::write_dataset(dir1, d);
  io::write_dataset(dir2, make_dataset(10, 16, 3, true));
  EXPECT_EQ(slurp(dir1 / "manifest.csv"), slurp(dir2 / "manifest.csv"));
  EXPECT_EQ(slurp(dir1 / "images" / "000013.pgm"), slurp(dir2 / "images" / "000013.pgm"));
  std::ifstream header(dir1 / "manifest.csv");
  std::string first;
  std::getline(header, first);
  EXPECT_EQ(first, io::kManifestHeader);

  const Dataset back = io::read_dataset(dir1);
  ASSERT_EQ(back.records.size(), d.records.size());
  EXPECT_TRUE(back.augmented);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(back.records[i].id, d.records[i].id);
    EXPECT_EQ(back.records[i].pvl_label, d.records[i].pvl_label);
    EXPECT_EQ(back.records[i].augmented_from, d.records[i].augmented_from);
    EXPECT_EQ(back.records[i].params, d.records[i].params);
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST(DatasetIo, CorruptManifestIsReported) {
  const auto dir = temp_dir("bad");
  io::write_dataset(dir, make_dataset(8, 16, 1, false));
  std::ofstream(dir / "manifest.csv", std::ios::app) << "oops,line\n";
  EXPECT_THROW(io::read_dataset(dir), std::runtime_error);
  std::filesystem::remove_all(dir);
}
