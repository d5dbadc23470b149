#include <gtest/gtest.h>

#include <cmath>

#include "gin/error.hpp"
#include "gin/nn/grad_check.hpp"
#include "gin/nn/kernels.hpp"
#include "gin/nn/network.hpp"
#include "gin/nn/optimizer.hpp"
#include "support.hpp"

using namespace gin;
using namespace gin::nn;

namespace {

// Direct 7-loop convolution, independent of im2col.
Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad) {
  const std::size_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t co = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  Tensor y({n, co, oh, ow});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b.data()[o];
          for (std::size_t c = 0; c < ci; ++c)
            for (std::size_t p = 0; p < k; ++p)
              for (std::size_t q = 0; q < k; ++q) {
                const auto yy = static_cast<std::ptrdiff_t>(i * stride + p) - static_cast<std::ptrdiff_t>(pad);
                const auto xx = static_cast<std::ptrdiff_t>(j * stride + q) - static_cast<std::ptrdiff_t>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(h) || xx >= static_cast<std::ptrdiff_t>(wd)) continue;
                acc += static_cast<double>(x.data()[((s * ci + c) * h + yy) * wd + xx]) *
                       w.data()[((o * ci + c) * k + p) * k + q];
              }
          y.data()[((s * co + o) * oh + i) * ow + j] = static_cast<float>(acc);
        }
  return y;
}

}  // namespace

TEST(Kernels, GemmMatchesReferenceBitForBit) {
  Rng rng(1);
  for (const auto [m, n, k] : {std::array<std::size_t, 3>{1, 1, 1}, {3, 5, 7}, {33, 65, 17}, {64, 512, 100}, {70, 37, 300}}) {
    for (bool trans : {false, true}) {
      std::vector<float> a(m * k), b(k * n), c1(m * n), c2(m * n);
      for (auto& v : a) v = static_cast<float>(rng.normal());
      for (auto& v : b) v = static_cast<float>(rng.normal());
      kernels::gemm(trans, m, n, k, a.data(), b.data(), c1.data());
      reference::gemm(trans, m, n, k, a.data(), b.data(), c2.data());
      EXPECT_EQ(c1, c2) << m << "x" << n << "x" << k << " trans=" << trans;
    }
  }
}

TEST(Kernels, Im2colAndCol2imMatchReference) {
  Rng rng(2);
  for (const auto [size, k, stride, pad] : {std::array<std::size_t, 4>{8, 3, 1, 1}, {9, 5, 2, 2}, {6, 2, 2, 0}}) {
    const std::size_t batch = 4;
    const ConvGeometry g{batch, 3, size, size, k, stride, pad};
    std::vector<float> x(batch * 3 * size * size);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<float> c1(batch * g.patch_size() * g.positions()), c2(c1.size());
    kernels::im2col(g, x.data(), c1.data());
    reference::im2col(g, x.data(), c2.data());
    EXPECT_EQ(c1, c2);
    std::vector<float> back1(x.size()), back2(x.size());
    kernels::col2im(g, c1.data(), back1.data());
    reference::col2im(g, c1.data(), back2.data());
    EXPECT_EQ(back1, back2);
  }
}

TEST(Tensor, RejectsZeroDimensionsAndMismatchedData) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), ShapeError);
  const Tensor t({2, 3}, 1.5f);
  EXPECT_EQ(t.size(), 6u);
}

TEST(Forward, IdentityDenseReturnsInput) {
  Network net({LayerSpec::dense(3, 3)}, {3});
  Tensor& w = net.params().at("0.weight").value;
  for (std::size_t i = 0; i < 3; ++i) w.data()[i * 3 + i] = 1.0f;
  const Tensor x({2, 3}, std::vector<float>{1, -2, 3, 0.5f, 0, -7});
  EXPECT_EQ(net.forward(x, Mode::eval).values(), x.values());
}

TEST(Forward, LeakyReluNegativeBranch) {
  Network net({LayerSpec::leaky_relu(0.2f)}, {1});
  EXPECT_FLOAT_EQ(net.infer(Tensor({1, 1}, -1.0f)).data()[0], -0.2f);
}

TEST(Forward, BatchNormOfConstantBatchIsZero) {
  Network net({LayerSpec::batch_norm(2)}, {2});
  Rng rng(0);
  net.initialize(rng);
  const Tensor y = net.forward(Tensor({4, 2}, 3.25f), Mode::train);
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Forward, ShapeMismatchNamesLayer) {
  Network net({LayerSpec::dense(4, 2)}, {4});
  try {
    net.infer(Tensor({1, 5}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("dense"), std::string::npos) << e.what();
  }
}

TEST(Forward, ConvMatchesDirectConvolutionAndSizeFormula) {
  Rng rng(3);
  for (std::size_t seed = 0; seed < 12; ++seed) {
    const std::size_t size = 4 + rng.index(9), k = 1 + rng.index(std::min<std::size_t>(size, 5));
    const std::size_t stride = 1 + rng.index(3), pad = rng.index(3), ci = 1 + rng.index(3), co = 1 + rng.index(4);
    Network net({LayerSpec::conv2d(ci, co, k, stride, pad)}, {ci, size, size});
    net.initialize(rng);
    for (float& v : net.params().at("0.bias").value.data()) v = static_cast<float>(rng.uniform(-1, 1));
    const std::size_t expected = (size + 2 * pad - k) / stride + 1;
    EXPECT_EQ(net.output_shape(), (Shape{co, expected, expected}));
    const Tensor x = test::random_tensor(rng, {2, ci, size, size});
    const Tensor y = net.infer(x);
    const Tensor oracle = naive_conv(x, net.params().at("0.weight").value, net.params().at("0.bias").value, stride, pad);
    ASSERT_EQ(y.shape(), oracle.shape());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.data()[i], oracle.data()[i], 1e-5);
  }
}

TEST(Forward, EvalModeLeavesRunningStatisticsAlone) {
  Rng rng(4);
  Network net({LayerSpec::dense(3, 4), LayerSpec::batch_norm(4)}, {3});
  net.initialize(rng);
  const Params before = net.params();
  const Tensor x = test::random_tensor(rng, {5, 3});
  const Tensor a = net.forward(x, Mode::eval);
  const Tensor b = net.forward(x, Mode::eval);
  EXPECT_EQ(net.params(), before);
  EXPECT_EQ(a, b);
  net.forward(x, Mode::train);
  EXPECT_NE(net.params(), before);
}

TEST(Backward, DenseWeightGradientEqualsInput) {
  Network net({LayerSpec::dense(3, 2)}, {3});
  const Tensor x({1, 3}, std::vector<float>{0.5f, -1.0f, 2.0f});
  net.forward(x, Mode::train);
  const Gradients g = net.backward(x, Tensor({1, 2}, 1.0f));
  const Tensor& gw = g.params.at("0.weight").value;  // stored (in, out)
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(gw.data()[i * 2 + j], x.data()[i]);
  }
}

TEST(Backward, LeakyReluGradientAtZeroIsOne) {
  Network net({LayerSpec::leaky_relu(0.2f)}, {1});
  const Tensor x({1, 1}, 0.0f);
  net.forward(x, Mode::train);
  EXPECT_EQ(net.backward(x, Tensor({1, 1}, 1.0f)).input.data()[0], 1.0f);
}

TEST(Backward, WithoutMatchingForwardThrows) {
  Rng rng(5);
  Network net({LayerSpec::dense(2, 2)}, {2});
  net.initialize(rng);
  const Tensor x({1, 2}, 1.0f);
  EXPECT_THROW(net.backward(x, Tensor({1, 2}, 1.0f)), ValidationError);
  net.forward(x, Mode::train);
  EXPECT_THROW(net.backward(Tensor({1, 2}, 2.0f), Tensor({1, 2}, 1.0f)), ValidationError);
}

TEST(Backward, IsBitDeterministic) {
  Rng rng(6);
  Network net({LayerSpec::conv2d(1, 3, 3, 1, 1), LayerSpec::batch_norm(3), LayerSpec::relu(), LayerSpec::flatten(),
               LayerSpec::dense(48, 2)},
              {1, 4, 4});
  net.initialize(rng);
  Network copy = net;
  const Tensor x = test::random_tensor(rng, {3, 1, 4, 4});
  const Tensor go = test::random_tensor(rng, {3, 2});
  net.forward(x, Mode::train);
  copy.forward(x, Mode::train);
  const auto a = net.backward(x, go), b = copy.backward(x, go);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.input, b.input);
}

TEST(GradCheck, LinearLayerBelow1e4) {
  Rng rng(7);
  Network net({LayerSpec::dense(6, 4)}, {6});
  net.initialize(rng);
  EXPECT_LT(grad_check(net, test::random_tensor(rng, {3, 6}), 1e-3).max_relative_error, 1e-4);
}

TEST(GradCheck, ConvLeakyReluStackBelow1e2) {
  Rng rng(8);
  Network net({LayerSpec::conv2d(1, 4, 3, 2, 1), LayerSpec::leaky_relu(0.2f), LayerSpec::conv2d(4, 2, 3, 1, 1),
               LayerSpec::leaky_relu(0.2f)},
              {1, 6, 6});
  net.initialize(rng);
  EXPECT_LT(grad_check(net, test::random_tensor(rng, {2, 1, 6, 6}), 1e-3).max_relative_error, 1e-2);
}

TEST(GradCheck, ZeroParametersGivesZero) {
  Network net({LayerSpec::relu(), LayerSpec::sigmoid()}, {4});
  Rng rng(9);
  EXPECT_EQ(grad_check(net, test::random_tensor(rng, {2, 4}), 1e-3).max_relative_error, 0.0);
}

TEST(GradCheck, RandomNetworksOverAllLayerKinds) {
  std::set<LayerKind> seen;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const auto net_case = test::random_network(seed);
    for (const auto& l : net_case.net.layers()) seen.insert(l.kind);
    const auto r = grad_check(net_case.net, net_case.input, 1e-3);
    EXPECT_LT(r.max_relative_error, 1e-2) << "seed " << seed << " worst " << r.worst << " "
                                          << describe_layers(net_case.net.layers());
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Optimizer, SgdExample) {
  Params p = test::scalar_params(1.0f), g = test::scalar_params(0.5f);
  Optimizer opt({Algorithm::sgd, 0.1});
  opt.step(p, g);
  EXPECT_FLOAT_EQ(p[0].value.data()[0], 0.95f);
}

TEST(Optimizer, RmspropHandEvaluation) {
  Params p = test::scalar_params(1.0f), g = test::scalar_params(2.0f);
  Optimizer opt({Algorithm::rmsprop, 0.01, 0.9, 1e-8});
  opt.step(p, g);
  EXPECT_NEAR(opt.accumulators()[0].value.data()[0], 0.4, 1e-7);
  EXPECT_NEAR(p[0].value.data()[0], 1.0 - 0.01 * 2.0 / std::sqrt(0.4 + 1e-8), 1e-6);
}

TEST(Optimizer, ZeroGradientDecaysAccumulatorOnly) {
  Params p = test::scalar_params(1.0f);
  Optimizer opt({Algorithm::rmsprop, 0.01, 0.9, 1e-8});
  opt.step(p, test::scalar_params(2.0f));
  const float theta = p[0].value.data()[0];
  const float acc = opt.accumulators()[0].value.data()[0];
  opt.step(p, test::scalar_params(0.0f));
  EXPECT_EQ(p[0].value.data()[0], theta);
  EXPECT_NEAR(opt.accumulators()[0].value.data()[0], 0.9 * acc, 1e-7);
}

TEST(Optimizer, NonFiniteGradientNamesParameterAndUpdatesNothing) {
  Params p = test::scalar_params(1.0f);
  p.add({"b", ParamRole::bias, 0, Tensor({1}, 0.0f)});
  Params g = test::scalar_params(1.0f);
  g.add({"b", ParamRole::bias, 0, Tensor({1}, std::nanf(""))});
  const Params before = p;
  Optimizer opt({Algorithm::sgd, 0.1});
  try {
    opt.step(p, g);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
  EXPECT_EQ(p, before);
}

TEST(Clip, ExamplesIdempotenceAndRunningStatsUntouched) {
  Params p;
  p.add({"w", ParamRole::weight, 0, Tensor({3}, std::vector<float>{0.3f, -0.005f, -2.0f})});
  p.add({"rv", ParamRole::running_var, 0, Tensor({1}, 5.0f)});
  clip_params(p, 0.01f);
  EXPECT_EQ(p[0].value.values(), (std::vector<float>{0.01f, -0.005f, -0.01f}));
  EXPECT_EQ(p[1].value.data()[0], 5.0f);
  const Params once = p;
  clip_params(p, 0.01f);
  EXPECT_EQ(p, once);
}

TEST(Layers, DescribeParseRoundTrip) {
  const auto layers = test::random_network(3).net.layers();
  EXPECT_EQ(parse_layers(describe_layers(layers)), layers);
  EXPECT_THROW(LayerSpec::leaky_relu(1.5f).validate(), ValidationError);
  EXPECT_THROW(LayerSpec::conv2d(1, 1, 0).validate(), ValidationError);
  EXPECT_THROW(LayerSpec::batch_norm(2, 0.0f).validate(), ValidationError);
}
