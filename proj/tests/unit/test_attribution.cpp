#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gazenet/attribution.hpp"
#include "gazenet/error.hpp"
#include "gazenet/nn/network.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace gazenet;
using namespace gazenet::attribution;

namespace {

nn::ModelSpec spec_with(nn::PoolKind pool, int dense_layers) {
  nn::ModelSpec s;
  s.conv_layers = {{5, 1, 8}, {3, 1, 16}};
  s.pool = pool;
  s.dense_layers = dense_layers;
  s.hidden_units = 8;
  s.input_length = 32;
  s.head = nn::HeadKind::Sigmoid;
  return s;
}

std::vector<double> random_input(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0, 1);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

AttributionMap map_of(std::size_t length, std::size_t true_length, std::vector<double> values) {
  AttributionMap a;
  a.length = length;
  a.true_length = true_length;
  a.values = std::move(values);
  return a;
}

}  // namespace

TEST(Fold, MatchesInferenceNetwork) {
  std::mt19937_64 rng(1);
  for (auto pool : {nn::PoolKind::Average, nn::PoolKind::Max}) {
    const auto spec = spec_with(pool, 2);
    const auto params = gradcheck::randomized_params(spec, 3);
    nn::Network net(spec, params);
    auto graph = InferenceGraph::fold(spec, params);
    for (int i = 0; i < 10; ++i) {
      const auto x = random_input(rng, 4 * 32);
      nn::Batch b(1, 4, 32);
      b.v = x;
      EXPECT_NEAR(graph.forward(x), net.forward(b, nn::Mode::Infer).v[0], 1e-10);
    }
  }
}

TEST(DeepLift, SummationToDelta) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto spec = spec_with(i % 2 ? nn::PoolKind::Max : nn::PoolKind::Average, 1 + i % 3);
    auto graph = InferenceGraph::fold(spec, gradcheck::randomized_params(spec, 10 + i));
    const auto x = random_input(rng, 128);
    const auto ref = i % 3 == 0 ? std::vector<double>(128, 0.0) : random_input(rng, 128);
    const auto r = graph.deeplift(x, ref);
    const double delta = r.output - r.reference_output;
    EXPECT_LT(std::abs(sum(r.attributions) - delta) / (std::abs(delta) + 1e-9), 1e-5);
    EXPECT_NEAR(r.output, graph.forward(x), 1e-12);
  }
}

TEST(DeepLift, LinearModelClosedForm) {
  std::mt19937_64 rng(3);
  nn::Dense dense(12, 1);
  for (double& w : dense.weight()) w = std::normal_distribution<double>(0, 1)(rng);
  dense.bias()[0] = 0.4;
  InferenceGraph g(3, 4);
  g.add(DenseOp{dense});
  const auto x = random_input(rng, 12), ref = random_input(rng, 12);
  const auto r = g.deeplift(x, ref);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(r.attributions[k], dense.weight()[k] * (x[k] - ref[k]));
}

TEST(DeepLift, ReluRescaleRule) {
  InferenceGraph g(1, 2);
  g.add(ReluOp{});
  nn::Dense sum_layer(2, 1);
  sum_layer.weight() = {1.0, 1.0};
  g.add(DenseOp{sum_layer});
  const std::vector<double> x{2.0, -1.0}, ref{-1.0, -3.0};
  const auto r = g.deeplift(x, ref);
  EXPECT_DOUBLE_EQ(r.multipliers[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.multipliers[1], 0.0);
  EXPECT_DOUBLE_EQ(r.attributions[0], 2.0);
  // Equal input and reference falls back to the gradient.
  const auto same = g.deeplift(std::vector<double>{1.0, -1.0}, std::vector<double>{1.0, -1.0});
  EXPECT_EQ(same.multipliers[0], 1.0);
  EXPECT_EQ(same.multipliers[1], 0.0);
}

TEST(DeepLift, AttributeModelInputUsesZeroReference) {
  const auto spec = spec_with(nn::PoolKind::Average, 2);
  auto graph = InferenceGraph::fold(spec, gradcheck::randomized_params(spec, 4));
  std::mt19937_64 rng(5);
  ModelInput in;
  in.length = 32;
  in.true_length = 20;
  in.values = random_input(rng, 128);
  const auto a = deeplift_attribute(graph, in, {}, "s", "v");
  EXPECT_EQ(a.reference, std::vector<double>(128, 0.0));
  EXPECT_NEAR(sum(a.values), a.output_delta, 1e-5 * (std::abs(a.output_delta) + 1e-9));
  ModelInput wrong = in;
  wrong.length = 16;
  wrong.values.resize(64);
  EXPECT_THROW(deeplift_attribute(graph, wrong, {}), Error);
}

TEST(NormalizeInstance, AbsoluteMinMax) {
  std::vector<double> v(12, 0.0);
  v[0] = -2;
  v[1] = 0;
  v[2] = 2;
  const auto n = normalize_instance(map_of(3, 3, v));
  EXPECT_EQ(n.values[0], 1.0);
  EXPECT_EQ(n.values[1], 0.0);
  EXPECT_EQ(n.values[2], 1.0);
}

TEST(NormalizeInstance, PaddingStaysZeroAndConstantIsZero) {
  std::vector<double> v(16, 5.0);
  v[0] = 1.0;
  const auto n = normalize_instance(map_of(4, 2, v));
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(n.at(c, 2), 0.0);
    EXPECT_EQ(n.at(c, 3), 0.0);
  }
  EXPECT_EQ(n.at(0, 0), 0.0);
  EXPECT_EQ(n.at(1, 1), 1.0);
  const auto z = normalize_instance(map_of(2, 2, std::vector<double>(8, 3.0)));
  EXPECT_EQ(z.values, std::vector<double>(8, 0.0));
}

TEST(BoxPlot, FiveEvenlySpacedValues) {
  const auto s = summarize_box({1.0, 0.0, 0.75, 0.25, 0.5});
  EXPECT_DOUBLE_EQ(s.median, 0.5);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.q1, 0.25);
  EXPECT_DOUBLE_EQ(s.q3, 0.75);
  EXPECT_DOUBLE_EQ(s.lo_whisker, 0.0);
  EXPECT_DOUBLE_EQ(s.hi_whisker, 1.0);
  EXPECT_EQ(s.count, 5u);
}

TEST(BoxPlot, WhiskersExcludeOutliers) {
  const auto s = summarize_box({0, 1, 2, 3, 4, 5, 6, 7, 100});
  EXPECT_DOUBLE_EQ(s.hi_whisker, 7.0);
  EXPECT_DOUBLE_EQ(s.lo_whisker, 0.0);
}

TEST(BoxPlot, AggregateSkipsPadding) {
  std::vector<double> v(8, 9.0);
  v[0] = 1;
  v[2] = 2;
  v[4] = 3;
  v[6] = 4;
  const std::vector<AttributionMap> maps{map_of(2, 1, v)};
  const auto agg = aggregate_channel_relevance(maps);
  EXPECT_EQ(agg[0].count, 1u);
  EXPECT_EQ(agg[3].median, 4.0);
  const auto rows = box_plot_csv_rows("vid", agg);
  EXPECT_EQ(rows.substr(0, 14), "vid,saliency,1");
  EXPECT_EQ(box_plot_csv_header(), "video,channel,median,mean,q1,q3,lo_whisker,hi_whisker\n");
}

TEST(Dump, RoundTripsThroughTensorFile) {
  testing_support::TempDir dir("attr");
  auto a = map_of(2, 2, {0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4});
  a.subject_id = "s";
  a.video_id = "v";
  a.output_delta = 0.75;
  write_attribution_dump(dir / "a.attr", a);
  const auto t = read_feature_tensor(dir / "a.attr");
  EXPECT_TRUE(t.has_delta);
  EXPECT_EQ(t.delta, 0.75);
  EXPECT_EQ(t.values, a.values);
}
