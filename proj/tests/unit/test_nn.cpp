#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gazenet/error.hpp"
#include "gazenet/nn/adam.hpp"
#include "gazenet/nn/checkpoint.hpp"
#include "gazenet/nn/loss.hpp"
#include "gazenet/nn/network.hpp"
#include "gazenet/nn/train.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace gazenet;
using namespace gazenet::nn;

namespace {

constexpr double kGradTol = 1e-3;

ModelSpec small_spec(HeadKind head = HeadKind::Sigmoid) {
  ModelSpec s;
  s.conv_layers = {{5, 1, 8}, {3, 1, 8}};
  s.input_length = 32;
  s.hidden_units = 8;
  s.dropout = 0.2;
  s.head = head;
  return s;
}

// Channel 0 carries the class: positive mean for label 1.
std::vector<Example> separable_data(std::size_t n, std::uint64_t seed, const ModelSpec& spec) {
  Rng rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<Example> out;
  const auto len = std::size_t(spec.input_length);
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.target = double(i % 2);
    e.input.resize(4 * len);
    for (std::size_t k = 0; k < e.input.size(); ++k) e.input[k] = g(rng);
    for (std::size_t t = 0; t < len; ++t) e.input[t] += e.target > 0 ? 1.0 : -1.0;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

TEST(GradCheck, Conv1dStrides) {
  for (std::size_t stride : {1u, 2u, 3u}) {
    Conv1d conv(3, 4, 5, stride);
    Rng rng(stride);
    gradcheck::randomize(conv, rng);
    EXPECT_LT(gradcheck::check_layer(conv, gradcheck::random_batch(2, 3, 17, rng), Mode::Train, 1), kGradTol);
  }
}

TEST(GradCheck, ReluAndPools) {
  Rng rng(2);
  ReLU relu;
  EXPECT_LT(gradcheck::check_layer(relu, gradcheck::random_batch(2, 3, 9, rng), Mode::Train, 2), kGradTol);
  Pool1d avg(PoolKind::Average), max(PoolKind::Max);
  EXPECT_LT(gradcheck::check_layer(avg, gradcheck::random_batch(2, 3, 11, rng), Mode::Train, 3), kGradTol);
  EXPECT_LT(gradcheck::check_layer(max, gradcheck::random_batch(2, 3, 11, rng), Mode::Train, 4), kGradTol);
}

TEST(GradCheck, BatchNormBothModes) {
  Rng rng(3);
  BatchNorm1d bn(3);
  gradcheck::randomize(bn, rng);
  EXPECT_LT(gradcheck::check_layer(bn, gradcheck::random_batch(3, 3, 7, rng), Mode::Train, 5), kGradTol);
  bn.running_var() = {0.5, 2.0, 1.5};
  bn.running_mean() = {0.1, -0.2, 0.3};
  EXPECT_LT(gradcheck::check_layer(bn, gradcheck::random_batch(3, 3, 7, rng), Mode::Infer, 6), kGradTol);
}

TEST(GradCheck, DropoutAndDense) {
  Rng rng(4);
  Dropout drop(0.4);
  EXPECT_LT(gradcheck::check_layer(drop, gradcheck::random_batch(2, 3, 8, rng), Mode::Train, 7), kGradTol);
  Dense dense(12, 5);
  gradcheck::randomize(dense, rng);
  EXPECT_LT(gradcheck::check_layer(dense, gradcheck::random_batch(3, 3, 4, rng), Mode::Train, 8), kGradTol);
}

TEST(GradCheck, WholeNetworkBothLosses) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const bool bce = seed % 2 == 0;
    const auto spec = gradcheck::random_small_spec(seed, bce ? HeadKind::Sigmoid : HeadKind::Linear);
    const double err = gradcheck::check_network(
        spec, bce ? Objective::BinaryCrossEntropy : Objective::MeanSquaredError, 3, seed);
    EXPECT_LT(err, kGradTol) << spec.to_string();
  }
}

TEST(Loss, ClampedBceAndFusedGradient) {
  EXPECT_NEAR(bce_loss(0.5, 1), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(bce_loss(0.0, 1), -std::log(kProbClamp), 1e-12);
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
  const std::vector<double> z{0.3, -1.2}, y{1, 0};
  const auto r = bce_from_logits(z, y);
  EXPECT_NEAR(r.grad_logits[0], (sigmoid(0.3) - 1) / 2, 1e-15);
  EXPECT_NEAR(r.grad_logits[1], sigmoid(-1.2) / 2, 1e-15);
  EXPECT_NEAR(r.loss, (bce_loss(sigmoid(0.3), 1) + bce_loss(sigmoid(-1.2), 0)) / 2, 1e-15);
  EXPECT_NEAR(sigmoid(-800), 0.0, 1e-300);
  EXPECT_EQ(sigmoid(800), 1.0);
}

TEST(Loss, Mse) {
  const std::vector<double> p{1, 3}, t{0, 1};
  const auto r = mse_from_outputs(p, t);
  EXPECT_DOUBLE_EQ(r.loss, 2.5);
  EXPECT_DOUBLE_EQ(r.grad_logits[0], 1.0);
  EXPECT_DOUBLE_EQ(r.grad_logits[1], 2.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> w{1.0, -2.0}, g{0.5, -3.0};
  std::vector<ParamSlot> slots{{"w", {2}, &w, &g, true}};
  AdamState state;
  AdamConfig cfg;
  adam_step(slots, state, cfg);
  // Bias correction makes the first update lr * g / (|g| + eps').
  EXPECT_NEAR(w[0], 1.0 - 1e-3, 1e-10);
  EXPECT_NEAR(w[1], -2.0 + 1e-3, 1e-10);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, NonFiniteGradientLeavesParametersUntouched) {
  std::vector<double> a{1.0}, ga{0.1}, b{2.0}, gb{NAN};
  std::vector<ParamSlot> slots{{"a", {1}, &a, &ga, true}, {"b", {1}, &b, &gb, true}};
  AdamState state;
  try {
    adam_step(slots, state, AdamConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Numeric);
    EXPECT_NE(std::string(e.what()).find('b'), std::string::npos);
  }
  EXPECT_EQ(a[0], 1.0);
}

TEST(Spec, RoundTripAndValidation) {
  auto s = small_spec();
  s.pool = PoolKind::Max;
  EXPECT_EQ(ModelSpec::parse(s.to_string()), s);
  ModelSpec bad = s;
  bad.input_length = 8;
  EXPECT_THROW(bad.validate(), Error);
  bad = s;
  bad.conv_layers[0].kernel = 4;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_EQ(conv_output_length(10, 3, 1), 8u);
  EXPECT_EQ(conv_output_length(10, 3, 2), 4u);
  EXPECT_EQ(s.block_lengths(), (std::vector<std::size_t>{14, 6}));
  EXPECT_EQ(s.flattened_size(), 48u);
}

TEST(Spec, DefaultArchitectureNeedsLongInputs) {
  ModelSpec s;
  s.input_length = 64;
  EXPECT_THROW(s.validate(), Error);
  s.input_length = 96;
  EXPECT_NO_THROW(s.validate());
}

TEST(Network, ImportRejectsMismatchedShapes) {
  Network a(small_spec(), 1);
  auto other = small_spec();
  other.conv_layers[1].filters = 16;
  Network b(other, 1);
  try {
    a.import_params(b.export_params());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Shape);
    EXPECT_NE(std::string(e.what()).find("conv1.weight"), std::string::npos);
  }
}

TEST(Network, SeedDeterminesInitialization) {
  EXPECT_EQ(Network(small_spec(), 5).export_params(), Network(small_spec(), 5).export_params());
  EXPECT_FALSE(Network(small_spec(), 5).export_params() == Network(small_spec(), 6).export_params());
}

TEST(Checkpoint, RoundTripIsFloat32Exact) {
  testing_support::TempDir dir("ckpt");
  Network net(small_spec(HeadKind::Linear), 9);
  const Checkpoint c{net.spec(), net.export_params()};
  save_checkpoint(dir / "m.ckpt", c);
  const auto back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.spec, c.spec);
  EXPECT_EQ(back.params, round_to_f32(c.params));
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(c));
}

TEST(Checkpoint, CorruptInputIsFormatError) {
  const std::string good = serialize_checkpoint({small_spec(), Network(small_spec(), 1).export_params()});
  for (const std::string& bad : {std::string("CKPT2\n"), good.substr(0, good.size() - 3), good + "x"}) {
    try {
      parse_checkpoint(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::Format);
    }
  }
}

TEST(Transfer, ReuseCopiesEverything) {
  const auto src_spec = small_spec(HeadKind::Linear);
  const auto params = Network(src_spec, 2).export_params();
  const auto r = transfer_head(src_spec, params, small_spec(HeadKind::Sigmoid));
  EXPECT_EQ(r.params, params);
  EXPECT_TRUE(r.report.all_copied_equal);
  EXPECT_TRUE(r.report.reinitialized.empty());
  EXPECT_EQ(r.spec.head, HeadKind::Sigmoid);
}

TEST(Transfer, ReinitializeOnlyTouchesHead) {
  const auto src_spec = small_spec(HeadKind::Linear);
  const auto params = Network(src_spec, 2).export_params();
  const auto r = transfer_head(src_spec, params, small_spec(HeadKind::Sigmoid), HeadInit::Reinitialize, 99);
  for (const auto& t : r.params.tensors) {
    if (t.name.rfind("head.", 0) == 0) continue;
    EXPECT_EQ(t, *params.find(t.name));
  }
  EXPECT_FALSE(*r.params.find("head.weight") == *params.find("head.weight"));
  EXPECT_EQ(r.report.reinitialized.size(), 2u);
}

TEST(Transfer, RejectsDifferentArchitecture) {
  const auto src_spec = small_spec(HeadKind::Linear);
  auto tgt = small_spec(HeadKind::Sigmoid);
  tgt.hidden_units = 16;
  EXPECT_THROW(transfer_head(src_spec, Network(src_spec, 1).export_params(), tgt), Error);
}

TEST(Train, DeterministicForSeed) {
  const auto spec = small_spec();
  const auto data = separable_data(40, 1, spec);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 4;
  const auto a = train(spec, nullptr, data, cfg, Objective::BinaryCrossEntropy);
  const auto b = train(spec, nullptr, data, cfg, Objective::BinaryCrossEntropy);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.train_loss, b.train_loss);
}

TEST(Train, LearnsSeparableTask) {
  const auto spec = small_spec();
  const auto data = separable_data(60, 2, spec);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 8;
  cfg.adam.learning_rate = 3e-3;
  const auto r = train(spec, nullptr, data, cfg, Objective::BinaryCrossEntropy);
  Network net(spec, r.params);
  const auto test = separable_data(40, 3, spec);
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& e : test) ptrs.push_back(&e.input);
  const auto p = predict_all(net, ptrs);
  int correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i) correct += (p[i] > 0.5) == (test[i].target > 0.5);
  EXPECT_GE(correct, 36);
  EXPECT_LT(r.train_loss.back(), r.train_loss.front());
}

TEST(Train, SingleSampleBatchIsDuplicated) {
  const auto spec = small_spec();
  const auto data = separable_data(3, 5, spec);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 2;
  EXPECT_NO_THROW(train(spec, nullptr, data, cfg, Objective::BinaryCrossEntropy));
}

TEST(Train, ObjectiveMustMatchHead) {
  const auto spec = small_spec(HeadKind::Linear);
  const auto data = separable_data(4, 5, spec);
  try {
    train(spec, nullptr, data, TrainConfig{}, Objective::BinaryCrossEntropy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Config);
  }
}

TEST(Train, WarmStartShapeMismatchNamesTensor) {
  const auto spec = small_spec();
  auto other = spec;
  other.hidden_units = 16;
  const auto init = Network(other, 1).export_params();
  const auto data = separable_data(4, 5, spec);
  try {
    train(spec, &init, data, TrainConfig{}, Objective::BinaryCrossEntropy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Shape);
    EXPECT_NE(std::string(e.what()).find("dense0.weight"), std::string::npos);
  }
}
