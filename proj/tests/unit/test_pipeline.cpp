#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <memory>
#include <set>

#include "gazenet/error.hpp"
#include "gazenet/evaluation.hpp"
#include "gazenet/pipeline/config.hpp"
#include "gazenet/pipeline/manifest.hpp"
#include "gazenet/pipeline/stages.hpp"
#include "gazenet/pipeline/synth.hpp"
#include "gazenet/pipeline/workspace.hpp"
#include "gazenet/text_io.hpp"
#include "test_support.hpp"

using namespace gazenet;
using namespace gazenet::pipeline;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSmall{
    "features.length=48",  "model.conv=5:1:8,3:1:8", "model.hidden=8",   "train.epochs=4",
    "pretrain.epochs=4",   "cv.resamplings=1",       "cv.folds=3",       "cv.permutations=50",
    "synth.n_adhd=8",      "synth.n_control=8",      "synth.n_pretrain=10", "synth.frames=80",
    "hyper.trials=2",      "hyper.epochs=2"};

CommandOptions options(const std::string& cmd, const fs::path& data, const fs::path& out) {
  CommandOptions o;
  o.command = cmd;
  o.seed = 11;
  o.overrides = kSmall;
  o.manifest = data / "manifest.txt";
  o.out = out;
  return o;
}

template <typename F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected gazenet::Error";
  return ErrorCategory::Config;
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const std::string cmd = std::string(GAZENET_CLI_PATH) + " " + args + " 2> " + stderr_file.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing_support::TempDir>("pipeline");
    CommandOptions synth = options("synth", data(), data());
    run_command(synth);
    for (const char* cmd : {"detect", "saliency-extract", "features", "pretrain"}) {
      run_command(options(cmd, data(), ws()));
    }
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static fs::path data() { return dir_->path() / "data"; }
  static fs::path ws() { return dir_->path() / "ws"; }

  static std::unique_ptr<testing_support::TempDir> dir_;
};

std::unique_ptr<testing_support::TempDir> PipelineTest::dir_;

TEST(Config, DefaultsOverridesAndUnknownKeys) {
  Config c;
  EXPECT_EQ(c.get_int("features.length"), 256);
  EXPECT_EQ(c.get("transfer.head"), "reuse");
  const std::vector<std::string> o{"cv.folds=4"};
  c.apply_overrides(o);
  EXPECT_EQ(c.get_int("cv.folds"), 4);
  EXPECT_EQ(category_of([&] { c.set("no.such.key", "1"); }), ErrorCategory::Config);
  EXPECT_EQ(category_of([&] { c.get_int("model.pool"); }), ErrorCategory::Config);
  const std::vector<std::string> bad{"cv.folds"};
  EXPECT_EQ(category_of([&] { c.apply_overrides(bad); }), ErrorCategory::Config);
}

TEST(Config, FileWithCommentsAndStableHash) {
  testing_support::TempDir dir("cfg");
  text_io::write_file(dir / "a.conf", "# comment\n\ncv.folds = 7  # trailing\nseed=3\n");
  Config a, b;
  a.load_file(dir / "a.conf");
  EXPECT_EQ(a.get_int("cv.folds"), 7);
  EXPECT_EQ(a.get_seed(), 3u);
  b.set("seed", "3");
  b.set("cv.folds", "7");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("cv.folds", "8");
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, ModelSpecFromConfig) {
  Config c;
  c.set("features.length", "48");
  c.set("model.conv", "5:1:8,3:1:16");
  c.set("model.pool", "max");
  const auto s = model_spec_from_config(c, nn::HeadKind::Linear);
  EXPECT_EQ(s.conv_layers.size(), 2u);
  EXPECT_EQ(s.pool, nn::PoolKind::Max);
  EXPECT_EQ(s.input_length, 48);
  c.set("model.pool", "median");
  EXPECT_EQ(category_of([&] { model_spec_from_config(c, nn::HeadKind::Linear); }), ErrorCategory::Config);
}

TEST(Synth, SameSeedIsByteIdentical) {
  testing_support::TempDir a("synth"), b("synth");
  SynthSpec s;
  s.n_adhd = 3;
  s.n_control = 3;
  s.n_pretrain = 2;
  s.frames = 30;
  s.seed = 5;
  generate_synthetic(s, a.path());
  generate_synthetic(s, b.path());
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    ASSERT_TRUE(fs::exists(b.path() / rel)) << rel;
    EXPECT_EQ(text_io::read_file(e.path()), text_io::read_file(b.path() / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 30u);
  s.seed = 6;
  testing_support::TempDir c("synth");
  generate_synthetic(s, c.path());
  EXPECT_NE(text_io::read_file(a / "labels.csv"), text_io::read_file(c / "labels.csv"));
}

TEST(Manifest, MissingLabelRowIsDataError) {
  testing_support::TempDir dir("man");
  SynthSpec s;
  s.n_adhd = 2;
  s.n_control = 2;
  s.frames = 20;
  generate_synthetic(s, dir.path());
  const auto m = load_manifest(dir / "manifest.txt");
  EXPECT_EQ(m.classification_subjects("synth").size(), 4u);
  EXPECT_TRUE(m.pretrain_subjects().empty());
  text_io::write_file(dir / "labels.csv", "subject_id,video_id,adhd_label,swan_score\n");
  EXPECT_EQ(category_of([&] { load_manifest(dir / "manifest.txt"); }), ErrorCategory::Data);
  EXPECT_EQ(category_of([&] { load_manifest(dir / "nope.txt"); }), ErrorCategory::Io);
}

TEST(Workspace, LockIsExclusive) {
  testing_support::TempDir dir("lock");
  {
    WorkspaceLock first(dir.path());
    EXPECT_EQ(category_of([&] { WorkspaceLock second(dir.path()); }), ErrorCategory::Io);
  }
  EXPECT_NO_THROW(WorkspaceLock again(dir.path()));
}

TEST(Workspace, ChannelStatsRoundTrip) {
  testing_support::TempDir dir("stats");
  ChannelStats s;
  s.mean = {0.1, -2.5, 3.0, 250.0};
  s.stddev = {0.2, 4.0, 3.5, 60.25};
  s.fitted_on = "abc";
  write_channel_stats(dir / "s.csv", s);
  const auto back = read_channel_stats(dir / "s.csv");
  EXPECT_EQ(back.mean, s.mean);
  EXPECT_EQ(back.stddev, s.stddev);
  EXPECT_EQ(back.fitted_on, "abc");
}

TEST_F(PipelineTest, DetectRecoversPlantedFixations) {
  std::map<std::string, long long> planted;
  const auto lines = text_io::read_lines(data() / "planted.csv");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = text_io::split(lines[i], ',');
    if (f.size() == 2) planted[f[0]] = text_io::parse_int(f[1], "planted");
  }
  const auto rows = read_fixation_index(Workspace{ws()}.fixation_index("synth"));
  ASSERT_EQ(rows.size(), planted.size());
  for (const auto& r : rows) {
    const double want = double(planted.at(r.subject_id));
    EXPECT_LE(std::abs(double(r.n_fixations) - want), 0.02 * want) << r.subject_id;
  }
}

TEST_F(PipelineTest, FinetuneWithoutPretrainNamesTheStage) {
  testing_support::TempDir fresh("fresh");
  for (const char* cmd : {"detect", "saliency-extract", "features"}) run_command(options(cmd, data(), fresh.path()));
  try {
    run_command(options("finetune", data(), fresh.path()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::MissingStage);
    EXPECT_NE(std::string(e.what()).find("pretrain"), std::string::npos);
  }
  // No lock is left behind by the failed command.
  EXPECT_FALSE(fs::exists(fresh / ".lock"));
}

TEST_F(PipelineTest, FeaturesBeforeDetectIsMissingStage) {
  testing_support::TempDir fresh("fresh");
  EXPECT_EQ(category_of([&] { run_command(options("features", data(), fresh.path())); }), ErrorCategory::MissingStage);
}

TEST_F(PipelineTest, EvaluateWritesOneRowPerModelPerVideo) {
  testing_support::TempDir out("eval");
  fs::copy(ws(), out.path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  auto o = options("evaluate", data(), out.path());
  o.models = {kCnnScratch, kCnnPretrained, kLevenshtein, kSvmRfe};
  run_command(o);
  const auto rows = evaluation::load_report(out / "eval" / "report.csv");
  ASSERT_EQ(rows.size(), 4u);
  std::set<std::string> models;
  for (const auto& r : rows) {
    EXPECT_EQ(r.video_id, "synth");
    EXPECT_EQ(r.n_folds, 3);
    EXPECT_GE(r.mean_auc, 0.0);
    EXPECT_LE(r.mean_auc, 1.0);
    models.insert(r.model_id);
  }
  EXPECT_EQ(models.size(), 4u);
  EXPECT_TRUE(fs::exists(out / "logs" / "evaluate.log"));
  EXPECT_EQ(category_of([&] {
              auto bad = o;
              bad.models = {"cnn-unknown"};
              run_command(bad);
            }),
            ErrorCategory::InvalidArgument);
}

TEST_F(PipelineTest, StagesAreIdempotent) {
  testing_support::TempDir out("idem");
  fs::copy(ws(), out.path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  const auto first = run_command(options("features", data(), out.path()));
  std::map<fs::path, std::string> hashes;
  for (const auto& p : first) hashes[p] = file_hash(p);
  run_command(options("features", data(), out.path()));
  for (const auto& [p, h] : hashes) EXPECT_EQ(file_hash(p), h) << p;
}

TEST_F(PipelineTest, TrainAttributeHypersearchAndReport) {
  testing_support::TempDir out("full");
  fs::copy(ws(), out.path(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  run_command(options("finetune", data(), out.path()));
  run_command(options("train-scratch", data(), out.path()));
  EXPECT_TRUE(fs::exists(Workspace{out.path()}.model_checkpoint("synth", "finetune")));
  run_command(options("attribute", data(), out.path()));
  const auto channels = text_io::read_lines(out / "attribution" / "synth_channels.csv");
  EXPECT_EQ(channels.size(), 5u);
  run_command(options("hypersearch", data(), out.path()));
  EXPECT_TRUE(fs::exists(out / "hyper" / "best_spec.txt"));
  run_command(options("evaluate", data(), out.path()));
  run_command(options("report", data(), out.path()));
  const auto md = text_io::read_file(out / "report" / "summary.md");
  EXPECT_NE(md.find("synth"), std::string::npos);
}

TEST_F(PipelineTest, CliExitCodes) {
  testing_support::TempDir fresh("cli");
  const std::string common = " --manifest " + (data() / "manifest.txt").string() + " --out " + fresh.path().string() +
                             " --set features.length=48 --set model.conv=5:1:8,3:1:8";
  const auto err = fresh.path().parent_path() / (fresh.path().filename().string() + ".err");
  EXPECT_EQ(run_cli("detect" + common + " -q", err), 0);
  EXPECT_EQ(run_cli("saliency-extract" + common + " -q", err), 0);
  EXPECT_EQ(run_cli("features" + common + " -q", err), 0);
  EXPECT_EQ(run_cli("finetune" + common + " -q", err), 2);
  const auto msg = text_io::read_file(err);
  EXPECT_EQ(msg.rfind("error: missing-stage:", 0), 0u) << msg;
  EXPECT_NE(msg.find("pretrain"), std::string::npos);
  EXPECT_EQ(run_cli("detect" + common + " --set bogus.key=1", err), 2);
  EXPECT_NE(text_io::read_file(err).find("error: config:"), std::string::npos);
  EXPECT_NE(run_cli("no-such-command", err), 0);
  fs::remove(err);
}
