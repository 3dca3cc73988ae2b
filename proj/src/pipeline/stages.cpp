#include "gazenet/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

#include "gazenet/attribution.hpp"
#include "gazenet/baselines.hpp"
#include "gazenet/error.hpp"
#include "gazenet/evaluation.hpp"
#include "gazenet/events.hpp"
#include "gazenet/nn/checkpoint.hpp"
#include "gazenet/nn/hyper.hpp"
#include "gazenet/pipeline/manifest.hpp"
#include "gazenet/pipeline/synth.hpp"
#include "gazenet/pipeline/workspace.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::pipeline {

namespace fs = std::filesystem;
using text_io::format_double;

const std::vector<Ablation>& ablations() {
  static const std::vector<Ablation> a{
      {"wo-saliency", "w/o saliency", {static_cast<std::size_t>(Channel::Saliency)}},
      {"wo-duration", "w/o fix. duration", {static_cast<std::size_t>(Channel::Duration)}},
      {"wo-location", "w/o fix. location", {static_cast<std::size_t>(Channel::X), static_cast<std::size_t>(Channel::Y)}},
  };
  return a;
}

nn::ModelSpec model_spec_from_config(const Config& c, nn::HeadKind head) {
  const auto length = c.get_int("features.length");
  if (length < 1) fail(ErrorCategory::Config, "features.length must be positive");
  nn::ModelSpec spec;
  if (const auto& file = c.get("model.spec_file"); !file.empty()) {
    spec = nn::ModelSpec::parse(std::string(text_io::trim(text_io::read_file(file))));
    if (spec.input_length != length) {
      fail(ErrorCategory::Config, "model.spec_file was sampled for length " + std::to_string(spec.input_length) +
                                      " but features.length is " + std::to_string(length));
    }
  } else {
    spec.conv_layers.clear();
    for (const auto& layer : text_io::split(c.get("model.conv"), ',')) {
      const auto f = text_io::split(text_io::trim(layer), ':');
      if (f.size() != 3) fail(ErrorCategory::Config, "model.conv entries must be kernel:stride:filters");
      spec.conv_layers.push_back({static_cast<int>(text_io::parse_int(f[0], "model.conv")),
                                  static_cast<int>(text_io::parse_int(f[1], "model.conv")),
                                  static_cast<int>(text_io::parse_int(f[2], "model.conv"))});
    }
    const auto& pool = c.get("model.pool");
    if (pool == "average") {
      spec.pool = nn::PoolKind::Average;
    } else if (pool == "max") {
      spec.pool = nn::PoolKind::Max;
    } else {
      fail(ErrorCategory::Config, "model.pool must be average or max");
    }
    spec.dense_layers = static_cast<int>(c.get_int("model.dense_layers"));
    spec.hidden_units = static_cast<int>(c.get_int("model.hidden"));
    spec.dropout = c.get_double("model.dropout");
    spec.input_channels = static_cast<int>(kNumChannels);
    spec.input_length = static_cast<int>(length);
  }
  spec.head = head;
  spec.validate();
  return spec;
}

nn::TrainConfig train_config_from(const Config& c, std::uint64_t seed, const std::string& epochs_key) {
  nn::TrainConfig t;
  t.adam.learning_rate = c.get_double("train.learning_rate");
  const auto batch = c.get_int("train.batch_size");
  if (batch < 1) fail(ErrorCategory::Config, "train.batch_size must be positive");
  t.batch_size = static_cast<std::size_t>(batch);
  t.epochs = static_cast<int>(c.get_int(epochs_key));
  t.patience = static_cast<int>(c.get_int("train.patience"));
  t.validation_fraction = c.get_double("train.validation_fraction");
  t.seed = seed;
  t.validate();
  return t;
}

std::vector<double> cnn_fit_and_score(const CnnFoldSetup& setup, std::span<const FeatureSequence* const> train,
                                      std::span<const int> train_labels,
                                      std::span<const FeatureSequence* const> test) {
  if (train.size() != train_labels.size()) fail(ErrorCategory::InvalidArgument, "cnn: labels do not match rows");
  std::vector<FeatureSequence> train_copy;
  std::vector<std::string> ids;
  for (const auto* f : train) {
    train_copy.push_back(*f);
    ids.push_back(f->subject_id);
  }
  const ChannelStats stats = fit_stats(train_copy, split_identifier(ids));
  const auto length = static_cast<std::size_t>(setup.spec.input_length);
  auto input = [&](const FeatureSequence& f) {
    ModelInput in = normalize_and_fit_length(f, stats, length);
    for (std::size_t ch : setup.masked_channels) mask_channel(in, ch);
    return std::move(in.values);
  };
  std::vector<nn::Example> examples;
  for (std::size_t i = 0; i < train.size(); ++i) examples.push_back({input(*train[i]), double(train_labels[i])});

  nn::ModelParams init;
  const nn::ModelParams* init_ptr = nullptr;
  if (setup.pretrained != nullptr) {
    nn::ModelSpec source = setup.spec;
    source.head = nn::HeadKind::Linear;
    init = nn::transfer_head(source, *setup.pretrained, setup.spec, setup.head_init, setup.train.seed).params;
    init_ptr = &init;
  }
  const auto result = nn::train(setup.spec, init_ptr, examples, setup.train, nn::Objective::BinaryCrossEntropy);
  nn::Network net(setup.spec, result.params);
  std::vector<std::vector<double>> test_inputs;
  for (const auto* f : test) test_inputs.push_back(input(*f));
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& t : test_inputs) ptrs.push_back(&t);
  return nn::predict_all(net, ptrs);
}

namespace {

struct Ctx {
  const CommandOptions& opt;
  Config config;
  Workspace ws;
  Manifest manifest;
  std::uint64_t seed = 0;
  Logger log;
  std::vector<fs::path> outputs;

  void write(const fs::path& path, std::string_view contents) {
    text_io::write_file(path, contents);
    outputs.push_back(path);
  }
  void say(const std::string& msg) const {
    if (log) log(msg);
  }
};

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return text_io::fnv1a(tag + "/" + std::to_string(seed) + "/" + std::to_string(a) + "/" + std::to_string(b));
}

void require(const fs::path& path, const std::string& stage) {
  if (!fs::exists(path)) {
    fail(ErrorCategory::MissingStage, path.string() + " not found; run `" + stage + "` first");
  }
}

ScreenGeometry screen_from(const Config& c) {
  ScreenGeometry g;
  g.width_px = static_cast<int>(c.get_int("screen.width_px"));
  g.height_px = static_cast<int>(c.get_int("screen.height_px"));
  g.width_cm = c.get_double("screen.width_cm");
  g.height_cm = c.get_double("screen.height_cm");
  g.viewing_distance_cm = c.get_double("screen.distance_cm");
  g.validate();
  return g;
}

IdtConfig idt_from(const Config& c) {
  IdtConfig i;
  i.dispersion_threshold_deg = c.get_double("idt.dispersion_deg");
  i.min_duration_ms = c.get_double("idt.min_duration_ms");
  i.max_gap_ms = c.get_double("idt.max_gap_ms");
  return i;
}

ExtractionMaskSpec mask_from(const Config& c) {
  ExtractionMaskSpec m;
  m.sigma_deg = c.get_double("saliency.sigma_deg");
  m.truncate_sigmas = c.get_double("saliency.truncate_sigmas");
  return m;
}

unsigned thread_count(const Config& c) {
  const auto t = c.get_int("threads");
  if (t < 0) fail(ErrorCategory::Config, "threads must be >= 0");
  if (t == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(t);
}

std::vector<std::string> selected_videos(const Ctx& ctx) {
  if (ctx.opt.video.empty()) return ctx.manifest.video_ids();
  if (!ctx.manifest.videos.count(ctx.opt.video)) {
    fail(ErrorCategory::InvalidArgument, "video " + ctx.opt.video + " is not in the manifest");
  }
  return {ctx.opt.video};
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// ---- per-subject artifacts -------------------------------------------------

struct SubjectData {
  const SubjectEntry* entry = nullptr;
  FeatureSequence features;
};

std::map<std::string, std::string> index_status(const Ctx& ctx, const std::string& video) {
  require(ctx.ws.fixation_index(video), "detect");
  std::map<std::string, std::string> status;
  for (const auto& r : read_fixation_index(ctx.ws.fixation_index(video))) status[r.subject_id] = r.status;
  return status;
}

// Loads cached feature sequences for entries that passed detection.
std::vector<SubjectData> load_feature_set(const Ctx& ctx, const std::vector<const SubjectEntry*>& entries) {
  std::map<std::string, std::map<std::string, std::string>> status;
  std::vector<SubjectData> out;
  for (const auto* e : entries) {
    if (!status.count(e->video_id)) status[e->video_id] = index_status(ctx, e->video_id);
    const auto& st = status[e->video_id];
    auto it = st.find(e->subject_id);
    if (it == st.end()) {
      fail(ErrorCategory::MissingStage, "subject " + e->subject_id + " missing from the fixation index; rerun `detect`");
    }
    if (it->second != "ok") continue;
    const auto path = ctx.ws.features(e->video_id, e->subject_id);
    require(path, "features");
    out.push_back({e, from_tensor_file(read_feature_tensor(path))});
  }
  return out;
}

Scanpath load_scanpath(const Ctx& ctx, const SubjectEntry& e) {
  const auto path = ctx.ws.fixations(e.video_id, e.subject_id);
  require(path, "detect");
  return load_fixations_csv(path, e.subject_id, e.video_id);
}

std::vector<double> load_saliency_values(const Ctx& ctx, const SubjectEntry& e) {
  const auto path = ctx.ws.saliency_values(e.video_id, e.subject_id);
  require(path, "saliency-extract");
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || lines[0] != "saliency") fail(ErrorCategory::Format, path.string() + ": bad saliency file");
  std::vector<double> v;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!text_io::trim(lines[i]).empty()) v.push_back(text_io::parse_double(lines[i], path.string()));
  }
  return v;
}

// ---- stages ----------------------------------------------------------------

void stage_detect(Ctx& ctx) {
  const auto g = screen_from(ctx.config);
  const auto idt = idt_from(ctx.config);
  for (const auto& video : ctx.manifest.video_ids()) {
    const auto& meta = ctx.manifest.videos.at(video).meta;
    std::vector<IndexRow> rows;
    for (const auto& e : ctx.manifest.subjects) {
      if (e.video_id != video) continue;
      const auto rec = load_gaze_csv(e.gaze_file, e.subject_id, e.video_id, e.sampling_rate_hz);
      if (rec.invalid_fraction() > kMaxTrackerLoss) {
        rows.push_back({e.subject_id, "tracker_loss", 0});
        ctx.say("excluded " + e.subject_id + ": tracker loss " + format_double(rec.invalid_fraction()));
        continue;
      }
      Scanpath sp = detect_fixations(rec, g, idt);
      if (sp.unusable || sp.empty()) {
        rows.push_back({e.subject_id, "unusable", 0});
        ctx.say("excluded " + e.subject_id + ": no usable fixations");
        continue;
      }
      align_frames(sp, meta);
      const auto path = ctx.ws.fixations(video, e.subject_id);
      write_fixations_csv(path, sp);
      ctx.outputs.push_back(path);
      rows.push_back({e.subject_id, "ok", sp.size()});
    }
    write_fixation_index(ctx.ws.fixation_index(video), rows);
    ctx.outputs.push_back(ctx.ws.fixation_index(video));
    ctx.say("detect " + video + ": " + std::to_string(rows.size()) + " recordings");
  }
}

void stage_saliency_extract(Ctx& ctx) {
  const auto g = screen_from(ctx.config);
  const auto mspec = mask_from(ctx.config);
  for (const auto& video : ctx.manifest.video_ids()) {
    const auto status = index_status(ctx, video);
    SaliencyStore store(ctx.manifest.videos.at(video).saliency_dir);
    for (const auto& e : ctx.manifest.subjects) {
      if (e.video_id != video || status.count(e.subject_id) == 0 || status.at(e.subject_id) != "ok") continue;
      const auto sp = load_scanpath(ctx, e);
      std::string out = "saliency\n";
      for (double v : extract_scanpath_saliency(sp, store, g, mspec)) out += format_double(v) + "\n";
      ctx.write(ctx.ws.saliency_values(video, e.subject_id), out);
    }
  }
}

void stage_features(Ctx& ctx) {
  for (const auto& video : ctx.manifest.video_ids()) {
    const auto status = index_status(ctx, video);
    for (const auto& e : ctx.manifest.subjects) {
      if (e.video_id != video || status.count(e.subject_id) == 0 || status.at(e.subject_id) != "ok") continue;
      const auto sp = load_scanpath(ctx, e);
      const auto sal = load_saliency_values(ctx, e);
      const auto path = ctx.ws.features(video, e.subject_id);
      write_feature_tensor(path, to_tensor_file(assemble(sp, sal)));
      ctx.outputs.push_back(path);
    }
  }
}

struct Prepared {
  nn::ModelSpec spec;
  ChannelStats stats;
  std::vector<nn::Example> examples;
};

Prepared prepare(const std::vector<SubjectData>& data, const nn::ModelSpec& spec, bool swan_target) {
  Prepared p;
  p.spec = spec;
  std::vector<FeatureSequence> seqs;
  std::vector<std::string> ids;
  for (const auto& d : data) {
    seqs.push_back(d.features);
    ids.push_back(d.entry->subject_id + "@" + d.entry->video_id);
  }
  p.stats = fit_stats(seqs, split_identifier(ids));
  for (const auto& d : data) {
    const double target = swan_target ? *d.entry->label.swan_score : double(*d.entry->label.adhd_label);
    p.examples.push_back(
        {normalize_and_fit_length(d.features, p.stats, static_cast<std::size_t>(spec.input_length)).values, target});
  }
  return p;
}

std::vector<SubjectData> pretrain_set(const Ctx& ctx) {
  const auto entries = ctx.manifest.pretrain_subjects();
  if (entries.empty()) {
    fail(ErrorCategory::Data, "the manifest has no SWAN-scored subjects without an ADHD label to pre-train on");
  }
  auto data = load_feature_set(ctx, entries);
  if (data.size() < 2) fail(ErrorCategory::Data, "fewer than two usable pre-training recordings");
  return data;
}

void stage_pretrain(Ctx& ctx) {
  const auto data = pretrain_set(ctx);
  const auto p = prepare(data, model_spec_from_config(ctx.config, nn::HeadKind::Linear), true);
  const auto tc = train_config_from(ctx.config, derive_seed(ctx.seed, "pretrain"), "pretrain.epochs");
  const auto r = nn::train(p.spec, nullptr, p.examples, tc, nn::Objective::MeanSquaredError);
  ctx.say("pretrain: " + std::to_string(data.size()) + " recordings, " + std::to_string(r.epochs_run) +
          " epochs, best epoch " + std::to_string(r.best_epoch));
  nn::save_checkpoint(ctx.ws.pretrain_checkpoint(), {p.spec, r.params});
  ctx.outputs.push_back(ctx.ws.pretrain_checkpoint());
  write_channel_stats(ctx.ws.pretrain_stats(), p.stats);
  ctx.outputs.push_back(ctx.ws.pretrain_stats());
}

nn::Checkpoint load_pretrained(const Ctx& ctx) {
  if (!fs::exists(ctx.ws.pretrain_checkpoint())) {
    fail(ErrorCategory::MissingStage, "no pre-trained checkpoint at " + ctx.ws.pretrain_checkpoint().string() +
                                          "; run `pretrain` first");
  }
  auto ckpt = nn::load_checkpoint(ctx.ws.pretrain_checkpoint());
  const auto expected = model_spec_from_config(ctx.config, nn::HeadKind::Linear);
  if (!(ckpt.spec == expected)) {
    fail(ErrorCategory::Config, "pre-trained checkpoint architecture (" + ckpt.spec.to_string() +
                                    ") differs from the configured model (" + expected.to_string() + ")");
  }
  return ckpt;
}

nn::HeadInit head_init_from(const Config& c) {
  const auto& h = c.get("transfer.head");
  if (h == "reuse") return nn::HeadInit::Reuse;
  if (h == "reinit") return nn::HeadInit::Reinitialize;
  fail(ErrorCategory::Config, "transfer.head must be reuse or reinit");
}

void stage_train_full(Ctx& ctx, bool from_pretrained) {
  std::optional<nn::Checkpoint> pre;
  if (from_pretrained) pre = load_pretrained(ctx);
  const std::string kind = from_pretrained ? "finetune" : "scratch";
  for (const auto& video : selected_videos(ctx)) {
    const auto data = load_feature_set(ctx, ctx.manifest.classification_subjects(video));
    if (data.size() < 2) fail(ErrorCategory::Data, "video " + video + ": fewer than two labelled recordings");
    const auto p = prepare(data, model_spec_from_config(ctx.config, nn::HeadKind::Sigmoid), false);
    const auto tc = train_config_from(ctx.config, derive_seed(ctx.seed, kind + ":" + video), "train.epochs");
    nn::ModelParams init;
    if (pre) {
      init = nn::transfer_head(pre->spec, pre->params, p.spec, head_init_from(ctx.config), tc.seed).params;
    }
    const auto r = nn::train(p.spec, pre ? &init : nullptr, p.examples, tc, nn::Objective::BinaryCrossEntropy);
    ctx.say(kind + " " + video + ": " + std::to_string(data.size()) + " recordings, " +
            std::to_string(r.epochs_run) + " epochs");
    nn::save_checkpoint(ctx.ws.model_checkpoint(video, kind), {p.spec, r.params});
    ctx.outputs.push_back(ctx.ws.model_checkpoint(video, kind));
    write_channel_stats(ctx.ws.model_stats(video, kind), p.stats);
    ctx.outputs.push_back(ctx.ws.model_stats(video, kind));
  }
}

// ---- evaluation ------------------------------------------------------------

struct EvalData {
  std::vector<SubjectData> subjects;  // aligned with plan.subjects
  std::vector<Scanpath> scanpaths;
  std::vector<std::vector<double>> saliency;
};

bool is_cnn(const std::string& model) { return model.rfind("cnn-", 0) == 0; }

evaluation::FoldScorer make_scorer(const Ctx& ctx, const std::string& model, const EvalData& data,
                                   const std::string& video, const nn::Checkpoint* pretrained,
                                   std::vector<std::string>* symbols, std::vector<baselines::EngineeredFeatures>* eng) {
  if (is_cnn(model)) {
    CnnFoldSetup base;
    base.spec = model_spec_from_config(ctx.config, nn::HeadKind::Sigmoid);
    std::string seed_key = model;
    if (model != kCnnScratch) {
      base.pretrained = &pretrained->params;
      base.head_init = head_init_from(ctx.config);
      seed_key = kCnnPretrained;
      for (const auto& a : ablations()) {
        if (model == std::string(kCnnPretrained) + "-" + a.suffix) base.masked_channels = a.channels;
      }
    }
    const Config config = ctx.config;
    const std::uint64_t seed = ctx.seed;
    return [&data, base, config, seed, seed_key, video](const evaluation::CvPlan&, int r, int f,
                                                       const std::vector<std::size_t>& train,
                                                       const std::vector<std::size_t>& test) {
      CnnFoldSetup setup = base;
      setup.train = train_config_from(config, derive_seed(seed, seed_key + ":" + video, std::uint64_t(r),
                                                          std::uint64_t(f)),
                                      "train.epochs");
      std::vector<const FeatureSequence*> tr, te;
      std::vector<int> labels;
      for (std::size_t i : train) {
        tr.push_back(&data.subjects[i].features);
        labels.push_back(*data.subjects[i].entry->label.adhd_label);
      }
      for (std::size_t i : test) te.push_back(&data.subjects[i].features);
      return cnn_fit_and_score(setup, tr, labels, te);
    };
  }
  if (model == kLevenshtein) {
    baselines::RoiGrid grid;
    grid.rows = static_cast<int>(ctx.config.get_int("roi.rows"));
    grid.cols = static_cast<int>(ctx.config.get_int("roi.cols"));
    grid.screen = screen_from(ctx.config);
    grid.validate();
    for (const auto& sp : data.scanpaths) symbols->push_back(baselines::encode_scanpath(sp, grid));
    return [symbols](const evaluation::CvPlan& plan, int, int, const std::vector<std::size_t>& train,
                     const std::vector<std::size_t>& test) {
      std::vector<std::string> adhd, control;
      for (std::size_t i : train) (plan.labels[i] == 1 ? adhd : control).push_back((*symbols)[i]);
      std::vector<double> scores;
      for (std::size_t i : test) scores.push_back(baselines::levenshtein_classify((*symbols)[i], adhd, control));
      return scores;
    };
  }
  if (model == kSvmRfe) {
    for (std::size_t i = 0; i < data.subjects.size(); ++i) {
      eng->push_back(baselines::extract_engineered_features(data.scanpaths[i], data.saliency[i],
                                                            1000.0 / data.subjects[i].entry->sampling_rate_hz));
    }
    baselines::RfeConfig rc;
    rc.step_fraction = ctx.config.get_double("rfe.step");
    rc.svm.lambda = ctx.config.get_double("svm.lambda");
    rc.svm.eta0 = ctx.config.get_double("svm.eta0");
    rc.svm.epochs = static_cast<int>(ctx.config.get_int("svm.epochs"));
    const std::uint64_t seed = ctx.seed;
    return [eng, rc, seed, video](const evaluation::CvPlan& plan, int r, int f, const std::vector<std::size_t>& train,
                                  const std::vector<std::size_t>& test) {
      std::vector<std::vector<double>> x;
      std::vector<int> y;
      for (std::size_t i : train) {
        x.push_back((*eng)[i].values);
        y.push_back(plan.labels[i]);
      }
      auto cfg = rc;
      cfg.svm.seed = derive_seed(seed, std::string(kSvmRfe) + ":" + video, std::uint64_t(r), std::uint64_t(f));
      const auto m = baselines::svm_rfe_train(x, y, cfg);
      std::vector<double> scores;
      for (std::size_t i : test) scores.push_back(m.decision((*eng)[i].values));
      return scores;
    };
  }
  fail(ErrorCategory::InvalidArgument, "unknown model '" + model + "'");
}

struct EvalOutputs {
  fs::path report;
  fs::path folds;
  std::string roc_prefix;
  bool write_symbols = false;
  bool write_engineered = false;
};

void evaluate_models(Ctx& ctx, const std::vector<std::string>& models, const EvalOutputs& out) {
  std::optional<nn::Checkpoint> pretrained;
  const bool needs_pre = std::any_of(models.begin(), models.end(), [](const std::string& m) {
    return is_cnn(m) && m != kCnnScratch;
  });
  if (needs_pre) pretrained = load_pretrained(ctx);

  const int resamplings = static_cast<int>(ctx.config.get_int("cv.resamplings"));
  const int folds = static_cast<int>(ctx.config.get_int("cv.folds"));
  const int perms = static_cast<int>(ctx.config.get_int("cv.permutations"));
  const unsigned threads = thread_count(ctx.config);

  std::string report = evaluation::report_header();
  std::string dump = evaluation::fold_dump_header();
  std::string plans = "video,plan_hash,resamplings,folds,subjects\n";
  for (const auto& video : selected_videos(ctx)) {
    auto loaded = load_feature_set(ctx, ctx.manifest.classification_subjects(video));
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& s : loaded) {
      ids.push_back(s.entry->subject_id);
      labels.push_back(*s.entry->label.adhd_label);
    }
    const auto plan = evaluation::make_cv_plan(ids, labels, resamplings, folds, derive_seed(ctx.seed, "plan:" + video));
    plans += video + "," + plan.hash() + "," + std::to_string(resamplings) + "," + std::to_string(folds) + "," +
             std::to_string(plan.subjects.size()) + "\n";

    EvalData data;
    for (const auto& id : plan.subjects) {
      auto it = std::find_if(loaded.begin(), loaded.end(),
                             [&](const SubjectData& s) { return s.entry->subject_id == id; });
      data.subjects.push_back(*it);
    }
    const bool needs_paths = std::any_of(models.begin(), models.end(), [](const std::string& m) { return !is_cnn(m); });
    if (needs_paths) {
      for (const auto& s : data.subjects) {
        data.scanpaths.push_back(load_scanpath(ctx, *s.entry));
        data.saliency.push_back(load_saliency_values(ctx, *s.entry));
      }
    }

    for (const auto& model : models) {
      std::vector<std::string> symbols;
      std::vector<baselines::EngineeredFeatures> eng;
      const auto scorer =
          make_scorer(ctx, model, data, video, pretrained ? &*pretrained : nullptr, &symbols, &eng);
      const auto res = evaluation::cross_validate(plan, scorer, video, model, perms,
                                                  derive_seed(ctx.seed, "perm:" + video + ":" + model), threads);
      ctx.say(video + " " + model + ": AUC " + fixed3(res.mean_auc) + " +- " + fixed3(res.se) + " (p " +
              fixed3(res.p_chance) + ")");
      report += evaluation::report_row(res);
      dump += evaluation::fold_dump_rows(res);

      std::vector<double> scores;
      std::vector<int> ys;
      for (const auto& f : res.folds) {
        if (f.resampling != 0) continue;
        scores.insert(scores.end(), f.scores.begin(), f.scores.end());
        ys.insert(ys.end(), f.labels.begin(), f.labels.end());
      }
      ctx.write(fs::path(out.report).parent_path() / "roc" / (out.roc_prefix + video + "__" + model + ".csv"),
                evaluation::roc_csv(evaluation::roc_points(scores, ys)));

      if (out.write_symbols && model == kLevenshtein) {
        ctx.write(ctx.ws.baselines_dir() / (video + "_symbols.txt"), baselines::symbol_strings_text(plan.subjects, symbols));
      }
      if (out.write_engineered && model == kSvmRfe) {
        std::string csv = baselines::engineered_csv_header();
        for (std::size_t i = 0; i < eng.size(); ++i) csv += baselines::engineered_csv_row(plan.subjects[i], video, eng[i]);
        ctx.write(ctx.ws.baselines_dir() / (video + "_engineered.csv"), csv);
      }
    }
  }
  ctx.write(out.report, report);
  ctx.write(out.folds, dump);
  ctx.write(fs::path(out.report).parent_path() / (out.roc_prefix + "plans.csv"), plans);
}

void stage_evaluate(Ctx& ctx) {
  std::vector<std::string> models = ctx.opt.models;
  if (models.empty()) models = {kCnnScratch, kCnnPretrained};
  if (ctx.opt.ablation) {
    for (const auto& a : ablations()) models.push_back(std::string(kCnnPretrained) + "-" + a.suffix);
  }
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (!seen.insert(m).second) fail(ErrorCategory::InvalidArgument, "model " + m + " listed twice");
    bool known = m == kCnnScratch || m == kCnnPretrained || m == kLevenshtein || m == kSvmRfe;
    for (const auto& a : ablations()) known = known || m == std::string(kCnnPretrained) + "-" + a.suffix;
    if (!known) fail(ErrorCategory::InvalidArgument, "unknown model '" + m + "'");
  }
  evaluate_models(ctx, models, {ctx.ws.eval_dir() / "report.csv", ctx.ws.eval_dir() / "folds.csv", "", false, false});
}

void stage_baseline(Ctx& ctx, const std::string& model) {
  const std::string stem = model == kLevenshtein ? "levenshtein" : "svm";
  evaluate_models(ctx, {model},
                  {ctx.ws.baselines_dir() / (stem + "_report.csv"), ctx.ws.baselines_dir() / (stem + "_folds.csv"),
                   stem + "_", model == kLevenshtein, model == kSvmRfe});
}

void stage_attribute(Ctx& ctx) {
  const auto& kind = ctx.opt.attribute_model;
  if (kind != "finetune" && kind != "scratch") fail(ErrorCategory::InvalidArgument, "attribute: --model must be finetune or scratch");
  const std::string producer = kind == "finetune" ? "finetune" : "train-scratch";
  for (const auto& video : selected_videos(ctx)) {
    require(ctx.ws.model_checkpoint(video, kind), producer);
    const auto ckpt = nn::load_checkpoint(ctx.ws.model_checkpoint(video, kind));
    const auto stats = read_channel_stats(ctx.ws.model_stats(video, kind));
    auto graph = attribution::InferenceGraph::fold(ckpt.spec, ckpt.params);
    nn::Network net(ckpt.spec, ckpt.params);
    const auto length = static_cast<std::size_t>(ckpt.spec.input_length);

    std::vector<attribution::AttributionMap> normalized;
    for (const auto& s : load_feature_set(ctx, ctx.manifest.classification_subjects(video))) {
      const auto input = normalize_and_fit_length(s.features, stats, length);
      const auto a = attribution::deeplift_attribute(graph, input, {}, s.entry->subject_id, video);
      // Summation-to-delta against the training network's own forward pass.
      const std::vector<double> zeros(input.values.size(), 0.0);
      const auto out = net.forward(nn::make_batch({input.values, zeros}, kNumChannels, length), nn::Mode::Infer);
      const double delta = out.v[0] - out.v[1];
      double total = 0.0;
      for (double v : a.values) total += v;
      if (std::abs(total - delta) / (std::abs(delta) + 1e-9) >= 1e-5) {
        fail(ErrorCategory::Numeric, "attribution for " + s.entry->subject_id + " violates summation-to-delta");
      }
      const auto path = ctx.ws.attribution_dir() / video / (s.entry->subject_id + ".attr");
      attribution::write_attribution_dump(path, a);
      ctx.outputs.push_back(path);
      normalized.push_back(attribution::normalize_instance(a));
    }
    if (normalized.empty()) fail(ErrorCategory::Data, "attribute: no usable recordings for video " + video);
    ctx.write(ctx.ws.attribution_dir() / (video + "_channels.csv"),
              attribution::box_plot_csv_header() +
                  attribution::box_plot_csv_rows(video, attribution::aggregate_channel_relevance(normalized)));
  }
}

void stage_hypersearch(Ctx& ctx) {
  const auto data = pretrain_set(ctx);
  const auto length = static_cast<int>(ctx.config.get_int("features.length"));
  const auto trials = ctx.config.get_int("hyper.trials");
  if (trials < 1) fail(ErrorCategory::Config, "hyper.trials must be positive");
  nn::HyperSearchSpace space;
  nn::Rng rng(derive_seed(ctx.seed, "hyper"));
  std::string table = "trial\tscore\tspec\n";
  double best = std::numeric_limits<double>::infinity();
  nn::ModelSpec best_spec;
  for (long long t = 0; t < trials; ++t) {
    const auto spec = nn::sample_hyperconfig(space, length, static_cast<int>(kNumChannels), nn::HeadKind::Linear, rng);
    const auto p = prepare(data, spec, true);
    const auto tc = train_config_from(ctx.config, derive_seed(ctx.seed, "hyper-trial", std::uint64_t(t)), "hyper.epochs");
    const auto r = nn::train(spec, nullptr, p.examples, tc, nn::Objective::MeanSquaredError);
    const auto& curve = r.val_loss.empty() ? r.train_loss : r.val_loss;
    const double score = curve.empty() ? std::numeric_limits<double>::infinity()
                                       : *std::min_element(curve.begin(), curve.end());
    table += std::to_string(t) + "\t" + format_double(score) + "\t" + spec.to_string() + "\n";
    ctx.say("trial " + std::to_string(t) + ": " + format_double(score));
    if (score < best) {
      best = score;
      best_spec = spec;
    }
  }
  ctx.write(ctx.ws.hyper_dir() / "trials.tsv", table);
  ctx.write(ctx.ws.hyper_dir() / "best_spec.txt", best_spec.to_string() + "\n");
}

void stage_report(Ctx& ctx) {
  const auto report_path = ctx.ws.eval_dir() / "report.csv";
  require(report_path, "evaluate");
  auto rows = evaluation::load_report(report_path);
  auto results = evaluation::load_fold_dump(ctx.ws.eval_dir() / "folds.csv");
  for (const char* stem : {"levenshtein", "svm"}) {
    const auto p = ctx.ws.baselines_dir() / (std::string(stem) + "_report.csv");
    if (!fs::exists(p)) continue;
    for (auto& r : evaluation::load_report(p)) {
      const bool dup = std::any_of(rows.begin(), rows.end(), [&](const evaluation::ReportRow& x) {
        return x.video_id == r.video_id && x.model_id == r.model_id;
      });
      if (!dup) rows.push_back(r);
    }
  }

  std::vector<std::string> videos;
  std::vector<std::string> models;
  std::map<std::pair<std::string, std::string>, evaluation::ReportRow> cell;
  auto is_ablation = [](const std::string& m) { return m.find("-wo-") != std::string::npos; };
  for (const auto& r : rows) {
    if (std::find(videos.begin(), videos.end(), r.video_id) == videos.end()) videos.push_back(r.video_id);
    if (!is_ablation(r.model_id) && std::find(models.begin(), models.end(), r.model_id) == models.end()) {
      models.push_back(r.model_id);
    }
    cell[{r.video_id, r.model_id}] = r;
  }
  std::map<std::string, double> paired;  // video -> p(pretrained > scratch)
  for (const auto& video : videos) {
    const evaluation::EvalResult* a = nullptr;
    const evaluation::EvalResult* b = nullptr;
    for (const auto& r : results) {
      if (r.video_id != video) continue;
      if (r.model_id == kCnnPretrained) a = &r;
      if (r.model_id == kCnnScratch) b = &r;
    }
    if (a && b && a->plan_hash == b->plan_hash) {
      paired[video] = evaluation::paired_permutation_test(a->fold_aucs(), b->fold_aucs(),
                                                          static_cast<int>(ctx.config.get_int("cv.permutations")),
                                                          derive_seed(ctx.seed, "paired:" + video));
    }
  }

  auto format_cell = [&](const std::string& video, const std::string& model) -> std::string {
    auto it = cell.find({video, model});
    if (it == cell.end()) return "-";
    std::string s = fixed3(it->second.mean_auc) + " ± " + fixed3(it->second.se);
    if (it->second.p_chance < 0.05) s += "*";
    if (model == kCnnPretrained && paired.count(video) && paired[video] < 0.05) s += "†";
    return s;
  };

  std::string md = "# ADHD detection AUC\n\nMean ± standard error over cross-validation folds.\n\n| video |";
  for (const auto& m : models) md += " " + m + " |";
  md += "\n|---|";
  for (std::size_t i = 0; i < models.size(); ++i) md += "---|";
  md += "\n";
  for (const auto& v : videos) {
    md += "| " + v + " |";
    for (const auto& m : models) md += " " + format_cell(v, m) + " |";
    md += "\n";
  }
  md += "\n\\* better than chance (permutation p < 0.05); † " + std::string(kCnnPretrained) + " better than " +
        kCnnScratch + " (paired permutation p < 0.05).\n";

  const bool any_ablation = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return is_ablation(r.model_id); });
  if (any_ablation) {
    md += "\n# Channel ablation (" + std::string(kCnnPretrained) + ")\n\n| video | complete |";
    for (const auto& a : ablations()) md += " " + a.label + " |";
    md += "\n|---|---|";
    for (std::size_t i = 0; i < ablations().size(); ++i) md += "---|";
    md += "\n";
    for (const auto& v : videos) {
      md += "| " + v + " | " + format_cell(v, kCnnPretrained) + " |";
      for (const auto& a : ablations()) md += " " + format_cell(v, std::string(kCnnPretrained) + "-" + a.suffix) + " |";
      md += "\n";
    }
  }

  std::string csv = "video,model,mean_auc,se,p_chance,n_folds,p_vs_scratch\n";
  for (const auto& r : rows) {
    std::string p = "";
    if (r.model_id == kCnnPretrained && paired.count(r.video_id)) p = format_double(paired[r.video_id]);
    csv += r.video_id + "," + r.model_id + "," + format_double(r.mean_auc) + "," + format_double(r.se) + "," +
           format_double(r.p_chance) + "," + std::to_string(r.n_folds) + "," + p + "\n";
  }
  ctx.write(ctx.ws.report_dir() / "summary.md", md);
  ctx.write(ctx.ws.report_dir() / "summary.csv", csv);
}

SynthSpec synth_from(const Config& c, std::uint64_t seed) {
  SynthSpec s;
  s.n_adhd = static_cast<int>(c.get_int("synth.n_adhd"));
  s.n_control = static_cast<int>(c.get_int("synth.n_control"));
  s.n_pretrain = static_cast<int>(c.get_int("synth.n_pretrain"));
  s.effect_duration = c.get_double("synth.effect_duration");
  s.effect_saliency = c.get_double("synth.effect_saliency");
  s.frames = static_cast<int>(c.get_int("synth.frames"));
  s.fps = c.get_double("synth.fps");
  s.sampling_rate_hz = c.get_double("synth.sampling_rate_hz");
  s.raster_width = static_cast<int>(c.get_int("synth.raster_width"));
  s.raster_height = static_cast<int>(c.get_int("synth.raster_height"));
  s.video_id = c.get("synth.video_id");
  s.screen = screen_from(c);
  s.seed = seed;
  return s;
}

}  // namespace

std::vector<fs::path> run_command(const CommandOptions& options, const Logger& log) {
  if (std::find(kCommands.begin(), kCommands.end(), options.command) == kCommands.end()) {
    fail(ErrorCategory::InvalidArgument, "unknown command '" + options.command + "'");
  }
  if (options.out.empty()) fail(ErrorCategory::InvalidArgument, "--out is required");
  Ctx ctx{options, Config{}, Workspace{options.out}, Manifest{}, 0, log, {}};
  if (!options.config_file.empty()) ctx.config.load_file(options.config_file);
  ctx.config.apply_overrides(options.overrides);
  if (options.seed) ctx.config.set("seed", std::to_string(*options.seed));
  ctx.seed = ctx.config.get_seed();

  if (options.command != "synth") {
    if (options.manifest.empty()) fail(ErrorCategory::InvalidArgument, "--manifest is required for " + options.command);
    ctx.manifest = load_manifest(options.manifest);
    for (const auto& [id, v] : ctx.manifest.videos) {
      (void)v;
      if (id.find_first_of("/\\,") != std::string::npos) fail(ErrorCategory::Format, "video id " + id + " is not file-safe");
    }
  }

  WorkspaceLock lock(options.out);
  ctx.say(options.command + ": seed " + std::to_string(ctx.seed) + ", config " + ctx.config.hash());
  const auto& c = options.command;
  if (c == "synth") {
    const auto summary = generate_synthetic(synth_from(ctx.config, ctx.seed), options.out);
    ctx.outputs.push_back(summary.manifest);
    ctx.outputs.push_back(options.out / "labels.csv");
    ctx.outputs.push_back(options.out / "planted.csv");
  } else if (c == "detect") {
    stage_detect(ctx);
  } else if (c == "saliency-extract") {
    stage_saliency_extract(ctx);
  } else if (c == "features") {
    stage_features(ctx);
  } else if (c == "pretrain") {
    stage_pretrain(ctx);
  } else if (c == "finetune") {
    stage_train_full(ctx, true);
  } else if (c == "train-scratch") {
    stage_train_full(ctx, false);
  } else if (c == "evaluate") {
    stage_evaluate(ctx);
  } else if (c == "attribute") {
    stage_attribute(ctx);
  } else if (c == "baseline-lev") {
    stage_baseline(ctx, kLevenshtein);
  } else if (c == "baseline-svm") {
    stage_baseline(ctx, kSvmRfe);
  } else if (c == "hypersearch") {
    stage_hypersearch(ctx);
  } else if (c == "report") {
    stage_report(ctx);
  }

  std::string logtext = "command=" + c + "\nseed=" + std::to_string(ctx.seed) + "\nconfig_hash=" + ctx.config.hash() +
                        "\n\n[config]\n" + ctx.config.canonical() + "\n[outputs]\n";
  for (const auto& p : ctx.outputs) {
    logtext += fs::relative(p, options.out).generic_string() + " " + file_hash(p) + "\n";
  }
  text_io::write_file(ctx.ws.log_file(c), logtext);
  return ctx.outputs;
}

}  // namespace gazenet::pipeline
