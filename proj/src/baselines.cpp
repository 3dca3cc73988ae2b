#include "gazenet/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "gazenet/error.hpp"
#include "gazenet/evaluation.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::baselines {

void RoiGrid::validate() const {
  screen.validate();
  if (rows < 1 || cols < 1 || rows * cols > static_cast<int>(kRoiAlphabet.size())) {
    fail(ErrorCategory::Config, "ROI grid must have 1.." + std::to_string(kRoiAlphabet.size()) + " cells");
  }
}

int RoiGrid::cell(double x_deg, double y_deg) const {
  if (!std::isfinite(x_deg) || !std::isfinite(y_deg)) fail(ErrorCategory::Data, "ROI encoding: non-finite fixation");
  // Angles at or beyond 90 degrees have no screen position; they are off
  // screen anyway and clamp to the border cells.
  const double x = deg_to_px(std::clamp(x_deg, -89.0, 89.0), Axis::Horizontal, screen);
  const double y = deg_to_px(std::clamp(y_deg, -89.0, 89.0), Axis::Vertical, screen);
  const int col = std::clamp(static_cast<int>(std::floor(x * cols / screen.width_px)), 0, cols - 1);
  const int row = std::clamp(static_cast<int>(std::floor(y * rows / screen.height_px)), 0, rows - 1);
  return row * cols + col;
}

std::string encode_scanpath(const Scanpath& sp, const RoiGrid& grid) {
  grid.validate();
  std::string out;
  out.reserve(sp.size());
  for (const auto& f : sp.fixations) out.push_back(grid.symbol(grid.cell(f.x_deg, f.y_deg)));
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double levenshtein_classify(std::string_view query, std::span<const std::string> adhd,
                            std::span<const std::string> control) {
  if (adhd.empty() || control.empty()) fail(ErrorCategory::InvalidArgument, "levenshtein classifier: empty group");
  auto mean_distance = [&](std::span<const std::string> group) {
    double s = 0.0;
    for (const auto& g : group) s += static_cast<double>(levenshtein(query, g));
    return s / static_cast<double>(group.size());
  };
  return mean_distance(control) - mean_distance(adhd);
}

std::string symbol_strings_text(std::span<const std::string> subject_ids, std::span<const std::string> symbols) {
  if (subject_ids.size() != symbols.size()) fail(ErrorCategory::InvalidArgument, "symbol export: size mismatch");
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) out += subject_ids[i] + " " + symbols[i] + "\n";
  return out;
}

namespace {

struct Stat3 {
  double mean = 0.0, median = 0.0, sd = 0.0;
  bool empty = true;
};

Stat3 stats(std::vector<double> v) {
  Stat3 s;
  if (v.empty()) return s;
  s.empty = false;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / n);
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

void append_base(EngineeredFeatures& out, const Scanpath& sp, std::span<const double> saliency,
                 double sample_period_ms, const std::vector<std::size_t>& fix_idx) {
  std::vector<double> dur, amp, sdur, vel, sal;
  for (std::size_t i : fix_idx) {
    const auto& f = sp.fixations[i];
    dur.push_back(f.duration_ms);
    sal.push_back(saliency[i]);
    if (i + 1 < sp.size()) {
      const auto& g = sp.fixations[i + 1];
      const double a = std::hypot(g.x_deg - f.x_deg, g.y_deg - f.y_deg);
      const double d = std::max(g.onset_ms - f.onset_ms - f.duration_ms, sample_period_ms);
      amp.push_back(a);
      sdur.push_back(d);
      vel.push_back(a / (d / 1000.0));
    }
  }
  out.values.push_back(static_cast<double>(fix_idx.size()));
  out.empty.push_back(fix_idx.empty());
  for (auto* v : {&dur, &amp, &sdur, &vel, &sal}) {
    const Stat3 s = stats(*v);
    out.values.insert(out.values.end(), {s.mean, s.median, s.sd});
    out.empty.insert(out.empty.end(), {s.empty, s.empty, s.empty});
  }
}

}  // namespace

bool EngineeredFeatures::any_empty() const { return std::find(empty.begin(), empty.end(), true) != empty.end(); }

const std::vector<std::string>& engineered_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> stems{"fix_dur", "sacc_amp", "sacc_dur", "sacc_vel", "saliency"};
    std::vector<std::string> one{"fix_count"};
    for (const auto& s : stems) {
      for (const char* st : {"_mean", "_median", "_std"}) one.push_back(s + st);
    }
    std::vector<std::string> all;
    for (const char* prefix : {"", "first_", "rest_"}) {
      for (const auto& n : one) all.push_back(prefix + n);
    }
    return all;
  }();
  return names;
}

EngineeredFeatures extract_engineered_features(const Scanpath& sp, std::span<const double> saliency,
                                               double sample_period_ms) {
  if (sp.size() < 2) {
    fail(ErrorCategory::Data, "engineered features: recording " + sp.subject_id + "/" + sp.video_id + " has " +
                                  std::to_string(sp.size()) + " fixations, need at least 2");
  }
  if (saliency.size() != sp.size()) fail(ErrorCategory::Shape, "engineered features: saliency length mismatch");
  if (!(sample_period_ms > 0)) fail(ErrorCategory::InvalidArgument, "engineered features: bad sample period");
  for (const auto& f : sp.fixations) {
    if (!std::isfinite(f.x_deg) || !std::isfinite(f.y_deg) || !std::isfinite(f.duration_ms) ||
        !std::isfinite(f.onset_ms)) {
      fail(ErrorCategory::Data, "engineered features: non-finite fixation in " + sp.subject_id);
    }
  }

  const double first = sp.fixations.front().onset_ms;
  const double cut = kFirstSegmentFraction * (sp.fixations.back().onset_ms - first);
  std::vector<std::size_t> all(sp.size()), head, rest;
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i : all) (sp.fixations[i].onset_ms - first <= cut ? head : rest).push_back(i);

  EngineeredFeatures out;
  append_base(out, sp, saliency, sample_period_ms, all);
  append_base(out, sp, saliency, sample_period_ms, head);
  append_base(out, sp, saliency, sample_period_ms, rest);
  return out;
}

std::string engineered_csv_header() {
  std::string h = "subject_id,video_id";
  for (const auto& n : engineered_feature_names()) h += "," + n;
  return h + ",empty_count\n";
}

std::string engineered_csv_row(const std::string& subject_id, const std::string& video_id,
                               const EngineeredFeatures& f) {
  std::string r = subject_id + "," + video_id;
  for (double v : f.values) r += "," + text_io::format_double(v);
  return r + "," + std::to_string(std::count(f.empty.begin(), f.empty.end(), true)) + "\n";
}

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) fail(ErrorCategory::InvalidArgument, "standardizer: no rows");
  const std::size_t d = rows.front().size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorCategory::Shape, "standardizer: ragged rows");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (double& v : s.scale) v = std::max(std::sqrt(v / static_cast<double>(rows.size())), 1e-8);
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) fail(ErrorCategory::Shape, "standardizer: row has wrong width");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

double LinearSvm::decision(std::span<const double> x) const {
  if (x.size() != weights.size()) fail(ErrorCategory::Shape, "svm: feature width mismatch");
  double s = bias;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
  return s;
}

LinearSvm train_linear_svm(std::span<const std::vector<double>> x, std::span<const int> labels,
                           const std::vector<bool>& mask, const SvmConfig& config) {
  if (x.empty() || x.size() != labels.size()) fail(ErrorCategory::InvalidArgument, "svm: bad training set");
  const auto n_pos = std::count(labels.begin(), labels.end(), 1);
  if (n_pos == 0 || n_pos == static_cast<std::ptrdiff_t>(labels.size())) {
    fail(ErrorCategory::Data, "svm: training set has a single class");
  }
  if (!(config.lambda > 0) || !(config.eta0 > 0) || config.epochs < 1) {
    fail(ErrorCategory::Config, "svm: lambda, eta0 and epochs must be positive");
  }
  const std::size_t d = x.front().size();
  if (mask.size() != d) fail(ErrorCategory::Shape, "svm: mask width mismatch");

  LinearSvm m;
  m.weights.assign(d, 0.0);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  double t = 0.0;
  for (int e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const double eta = config.eta0 / (1.0 + config.eta0 * config.lambda * t);
      const double y = labels[i] == 1 ? 1.0 : -1.0;
      const double margin = y * m.decision(x[i]);
      const double shrink = 1.0 - eta * config.lambda;
      for (std::size_t j = 0; j < d; ++j) {
        if (!mask[j]) continue;
        m.weights[j] *= shrink;
        if (margin < 1.0) m.weights[j] += eta * y * x[i][j];
      }
      if (margin < 1.0) m.bias += eta * y;
      t += 1.0;
    }
  }
  return m;
}

double SvmRfeModel::decision(std::span<const double> raw) const { return svm.decision(standardizer.apply(raw)); }

SvmRfeModel svm_rfe_train(std::span<const std::vector<double>> x, std::span<const int> labels,
                          const RfeConfig& config) {
  if (!(config.step_fraction > 0 && config.step_fraction < 1)) {
    fail(ErrorCategory::Config, "rfe: step fraction must lie in (0, 1)");
  }
  if (x.size() != labels.size()) fail(ErrorCategory::InvalidArgument, "rfe: rows and labels differ");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) fail(ErrorCategory::InvalidArgument, "rfe: labels must be 0 or 1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) fail(ErrorCategory::Data, "rfe: training fold has a single class");

  SvmRfeModel model;
  model.standardizer = Standardizer::fit(x);
  std::vector<std::vector<double>> z;
  z.reserve(x.size());
  for (const auto& r : x) z.push_back(model.standardizer.apply(r));
  const std::size_t d = z.front().size();

  // Stratified inner split; without two members per class, score on the
  // training rows themselves.
  std::vector<std::size_t> inner_train, inner_val;
  std::mt19937_64 rng(config.svm.seed ^ 0x2fe1ULL);
  const bool can_split = by_class[0].size() >= 2 && by_class[1].size() >= 2;
  // Class order keyed on subject 0, not on the label value, so flipping every
  // label reproduces the same split.
  const std::size_t lead = static_cast<std::size_t>(labels[0]);
  for (auto members : {by_class[lead], by_class[1 - lead]}) {
    std::shuffle(members.begin(), members.end(), rng);
    std::size_t n_val = 0;
    if (can_split) {
      n_val = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(config.inner_validation_fraction * static_cast<double>(members.size()))),
          1, members.size() - 1);
    }
    inner_val.insert(inner_val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    inner_train.insert(inner_train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(inner_train.begin(), inner_train.end());
  std::sort(inner_val.begin(), inner_val.end());
  if (inner_val.empty()) inner_val = inner_train;

  auto pick = [&](const std::vector<std::size_t>& idx, std::vector<std::vector<double>>& rows, std::vector<int>& ys) {
    for (std::size_t i : idx) {
      rows.push_back(z[i]);
      ys.push_back(labels[i]);
    }
  };
  std::vector<std::vector<double>> tr_x, va_x;
  std::vector<int> tr_y, va_y;
  pick(inner_train, tr_x, tr_y);
  pick(inner_val, va_x, va_y);

  std::vector<bool> mask(d, true);
  std::vector<bool> best_mask = mask;
  double best_auc = -1.0;
  std::size_t remaining = d;
  while (true) {
    const LinearSvm svm = train_linear_svm(tr_x, tr_y, mask, config.svm);
    std::vector<double> scores;
    for (const auto& r : va_x) scores.push_back(svm.decision(r));
    const double a = evaluation::auc(scores, va_y);
    model.rounds.push_back({remaining, a});
    if (a > best_auc) {
      best_auc = a;
      best_mask = mask;
    }
    if (remaining <= 1) break;
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < d; ++j) {
      if (mask[j]) active.push_back(j);
    }
    std::stable_sort(active.begin(), active.end(), [&](std::size_t p, std::size_t q) {
      return std::abs(svm.weights[p]) < std::abs(svm.weights[q]);
    });
    const std::size_t drop = std::min(
        remaining - 1,
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(config.step_fraction * static_cast<double>(remaining)))));
    for (std::size_t k = 0; k < drop; ++k) {
      mask[active[k]] = false;
      model.elimination_order.push_back(active[k]);
    }
    remaining -= drop;
  }
  model.mask = best_mask;
  model.svm = train_linear_svm(z, labels, best_mask, config.svm);
  return model;
}

}  // namespace gazenet::baselines
