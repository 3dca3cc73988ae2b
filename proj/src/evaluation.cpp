#include "gazenet/evaluation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::evaluation {

using text_io::format_double;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorCategory::InvalidArgument, "scores and labels differ in length");
  for (int y : labels) {
    if (y != 0 && y != 1) fail(ErrorCategory::InvalidArgument, "labels must be 0 or 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCategory::Numeric, "non-finite score");
  }
}

}  // namespace

std::vector<std::size_t> CvPlan::test_indices(int resampling, int fold) const {
  std::vector<std::size_t> out;
  const auto& f = fold_of.at(static_cast<std::size_t>(resampling));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CvPlan::train_indices(int resampling, int fold) const {
  std::vector<std::size_t> out;
  const auto& f = fold_of.at(static_cast<std::size_t>(resampling));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] != fold) out.push_back(i);
  }
  return out;
}

std::string CvPlan::hash() const {
  std::string s = std::to_string(resamplings) + "/" + std::to_string(folds) + "/" + std::to_string(master_seed);
  for (std::size_t i = 0; i < subjects.size(); ++i) s += "|" + subjects[i] + ":" + std::to_string(labels[i]);
  for (const auto& r : fold_of) {
    s += "#";
    for (int f : r) s += std::to_string(f) + ",";
  }
  return text_io::hex64(text_io::fnv1a(s));
}

CvPlan make_cv_plan(std::span<const std::string> subjects, std::span<const int> labels, int resamplings, int folds,
                    std::uint64_t seed) {
  if (subjects.size() != labels.size()) fail(ErrorCategory::InvalidArgument, "cv plan: subjects and labels differ");
  if (resamplings < 1 || folds < 2) fail(ErrorCategory::InvalidArgument, "cv plan: need >= 1 resampling, >= 2 folds");

  std::vector<std::size_t> order(subjects.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return subjects[a] < subjects[b]; });

  CvPlan plan;
  plan.resamplings = resamplings;
  plan.folds = folds;
  plan.master_seed = seed;
  for (std::size_t i : order) {
    if (!plan.subjects.empty() && plan.subjects.back() == subjects[i]) {
      fail(ErrorCategory::Data, "cv plan: duplicate subject " + subjects[i]);
    }
    if (labels[i] != 0 && labels[i] != 1) fail(ErrorCategory::InvalidArgument, "cv plan: labels must be 0 or 1");
    plan.subjects.push_back(subjects[i]);
    plan.labels.push_back(labels[i]);
  }

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < plan.labels.size(); ++i) by_class[static_cast<std::size_t>(plan.labels[i])].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(folds)) {
      fail(ErrorCategory::Data, "cv plan: class " + std::to_string(c) + " has " +
                                    std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                    " subjects, fewer than " + std::to_string(folds) + " folds");
    }
  }

  std::uint64_t state = seed;
  for (int r = 0; r < resamplings; ++r) {
    state = splitmix64(state);
    plan.resampling_seeds.push_back(state);
    std::mt19937_64 rng(state);
    std::vector<int> assignment(plan.subjects.size(), -1);
    std::size_t next = 0;
    for (auto members : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t i : members) assignment[i] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
    }
    plan.fold_of.push_back(std::move(assignment));
  }
  return plan;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    // Midrank of positions i..j-1 (1-based ranks), times two to stay integral.
    const double mid2 = static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        rank_sum += mid2;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCategory::InvalidArgument, "auc: both classes must be present");
  const double np = static_cast<double>(n_pos);
  const double u = 0.5 * rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCategory::InvalidArgument, "roc: both classes must be present");
  std::vector<RocPoint> out{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    out.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return out;
}

std::string roc_csv(std::span<const RocPoint> points) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : points) out += format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.size() < 2) fail(ErrorCategory::InvalidArgument, "summarize: need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

double test_vs_chance(std::span<const FoldResult> folds, int n_permutations, std::uint64_t seed) {
  if (folds.empty()) fail(ErrorCategory::InvalidArgument, "test_vs_chance: no folds");
  if (n_permutations < 1) fail(ErrorCategory::InvalidArgument, "test_vs_chance: need at least one permutation");
  double observed = 0.0;
  for (const auto& f : folds) observed += auc(f.scores, f.labels);
  observed /= static_cast<double>(folds.size());

  std::mt19937_64 rng(splitmix64(seed ^ 0x5eed));
  std::vector<std::vector<int>> perm;
  for (const auto& f : folds) perm.push_back(f.labels);
  int count = 0;
  for (int p = 0; p < n_permutations; ++p) {
    double mean = 0.0;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      std::shuffle(perm[i].begin(), perm[i].end(), rng);
      mean += auc(folds[i].scores, perm[i]);
    }
    mean /= static_cast<double>(folds.size());
    // Tolerance guards against summation-order noise on exact ties.
    if (mean >= observed - 1e-12) ++count;
  }
  return (1.0 + count) / (1.0 + n_permutations);
}

double paired_permutation_test(std::span<const double> auc_a, std::span<const double> auc_b, int n_permutations,
                               std::uint64_t seed) {
  if (auc_a.size() != auc_b.size() || auc_a.empty()) {
    fail(ErrorCategory::InvalidArgument, "paired test: fold lists must be nonempty and of equal length");
  }
  std::vector<double> d(auc_a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = auc_a[i] - auc_b[i];
  const double observed = std::accumulate(d.begin(), d.end(), 0.0);
  std::mt19937_64 rng(splitmix64(seed ^ 0xfa11));
  std::bernoulli_distribution coin(0.5);
  int count = 0;
  for (int p = 0; p < n_permutations; ++p) {
    double s = 0.0;
    for (double v : d) s += coin(rng) ? v : -v;
    if (s >= observed - 1e-12) ++count;
  }
  return (1.0 + count) / (1.0 + n_permutations);
}

std::vector<double> EvalResult::fold_aucs() const {
  std::vector<double> out;
  out.reserve(folds.size());
  for (const auto& f : folds) out.push_back(f.auc);
  return out;
}

EvalResult cross_validate(const CvPlan& plan, const FoldScorer& scorer, std::string video_id, std::string model_id,
                          int n_permutations, std::uint64_t seed, unsigned threads) {
  const std::size_t total = static_cast<std::size_t>(plan.resamplings) * static_cast<std::size_t>(plan.folds);
  std::vector<FoldResult> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      try {
        const int r = static_cast<int>(k / static_cast<std::size_t>(plan.folds));
        const int f = static_cast<int>(k % static_cast<std::size_t>(plan.folds));
        const auto train = plan.train_indices(r, f);
        const auto test = plan.test_indices(r, f);
        FoldResult fr;
        fr.resampling = r;
        fr.fold = f;
        fr.scores = scorer(plan, r, f, train, test);
        if (fr.scores.size() != test.size()) fail(ErrorCategory::Shape, "fold scorer returned the wrong count");
        for (std::size_t i : test) {
          fr.subject_ids.push_back(plan.subjects[i]);
          fr.labels.push_back(plan.labels[i]);
        }
        fr.auc = auc(fr.scores, fr.labels);
        results[k] = std::move(fr);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = total;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  EvalResult out;
  out.video_id = std::move(video_id);
  out.model_id = std::move(model_id);
  out.plan_hash = plan.hash();
  out.folds = std::move(results);
  const auto aucs = out.fold_aucs();
  const auto s = summarize(aucs);
  out.mean_auc = s.mean;
  out.se = s.se;
  out.p_chance = test_vs_chance(out.folds, n_permutations, seed);
  return out;
}

std::string report_header() { return "video,model,mean_auc,se,p_chance,n_folds\n"; }

std::string report_row(const EvalResult& r) {
  return r.video_id + "," + r.model_id + "," + format_double(r.mean_auc) + "," + format_double(r.se) + "," +
         format_double(r.p_chance) + "," + std::to_string(r.folds.size()) + "\n";
}

std::string fold_dump_header() { return "video,model,plan_hash,resampling,fold,subject_id,label,score,fold_auc\n"; }

std::string fold_dump_rows(const EvalResult& r) {
  std::string out;
  for (const auto& f : r.folds) {
    for (std::size_t i = 0; i < f.scores.size(); ++i) {
      out += r.video_id + "," + r.model_id + "," + r.plan_hash + "," + std::to_string(f.resampling) + "," +
             std::to_string(f.fold) + "," + f.subject_ids[i] + "," + std::to_string(f.labels[i]) + "," +
             format_double(f.scores[i]) + "," + format_double(f.auc) + "\n";
    }
  }
  return out;
}

std::vector<ReportRow> load_report(const std::filesystem::path& path) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || lines[0] + "\n" != report_header()) {
    fail(ErrorCategory::Format, path.string() + ": not an evaluation report");
  }
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto f = text_io::split(lines[i], ',');
    if (f.size() != 6) fail(ErrorCategory::Format, path.string() + ": malformed report row " + std::to_string(i + 1));
    const std::string ctx = path.string() + ":" + std::to_string(i + 1);
    rows.push_back({f[0], f[1], text_io::parse_double(f[2], ctx), text_io::parse_double(f[3], ctx),
                    text_io::parse_double(f[4], ctx), static_cast<int>(text_io::parse_int(f[5], ctx))});
  }
  return rows;
}

std::vector<EvalResult> load_fold_dump(const std::filesystem::path& path) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || lines[0] + "\n" != fold_dump_header()) {
    fail(ErrorCategory::Format, path.string() + ": not a fold dump");
  }
  std::vector<EvalResult> results;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto f = text_io::split(lines[i], ',');
    const std::string ctx = path.string() + ":" + std::to_string(i + 1);
    if (f.size() != 9) fail(ErrorCategory::Format, ctx + ": malformed fold dump row");
    const auto key = std::make_pair(f[0], f[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, results.size()).first;
      EvalResult r;
      r.video_id = f[0];
      r.model_id = f[1];
      r.plan_hash = f[2];
      results.push_back(std::move(r));
    }
    auto& r = results[it->second];
    const int rs = static_cast<int>(text_io::parse_int(f[3], ctx));
    const int fo = static_cast<int>(text_io::parse_int(f[4], ctx));
    if (r.folds.empty() || r.folds.back().resampling != rs || r.folds.back().fold != fo) {
      FoldResult fr;
      fr.resampling = rs;
      fr.fold = fo;
      fr.auc = text_io::parse_double(f[8], ctx);
      r.folds.push_back(std::move(fr));
    }
    auto& fr = r.folds.back();
    fr.subject_ids.push_back(f[5]);
    fr.labels.push_back(static_cast<int>(text_io::parse_int(f[6], ctx)));
    fr.scores.push_back(text_io::parse_double(f[7], ctx));
  }
  for (auto& r : results) {
    const auto s = summarize(r.fold_aucs());
    r.mean_auc = s.mean;
    r.se = s.se;
  }
  return results;
}

}  // namespace gazenet::evaluation
