#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gazenet::evaluation {

// Repeated stratified k-fold assignment over subjects.
struct CvPlan {
  int resamplings = 10;
  int folds = 10;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> resampling_seeds;
  std::vector<std::string> subjects;  // sorted ascending
  std::vector<int> labels;            // aligned with subjects
  // fold_of[r][i]: test fold of subject i in resampling r.
  std::vector<std::vector<int>> fold_of;

  std::vector<std::size_t> test_indices(int resampling, int fold) const;
  std::vector<std::size_t> train_indices(int resampling, int fold) const;
  // Hash over every field; equal plans hash equally.
  std::string hash() const;
};

// Subjects are sorted first so the plan does not depend on input order.
// Each class is shuffled with the resampling seed and dealt round-robin over
// the folds, continuing where the previous class stopped, so every fold holds
// floor or ceil of each class's share.
CvPlan make_cv_plan(std::span<const std::string> subjects, std::span<const int> labels, int resamplings, int folds,
                    std::uint64_t seed);

// Mann-Whitney estimate with midranks for ties. Labels are 0/1.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};
// Points from (0,0) to (1,1), one per distinct score threshold.
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);
std::string roc_csv(std::span<const RocPoint> points);

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
};
Summary summarize(std::span<const double> values);

struct FoldResult {
  int resampling = 0;
  int fold = 0;
  std::vector<std::string> subject_ids;
  std::vector<double> scores;
  std::vector<int> labels;
  double auc = 0.0;
};

// One-sided permutation test of the mean fold AUC against chance. Labels are
// permuted within each fold; p = (1 + #{permuted mean >= observed}) / (1 + n).
double test_vs_chance(std::span<const FoldResult> folds, int n_permutations = 1000, std::uint64_t seed = 0);

// Paired sign-flip permutation test on per-fold AUC differences (a - b);
// one-sided, small p means a is better than b.
double paired_permutation_test(std::span<const double> auc_a, std::span<const double> auc_b,
                               int n_permutations = 1000, std::uint64_t seed = 0);

struct EvalResult {
  std::string video_id;
  std::string model_id;
  std::string plan_hash;
  std::vector<FoldResult> folds;
  double mean_auc = 0.0;
  double se = 0.0;
  double p_chance = 1.0;

  std::vector<double> fold_aucs() const;
};

// Produces test-set scores for one fold. Indices refer to plan.subjects.
using FoldScorer = std::function<std::vector<double>(const CvPlan& plan, int resampling, int fold,
                                                     const std::vector<std::size_t>& train,
                                                     const std::vector<std::size_t>& test)>;

// Runs every fold of the plan, up to `threads` at a time, and reduces the
// results in plan order so the outcome does not depend on scheduling.
EvalResult cross_validate(const CvPlan& plan, const FoldScorer& scorer, std::string video_id, std::string model_id,
                          int n_permutations, std::uint64_t seed, unsigned threads = 1);

// `video,model,mean_auc,se,p_chance,n_folds`
std::string report_header();
std::string report_row(const EvalResult& r);
// `video,model,plan_hash,resampling,fold,subject_id,label,score,fold_auc`
std::string fold_dump_header();
std::string fold_dump_rows(const EvalResult& r);

struct ReportRow {
  std::string video_id;
  std::string model_id;
  double mean_auc = 0.0;
  double se = 0.0;
  double p_chance = 1.0;
  int n_folds = 0;
};
std::vector<ReportRow> load_report(const std::filesystem::path& path);
// Reconstructs results (with per-fold scores) from a fold dump.
std::vector<EvalResult> load_fold_dump(const std::filesystem::path& path);

}  // namespace gazenet::evaluation
