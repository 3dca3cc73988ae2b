#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gazenet/error.hpp"
#include "gazenet/evaluation.hpp"
#include "gazenet/text_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gazenet;
using namespace gazenet::evaluation;

namespace {

void subjects_and_labels(int n_pos, int n_neg, std::vector<std::string>& ids, std::vector<int>& labels) {
  ids.clear();
  labels.clear();
  for (int i = 0; i < n_pos + n_neg; ++i) {
    ids.push_back("sub" + std::to_string(1000 + i * 7 % 97));
    labels.push_back(i < n_pos ? 1 : 0);
  }
}

// Scores that leak the label with strength `signal`.
FoldScorer noisy_oracle_scorer(double signal, std::uint64_t seed) {
  return [signal, seed](const CvPlan& plan, int r, int f, const std::vector<std::size_t>&,
                        const std::vector<std::size_t>& test) {
    std::mt19937_64 rng(seed + std::uint64_t(r) * 131 + std::uint64_t(f));
    std::normal_distribution<double> g(0, 1);
    std::vector<double> s;
    for (std::size_t i : test) s.push_back(signal * plan.labels[i] + g(rng));
    return s;
  };
}

}  // namespace

TEST(Plan, StratifiedWithinOneSubject) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  subjects_and_labels(23, 31, ids, labels);
  const auto plan = make_cv_plan(ids, labels, 4, 5, 9);
  const double share_pos = 23.0 / 5, share_neg = 31.0 / 5;
  for (int r = 0; r < 4; ++r) {
    std::set<std::size_t> seen;
    for (int f = 0; f < 5; ++f) {
      const auto test = plan.test_indices(r, f);
      int pos = 0;
      for (std::size_t i : test) {
        pos += plan.labels[i];
        EXPECT_TRUE(seen.insert(i).second);
      }
      const int neg = int(test.size()) - pos;
      EXPECT_LE(std::abs(pos - share_pos), 1.0);
      EXPECT_LE(std::abs(neg - share_neg), 1.0);
      EXPECT_EQ(plan.train_indices(r, f).size() + test.size(), ids.size());
    }
    EXPECT_EQ(seen.size(), ids.size());
  }
}

TEST(Plan, IndependentOfInputOrderAndSeeded) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  subjects_and_labels(10, 10, ids, labels);
  auto rids = ids;
  auto rlabels = labels;
  std::reverse(rids.begin(), rids.end());
  std::reverse(rlabels.begin(), rlabels.end());
  const auto a = make_cv_plan(ids, labels, 3, 4, 1);
  const auto b = make_cv_plan(rids, rlabels, 3, 4, 1);
  EXPECT_EQ(a.fold_of, b.fold_of);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_TRUE(std::is_sorted(a.subjects.begin(), a.subjects.end()));
  EXPECT_NE(make_cv_plan(ids, labels, 3, 4, 2).hash(), a.hash());
  EXPECT_NE(a.fold_of[0], a.fold_of[1]);
}

TEST(Plan, RejectsTooFewSubjectsAndDuplicates) {
  std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  std::vector<int> labels{1, 1, 0, 0, 0};
  try {
    make_cv_plan(ids, labels, 1, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Data);
  }
  ids[1] = "a";
  EXPECT_THROW(make_cv_plan(ids, labels, 1, 2, 0), Error);
}

TEST(Auc, MatchesPairCountingOracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = double(rng() % 10);
      y[k] = int(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(auc(s, y), oracle::auc_pairs(s, y), 1e-12);
  }
}

TEST(Auc, MonotoneInvarianceAndComplement) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> s(50), t(50), neg(50);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = g(rng);
    y[i] = int(i % 3 == 0);
    t[i] = std::exp(3 * s[i]) + 1;
    neg[i] = -s[i];
  }
  EXPECT_NEAR(auc(s, y), auc(t, y), 1e-15);
  EXPECT_NEAR(auc(s, y) + auc(neg, y), 1.0, 1e-15);
}

TEST(Auc, EdgeCases) {
  EXPECT_EQ(auc(std::vector<double>{1, 2}, std::vector<int>{0, 1}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{2, 2}, std::vector<int>{0, 1}), 0.5);
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(auc(std::vector<double>{NAN, 2}, std::vector<int>{0, 1}), Error);
}

TEST(Roc, EndpointsAndCsv) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  const auto pts = roc_points(s, y);
  EXPECT_EQ(pts.front().fpr, 0.0);
  EXPECT_EQ(pts.front().tpr, 0.0);
  EXPECT_EQ(pts.back().fpr, 1.0);
  EXPECT_EQ(pts.back().tpr, 1.0);
  double area = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2;
  }
  EXPECT_NEAR(area, auc(s, y), 1e-15);
  EXPECT_EQ(roc_csv(pts).substr(0, 8), "fpr,tpr\n");
}

TEST(Summary, MeanAndStandardError) {
  const auto s = summarize(std::vector<double>{0.4, 0.6});
  EXPECT_NEAR(s.mean, 0.5, 1e-15);
  EXPECT_NEAR(s.se, 0.1, 1e-15);
  const std::vector<double> v{0.3, 0.9, 0.55, 0.61};
  EXPECT_NEAR(summarize(v).se, oracle::mean_se(v).second, 1e-15);
  EXPECT_THROW(summarize(std::vector<double>{1.0}), Error);
}

TEST(CrossValidate, SignalGivesSmallPNoSignalLargeP) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  subjects_and_labels(20, 20, ids, labels);
  const auto plan = make_cv_plan(ids, labels, 2, 5, 3);
  const auto strong = cross_validate(plan, noisy_oracle_scorer(3.0, 1), "v", "m", 200, 7);
  EXPECT_GT(strong.mean_auc, 0.9);
  EXPECT_LT(strong.p_chance, 0.01);
  EXPECT_EQ(strong.folds.size(), 10u);
  EXPECT_EQ(strong.plan_hash, plan.hash());
  const auto none = cross_validate(plan, noisy_oracle_scorer(0.0, 1), "v", "m", 200, 7);
  EXPECT_GT(none.p_chance, 0.05);
}

TEST(CrossValidate, ThreadCountDoesNotChangeResults) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  subjects_and_labels(12, 12, ids, labels);
  const auto plan = make_cv_plan(ids, labels, 3, 4, 3);
  const auto a = cross_validate(plan, noisy_oracle_scorer(1.0, 2), "v", "m", 100, 7, 1);
  const auto b = cross_validate(plan, noisy_oracle_scorer(1.0, 2), "v", "m", 100, 7, 4);
  EXPECT_EQ(report_row(a), report_row(b));
  EXPECT_EQ(fold_dump_rows(a), fold_dump_rows(b));
}

TEST(PairedTest, DirectionAndFloor) {
  const std::vector<double> better{0.8, 0.82, 0.79, 0.85, 0.81, 0.84, 0.8, 0.83};
  const std::vector<double> worse{0.6, 0.62, 0.61, 0.64, 0.58, 0.63, 0.6, 0.62};
  const double p = paired_permutation_test(better, worse, 500, 1);
  EXPECT_LT(p, 0.02);
  EXPECT_GE(p, 1.0 / 501.0);
  EXPECT_GT(paired_permutation_test(worse, better, 500, 1), 0.9);
}

TEST(ReportIo, RoundTrip) {
  testing_support::TempDir dir("eval");
  std::vector<std::string> ids;
  std::vector<int> labels;
  subjects_and_labels(6, 6, ids, labels);
  const auto plan = make_cv_plan(ids, labels, 1, 3, 3);
  const auto r = cross_validate(plan, noisy_oracle_scorer(1.0, 2), "vid", "cnn-scratch", 50, 7);
  text_io::write_file(dir / "report.csv", report_header() + report_row(r));
  text_io::write_file(dir / "folds.csv", fold_dump_header() + fold_dump_rows(r));
  const auto rows = load_report(dir / "report.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean_auc, r.mean_auc);
  EXPECT_EQ(rows[0].n_folds, 3);
  const auto back = load_fold_dump(dir / "folds.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].fold_aucs(), r.fold_aucs());
  EXPECT_EQ(back[0].folds[1].scores, r.folds[1].scores);
  text_io::write_file(dir / "bad.csv", "nope\n");
  EXPECT_THROW(load_report(dir / "bad.csv"), Error);
}
