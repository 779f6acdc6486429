#include <cmath>

#include "fairgi/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace fairgi {
namespace {

using testing::all_mask;
using testing::labels_of;
using testing::random_matrix;

std::vector<std::uint8_t> u8(const std::vector<int>& v) { return {v.begin(), v.end()}; }

SimilarityMatrix dense_similarity(const Matrix& dense) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) t.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), dense(i, j)});
    }
  }
  return SimilarityMatrix(csr_from_triplets(static_cast<NodeId>(dense.rows()), std::move(t)));
}

Matrix random_symmetric(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(rng) < density) d(i, j) = d(j, i) = unit(rng);
    }
  }
  return d;
}

TEST(GroupMetrics, CompleteSeparation) {
  const auto g = group_metrics(u8({1, 1, 0, 0}), labels_of({1, 0, 1, 0}), labels_of({0, 0, 1, 1}), all_mask(4));
  ASSERT_TRUE(g.delta_sp);
  EXPECT_EQ(*g.delta_sp, 100.0);
}

TEST(GroupMetrics, DirectCounting) {
  const auto g = group_metrics(u8({1, 0, 1, 1}), labels_of({1, 1, 1, 1}), labels_of({0, 0, 1, 1}), all_mask(4));
  ASSERT_TRUE(g.delta_eo);
  EXPECT_EQ(*g.delta_eo, 50.0);
}

TEST(GroupMetrics, IdenticalPredictionsAcrossGroups) {
  const auto g = group_metrics(u8({1, 0, 1, 1, 0, 1}), labels_of({1, 0, 1, 1, 0, 1}), labels_of({0, 0, 0, 1, 1, 1}),
                               all_mask(6));
  EXPECT_EQ(*g.delta_sp, 0.0);
}

TEST(GroupMetrics, UndefinedIsDistinctFromZero) {
  const auto g = group_metrics(u8({1, 0}), labels_of({0, 0}), labels_of({0, 0}), all_mask(2));
  EXPECT_FALSE(g.delta_sp.has_value());
  EXPECT_FALSE(g.delta_eo.has_value());
}

TEST(GroupMetrics, SkipsUnknownSensitive) {
  const auto g = group_metrics(u8({1, 0, 1}), labels_of({1, 1, 1}), labels_of({0, 1, -1}), all_mask(3));
  EXPECT_EQ(*g.delta_sp, 100.0);
  EXPECT_EQ(g.n, 3u);
}

TEST(GroupMetrics, ExhaustiveCountingOracle) {
  int checked = 0;
  for (int code = 0; code < 4096; ++code) {
    const auto yh = oracle::bits(code & 15, 4);
    const auto y = oracle::bits((code >> 4) & 15, 4);
    const auto s = oracle::bits((code >> 8) & 15, 4);
    const auto got = group_metrics(u8(yh), labels_of(y), labels_of(s), all_mask(4));
    const auto want = oracle::count_gaps(yh, y, s);
    ASSERT_EQ(got.delta_sp.has_value(), want.sp.has_value()) << code;
    ASSERT_EQ(got.delta_eo.has_value(), want.eo.has_value()) << code;
    if (want.sp) EXPECT_EQ(*got.delta_sp, *want.sp) << code;
    if (want.eo) EXPECT_EQ(*got.delta_eo, *want.eo) << code;
    ++checked;
  }
  EXPECT_EQ(checked, 4096);
}

TEST(IndividualMetrics, AllZeroEmbeddings) {
  std::mt19937_64 rng(1);
  const auto m = dense_similarity(random_symmetric(10, 0.4, rng));
  const auto part = partition_by_sensitive(u8({0, 1, 0, 1, 0, 1, 0, 1, 0, 1}));
  const auto r = individual_metrics(Matrix::Zero(10, 3), m, part);
  EXPECT_EQ(r.individual_fairness, 0.0);
  EXPECT_EQ(r.group_if, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.max_ig, 0.0);
}

TEST(IndividualMetrics, PairwiseOracleExample) {
  Matrix d(2, 2);
  d << 0, 1, 1, 0;
  Matrix z(2, 1);
  z << 1, 0;
  const auto r = individual_metrics(z, dense_similarity(d), partition_by_sensitive(u8({0, 1})));
  EXPECT_NEAR(r.individual_fairness, 1.0, 1e-15);
  EXPECT_EQ(r.similarity_nnz, 2);
}

TEST(IndividualMetrics, MatchesBruteForceDoubleSum) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 99);
    const int d = 1 + static_cast<int>(rng() % 8);
    const Matrix dense = random_symmetric(n, 0.2, rng);
    const Matrix z = random_matrix(n, d, rng);
    std::vector<std::uint8_t> g(static_cast<std::size_t>(n));
    for (auto& x : g) x = static_cast<std::uint8_t>(rng() & 1u);
    const auto r = individual_metrics(z, dense_similarity(dense), partition_by_sensitive(g));
    EXPECT_LE(testing::rel_err(r.individual_fairness, oracle::individual_bias(z, dense)), 1e-9);
    EXPECT_GE(r.individual_fairness, 0.0);
    EXPECT_GE(r.max_ig, r.group_if[0]);
    EXPECT_GE(r.max_ig, r.group_if[1]);
    EXPECT_TRUE(r.max_ig == r.group_if[0] || r.max_ig == r.group_if[1]);
  }
}

TEST(PredictiveMetrics, PerfectSeparation) {
  Vector p(4);
  p << 0.9, 0.8, 0.2, 0.1;
  const auto r = predictive_metrics(p, labels_of({1, 1, 0, 0}), all_mask(4));
  EXPECT_EQ(*r.accuracy, 100.0);
  EXPECT_EQ(*r.auc, 100.0);
}

TEST(PredictiveMetrics, ConstantScores) {
  const auto r = predictive_metrics(Vector::Constant(4, 0.3), labels_of({1, 0, 1, 0}), all_mask(4));
  EXPECT_EQ(*r.auc, 50.0);
}

TEST(PredictiveMetrics, PairEnumeration) {
  Vector p(3);
  p << 0.9, 0.6, 0.4;
  const auto r = predictive_metrics(p, labels_of({1, 0, 1}), all_mask(3));
  EXPECT_EQ(*r.auc, 50.0);
  EXPECT_NEAR(*r.accuracy, 100.0 / 3.0, 1e-12);
}

TEST(PredictiveMetrics, SingleClassAucUndefined) {
  const auto r = predictive_metrics(Vector::Constant(2, 0.7), labels_of({1, 1}), all_mask(2));
  EXPECT_FALSE(r.auc.has_value());
  EXPECT_EQ(*r.accuracy, 100.0);
}

TEST(PredictiveMetrics, AucInvariantUnderMonotoneMaps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 40;
    std::vector<double> s(n), t(n), c(n);
    std::vector<std::uint8_t> pos(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::round(u(rng) * 10.0) / 10.0;  // coarse grid forces ties
      t[i] = std::exp(3.0 * s[i]) - 7.0;
      c[i] = 1.0 / (1.0 + std::exp(-20.0 * (s[i] - 0.4)));
      pos[i] = static_cast<std::uint8_t>(u(rng) < 0.5);
    }
    pos[0] = 1;
    pos[1] = 0;
    EXPECT_EQ(*roc_auc(s, pos), *roc_auc(t, pos));
    EXPECT_EQ(*roc_auc(s, pos), *roc_auc(c, pos));
  }
}

TEST(PredictiveMetrics, AucMatchesPairEnumeration) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 30;
  std::vector<double> s(n);
  std::vector<std::uint8_t> pos(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::round(u(rng) * 5.0);
    pos[i] = static_cast<std::uint8_t>(i % 3 == 0);
  }
  double wins = 0.0, pairs = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!pos[i] || pos[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  EXPECT_NEAR(*roc_auc(s, pos), wins / pairs, 1e-15);
}

IndividualFairness two_groups(double a, double b, std::size_t n) {
  IndividualFairness f;
  f.group_if = {a, b};
  f.max_ig = std::max(a, b);
  f.individual_fairness = 0.3;
  f.similarity_nnz = 10;
  f.n = n;
  return f;
}

TEST(BuildReport, MaxIgAndNulls) {
  PredictiveMetrics p{73.13, 79.28, 4};
  GroupFairness g{0.43, std::nullopt, 4};
  ReportMetadata meta;
  meta.eval_nodes = 4;
  const auto r = build_report(p, g, two_groups(0.5, 0.2, 4), meta);
  EXPECT_EQ(r.max_ig, 0.5);
  EXPECT_FALSE(r.delta_eo.has_value());
  EXPECT_EQ(*r.accuracy, 73.13);
  EXPECT_EQ(r.metadata.if_normalization, 10);
  EXPECT_FALSE(r.epsilon_bound_check.has_value());
}

TEST(BuildReport, EpsilonAudit) {
  const PredictiveMetrics p{50.0, 50.0, 2};
  const GroupFairness g{0.0, 0.0, 2};
  EXPECT_TRUE(*build_report(p, g, two_groups(0.1, 0.1, 2), {}, 0.03).epsilon_bound_check);
  EXPECT_FALSE(*build_report(p, g, two_groups(0.1, 0.1, 2), {}, 0.01).epsilon_bound_check);
}

TEST(BuildReport, InconsistentCounts) {
  EXPECT_FAIRGI_ERROR(build_report({50.0, 50.0, 3}, {0.0, 0.0, 4}, two_groups(0.1, 0.1, 4), {}),
                      ErrorKind::kValidation);
  ReportMetadata meta;
  meta.eval_nodes = 4;
  EXPECT_FAIRGI_ERROR(build_report({50.0, 50.0, 4}, {0.0, 0.0, 4}, two_groups(0.1, 0.1, 5), meta),
                      ErrorKind::kValidation);
}

TEST(BuildReport, CsvRowUsesEmptyCellForUndefined) {
  const auto r = build_report({50.0, std::nullopt, 2}, {1.5, std::nullopt, 2}, two_groups(0.1, 0.2, 2), {});
  const std::string row = report_csv_row(r);
  EXPECT_NE(row.find(",50,,1.5,,0.20000000000000001,"), std::string::npos) << row;
}

}  // namespace
}  // namespace fairgi
