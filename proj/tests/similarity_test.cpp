#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fairgi/similarity.hpp"
#include "test_support.hpp"

namespace fairgi {
namespace {

using testing::random_matrix;
using testing::rel_err;

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

SimilarityMatrix from_dense(const Matrix& d) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (d(i, j) != 0.0) t.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), d(i, j)});
    }
  }
  return SimilarityMatrix(csr_from_triplets(static_cast<NodeId>(d.rows()), t));
}

// Dense random symmetric similarity with roughly `density` nonzeros.
Matrix random_similarity(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(rng) < density) m(i, j) = m(j, i) = unit(rng);
    }
  }
  return m;
}

// Brute-force oracle: all-pairs cosine, top-k by (value desc, index asc),
// positives only, then max-symmetrized.
Matrix cosine_oracle(const Matrix& x, int k) {
  const auto n = x.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> cand;
    const double ni = x.row(i).norm();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double nj = x.row(j).norm();
      const double c = (ni == 0.0 || nj == 0.0) ? 0.0 : x.row(i).dot(x.row(j)) / (ni * nj);
      cand.push_back({c, j});
    }
    std::sort(cand.begin(), cand.end(), [](auto a, auto b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (int r = 0; r < k && r < static_cast<int>(cand.size()); ++r) {
      if (cand[r].first > 0.0) out(i, cand[r].second) = cand[r].first;
    }
  }
  return out.cwiseMax(out.transpose());
}

TEST(Cosine, IdenticalRows) {
  const SimilarityMatrix m = build_similarity(rows({{1, 2}, {1, 2}}), SimilarityMethod::kCosine, 1);
  EXPECT_NEAR(m.at(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(m.at(1, 0), 1.0, 1e-15);
}

TEST(Cosine, OrthogonalRowsClipToZero) {
  const SimilarityMatrix m = build_similarity(rows({{1, 0}, {0, 1}}), SimilarityMethod::kCosine, 1);
  EXPECT_EQ(m.at(0, 1), 0.0);
  EXPECT_EQ(m.nnz(), 0);
}

TEST(Cosine, TieGoesToLowerIndex) {
  const Matrix x = rows({{1, 0}, {1, 1}, {0, 1}});
  const SimilarityMatrix m = build_similarity(x, SimilarityMethod::kCosine, 1);
  const Matrix oracle = cosine_oracle(x, 1);
  EXPECT_NEAR(m.at(0, 1), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(m.at(1, 0), std::sqrt(0.5), 1e-15);
  EXPECT_TRUE(m.entries().to_dense().isApprox(oracle, 1e-14));
  // Node 2's own top neighbor is node 1, so (1, 2) survives symmetrization.
  EXPECT_NEAR(m.at(2, 1), std::sqrt(0.5), 1e-15);
}

TEST(Cosine, MatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x = random_matrix(40, 5, rng);
    x.row(3).setZero();
    for (int k : {1, 3, 10}) {
      const Matrix got = build_similarity(x, SimilarityMethod::kCosine, k).entries().to_dense();
      EXPECT_LT((got - cosine_oracle(x, k)).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_EQ(got.row(3).cwiseAbs().sum(), 0.0);
    }
  }
}

TEST(Cosine, PositiveRowScalingInvariance) {
  std::mt19937_64 rng(12);
  Matrix x = random_matrix(30, 4, rng);
  const SimilarityMatrix a = build_similarity(x, SimilarityMethod::kCosine, 5);
  x.row(7) *= 37.5;
  const SimilarityMatrix b = build_similarity(x, SimilarityMethod::kCosine, 5);
  ASSERT_EQ(a.entries().col, b.entries().col);
  for (std::size_t e = 0; e < a.entries().val.size(); ++e) {
    EXPECT_LE(rel_err(a.entries().val[e], b.entries().val[e]), 1e-12);
  }
}

TEST(Cosine, KOutOfRange) {
  EXPECT_FAIRGI_ERROR(build_similarity(rows({{1, 0}, {0, 1}}), SimilarityMethod::kCosine, 2), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(build_similarity(rows({{1, 0}, {0, 1}}), SimilarityMethod::kCosine, 0), ErrorKind::kConfig);
}

TEST(Cosine, DeterministicAndSerialMatchesParallel) {
  std::mt19937_64 rng(13);
  const Matrix x = random_matrix(300, 6, rng);
  const SimilarityMatrix a = build_similarity(x, SimilarityMethod::kCosine, 10, Exec::kParallel);
  EXPECT_EQ(a, build_similarity(x, SimilarityMethod::kCosine, 10, Exec::kParallel));
  EXPECT_EQ(a, build_similarity(x, SimilarityMethod::kCosine, 10, Exec::kSerial));
}

TEST(SimilarityInvariants, SymmetricNonnegativeZeroDiagonal) {
  std::mt19937_64 rng(14);
  const SimilarityMatrix m = build_similarity(random_matrix(60, 3, rng), SimilarityMethod::kCosine, 4);
  const Matrix d = m.entries().to_dense();
  EXPECT_EQ(d, d.transpose());
  EXPECT_GE(d.minCoeff(), 0.0);
  EXPECT_EQ(d.diagonal().cwiseAbs().sum(), 0.0);
  EXPECT_EQ(m.nnz(), (d.array() != 0.0).count());
}

TEST(SimilarityInvariants, ConstructorRejectsInvalidMatrices) {
  EXPECT_ANY_THROW(SimilarityMatrix(csr_from_triplets(2, {{0, 1, 1.0}})));
  EXPECT_ANY_THROW(SimilarityMatrix(csr_from_triplets(2, {{0, 1, -1.0}, {1, 0, -1.0}})));
  EXPECT_ANY_THROW(SimilarityMatrix(csr_from_triplets(2, {{0, 0, 1.0}})));
}

TEST(Jaccard, MatchesNeighborSetOracle) {
  const Graph g = testing::random_graph(40, 1, 0.12, 15);
  const int k = 4;
  const SimilarityMatrix m = build_similarity(g, SimilarityMethod::kAdjacencyJaccard, k);
  const Matrix a = g.adjacency().to_dense();
  const auto n = a.rows();
  Matrix oracle = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double inter = (a.row(i).array() * a.row(j).array()).sum();
      const double uni = (a.row(i).array().max(a.row(j).array())).sum();
      cand.push_back({uni == 0.0 ? 0.0 : inter / uni, j});
    }
    std::sort(cand.begin(), cand.end(), [](auto x, auto y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
    for (int r = 0; r < k; ++r) {
      if (cand[r].first > 0.0) oracle(i, cand[r].second) = cand[r].first;
    }
  }
  oracle = oracle.cwiseMax(oracle.transpose());
  EXPECT_LT((m.entries().to_dense() - oracle).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Laplacian, TwoNodeChain) {
  const LaplacianMatrix l = laplacian(from_dense(rows({{0, 1}, {1, 0}})));
  EXPECT_EQ(l.entries().to_dense(), rows({{1, -1}, {-1, 1}}));
}

TEST(Laplacian, EmptySimilarity) {
  const LaplacianMatrix l = laplacian(from_dense(Matrix::Zero(3, 3)));
  EXPECT_EQ(l.entries().to_dense(), Matrix::Zero(3, 3));
}

TEST(Laplacian, QuadraticFormMatchesPairwiseSum) {
  std::mt19937_64 rng(16);
  const Matrix md = random_similarity(20, 0.3, rng);
  const LaplacianMatrix l = laplacian(from_dense(md));
  for (int probe = 0; probe < 10; ++probe) {
    const Matrix x = random_matrix(20, 1, rng);
    double pair = 0.0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) pair += 0.5 * md(i, j) * std::pow(x(i, 0) - x(j, 0), 2);
    }
    EXPECT_LE(rel_err(l.quadratic_form(x), pair), 1e-9);
  }
}

TEST(Laplacian, RowsSumToZeroAndPsd) {
  std::mt19937_64 rng(17);
  const Matrix md = random_similarity(30, 0.2, rng);
  const Matrix l = laplacian(from_dense(md)).entries().to_dense();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    EXPECT_LE(std::abs(l.row(i).sum()), 1e-9 * std::max(1.0, md.row(i).sum()));
  }
  for (int probe = 0; probe < 20; ++probe) {
    const Matrix x = random_matrix(30, 1, rng);
    EXPECT_GE((x.transpose() * l * x)(0, 0), -1e-9 * x.squaredNorm());
  }
}

TEST(Laplacian, TraceIdentityMultiColumn) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + trial * 4;
    const Matrix md = random_similarity(n, 0.25, rng);
    const Matrix z = random_matrix(n, 1 + trial % 8, rng);
    double brute = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) brute += 0.5 * md(i, j) * (z.row(i) - z.row(j)).squaredNorm();
    }
    const LaplacianMatrix l = laplacian(from_dense(md));
    EXPECT_LE(rel_err(l.quadratic_form(z, Exec::kSerial), brute), 1e-9);
    EXPECT_EQ(l.quadratic_form(z, Exec::kSerial), l.quadratic_form(z, Exec::kParallel));
  }
}

TEST(RestrictTo, PrincipalSubmatrix) {
  std::mt19937_64 rng(19);
  const Matrix md = random_similarity(12, 0.5, rng);
  const Mask keep{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1};
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  const Matrix sub = from_dense(md).restrict_to(keep).entries().to_dense();
  ASSERT_EQ(sub.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      EXPECT_EQ(sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), md(idx[a], idx[b]));
    }
  }
}

TEST(Persistence, RoundTripIsExact) {
  std::mt19937_64 rng(20);
  const SimilarityMatrix m = build_similarity(random_matrix(50, 4, rng), SimilarityMethod::kCosine, 5);
  const auto path = std::filesystem::temp_directory_path() / "fairgi_similarity_roundtrip.txt";
  save_similarity(m, path);
  EXPECT_EQ(load_similarity(path, 50), m);

  std::ifstream in(path);
  NodeId i = 0, j = 0, pi = -1, pj = -1;
  double v = 0.0;
  while (in >> i >> j >> v) {
    EXPECT_TRUE(i > pi || (i == pi && j > pj));
    pi = i;
    pj = j;
  }
  std::filesystem::remove(path);
}

TEST(MethodNames, ParseAndPrint) {
  EXPECT_EQ(parse_similarity_method("cosine"), SimilarityMethod::kCosine);
  EXPECT_EQ(parse_similarity_method("adjacency-jaccard"), SimilarityMethod::kAdjacencyJaccard);
  EXPECT_EQ(to_string(SimilarityMethod::kAdjacencyJaccard), "adjacency-jaccard");
  EXPECT_FAIRGI_ERROR(parse_similarity_method("euclid"), ErrorKind::kConfig);
}

}  // namespace
}  // namespace fairgi
