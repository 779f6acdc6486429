#include <algorithm>
#include <limits>
#include <set>

#include "fairgi/graph.hpp"
#include "test_support.hpp"

namespace fairgi {
namespace {

using testing::labels_of;

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TEST(BuildGraph, SingleEdgeIsSymmetric) {
  const Graph g = build_graph(column({0, 1}), {{0, 1}});
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(g.adjacency().to_dense(), expected);
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}}));
}

TEST(BuildGraph, OutOfRangeEndpoint) {
  EXPECT_FAIRGI_ERROR(build_graph(column({0, 1}), {{0, 5}}), ErrorKind::kStructuralInput);
  EXPECT_FAIRGI_ERROR(build_graph(column({0, 1}), {{-1, 0}}), ErrorKind::kStructuralInput);
}

TEST(BuildGraph, DeduplicatesAndDropsSelfLoops) {
  const std::vector<Edge> raw{{0, 1}, {1, 0}, {0, 0}};
  const Graph g = build_graph(column({0, 1}), raw);

  // Oracle: normalize the raw list into a set of unordered non-loop pairs.
  std::set<std::pair<NodeId, NodeId>> oracle;
  for (auto [u, v] : raw) {
    if (u != v) oracle.insert({std::min(u, v), std::max(u, v)});
  }
  EXPECT_EQ(g.edges(), std::vector<Edge>(oracle.begin(), oracle.end()));
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(g.adjacency().to_dense(), expected);
}

TEST(BuildGraph, NonFiniteFeature) {
  EXPECT_FAIRGI_ERROR(build_graph(column({0, std::numeric_limits<double>::quiet_NaN()}), {}),
                      ErrorKind::kValidation);
  EXPECT_FAIRGI_ERROR(build_graph(column({std::numeric_limits<double>::infinity(), 0}), {}),
                      ErrorKind::kValidation);
}

TEST(BuildGraph, LabelLengthMismatch) {
  EXPECT_ANY_THROW(build_graph(column({0, 1}), {}, labels_of({1}), {}));
}

TEST(BuildGraph, AdjacencyEqualsTransposeOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = testing::random_graph(30, 3, 0.15, seed);
    const Matrix a = g.adjacency().to_dense();
    EXPECT_EQ(a, a.transpose());
    EXPECT_EQ(a.diagonal().cwiseAbs().sum(), 0.0);
    EXPECT_EQ(static_cast<std::size_t>(g.adjacency().nnz()), 2 * g.edges().size());
  }
}

TEST(SplitNodes, DefaultRatios) {
  const Graph g = testing::random_graph(100, 2, 0.05, 1);
  const Split s = split_nodes(g, SplitRatios{0.5, 0.25, 0.25}, 10, 7);
  EXPECT_EQ(count(s.train), 50u);
  EXPECT_EQ(count(s.val), 25u);
  EXPECT_EQ(count(s.test), 25u);
  EXPECT_EQ(count(s.sensitive_labeled), 10u);
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    EXPECT_LE(s.train[i] + s.val[i] + s.test[i], 1);
    if (s.sensitive_labeled[i]) EXPECT_TRUE(s.train[i]);
  }
}

TEST(SplitNodes, Deterministic) {
  const Graph g = testing::random_graph(80, 2, 0.05, 2);
  EXPECT_EQ(split_nodes(g, {}, 20, 3), split_nodes(g, {}, 20, 3));
  EXPECT_NE(split_nodes(g, {}, 20, 3).train, split_nodes(g, {}, 20, 4).train);
}

TEST(SplitNodes, RatioSumMismatch) {
  const Graph g = testing::random_graph(10, 2, 0.1, 3);
  EXPECT_FAIRGI_ERROR(split_nodes(g, SplitRatios{0.5, 0.3, 0.3}, 1, 0), ErrorKind::kConfig);
  EXPECT_FAIRGI_ERROR(split_nodes(g, SplitRatios{1.0, 0.0, 0.0}, 1, 0), ErrorKind::kConfig);
}

TEST(SplitNodes, BudgetAboveNodeCount) {
  const Graph g = testing::random_graph(10, 2, 0.1, 3);
  EXPECT_FAIRGI_ERROR(split_nodes(g, {}, 11, 0), ErrorKind::kConfig);
}

TEST(SplitNodes, UnknownLabelsExcludedFromMasks) {
  Matrix x = Matrix::Zero(8, 1);
  const Graph g = build_graph(x, {}, labels_of({1, 0, -1, 1, 0, -1, 1, 0}), labels_of({1, 0, 1, 0, 1, 0, 1, 0}));
  const Split s = split_nodes(g, {}, 2, 5);
  EXPECT_EQ(count(s.train) + count(s.val) + count(s.test), 6u);
  for (std::size_t i : {2u, 5u}) EXPECT_FALSE(s.train[i] || s.val[i] || s.test[i]);
}

TEST(SplitNodes, BudgetBeyondTrainingSpillsIntoOtherNodes) {
  const Graph g = testing::random_graph(20, 2, 0.1, 4);
  const Split s = split_nodes(g, {}, 15, 9);
  EXPECT_EQ(count(s.sensitive_labeled), 15u);
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    if (s.train[i]) EXPECT_TRUE(s.sensitive_labeled[i]);
  }
}

TEST(PartitionBySensitive, DirectPartition) {
  const GroupPartition p = partition_by_sensitive(labels_of({1, 0, 1, 0}));
  EXPECT_EQ(p.members[1], (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(p.members[0], (std::vector<NodeId>{1, 3}));
  EXPECT_EQ(p.group_of, (std::vector<std::uint8_t>{1, 0, 1, 0}));
}

TEST(PartitionBySensitive, SingleGroup) {
  const GroupPartition p = partition_by_sensitive(labels_of({0, 0, 0}));
  EXPECT_TRUE(p.members[1].empty());
  EXPECT_EQ(p.members[0], (std::vector<NodeId>{0, 1, 2}));
}

TEST(PartitionBySensitive, UnknownEntry) {
  EXPECT_FAIRGI_ERROR(partition_by_sensitive(labels_of({1, -1})), ErrorKind::kValidation);
}

TEST(Csr, DuplicateTripletsKeepMax) {
  const CsrMatrix m = csr_from_triplets(2, {{0, 1, 0.2}, {0, 1, 0.7}, {1, 0, 0.3}});
  EXPECT_EQ(m.nnz(), 2);
  EXPECT_EQ(m.at(0, 1), 0.7);
  EXPECT_EQ(m.at(1, 0), 0.3);
  EXPECT_EQ(m.at(0, 0), 0.0);
}

TEST(Csr, TransposeIndex) {
  const Graph g = testing::random_graph(25, 1, 0.2, 5);
  const CsrMatrix& a = g.adjacency();
  const auto rev = a.transpose_index();
  for (NodeId i = 0; i < a.n; ++i) {
    for (auto e = a.row_begin(i); e < a.row_end(i); ++e) {
      const auto r = rev[static_cast<std::size_t>(e)];
      EXPECT_EQ(a.col[static_cast<std::size_t>(r)], i);
    }
  }
}

}  // namespace
}  // namespace fairgi
