#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fairgi/csr.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

using Edge = std::pair<NodeId, NodeId>;

// Attributed undirected graph with binary labels and a binary sensitive
// attribute, either of which may be unknown per node. Immutable once built.
class Graph {
 public:
  NodeId num_nodes() const { return static_cast<NodeId>(features_.rows()); }
  Eigen::Index feature_dim() const { return features_.cols(); }

  const Matrix& features() const { return features_; }
  const CsrMatrix& adjacency() const { return adjacency_; }
  // Unordered edges (u < v), sorted.
  const std::vector<Edge>& edges() const { return edges_; }
  const LabelVector& labels() const { return labels_; }
  const LabelVector& sensitive() const { return sensitive_; }

  // Same topology and labels with replaced features (e.g. after
  // normalization). Width may change.
  Graph with_features(Matrix features) const;

 private:
  friend Graph build_graph(Matrix, const std::vector<Edge>&, LabelVector, LabelVector);

  Matrix features_;
  CsrMatrix adjacency_;
  std::vector<Edge> edges_;
  LabelVector labels_;
  LabelVector sensitive_;
};

// Symmetrizes and deduplicates the edge list, drops self-loops. Empty label
// or sensitive vectors mean "all unknown".
Graph build_graph(Matrix features, const std::vector<Edge>& edge_list,
                  LabelVector labels = {}, LabelVector sensitive = {});

struct SplitRatios {
  double train = 0.5;
  double val = 0.25;
  double test = 0.25;
};

struct Split {
  Mask train;
  Mask val;
  Mask test;
  Mask sensitive_labeled;

  friend bool operator==(const Split&, const Split&) = default;
};

// Random split of the label-known nodes. The sensitive-label budget is drawn
// from training nodes first and spills into the remaining nodes only when it
// exceeds the training set.
Split split_nodes(const Graph& graph, SplitRatios ratios, std::size_t sensitive_budget,
                  std::uint64_t seed);

// Group 1 is the protected group (s = 1), group 0 the unprotected one.
struct GroupPartition {
  std::vector<std::uint8_t> group_of;
  std::array<std::vector<NodeId>, 2> members;

  static constexpr int kNumGroups = 2;
};

GroupPartition partition_by_sensitive(const LabelVector& sensitive_complete);
GroupPartition partition_by_sensitive(const std::vector<std::uint8_t>& sensitive_bits);

}  // namespace fairgi
