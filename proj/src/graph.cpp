#include "fairgi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fairgi/error.hpp"

namespace fairgi {

std::size_t count(const Mask& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double CsrMatrix::at(NodeId i, NodeId j) const {
  auto first = col.begin() + row_begin(i);
  auto last = col.begin() + row_end(i);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

Matrix CsrMatrix::to_dense() const {
  Matrix dense = Matrix::Zero(n, n);
  for (NodeId i = 0; i < n; ++i) {
    for (auto e = row_begin(i); e < row_end(i); ++e) dense(i, col[e]) = val[e];
  }
  return dense;
}

bool CsrMatrix::is_symmetric() const {
  for (NodeId i = 0; i < n; ++i) {
    for (auto e = row_begin(i); e < row_end(i); ++e) {
      if (at(col[e], i) != val[e]) return false;
    }
  }
  return true;
}

std::vector<std::int64_t> CsrMatrix::transpose_index() const {
  std::vector<std::int64_t> rev(col.size());
  for (NodeId i = 0; i < n; ++i) {
    for (auto e = row_begin(i); e < row_end(i); ++e) {
      const NodeId j = col[e];
      auto first = col.begin() + row_begin(j);
      auto last = col.begin() + row_end(j);
      auto it = std::lower_bound(first, last, i);
      if (it == last || *it != i) {
        fail(ErrorKind::kStructuralInput, "transpose_index: pattern is not symmetric");
      }
      rev[e] = it - col.begin();
    }
  }
  return rev;
}

CsrMatrix csr_from_triplets(NodeId n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  const Triplet* prev = nullptr;
  for (const auto& t : triplets) {
    if (prev != nullptr && prev->row == t.row && prev->col == t.col) {
      m.val.back() = std::max(m.val.back(), t.value);
      continue;
    }
    m.col.push_back(t.col);
    m.val.push_back(t.value);
    m.row_ptr[static_cast<std::size_t>(t.row) + 1] += 1;
    prev = &t;
  }
  for (std::size_t i = 1; i < m.row_ptr.size(); ++i) m.row_ptr[i] += m.row_ptr[i - 1];
  return m;
}

Graph Graph::with_features(Matrix features) const {
  if (features.rows() != features_.rows()) {
    fail(ErrorKind::kShape, "with_features: row count mismatch");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph build_graph(Matrix features, const std::vector<Edge>& edge_list, LabelVector labels,
                  LabelVector sensitive) {
  const auto n = static_cast<NodeId>(features.rows());
  if (!features.allFinite()) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (!std::isfinite(features(i, j))) {
          fail(ErrorKind::kValidation, "non-finite feature at row " + std::to_string(i) +
                                           ", column " + std::to_string(j));
        }
      }
    }
  }
  if (labels.empty()) labels.assign(static_cast<std::size_t>(n), BinaryLabel::kUnknown);
  if (sensitive.empty()) sensitive.assign(static_cast<std::size_t>(n), BinaryLabel::kUnknown);
  if (labels.size() != static_cast<std::size_t>(n) ||
      sensitive.size() != static_cast<std::size_t>(n)) {
    fail(ErrorKind::kStructuralInput, "label/sensitive length does not match node count");
  }
  auto check_values = [](const LabelVector& v, const char* what) {
    for (auto x : v) {
      if (x != BinaryLabel::kZero && x != BinaryLabel::kOne && x != BinaryLabel::kUnknown) {
        fail(ErrorKind::kValidation, std::string(what) + " entry outside {0, 1, unknown}");
      }
    }
  };
  check_values(labels, "label");
  check_values(sensitive, "sensitive");

  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (auto [u, v] : edge_list) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      fail(ErrorKind::kStructuralInput, "edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                            ") out of range for n = " + std::to_string(n));
    }
    if (u == v) continue;
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    triplets.push_back({u, v, 1.0});
    triplets.push_back({v, u, 1.0});
  }

  Graph g;
  g.features_ = std::move(features);
  g.adjacency_ = csr_from_triplets(n, std::move(triplets));
  g.edges_ = std::move(edges);
  g.labels_ = std::move(labels);
  g.sensitive_ = std::move(sensitive);
  return g;
}

Split split_nodes(const Graph& graph, SplitRatios ratios, std::size_t sensitive_budget,
                  std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
    fail(ErrorKind::kConfig, "split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    fail(ErrorKind::kConfig, "split ratios must sum to 1");
  }
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (sensitive_budget > n) {
    fail(ErrorKind::kConfig, "sensitive budget " + std::to_string(sensitive_budget) +
                                 " exceeds node count " + std::to_string(n));
  }

  std::vector<NodeId> labeled;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_known(graph.labels()[i])) labeled.push_back(static_cast<NodeId>(i));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(labeled.begin(), labeled.end(), rng);

  const auto total = static_cast<double>(labeled.size());
  const auto n_val = static_cast<std::size_t>(std::llround(total * ratios.val));
  const auto n_test = static_cast<std::size_t>(std::llround(total * ratios.test));
  const std::size_t n_train = labeled.size() - std::min(labeled.size(), n_val + n_test);

  Split split;
  split.train.assign(n, 0);
  split.val.assign(n, 0);
  split.test.assign(n, 0);
  split.sensitive_labeled.assign(n, 0);
  for (std::size_t r = 0; r < labeled.size(); ++r) {
    auto i = static_cast<std::size_t>(labeled[r]);
    if (r < n_train) {
      split.train[i] = 1;
    } else if (r < n_train + n_val) {
      split.val[i] = 1;
    } else {
      split.test[i] = 1;
    }
  }

  std::vector<NodeId> pool_train;
  std::vector<NodeId> pool_rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_known(graph.sensitive()[i])) continue;
    (split.train[i] ? pool_train : pool_rest).push_back(static_cast<NodeId>(i));
  }
  if (sensitive_budget > pool_train.size() + pool_rest.size()) {
    fail(ErrorKind::kConfig, "sensitive budget exceeds the number of nodes with a known "
                             "sensitive attribute");
  }
  std::shuffle(pool_train.begin(), pool_train.end(), rng);
  std::shuffle(pool_rest.begin(), pool_rest.end(), rng);
  std::size_t taken = 0;
  for (auto* pool : {&pool_train, &pool_rest}) {
    for (NodeId i : *pool) {
      if (taken == sensitive_budget) break;
      split.sensitive_labeled[static_cast<std::size_t>(i)] = 1;
      ++taken;
    }
  }
  return split;
}

GroupPartition partition_by_sensitive(const std::vector<std::uint8_t>& sensitive_bits) {
  GroupPartition p;
  p.group_of.resize(sensitive_bits.size());
  for (std::size_t i = 0; i < sensitive_bits.size(); ++i) {
    const std::uint8_t g = sensitive_bits[i] ? 1 : 0;
    p.group_of[i] = g;
    p.members[g].push_back(static_cast<NodeId>(i));
  }
  return p;
}

GroupPartition partition_by_sensitive(const LabelVector& sensitive_complete) {
  std::vector<std::uint8_t> bits(sensitive_complete.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!is_known(sensitive_complete[i])) {
      fail(ErrorKind::kValidation,
           "partition_by_sensitive: unknown sensitive value at node " + std::to_string(i));
    }
    bits[i] = sensitive_complete[i] == BinaryLabel::kOne ? 1 : 0;
  }
  return partition_by_sensitive(bits);
}

}  // namespace fairgi
