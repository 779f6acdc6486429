#pragma once

#include <filesystem>
#include <string_view>

#include "fairgi/csr.hpp"
#include "fairgi/graph.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

enum class SimilarityMethod { kCosine, kAdjacencyJaccard };

SimilarityMethod parse_similarity_method(std::string_view name);
std::string_view to_string(SimilarityMethod method);

// Sparse symmetric node-similarity matrix with nonnegative entries and zero
// diagonal. Only nonzero entries are stored, so nnz() is the number of
// ordered pairs with nonzero similarity.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  // Validates symmetry, nonnegativity and the empty diagonal.
  explicit SimilarityMatrix(CsrMatrix entries);

  const CsrMatrix& entries() const { return entries_; }
  NodeId size() const { return entries_.n; }
  std::int64_t nnz() const { return entries_.nnz(); }
  double at(NodeId i, NodeId j) const { return entries_.at(i, j); }

  // Principal submatrix on the selected nodes, reindexed in ascending order.
  SimilarityMatrix restrict_to(const Mask& keep) const;

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  CsrMatrix entries_;
};

class LaplacianMatrix {
 public:
  const CsrMatrix& entries() const { return entries_; }
  // trace(Z^T L Z)
  double quadratic_form(const Matrix& z, Exec exec = Exec::kParallel) const;

 private:
  friend LaplacianMatrix laplacian(const SimilarityMatrix&);
  CsrMatrix entries_;
};

// Per-node top-k most similar other nodes (ties to the lower index), negative
// values clipped to zero, symmetrized by elementwise max.
SimilarityMatrix build_similarity(const Matrix& features, SimilarityMethod method, int k,
                                  Exec exec = Exec::kParallel);
// Same, but adjacency-jaccard reads the graph structure.
SimilarityMatrix build_similarity(const Graph& graph, SimilarityMethod method, int k,
                                  Exec exec = Exec::kParallel);

// L = D - M
LaplacianMatrix laplacian(const SimilarityMatrix& m);

// Coordinate-list text: one "i j value" line per stored entry, sorted by (i, j).
void save_similarity(const SimilarityMatrix& m, const std::filesystem::path& path);
SimilarityMatrix load_similarity(const std::filesystem::path& path, NodeId n);

}  // namespace fairgi
