#include "fairgi/similarity.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fairgi/error.hpp"
#include "fairgi/kernels.hpp"

namespace fairgi {

SimilarityMethod parse_similarity_method(std::string_view name) {
  if (name == "cosine") return SimilarityMethod::kCosine;
  if (name == "adjacency-jaccard") return SimilarityMethod::kAdjacencyJaccard;
  fail(ErrorKind::kConfig, "unknown similarity method '" + std::string(name) + "'");
}

std::string_view to_string(SimilarityMethod method) {
  return method == SimilarityMethod::kCosine ? "cosine" : "adjacency-jaccard";
}

SimilarityMatrix::SimilarityMatrix(CsrMatrix entries) : entries_(std::move(entries)) {
  for (NodeId i = 0; i < entries_.n; ++i) {
    for (auto e = entries_.row_begin(i); e < entries_.row_end(i); ++e) {
      const double v = entries_.val[e];
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorKind::kValidation, "similarity entries must be finite and nonnegative");
      }
      if (entries_.col[e] == i && v != 0.0) {
        fail(ErrorKind::kValidation, "similarity diagonal must be zero");
      }
    }
  }
  if (!entries_.is_symmetric()) fail(ErrorKind::kValidation, "similarity matrix is not symmetric");

  // Drop explicit zeros so that nnz counts nonzero similarities only.
  std::vector<Triplet> kept;
  for (NodeId i = 0; i < entries_.n; ++i) {
    for (auto e = entries_.row_begin(i); e < entries_.row_end(i); ++e) {
      if (entries_.val[e] != 0.0) kept.push_back({i, entries_.col[e], entries_.val[e]});
    }
  }
  if (static_cast<std::int64_t>(kept.size()) != entries_.nnz()) {
    entries_ = csr_from_triplets(entries_.n, std::move(kept));
  }
}

SimilarityMatrix SimilarityMatrix::restrict_to(const Mask& keep) const {
  if (keep.size() != static_cast<std::size_t>(entries_.n)) {
    fail(ErrorKind::kShape, "restrict_to: mask length mismatch");
  }
  std::vector<NodeId> index(keep.size(), -1);
  NodeId next = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) index[i] = next++;
  }
  std::vector<Triplet> triplets;
  for (NodeId i = 0; i < entries_.n; ++i) {
    if (index[static_cast<std::size_t>(i)] < 0) continue;
    for (auto e = entries_.row_begin(i); e < entries_.row_end(i); ++e) {
      const NodeId j = index[static_cast<std::size_t>(entries_.col[e])];
      if (j >= 0) triplets.push_back({index[static_cast<std::size_t>(i)], j, entries_.val[e]});
    }
  }
  return SimilarityMatrix(csr_from_triplets(next, std::move(triplets)));
}

double LaplacianMatrix::quadratic_form(const Matrix& z, Exec exec) const {
  if (z.rows() != entries_.n) fail(ErrorKind::kShape, "quadratic_form: row count mismatch");
  return kernels::laplacian_quadratic(entries_, z, exec);
}

namespace {

SimilarityMatrix symmetrize(NodeId n, const kernels::RowSelection& rows) {
  std::vector<Triplet> triplets;
  for (NodeId i = 0; i < n; ++i) {
    for (const auto& nb : rows[static_cast<std::size_t>(i)]) {
      triplets.push_back({i, nb.node, nb.value});
      triplets.push_back({nb.node, i, nb.value});
    }
  }
  return SimilarityMatrix(csr_from_triplets(n, std::move(triplets)));
}

void check_k(NodeId n, int k) {
  if (k < 1) fail(ErrorKind::kConfig, "similarity k must be at least 1");
  if (k >= n) {
    fail(ErrorKind::kConfig, "similarity k = " + std::to_string(k) +
                                 " must be smaller than the node count " + std::to_string(n));
  }
}

}  // namespace

SimilarityMatrix build_similarity(const Matrix& features, SimilarityMethod method, int k,
                                  Exec exec) {
  if (method != SimilarityMethod::kCosine) {
    fail(ErrorKind::kConfig, "adjacency-jaccard similarity needs the graph structure");
  }
  const auto n = static_cast<NodeId>(features.rows());
  check_k(n, k);
  if (!features.allFinite()) fail(ErrorKind::kValidation, "build_similarity: non-finite feature");
  return symmetrize(n, kernels::cosine_topk(features, k, exec));
}

SimilarityMatrix build_similarity(const Graph& graph, SimilarityMethod method, int k, Exec exec) {
  if (method == SimilarityMethod::kCosine) return build_similarity(graph.features(), method, k, exec);
  check_k(graph.num_nodes(), k);
  return symmetrize(graph.num_nodes(), kernels::jaccard_topk(graph.adjacency(), k, exec));
}

LaplacianMatrix laplacian(const SimilarityMatrix& m) {
  const auto& a = m.entries();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nnz() + a.n));
  for (NodeId i = 0; i < a.n; ++i) {
    double degree = 0.0;
    for (auto e = a.row_begin(i); e < a.row_end(i); ++e) {
      degree += a.val[e];
      triplets.push_back({i, a.col[e], -a.val[e]});
    }
    if (degree != 0.0) triplets.push_back({i, i, degree});
  }
  LaplacianMatrix l;
  l.entries_ = csr_from_triplets(a.n, std::move(triplets));
  return l;
}

void save_similarity(const SimilarityMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  const auto& a = m.entries();
  char buf[64];
  for (NodeId i = 0; i < a.n; ++i) {
    for (auto e = a.row_begin(i); e < a.row_end(i); ++e) {
      std::snprintf(buf, sizeof buf, "%.17g", a.val[e]);
      out << i << ' ' << a.col[e] << ' ' << buf << '\n';
    }
  }
}

SimilarityMatrix load_similarity(const std::filesystem::path& path, NodeId n) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    double v = 0.0;
    if (!(fields >> i >> j >> v)) {
      fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": expected 'i j value'");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      fail(ErrorKind::kStructuralInput,
           path.string() + ":" + std::to_string(line_no) + ": index out of range");
    }
    triplets.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), v});
  }
  return SimilarityMatrix(csr_from_triplets(n, std::move(triplets)));
}

}  // namespace fairgi
