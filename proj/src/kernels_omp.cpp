#include <cstdint>
#include <limits>
#include <vector>

#include "fairgi/error.hpp"
#include "fairgi/kernels.hpp"
#include "kernel_rows.hpp"

namespace fairgi::kernels::omp {

RowSelection cosine_topk(const Matrix& x, int k) {
  const auto n = static_cast<NodeId>(x.rows());
  const auto norms = detail::row_norms(x);
  RowSelection rows(static_cast<std::size_t>(n));
#pragma omp parallel
  {
    std::vector<Neighbor> scratch;
#pragma omp for schedule(dynamic, 64)
    for (NodeId i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = detail::cosine_row(x, norms, i, k, scratch);
  }
  return rows;
}

RowSelection jaccard_topk(const CsrMatrix& adjacency, int k) {
  const NodeId n = adjacency.n;
  RowSelection rows(static_cast<std::size_t>(n));
#pragma omp parallel
  {
    std::vector<std::int64_t> common(static_cast<std::size_t>(n), 0);
    std::vector<NodeId> touched;
#pragma omp for schedule(dynamic, 64)
    for (NodeId i = 0; i < n; ++i) {
      rows[static_cast<std::size_t>(i)] = detail::jaccard_row(adjacency, i, k, common, touched);
    }
  }
  return rows;
}

Matrix spmm(const CsrMatrix& a, const Matrix& b) {
  if (b.rows() != a.n) fail(ErrorKind::kShape, "spmm: inner dimension mismatch");
  Matrix out(a.n, b.cols());
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < a.n; ++i) detail::spmm_row(a, b, i, out);
  return out;
}

GatForward gat_forward(const CsrMatrix& pattern, const Matrix& z, const Matrix& att_src,
                       const Matrix& att_dst, double negative_slope) {
  const auto heads = att_src.rows();
  const NodeId n = pattern.n;
  Matrix s(n, heads);
  Matrix t(n, heads);
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < n; ++i) detail::gat_node_scores(z, att_src, att_dst, i, s, t);

  GatForward fwd;
  fwd.heads = static_cast<int>(heads);
  fwd.pre.resize(static_cast<std::size_t>(pattern.nnz() * heads));
  fwd.alpha.resize(fwd.pre.size());
  fwd.out.resize(n, z.cols());
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < n; ++i) detail::gat_forward_row(pattern, z, s, t, negative_slope, i, fwd);
  return fwd;
}

GatBackward gat_backward(const CsrMatrix& pattern, const std::vector<std::int64_t>& rev,
                         const Matrix& z, const Matrix& att_src, const Matrix& att_dst,
                         double negative_slope, const GatForward& fwd, const Matrix& d_out) {
  const NodeId n = pattern.n;
  const auto heads = att_src.rows();
  std::vector<double> d_pre(fwd.alpha.size());
  Matrix d_s(n, heads);
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < n; ++i) {
    detail::gat_backward_scores_row(pattern, z, negative_slope, fwd, d_out, i, d_pre, d_s);
  }
  Matrix d_t(n, heads);
  Matrix d_z(n, z.cols());
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId j = 0; j < n; ++j) {
    detail::gat_backward_gather_row(pattern, rev, att_src, att_dst, fwd, d_out, d_pre, d_s, j, d_t, d_z);
  }
  return detail::finish_gat_backward(z, d_s, d_t, std::move(d_z), att_src.cols());
}

GroupPairSums group_pair_sums(const Matrix& z, const CsrMatrix& m,
                              const std::vector<std::uint8_t>& group_of, int groups) {
  const NodeId n = m.n;
  std::vector<double> row_sum(static_cast<std::size_t>(n));
  std::vector<std::int64_t> row_pairs(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < n; ++i) {
    detail::group_pair_row(z, m, group_of, i, row_sum[static_cast<std::size_t>(i)],
                           row_pairs[static_cast<std::size_t>(i)]);
  }
  return detail::reduce_group_pairs(group_of, groups, row_sum, row_pairs);
}

Matrix group_pair_grad(const Matrix& z, const CsrMatrix& m,
                       const std::vector<std::uint8_t>& group_of,
                       const std::vector<double>& group_scale) {
  Matrix grad(z.rows(), z.cols());
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < m.n; ++i) detail::group_pair_grad_row(z, m, group_of, group_scale, i, grad);
  return grad;
}

double laplacian_quadratic(const CsrMatrix& laplacian, const Matrix& z) {
  std::vector<double> partial(static_cast<std::size_t>(laplacian.n));
#pragma omp parallel for schedule(dynamic, 64)
  for (NodeId i = 0; i < laplacian.n; ++i) {
    partial[static_cast<std::size_t>(i)] = detail::laplacian_row(laplacian, z, i);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace fairgi::kernels::omp
