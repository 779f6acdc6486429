#pragma once

// Per-row bodies shared by the serial and OpenMP kernels. Keeping one body per
// row is what makes the two variants agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fairgi/kernels.hpp"

namespace fairgi::kernels::detail {

inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  return a.value != b.value ? a.value > b.value : a.node < b.node;
}

// Keeps the k best candidates, then drops non-positive values.
inline std::vector<Neighbor> select_topk(std::vector<Neighbor>& candidates, int k) {
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), ranks_before);
  std::vector<Neighbor> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    if (candidates[r].value > 0.0) out.push_back(candidates[r]);
  }
  return out;
}

inline std::vector<Neighbor> cosine_row(const Matrix& x, const std::vector<double>& norms,
                                        NodeId i, int k, std::vector<Neighbor>& scratch) {
  if (norms[static_cast<std::size_t>(i)] == 0.0) return {};
  scratch.clear();
  const auto n = static_cast<NodeId>(x.rows());
  for (NodeId j = 0; j < n; ++j) {
    if (j == i) continue;
    const double nj = norms[static_cast<std::size_t>(j)];
    const double c = nj == 0.0 ? 0.0 : x.row(i).dot(x.row(j)) / (norms[static_cast<std::size_t>(i)] * nj);
    scratch.push_back({j, c});
  }
  return select_topk(scratch, k);
}

inline std::vector<Neighbor> jaccard_row(const CsrMatrix& adj, NodeId i, int k,
                                         std::vector<std::int64_t>& common,
                                         std::vector<NodeId>& touched) {
  touched.clear();
  for (auto e = adj.row_begin(i); e < adj.row_end(i); ++e) {
    const NodeId u = adj.col[e];
    for (auto f = adj.row_begin(u); f < adj.row_end(u); ++f) {
      const NodeId j = adj.col[f];
      if (j == i) continue;
      if (common[static_cast<std::size_t>(j)]++ == 0) touched.push_back(j);
    }
  }
  std::vector<Neighbor> candidates;
  candidates.reserve(touched.size());
  for (NodeId j : touched) {
    const auto inter = common[static_cast<std::size_t>(j)];
    const auto uni = adj.degree(i) + adj.degree(j) - inter;
    candidates.push_back({j, static_cast<double>(inter) / static_cast<double>(uni)});
    common[static_cast<std::size_t>(j)] = 0;
  }
  return select_topk(candidates, k);
}

inline void spmm_row(const CsrMatrix& a, const Matrix& b, NodeId i, Matrix& out) {
  out.row(i).setZero();
  for (auto e = a.row_begin(i); e < a.row_end(i); ++e) out.row(i) += a.val[e] * b.row(a.col[e]);
}

inline double leaky(double v, double slope) { return v > 0.0 ? v : slope * v; }

// s(i, h) = a_dst[h] . z_i^h and t(i, h) = a_src[h] . z_i^h.
inline void gat_node_scores(const Matrix& z, const Matrix& att_src, const Matrix& att_dst,
                            NodeId i, Matrix& s, Matrix& t) {
  const auto heads = att_src.rows();
  const auto c = att_src.cols();
  for (Eigen::Index h = 0; h < heads; ++h) {
    s(i, h) = z.row(i).segment(h * c, c).dot(att_dst.row(h));
    t(i, h) = z.row(i).segment(h * c, c).dot(att_src.row(h));
  }
}

inline void gat_forward_row(const CsrMatrix& pattern, const Matrix& z, const Matrix& s,
                            const Matrix& t, double slope, NodeId i, GatForward& fwd) {
  const auto heads = s.cols();
  const auto c = z.cols() / heads;
  fwd.out.row(i).setZero();
  for (Eigen::Index h = 0; h < heads; ++h) {
    double peak = -std::numeric_limits<double>::infinity();
    for (auto e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
      const double p = s(i, h) + t(pattern.col[e], h);
      fwd.pre[static_cast<std::size_t>(e * heads + h)] = p;
      peak = std::max(peak, leaky(p, slope));
    }
    double total = 0.0;
    for (auto e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
      const auto idx = static_cast<std::size_t>(e * heads + h);
      fwd.alpha[idx] = std::exp(leaky(fwd.pre[idx], slope) - peak);
      total += fwd.alpha[idx];
    }
    for (auto e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
      const auto idx = static_cast<std::size_t>(e * heads + h);
      fwd.alpha[idx] /= total;
      fwd.out.row(i).segment(h * c, c) += fwd.alpha[idx] * z.row(pattern.col[e]).segment(h * c, c);
    }
  }
}

// First backward pass over row i: gradient w.r.t. the pre-activation score of
// each edge, and its row sum (the gradient of s(i, h)).
inline void gat_backward_scores_row(const CsrMatrix& pattern, const Matrix& z, double slope,
                                    const GatForward& fwd, const Matrix& d_out, NodeId i,
                                    std::vector<double>& d_pre, Matrix& d_s) {
  const int heads = fwd.heads;
  const auto c = z.cols() / heads;
  for (int h = 0; h < heads; ++h) {
    double weighted = 0.0;
    for (auto e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
      const auto idx = static_cast<std::size_t>(e * heads + h);
      const double d_alpha = d_out.row(i).segment(h * c, c).dot(z.row(pattern.col[e]).segment(h * c, c));
      d_pre[idx] = d_alpha;
      weighted += fwd.alpha[idx] * d_alpha;
    }
    double row_sum = 0.0;
    for (auto e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
      const auto idx = static_cast<std::size_t>(e * heads + h);
      const double slope_factor = fwd.pre[idx] > 0.0 ? 1.0 : slope;
      d_pre[idx] = fwd.alpha[idx] * (d_pre[idx] - weighted) * slope_factor;
      row_sum += d_pre[idx];
    }
    d_s(i, h) = row_sum;
  }
}

// Second backward pass, gathered over row j through the transpose index.
inline void gat_backward_gather_row(const CsrMatrix& pattern, const std::vector<std::int64_t>& rev,
                                    const Matrix& att_src, const Matrix& att_dst,
                                    const GatForward& fwd, const Matrix& d_out,
                                    const std::vector<double>& d_pre, const Matrix& d_s, NodeId j,
                                    Matrix& d_t, Matrix& d_z) {
  const int heads = fwd.heads;
  const auto c = att_src.cols();
  d_z.row(j).setZero();
  for (int h = 0; h < heads; ++h) {
    double dt = 0.0;
    for (auto e = pattern.row_begin(j); e < pattern.row_end(j); ++e) {
      const NodeId i = pattern.col[e];
      const auto idx = static_cast<std::size_t>(rev[static_cast<std::size_t>(e)] * heads + h);
      dt += d_pre[idx];
      d_z.row(j).segment(h * c, c) += fwd.alpha[idx] * d_out.row(i).segment(h * c, c);
    }
    d_t(j, h) = dt;
    d_z.row(j).segment(h * c, c) += d_s(j, h) * att_dst.row(h) + dt * att_src.row(h);
  }
}

inline void group_pair_row(const Matrix& z, const CsrMatrix& m,
                           const std::vector<std::uint8_t>& group_of, NodeId i, double& sum,
                           std::int64_t& pairs) {
  sum = 0.0;
  pairs = 0;
  const auto g = group_of[static_cast<std::size_t>(i)];
  for (auto e = m.row_begin(i); e < m.row_end(i); ++e) {
    const NodeId j = m.col[e];
    if (group_of[static_cast<std::size_t>(j)] != g || m.val[e] == 0.0) continue;
    sum += m.val[e] * (z.row(i) - z.row(j)).squaredNorm();
    ++pairs;
  }
}

inline void group_pair_grad_row(const Matrix& z, const CsrMatrix& m,
                                const std::vector<std::uint8_t>& group_of,
                                const std::vector<double>& scale, NodeId i, Matrix& grad) {
  grad.row(i).setZero();
  const auto g = group_of[static_cast<std::size_t>(i)];
  if (scale[g] == 0.0) return;
  for (auto e = m.row_begin(i); e < m.row_end(i); ++e) {
    const NodeId j = m.col[e];
    if (group_of[static_cast<std::size_t>(j)] != g) continue;
    grad.row(i) += (4.0 * m.val[e]) * (z.row(i) - z.row(j));
  }
  grad.row(i) *= scale[g];
}

inline double laplacian_row(const CsrMatrix& l, const Matrix& z, NodeId i) {
  double acc = 0.0;
  for (auto e = l.row_begin(i); e < l.row_end(i); ++e) acc += l.val[e] * z.row(i).dot(z.row(l.col[e]));
  return acc;
}

inline std::vector<double> row_norms(const Matrix& x) {
  std::vector<double> norms(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) norms[static_cast<std::size_t>(i)] = x.row(i).norm();
  return norms;
}

inline GroupPairSums reduce_group_pairs(const std::vector<std::uint8_t>& group_of, int groups,
                                        const std::vector<double>& row_sum,
                                        const std::vector<std::int64_t>& row_pairs) {
  GroupPairSums out;
  out.sum.assign(static_cast<std::size_t>(groups), 0.0);
  out.pairs.assign(static_cast<std::size_t>(groups), 0);
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    out.sum[group_of[i]] += row_sum[i];
    out.pairs[group_of[i]] += row_pairs[i];
  }
  return out;
}

inline GatBackward finish_gat_backward(const Matrix& z, const Matrix& d_s, const Matrix& d_t,
                                       Matrix d_z, Eigen::Index channels) {
  GatBackward out;
  const auto heads = d_s.cols();
  out.d_att_src.resize(heads, channels);
  out.d_att_dst.resize(heads, channels);
  for (Eigen::Index h = 0; h < heads; ++h) {
    out.d_att_dst.row(h) = d_s.col(h).transpose() * z.middleCols(h * channels, channels);
    out.d_att_src.row(h) = d_t.col(h).transpose() * z.middleCols(h * channels, channels);
  }
  out.d_z = std::move(d_z);
  return out;
}

}  // namespace fairgi::kernels::detail
