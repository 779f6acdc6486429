#pragma once

#include <cstdint>
#include <vector>

#include "fairgi/csr.hpp"
#include "fairgi/types.hpp"

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp. Work is split by
// row; every reduction first produces per-row partials and then sums them in
// row order, so both variants return bit-identical results.
namespace fairgi::kernels {

struct Neighbor {
  NodeId node;
  double value;
};

using RowSelection = std::vector<std::vector<Neighbor>>;

// Attention scores and coefficients for one graph attention layer, stored
// per (edge, head) at index edge * heads + head.
struct GatForward {
  int heads = 1;
  std::vector<double> pre;    // a_dst.z_i + a_src.z_j before the leaky ReLU
  std::vector<double> alpha;  // softmax over each row
  Matrix out;                 // n x (heads * channels)
};

struct GatBackward {
  Matrix d_z;
  Matrix d_att_src;  // heads x channels
  Matrix d_att_dst;
};

struct GroupPairSums {
  std::vector<double> sum;         // per group: sum_{i,j in g} M_ij ||z_i - z_j||^2
  std::vector<std::int64_t> pairs; // per group: ordered pairs with M_ij != 0
};

#define FAIRGI_KERNEL_DECLS                                                                   \
  RowSelection cosine_topk(const Matrix& x, int k);                                           \
  RowSelection jaccard_topk(const CsrMatrix& adjacency, int k);                               \
  Matrix spmm(const CsrMatrix& a, const Matrix& b);                                           \
  GatForward gat_forward(const CsrMatrix& pattern, const Matrix& z, const Matrix& att_src,    \
                         const Matrix& att_dst, double negative_slope);                       \
  GatBackward gat_backward(const CsrMatrix& pattern, const std::vector<std::int64_t>& rev,    \
                           const Matrix& z, const Matrix& att_src, const Matrix& att_dst,     \
                           double negative_slope, const GatForward& fwd, const Matrix& d_out); \
  GroupPairSums group_pair_sums(const Matrix& z, const CsrMatrix& m,                          \
                                const std::vector<std::uint8_t>& group_of, int groups);       \
  Matrix group_pair_grad(const Matrix& z, const CsrMatrix& m,                                 \
                         const std::vector<std::uint8_t>& group_of,                           \
                         const std::vector<double>& group_scale);                             \
  double laplacian_quadratic(const CsrMatrix& laplacian, const Matrix& z);

namespace serial {
FAIRGI_KERNEL_DECLS
}  // namespace serial

namespace omp {
FAIRGI_KERNEL_DECLS
}  // namespace omp

#undef FAIRGI_KERNEL_DECLS

inline RowSelection cosine_topk(const Matrix& x, int k, Exec exec) {
  return exec == Exec::kSerial ? serial::cosine_topk(x, k) : omp::cosine_topk(x, k);
}
inline RowSelection jaccard_topk(const CsrMatrix& adjacency, int k, Exec exec) {
  return exec == Exec::kSerial ? serial::jaccard_topk(adjacency, k)
                               : omp::jaccard_topk(adjacency, k);
}
inline Matrix spmm(const CsrMatrix& a, const Matrix& b, Exec exec) {
  return exec == Exec::kSerial ? serial::spmm(a, b) : omp::spmm(a, b);
}
inline GatForward gat_forward(const CsrMatrix& pattern, const Matrix& z, const Matrix& att_src,
                              const Matrix& att_dst, double negative_slope, Exec exec) {
  return exec == Exec::kSerial ? serial::gat_forward(pattern, z, att_src, att_dst, negative_slope)
                               : omp::gat_forward(pattern, z, att_src, att_dst, negative_slope);
}
inline GatBackward gat_backward(const CsrMatrix& pattern, const std::vector<std::int64_t>& rev,
                                const Matrix& z, const Matrix& att_src, const Matrix& att_dst,
                                double negative_slope, const GatForward& fwd, const Matrix& d_out,
                                Exec exec) {
  return exec == Exec::kSerial
             ? serial::gat_backward(pattern, rev, z, att_src, att_dst, negative_slope, fwd, d_out)
             : omp::gat_backward(pattern, rev, z, att_src, att_dst, negative_slope, fwd, d_out);
}
inline GroupPairSums group_pair_sums(const Matrix& z, const CsrMatrix& m,
                                     const std::vector<std::uint8_t>& group_of, int groups,
                                     Exec exec) {
  return exec == Exec::kSerial ? serial::group_pair_sums(z, m, group_of, groups)
                               : omp::group_pair_sums(z, m, group_of, groups);
}
inline Matrix group_pair_grad(const Matrix& z, const CsrMatrix& m,
                              const std::vector<std::uint8_t>& group_of,
                              const std::vector<double>& group_scale, Exec exec) {
  return exec == Exec::kSerial ? serial::group_pair_grad(z, m, group_of, group_scale)
                               : omp::group_pair_grad(z, m, group_of, group_scale);
}
inline double laplacian_quadratic(const CsrMatrix& laplacian, const Matrix& z, Exec exec) {
  return exec == Exec::kSerial ? serial::laplacian_quadratic(laplacian, z)
                               : omp::laplacian_quadratic(laplacian, z);
}

}  // namespace fairgi::kernels
