#pragma once

#include <cstdint>
#include <vector>

#include "fairgi/types.hpp"

namespace fairgi {

// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  NodeId n = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<NodeId> col;
  std::vector<double> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
  std::int64_t row_begin(NodeId i) const { return row_ptr[static_cast<std::size_t>(i)]; }
  std::int64_t row_end(NodeId i) const { return row_ptr[static_cast<std::size_t>(i) + 1]; }
  std::int64_t degree(NodeId i) const { return row_end(i) - row_begin(i); }

  // Stored value at (i, j), or 0 when the entry is absent.
  double at(NodeId i, NodeId j) const;

  Matrix to_dense() const;
  bool is_symmetric() const;

  // For each stored entry (i, j), the position of (j, i). Requires a
  // symmetric pattern.
  std::vector<std::int64_t> transpose_index() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

struct Triplet {
  NodeId row;
  NodeId col;
  double value;
};

// Builds a CSR matrix; duplicate (row, col) entries keep the larger value.
CsrMatrix csr_from_triplets(NodeId n, std::vector<Triplet> triplets);

}  // namespace fairgi
