#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace fairgi {

// Row-major so that per-node rows are contiguous for the row-parallel kernels.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using NodeId = std::int32_t;

// Per-node boolean selector. Stored as bytes so it can be viewed as a span.
using Mask = std::vector<std::uint8_t>;

enum class BinaryLabel : std::int8_t { kZero = 0, kOne = 1, kUnknown = -1 };

inline bool is_known(BinaryLabel v) { return v != BinaryLabel::kUnknown; }
inline int as_int(BinaryLabel v) { return static_cast<int>(v); }
inline BinaryLabel from_bit(bool bit) { return bit ? BinaryLabel::kOne : BinaryLabel::kZero; }

using LabelVector = std::vector<BinaryLabel>;

std::size_t count(const Mask& mask);

// Execution policy for the kernels. The serial variant is the reference
// implementation; the parallel one must reproduce it bit for bit.
enum class Exec { kSerial, kParallel };

}  // namespace fairgi
