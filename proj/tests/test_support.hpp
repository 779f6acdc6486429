#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fairgi/error.hpp"
#include "fairgi/graph.hpp"
#include "oracles.hpp"

namespace fairgi::testing {

#define EXPECT_FAIRGI_ERROR(stmt, expected_kind)                                    \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "expected " << ::fairgi::to_string(expected_kind) << " error"; \
    } catch (const ::fairgi::Error& e) {                                            \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                               \
    }                                                                               \
  } while (0)

inline LabelVector labels_of(const std::vector<int>& v) {
  LabelVector out;
  for (int x : v) out.push_back(x < 0 ? BinaryLabel::kUnknown : from_bit(x == 1));
  return out;
}

inline Mask all_mask(std::size_t n) { return Mask(n, 1); }

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Erdos-Renyi graph with random features, labels and sensitive values.
inline Graph random_graph(int n, int d, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  LabelVector y(static_cast<std::size_t>(n));
  LabelVector s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = from_bit(unit(rng) < 0.5);
    s[static_cast<std::size_t>(i)] = from_bit(unit(rng) < 0.5);
  }
  return build_graph(random_matrix(n, d, rng), edges, y, s);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

using oracle::grad_rel_err;
using oracle::numeric_grad;

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "fairgi_";
    if (info != nullptr) name += std::string(info->test_suite_name()) + "_" + info->name();
    for (auto& c : name) {
      if (c == '/') c = '_';
    }
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fairgi::testing
