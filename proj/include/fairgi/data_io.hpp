#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairgi/graph.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

// Describes a node table plus an edge list on disk.
//
// nodes file: header row, then one row per node. Node index is the 0-based
// row position; the id column is carried but not interpreted. Empty label or
// sensitive cells mean unknown.
// edges file: header row "src<delim>dst", then 0-based node index pairs.
struct DatasetSchema {
  std::filesystem::path nodes_path;
  std::filesystem::path edges_path;
  std::string id_column = "id";
  std::string sensitive_column = "sensitive";
  std::string label_column = "label";
  std::vector<std::string> feature_columns;  // empty: every other column, in file order
  char delimiter = ',';
  bool verbose = false;
};

// Schema for <dir>/nodes.csv and <dir>/edges.csv with default column names.
DatasetSchema default_schema(const std::filesystem::path& dir);

struct NodeTable {
  Matrix features;
  LabelVector labels;
  LabelVector sensitive;
};

// The node file alone.
NodeTable load_nodes(const DatasetSchema& schema);
Graph load_dataset(const DatasetSchema& schema);

// Purely numeric delimited table with an optional header row.
Matrix load_numeric_csv(const std::filesystem::path& path, char delimiter = ',');
std::vector<std::string> dataset_feature_names(const DatasetSchema& schema);

void save_dataset(const Graph& graph, const std::filesystem::path& nodes_path,
                  const std::filesystem::path& edges_path,
                  const std::vector<std::string>& feature_names = {});

// Per-column standardization (1/N variance). Statistics come from the rows
// selected by `stats_rows` (all rows when empty) and are applied to every row.
// Zero-variance columns become all zeros.
Matrix normalize_features(const Matrix& x, const Mask& stats_rows = {});

struct SyntheticConfig {
  std::array<int, 2> nodes_per_group{500, 500};
  double p_intra = 0.01;
  double p_inter = 0.001;
  int feature_dim = 8;
  // Probability that a label copies the sensitive-correlated latent instead
  // of the fair latent.
  double label_bias = 0.8;
  double group_shift = 1.0;          // mean offset of the group-shifted feature columns
  double latent_merit_weight = 0.25; // weight of the merit feature in the biased latent
  double latent_group_shift = 0.5;   // group offset inside the biased latent
  // Within a group, same-merit-sign pairs connect with probability
  // p_intra (1 + h) and other pairs with p_intra (1 - h).
  double merit_homophily = 0.8;
  std::uint64_t seed = 0;
};

void validate(const SyntheticConfig& config);

// Two-block stochastic block model. Sensitive = block id. Feature 0 is a
// group-independent merit score u ~ N(0, 1); the remaining columns are
// N(0, 1) shifted by +/- group_shift. The fair latent is [u > 0]; the biased
// latent is [w_u u + c (2s - 1) + noise > 0] with private standard-normal
// noise. Inside a block, edges favour nodes with the same fair latent.
Graph gen_synthetic(const SyntheticConfig& config);

}  // namespace fairgi
