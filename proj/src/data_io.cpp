#include "fairgi/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "fairgi/error.hpp"

namespace fairgi {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

BinaryLabel parse_binary(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) return BinaryLabel::kUnknown;
  double v = 0.0;
  if (!parse_double(t, v) || (v != 0.0 && v != 1.0)) {
    fail(ErrorKind::kParse, where + ": expected 0, 1 or empty, got '" + t + "'");
  }
  return from_bit(v == 1.0);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path.string());
  return in;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DatasetSchema default_schema(const std::filesystem::path& dir) {
  DatasetSchema s;
  s.nodes_path = dir / "nodes.csv";
  s.edges_path = dir / "edges.csv";
  return s;
}

std::vector<std::string> dataset_feature_names(const DatasetSchema& schema) {
  auto in = open_in(schema.nodes_path);
  std::string header;
  if (!std::getline(in, header)) fail(ErrorKind::kParse, schema.nodes_path.string() + ": missing header");
  if (!schema.feature_columns.empty()) return schema.feature_columns;
  std::vector<std::string> names;
  for (auto& c : split_line(header, schema.delimiter)) {
    c = trim(c);
    if (c != schema.id_column && c != schema.sensitive_column && c != schema.label_column) names.push_back(c);
  }
  return names;
}

NodeTable load_nodes(const DatasetSchema& schema) {
  for (const auto& f : schema.feature_columns) {
    if (f == schema.sensitive_column || f == schema.label_column) {
      fail(ErrorKind::kSchema, "column '" + f + "' cannot be both a feature and a target");
    }
  }
  auto in = open_in(schema.nodes_path);
  const std::string nodes_name = schema.nodes_path.string();
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kParse, nodes_name + ": missing header");
  auto header = split_line(line, schema.delimiter);
  for (auto& h : header) h = trim(h);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::kSchema, nodes_name + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t sens_col = column(schema.sensitive_column);
  const std::size_t label_col = column(schema.label_column);
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] != schema.id_column && c != sens_col && c != label_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& f : schema.feature_columns) feature_cols.push_back(column(f));
  }

  std::vector<std::vector<double>> rows;
  LabelVector labels;
  LabelVector sensitive;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, schema.delimiter);
    const std::string where = nodes_name + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      fail(ErrorKind::kParse, where + ": expected " + std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        fail(ErrorKind::kParse, where + ": non-numeric feature '" + header[c] + "' = '" + cells[c] + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    labels.push_back(parse_binary(cells[label_col], where + " (" + schema.label_column + ")"));
    sensitive.push_back(parse_binary(cells[sens_col], where + " (" + schema.sensitive_column + ")"));
  }

  NodeTable table;
  table.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      table.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  table.labels = std::move(labels);
  table.sensitive = std::move(sensitive);
  return table;
}

Graph load_dataset(const DatasetSchema& schema) {
  NodeTable nodes = load_nodes(schema);
  const std::string nodes_name = schema.nodes_path.string();
  auto edges_in = open_in(schema.edges_path);
  const std::string edges_name = schema.edges_path.string();
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(edges_in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, schema.delimiter);
    double u = 0.0;
    double v = 0.0;
    const bool numeric = cells.size() == 2 && parse_double(cells[0], u) && parse_double(cells[1], v);
    if (first && !numeric) {  // header
      first = false;
      continue;
    }
    first = false;
    if (!numeric || u != std::floor(u) || v != std::floor(v)) {
      fail(ErrorKind::kParse, edges_name + ":" + std::to_string(line_no) + ": expected two node indices");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }

  Graph g = build_graph(std::move(nodes.features), edges, std::move(nodes.labels), std::move(nodes.sensitive));
  if (schema.verbose) {
    std::clog << "loaded " << nodes_name << ": " << g.num_nodes() << " nodes, " << g.feature_dim()
              << " features, " << g.edges().size() << " undirected edges\n";
  }
  return g;
}

Matrix load_numeric_csv(const std::filesystem::path& path, char delimiter) {
  auto in = open_in(path);
  const std::string name = path.string();
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, delimiter);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size() && numeric; ++c) numeric = parse_double(cells[c], row[c]);
    if (!numeric) {
      if (line_no == 1) continue;  // header
      fail(ErrorKind::kParse, name + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    for (double v : row) {
      if (!std::isfinite(v)) fail(ErrorKind::kParse, name + ":" + std::to_string(line_no) + ": non-finite value");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorKind::kParse, name + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(rows.front().size()) + " cells, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  const auto cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  return out;
}

void save_dataset(const Graph& graph, const std::filesystem::path& nodes_path,
                  const std::filesystem::path& edges_path, const std::vector<std::string>& feature_names) {
  const auto d = graph.feature_dim();
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != d) {
    fail(ErrorKind::kShape, "save_dataset: feature name count does not match feature width");
  }
  std::ofstream nodes(nodes_path);
  if (!nodes) fail(ErrorKind::kIo, "cannot write " + nodes_path.string());
  nodes << "id";
  for (Eigen::Index j = 0; j < d; ++j) {
    nodes << ',' << (feature_names.empty() ? "f" + std::to_string(j) : feature_names[static_cast<std::size_t>(j)]);
  }
  nodes << ",sensitive,label\n";
  auto cell = [](BinaryLabel v) { return is_known(v) ? std::to_string(as_int(v)) : std::string(); };
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    nodes << i;
    for (Eigen::Index j = 0; j < d; ++j) nodes << ',' << format_double(graph.features()(i, j));
    nodes << ',' << cell(graph.sensitive()[static_cast<std::size_t>(i)]) << ','
          << cell(graph.labels()[static_cast<std::size_t>(i)]) << '\n';
  }
  std::ofstream edges(edges_path);
  if (!edges) fail(ErrorKind::kIo, "cannot write " + edges_path.string());
  edges << "src,dst\n";
  for (auto [u, v] : graph.edges()) edges << u << ',' << v << '\n';
}

Matrix normalize_features(const Matrix& x, const Mask& stats_rows) {
  if (!stats_rows.empty() && stats_rows.size() != static_cast<std::size_t>(x.rows())) {
    fail(ErrorKind::kShape, "normalize_features: mask length mismatch");
  }
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!stats_rows.empty() && !stats_rows[static_cast<std::size_t>(i)]) continue;
      sum += x(i, j);
      ++count;
    }
    if (count == 0) fail(ErrorKind::kDegenerateInput, "normalize_features: no rows for statistics");
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!stats_rows.empty() && !stats_rows[static_cast<std::size_t>(i)]) continue;
      sq += (x(i, j) - mean) * (x(i, j) - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(count));
    // Treat columns constant up to rounding as constant.
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - mean) / sd;
    }
  }
  return out;
}

void validate(const SyntheticConfig& c) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::kConfig, std::string(name) + " must be in [0, 1]");
  };
  prob(c.p_intra, "p_intra");
  prob(c.p_inter, "p_inter");
  prob(c.label_bias, "label_bias");
  prob(c.merit_homophily, "merit_homophily");
  if (c.nodes_per_group[0] < 2 || c.nodes_per_group[1] < 2) {
    fail(ErrorKind::kConfig, "each synthetic group needs at least 2 nodes");
  }
  if (c.feature_dim < 2) fail(ErrorKind::kConfig, "synthetic feature_dim must be at least 2");
}

Graph gen_synthetic(const SyntheticConfig& c) {
  validate(c);
  const int n0 = c.nodes_per_group[0];
  const int n = n0 + c.nodes_per_group[1];
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  LabelVector sensitive(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) sensitive[static_cast<std::size_t>(i)] = from_bit(i >= n0);

  Matrix x(n, c.feature_dim);
  LabelVector labels(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> fair_class(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double sign = i >= n0 ? 1.0 : -1.0;
    const double merit = normal(rng);
    x(i, 0) = merit;
    for (int j = 1; j < c.feature_dim; ++j) x(i, j) = normal(rng) + sign * c.group_shift;
    const double noise = normal(rng);
    const bool biased = c.latent_merit_weight * merit + c.latent_group_shift * sign + noise > 0.0;
    const bool fair = merit > 0.0;
    fair_class[static_cast<std::size_t>(i)] = fair;
    const bool copy_biased = unit(rng) < c.label_bias;
    labels[static_cast<std::size_t>(i)] = from_bit(copy_biased ? biased : fair);
  }

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double p = c.p_inter;
      if ((i >= n0) == (j >= n0)) {
        const bool same = fair_class[static_cast<std::size_t>(i)] == fair_class[static_cast<std::size_t>(j)];
        p = c.p_intra * (same ? 1.0 + c.merit_homophily : 1.0 - c.merit_homophily);
      }
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  return build_graph(std::move(x), edges, std::move(labels), std::move(sensitive));
}

}  // namespace fairgi
