#include "fairgi/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairgi/config.hpp"
#include "fairgi/error.hpp"

namespace fairgi {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::kParse, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T read(const json& j, const char* key) {
  const json& v = field(j, key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::invalid_argument("not a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("not a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("not a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw std::invalid_argument("not an integer");
    }
    return v.get<T>();
  } catch (const std::exception& e) {
    fail(ErrorKind::kParse, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (field(j, key).is_null()) return std::nullopt;
  return read<T>(j, key);
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

json params_json(const std::vector<Parameter>& params) {
  json out = json::array();
  for (const auto& p : params) {
    std::vector<double> values(p.value.data(), p.value.data() + p.value.size());
    out.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}, {"values", values}});
  }
  return out;
}

std::vector<Parameter> params_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorKind::kParse, "parameter list must be an array");
  std::vector<Parameter> out;
  for (const json& item : j) {
    Parameter p;
    p.name = read<std::string>(item, "name");
    const auto rows = read<Eigen::Index>(item, "rows");
    const auto cols = read<Eigen::Index>(item, "cols");
    const json& values = field(item, "values");
    if (rows < 0 || cols < 0 || !values.is_array() || static_cast<Eigen::Index>(values.size()) != rows * cols) {
      fail(ErrorKind::kParse, "parameter '" + p.name + "' has inconsistent shape");
    }
    p.value.resize(rows, cols);
    for (Eigen::Index k = 0; k < rows * cols; ++k) {
      const json& v = values[static_cast<std::size_t>(k)];
      if (!v.is_number()) fail(ErrorKind::kParse, "parameter '" + p.name + "' has a non-numeric value");
      p.value.data()[k] = v.get<double>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) fail(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, "cannot move " + tmp.string() + " into place: " + ec.message());
}

json to_json(const FairnessReport& r) {
  const ReportMetadata& m = r.metadata;
  json meta = {{"dataset", m.dataset},
               {"seed", m.seed},
               {"config_hash", m.config_hash},
               {"variant", m.variant},
               {"disable_ifg", m.disable_ifg},
               {"disable_eo_terms", m.disable_eo_terms},
               {"if_normalization", m.if_normalization},
               {"eval_nodes", m.eval_nodes},
               {"fairness_gate_met", opt(m.fairness_gate_met)},
               {"selected_epoch", opt(m.selected_epoch)}};
  return {{"accuracy", opt(r.accuracy)},
          {"auc", opt(r.auc)},
          {"delta_sp", opt(r.delta_sp)},
          {"delta_eo", opt(r.delta_eo)},
          {"individual_fairness", r.individual_fairness},
          {"group_if", r.group_if},
          {"max_ig", r.max_ig},
          {"epsilon_bound_check", opt(r.epsilon_bound_check)},
          {"metadata", meta}};
}

FairnessReport report_from_json(const json& j) {
  FairnessReport r;
  r.accuracy = read_opt<double>(j, "accuracy");
  r.auc = read_opt<double>(j, "auc");
  r.delta_sp = read_opt<double>(j, "delta_sp");
  r.delta_eo = read_opt<double>(j, "delta_eo");
  r.individual_fairness = read<double>(j, "individual_fairness");
  const json& gi = field(j, "group_if");
  if (!gi.is_array()) fail(ErrorKind::kParse, "field 'group_if' must be an array");
  for (const json& v : gi) {
    if (!v.is_number()) fail(ErrorKind::kParse, "field 'group_if' must hold numbers");
    r.group_if.push_back(v.get<double>());
  }
  r.max_ig = read<double>(j, "max_ig");
  r.epsilon_bound_check = read_opt<bool>(j, "epsilon_bound_check");
  const json& m = field(j, "metadata");
  r.metadata.dataset = read<std::string>(m, "dataset");
  r.metadata.seed = read<std::uint64_t>(m, "seed");
  r.metadata.config_hash = read<std::string>(m, "config_hash");
  r.metadata.variant = read<std::string>(m, "variant");
  r.metadata.disable_ifg = read<bool>(m, "disable_ifg");
  r.metadata.disable_eo_terms = read<bool>(m, "disable_eo_terms");
  r.metadata.if_normalization = read<std::int64_t>(m, "if_normalization");
  r.metadata.eval_nodes = read<std::size_t>(m, "eval_nodes");
  r.metadata.fairness_gate_met = read_opt<bool>(m, "fairness_gate_met");
  r.metadata.selected_epoch = read_opt<int>(m, "selected_epoch");
  return r;
}

void save_report(const FairnessReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(report).dump(2) + "\n");
}

FairnessReport load_report(const std::filesystem::path& path) { return report_from_json(parse_file(path)); }

json to_json(const Checkpoint& c) {
  return {{"config", to_json(c.config)},
          {"best_epoch", c.best_epoch},
          {"validation",
           {{"accuracy", opt(c.validation.accuracy)},
            {"delta_sp", opt(c.validation.delta_sp)},
            {"delta_eo", opt(c.validation.delta_eo)}}},
          {"gate_met", c.gate_met},
          {"classifier", params_json(c.classifier)},
          {"estimator", params_json(c.estimator)},
          {"adversary", params_json(c.adversary)}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  try {
    c.config = train_config_from_json(field(j, "config"));
  } catch (const Error& e) {
    fail(ErrorKind::kParse, std::string("checkpoint config: ") + e.what());
  }
  c.best_epoch = read<int>(j, "best_epoch");
  const json& v = field(j, "validation");
  c.validation.accuracy = read_opt<double>(v, "accuracy");
  c.validation.delta_sp = read_opt<double>(v, "delta_sp");
  c.validation.delta_eo = read_opt<double>(v, "delta_eo");
  c.gate_met = read<bool>(j, "gate_met");
  c.classifier = params_from_json(field(j, "classifier"));
  c.estimator = params_from_json(field(j, "estimator"));
  c.adversary = params_from_json(field(j, "adversary"));
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(checkpoint).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(parse_file(path)); }

void save_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,L_C,L_A1,L_A2,L_R1,L_R2,L_Ifg,L_total\n";
  char buf[512];
  for (std::size_t e = 0; e < history.size(); ++e) {
    const LossBundle& b = history[e].losses;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e, b.l_c, b.l_a1, b.l_a2,
                  b.l_r1, b.l_r2, b.l_ifg, b.l_total);
    out << buf;
  }
  write_file_atomic(path, out.str());
}

}  // namespace fairgi
