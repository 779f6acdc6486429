#include "fairgi/config.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <type_traits>

#include "fairgi/error.hpp"

namespace fairgi {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) fail(ErrorKind::kConfig, where("") + "must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    out = convert<T>(raw(key), key);
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    if (!j_.contains(key)) return;
    const json& v = raw(key);
    if (v.is_null()) {
      out.reset();
    } else {
      out = convert<T>(v, key);
    }
  }

  template <typename T>
  void get_list(const char* key, std::vector<T>& out) {
    if (!j_.contains(key)) return;
    const json& v = raw(key);
    if (!v.is_array()) fail(ErrorKind::kConfig, where(key) + "expected an array");
    out.clear();
    for (const json& item : v) out.push_back(convert<T>(item, key));
  }

  // Rejects keys nobody asked for.
  void finish(std::initializer_list<const char*> ignored = {}) const {
    for (const char* k : ignored) seen_.insert(k);
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(ErrorKind::kConfig, "unknown config key '" + qualified(item.key()) + "'");
    }
  }

  std::string where(const std::string& key) const { return "config key '" + qualified(key) + "': "; }

 private:
  std::string qualified(const std::string& key) const {
    if (section_.empty()) return key;
    return key.empty() ? section_ : section_ + "." + key;
  }

  template <typename T>
  T convert(const json& v, const char* key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(ErrorKind::kConfig, where(key) + "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(ErrorKind::kConfig, where(key) + "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(ErrorKind::kConfig, where(key) + "expected a number");
      return v.get<T>();
    } else {
      static_assert(std::is_integral_v<T>);
      if (!v.is_number_integer()) fail(ErrorKind::kConfig, where(key) + "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
        fail(ErrorKind::kConfig, where(key) + "expected a non-negative integer");
      } else {
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
          fail(ErrorKind::kConfig, where(key) + "integer out of range");
        }
        return static_cast<T>(x);
      }
    }
  }

  const json& j_;
  std::string section_;
  mutable std::set<std::string> seen_;
};

json model_json(const ModelHyper& m) {
  return {{"hidden", m.hidden},
          {"heads", m.heads},
          {"dropout", m.dropout},
          {"negative_slope", m.negative_slope},
          {"sensitive_hidden", m.sensitive_hidden}};
}

ModelHyper model_from_json(const json& j, ModelHyper m) {
  Reader r(j, "model");
  r.get("hidden", m.hidden);
  r.get("heads", m.heads);
  r.get("dropout", m.dropout);
  r.get("negative_slope", m.negative_slope);
  r.get("sensitive_hidden", m.sensitive_hidden);
  r.finish();
  return m;
}

SplitRatios split_from_json(const json& j, SplitRatios s) {
  Reader r(j, "split");
  r.get("train", s.train);
  r.get("val", s.val);
  r.get("test", s.test);
  r.finish();
  return s;
}

}  // namespace

json to_json(const TrainConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["eta"] = c.eta;
  j["gamma_bound"] = c.gamma_bound;
  j["lambdas"] = c.lambdas;
  j["learning_rate"] = c.learning_rate;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["sensitive_budget"] = c.sensitive_budget;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["disable_ifg"] = c.disable_ifg;
  j["disable_eo_terms"] = c.disable_eo_terms;
  j["similarity_method"] = std::string(to_string(c.similarity_method));
  j["similarity_k"] = c.similarity_k;
  j["model"] = model_json(c.model);
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
  j["sensitive_epochs"] = c.sensitive_epochs;
  j["sensitive_learning_rate"] = c.sensitive_learning_rate;
  j["sensitive_weight_decay"] = c.sensitive_weight_decay;
  j["adversary_learning_rate"] = c.adversary_learning_rate;
  j["fairness_gate"] = c.fairness_gate;
  j["sequential_steps"] = c.sequential_steps;
  j["uniform_adversary_target"] = c.uniform_adversary_target;
  j["if_epsilon"] = c.if_epsilon ? json(*c.if_epsilon) : json(nullptr);
  return j;
}

namespace {

void read_train_fields(Reader& r, TrainConfig& c) {
  r.get("alpha", c.alpha);
  r.get("beta", c.beta);
  r.get("eta", c.eta);
  r.get("gamma_bound", c.gamma_bound);
  r.get_list("lambdas", c.lambdas);
  r.get("learning_rate", c.learning_rate);
  r.get("weight_decay", c.weight_decay);
  r.get("epochs", c.epochs);
  r.get("sensitive_budget", c.sensitive_budget);
  r.get("threshold", c.threshold);
  r.get("seed", c.seed);
  r.get("disable_ifg", c.disable_ifg);
  r.get("disable_eo_terms", c.disable_eo_terms);
  if (r.has("similarity_method")) {
    std::string name;
    r.get("similarity_method", name);
    c.similarity_method = parse_similarity_method(name);
  }
  r.get("similarity_k", c.similarity_k);
  if (r.has("model")) c.model = model_from_json(r.raw("model"), c.model);
  if (r.has("split")) c.split = split_from_json(r.raw("split"), c.split);
  r.get("sensitive_epochs", c.sensitive_epochs);
  r.get("sensitive_learning_rate", c.sensitive_learning_rate);
  r.get("sensitive_weight_decay", c.sensitive_weight_decay);
  r.get("adversary_learning_rate", c.adversary_learning_rate);
  r.get("fairness_gate", c.fairness_gate);
  r.get("sequential_steps", c.sequential_steps);
  r.get("uniform_adversary_target", c.uniform_adversary_target);
  r.get("if_epsilon", c.if_epsilon);
}

}  // namespace

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  Reader r(j, "");
  read_train_fields(r, base);
  r.finish();
  return base;
}

json to_json(const SyntheticConfig& c) {
  return {{"nodes_per_group", c.nodes_per_group},
          {"p_intra", c.p_intra},
          {"p_inter", c.p_inter},
          {"feature_dim", c.feature_dim},
          {"label_bias", c.label_bias},
          {"group_shift", c.group_shift},
          {"latent_merit_weight", c.latent_merit_weight},
          {"latent_group_shift", c.latent_group_shift},
          {"merit_homophily", c.merit_homophily},
          {"seed", c.seed}};
}

SyntheticConfig synthetic_config_from_json(const json& j, SyntheticConfig c) {
  Reader r(j, "synthetic");
  if (r.has("nodes_per_group")) {
    std::vector<int> sizes;
    r.get_list("nodes_per_group", sizes);
    if (sizes.size() != 2) fail(ErrorKind::kConfig, r.where("nodes_per_group") + "expected two group sizes");
    c.nodes_per_group = {sizes[0], sizes[1]};
  }
  r.get("p_intra", c.p_intra);
  r.get("p_inter", c.p_inter);
  r.get("feature_dim", c.feature_dim);
  r.get("label_bias", c.label_bias);
  r.get("group_shift", c.group_shift);
  r.get("latent_merit_weight", c.latent_merit_weight);
  r.get("latent_group_shift", c.latent_group_shift);
  r.get("merit_homophily", c.merit_homophily);
  r.get("seed", c.seed);
  r.finish();
  validate(c);
  return c;
}

json to_json(const DatasetOptions& o) {
  return {{"name", o.name},
          {"id_column", o.id_column},
          {"sensitive_column", o.sensitive_column},
          {"label_column", o.label_column},
          {"feature_columns", o.feature_columns},
          {"delimiter", std::string(1, o.delimiter)}};
}

DatasetOptions dataset_options_from_json(const json& j, DatasetOptions o) {
  Reader r(j, "dataset");
  r.get("name", o.name);
  r.get("id_column", o.id_column);
  r.get("sensitive_column", o.sensitive_column);
  r.get("label_column", o.label_column);
  r.get_list("feature_columns", o.feature_columns);
  if (r.has("delimiter")) {
    std::string d;
    r.get("delimiter", d);
    if (d.size() != 1) fail(ErrorKind::kConfig, r.where("delimiter") + "expected a single character");
    o.delimiter = d[0];
  }
  r.finish();
  return o;
}

json to_json(const RunConfig& c) {
  json j = to_json(c.train);
  if (c.preset) j["preset"] = *c.preset;
  j["dataset"] = to_json(c.dataset);
  if (c.synthetic) j["synthetic"] = to_json(*c.synthetic);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig out;
  Reader r(j, "");
  if (r.has("preset")) {
    std::string name;
    r.get("preset", name);
    out.preset = name;
    out.train = preset_config(name);
    out.dataset.name = name;
  }
  read_train_fields(r, out.train);
  if (r.has("dataset")) out.dataset = dataset_options_from_json(r.raw("dataset"), out.dataset);
  if (r.has("synthetic")) out.synthetic = synthetic_config_from_json(r.raw("synthetic"));
  r.finish();
  validate(out.train);
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, "config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::string config_hash(const TrainConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string variant_name(const TrainConfig& c) {
  if (c.alpha == 0.0 && c.beta == 0.0 && c.eta == 0.0) return "vanilla";
  if (c.disable_ifg && c.disable_eo_terms) return "w/o Ifg, EO";
  if (c.disable_ifg) return "w/o Ifg";
  if (c.disable_eo_terms) return "w/o EO";
  return "full";
}

DatasetSchema schema_for(const DatasetOptions& options, const std::filesystem::path& data_dir) {
  DatasetSchema schema = default_schema(data_dir);
  schema.id_column = options.id_column;
  schema.sensitive_column = options.sensitive_column;
  schema.label_column = options.label_column;
  schema.feature_columns = options.feature_columns;
  schema.delimiter = options.delimiter;
  return schema;
}

}  // namespace fairgi
