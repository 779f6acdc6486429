#include "fairgi/cli.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairgi/config.hpp"
#include "fairgi/data_io.hpp"
#include "fairgi/error.hpp"
#include "fairgi/report_io.hpp"
#include "fairgi/trainer.hpp"

namespace fairgi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void error_record(std::ostream& err, const std::string& kind, int code, const std::string& message) {
  err << json{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}}.dump() << std::endl;
}

Exec exec_of(const Command& c) { return c.serial ? Exec::kSerial : Exec::kParallel; }

const fs::path& require_path(const std::optional<fs::path>& p, const char* flag) {
  if (!p) fail(ErrorKind::kConfig, std::string("missing required option ") + flag);
  return *p;
}

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) fail(ErrorKind::kConfig, std::string(what) + " not found: " + p.string());
}

RunConfig resolve_config(const Command& cmd) {
  RunConfig rc;
  if (cmd.config) {
    require_exists(*cmd.config, "config file");
    rc = load_run_config(*cmd.config);
  }
  if (!cmd.seeds.empty()) rc.train.seed = cmd.seeds.front();
  if (cmd.epochs) rc.train.epochs = *cmd.epochs;
  validate(rc.train);
  return rc;
}

// Loads (or generates) the raw graph; fills in the dataset name.
Graph input_graph(const Command& cmd, RunConfig& rc) {
  if (cmd.synthetic) {
    if (cmd.data) fail(ErrorKind::kConfig, "--data and --synthetic are mutually exclusive");
    if (!rc.synthetic) rc.synthetic = SyntheticConfig{};
    validate(*rc.synthetic);
    if (rc.dataset.name.empty()) rc.dataset.name = "synthetic";
    return gen_synthetic(*rc.synthetic);
  }
  const fs::path& dir = require_path(cmd.data, "--data");
  if (!fs::is_directory(dir)) fail(ErrorKind::kConfig, "dataset directory not found: " + dir.string());
  DatasetSchema schema = schema_for(rc.dataset, dir);
  require_exists(schema.nodes_path, "node file");
  require_exists(schema.edges_path, "edge file");
  schema.verbose = cmd.verbose;
  if (rc.dataset.name.empty()) rc.dataset.name = fs::absolute(dir).lexically_normal().filename().string();
  return load_dataset(schema);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const json& j, const fs::path& path) { write_file_atomic(path, j.dump(2) + "\n"); }

FairnessReport train_one(const Graph& graph, const Split& split, const SimilarityMatrix& m, const RunConfig& rc,
                         const fs::path& out, Exec exec) {
  make_dir(out);
  save_run_config(rc, out / "config.json");
  const FitResult r = fit(graph, split, m, rc.train, rc.dataset.name, exec);
  save_checkpoint(r.checkpoint, out / "checkpoint.json");
  save_history(r.history, out / "history.csv");
  save_report(r.report, out / "report.json");
  return r.report;
}

int run_train(const Command& cmd) {
  if (cmd.seeds.size() > 1) fail(ErrorKind::kConfig, "train takes a single --seed");
  RunConfig rc = resolve_config(cmd);
  const fs::path& out = require_path(cmd.out, "--out");
  const Graph raw = input_graph(cmd, rc);
  const RunInputs in = prepare_inputs(raw, rc.train, exec_of(cmd));
  train_one(in.graph, in.split, in.similarity, rc, out, exec_of(cmd));
  return kExitOk;
}

struct Variant {
  const char* label;
  const char* dir;
  bool disable_ifg;
  bool disable_eo;
};

constexpr Variant kVariants[] = {
    {"ours", "full", false, false},
    {"ours w/o Ifg", "wo_ifg", true, false},
    {"ours w/o EO", "wo_eo", false, true},
};

fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed_" + std::to_string(seed)); }

// All variants for one seed share the split and similarity matrix.
void ablate_seed(const Graph& raw, RunConfig rc, std::uint64_t seed, const fs::path& out, Exec exec) {
  rc.train.seed = seed;
  const RunInputs in = prepare_inputs(raw, rc.train, exec);
  for (const Variant& v : kVariants) {
    RunConfig vc = rc;
    vc.train.disable_ifg = v.disable_ifg;
    vc.train.disable_eo_terms = v.disable_eo;
    train_one(in.graph, in.split, in.similarity, vc, seed_dir(out, seed) / v.dir, exec);
  }
}

void ablate_in_processes(const Graph& raw, const RunConfig& rc, const std::vector<std::uint64_t>& seeds,
                         const fs::path& out, Exec exec, int jobs) {
  std::size_t next = 0;
  int running = 0;
  bool failed = false;
  auto reap = [&] {
    int status = 0;
    if (::wait(&status) > 0) {
      --running;
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
    }
  };
  while (next < seeds.size() || running > 0) {
    if (next < seeds.size() && running < jobs && !failed) {
      const std::uint64_t seed = seeds[next++];
      const pid_t pid = ::fork();
      if (pid < 0) fail(ErrorKind::kIo, "fork failed");
      if (pid == 0) {
        int code = kExitOk;
        try {
          ablate_seed(raw, rc, seed, out, exec);
        } catch (const std::exception& e) {
          error_record(std::cerr, "runtime", kExitRuntime, "seed " + std::to_string(seed) + ": " + e.what());
          code = kExitRuntime;
        }
        std::cout.flush();
        std::_Exit(code);
      }
      ++running;
    } else {
      reap();
      if (failed && next < seeds.size()) next = seeds.size();
    }
  }
  if (failed) fail(ErrorKind::kNumeric, "one or more ablation workers failed");
}

struct Summary {
  std::optional<double> mean;
  std::optional<double> std;
  std::size_t n = 0;
};

Summary summarize(const std::vector<std::optional<double>>& xs) {
  Summary s;
  double sum = 0.0;
  for (const auto& x : xs) {
    if (!x) continue;
    sum += *x;
    ++s.n;
  }
  if (s.n == 0) return s;
  const double mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (const auto& x : xs) {
    if (x) ss += (*x - mean) * (*x - mean);
  }
  s.mean = mean;
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

std::string fmt(const std::optional<double>& v, const char* spec) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

void write_comparison(const fs::path& out, const std::vector<std::uint64_t>& seeds) {
  struct Column {
    const char* name;
    const char* key;
    std::optional<double> (*get)(const FairnessReport&);
    const char* spec;
  };
  const Column columns[] = {
      {"Acc", "acc", [](const FairnessReport& r) { return r.accuracy; }, "%.2f"},
      {"AUC", "auc", [](const FairnessReport& r) { return r.auc; }, "%.2f"},
      {"ΔSP", "delta_sp", [](const FairnessReport& r) { return r.delta_sp; }, "%.2f"},
      {"ΔEO", "delta_eo", [](const FairnessReport& r) { return r.delta_eo; }, "%.2f"},
      {"MaxIG", "max_ig", [](const FairnessReport& r) { return std::optional<double>(r.max_ig); }, "%.4g"},
      {"IF", "if", [](const FairnessReport& r) { return std::optional<double>(r.individual_fairness); }, "%.4g"},
  };

  std::ostringstream runs;
  runs << report_csv_header() << '\n';
  std::ostringstream csv;
  csv << "variant,seeds";
  for (const Column& c : columns) csv << ',' << c.key << "_mean," << c.key << "_std";
  csv << '\n';

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> head{"variant"};
  for (const Column& c : columns) head.emplace_back(c.name);
  table.push_back(head);

  for (const Variant& v : kVariants) {
    std::vector<FairnessReport> reports;
    for (std::uint64_t s : seeds) {
      reports.push_back(load_report(seed_dir(out, s) / v.dir / "report.json"));
      runs << report_csv_row(reports.back()) << '\n';
    }
    csv << '"' << v.label << "\"," << seeds.size();
    std::vector<std::string> row{v.label};
    for (const Column& c : columns) {
      std::vector<std::optional<double>> xs;
      for (const auto& r : reports) xs.push_back(c.get(r));
      const Summary s = summarize(xs);
      csv << ',' << fmt(s.mean, "%.17g") << ',' << fmt(s.std, "%.17g");
      row.push_back(s.mean ? fmt(s.mean, c.spec) + " ± " + fmt(s.std, c.spec) : "n/a");
    }
    csv << '\n';
    table.push_back(row);
  }

  // Column widths in code points so the ± and Δ glyphs align.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::ostringstream txt;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(widths[c] - width(row[c]), ' ');
      txt << (c == 0 ? row[c] + pad : "  " + pad + row[c]);
    }
    txt << '\n';
  }
  txt << "\nmean ± population std over " << seeds.size() << " seeds (";
  for (std::size_t i = 0; i < seeds.size(); ++i) txt << (i ? ", " : "") << seeds[i];
  txt << "); Acc, AUC, ΔSP, ΔEO in percent\n";

  write_file_atomic(out / "runs.csv", runs.str());
  write_file_atomic(out / "comparison.csv", csv.str());
  write_file_atomic(out / "comparison.txt", txt.str());
}

int run_ablate(const Command& cmd) {
  if (cmd.jobs < 1) fail(ErrorKind::kConfig, "--jobs must be at least 1");
  RunConfig rc = resolve_config(cmd);
  std::vector<std::uint64_t> seeds = cmd.seeds;
  if (seeds.empty()) seeds.push_back(rc.train.seed);
  const fs::path& out = require_path(cmd.out, "--out");
  const Graph raw = input_graph(cmd, rc);
  make_dir(out);
  save_run_config(rc, out / "config.json");
  if (cmd.jobs == 1 || seeds.size() == 1) {
    for (std::uint64_t s : seeds) ablate_seed(raw, rc, s, out, exec_of(cmd));
  } else {
    ablate_in_processes(raw, rc, seeds, out, exec_of(cmd), cmd.jobs);
  }
  write_comparison(out, seeds);
  std::cout << std::ifstream(out / "comparison.txt").rdbuf();
  return kExitOk;
}

int run_synth(const Command& cmd) {
  if (cmd.seeds.size() > 1) fail(ErrorKind::kConfig, "synth takes a single --seed");
  RunConfig rc;
  if (cmd.config) {
    require_exists(*cmd.config, "config file");
    rc = load_run_config(*cmd.config);
  }
  if (!rc.synthetic) rc.synthetic = SyntheticConfig{};
  if (!cmd.seeds.empty()) rc.synthetic->seed = cmd.seeds.front();
  validate(*rc.synthetic);
  const fs::path& out = require_path(cmd.out, "--out");
  const Graph g = gen_synthetic(*rc.synthetic);
  make_dir(out);
  save_run_config(rc, out / "config.json");
  save_dataset(g, out / "nodes.csv", out / "edges.csv", {});
  return kExitOk;
}

int run_audit(const Command& cmd) {
  const fs::path& emb = require_path(cmd.embeddings, "--embeddings");
  const fs::path& pred = require_path(cmd.predictions, "--predictions");
  const fs::path& sim = require_path(cmd.similarity, "--similarity");
  const fs::path& nodes_path = require_path(cmd.nodes, "--nodes");
  const fs::path& out = require_path(cmd.out, "--out");
  for (const fs::path* p : {&emb, &pred, &sim, &nodes_path}) require_exists(*p, "input file");
  if (cmd.epsilon && !(*cmd.epsilon >= 0.0)) fail(ErrorKind::kConfig, "--epsilon must be non-negative");

  DatasetSchema schema;
  schema.nodes_path = nodes_path;
  const NodeTable nodes = load_nodes(schema);
  const auto n = static_cast<Eigen::Index>(nodes.labels.size());
  const Matrix z = load_numeric_csv(emb);
  const Matrix p = load_numeric_csv(pred);
  if (z.rows() != n) fail(ErrorKind::kShape, "embeddings have " + std::to_string(z.rows()) + " rows for " +
                                                 std::to_string(n) + " nodes");
  if (p.rows() != n || p.cols() != 1) fail(ErrorKind::kShape, "predictions must be one column with one row per node");
  const Vector y_prob = p.col(0);
  if ((y_prob.array() < 0.0).any() || (y_prob.array() > 1.0).any()) {
    fail(ErrorKind::kValidation, "predictions must be probabilities in [0, 1]");
  }
  const SimilarityMatrix m = load_similarity(sim, static_cast<NodeId>(n));

  const Mask all(static_cast<std::size_t>(n), 1);
  std::vector<std::uint8_t> y_hard(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y_hard[static_cast<std::size_t>(i)] = y_prob[i] >= 0.5;
  Mask keep(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> kept;
  LabelVector s_kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_known(nodes.sensitive[static_cast<std::size_t>(i)])) {
      keep[static_cast<std::size_t>(i)] = 1;
      kept.push_back(i);
      s_kept.push_back(nodes.sensitive[static_cast<std::size_t>(i)]);
    }
  }
  Matrix zk(static_cast<Eigen::Index>(kept.size()), z.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) zk.row(static_cast<Eigen::Index>(r)) = z.row(kept[r]);

  ReportMetadata meta;
  meta.dataset = nodes_path.parent_path().filename().string();
  meta.variant = "audit";
  meta.eval_nodes = kept.size();
  const FairnessReport report =
      build_report(predictive_metrics(y_prob, nodes.labels, all),
                   group_metrics(y_hard, nodes.labels, nodes.sensitive, all),
                   individual_metrics(zk, m.restrict_to(keep), partition_by_sensitive(s_kept), exec_of(cmd)), meta,
                   cmd.epsilon);

  make_dir(out);
  write_json({{"verb", "audit"},
              {"embeddings", emb.string()},
              {"predictions", pred.string()},
              {"similarity", sim.string()},
              {"nodes", nodes_path.string()},
              {"epsilon", cmd.epsilon ? json(*cmd.epsilon) : json(nullptr)}},
             out / "config.json");
  save_report(report, out / "report.json");
  return kExitOk;
}

}  // namespace

int run(const Command& cmd, std::ostream& err) {
  try {
    if (cmd.verb == "train") return run_train(cmd);
    if (cmd.verb == "ablate") return run_ablate(cmd);
    if (cmd.verb == "synth") return run_synth(cmd);
    if (cmd.verb == "audit") return run_audit(cmd);
    fail(ErrorKind::kConfig, "unknown verb '" + cmd.verb + "'");
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::kConfig ? kExitConfig : kExitRuntime;
    error_record(err, std::string(to_string(e.kind())), code, e.what());
    return code;
  } catch (const std::exception& e) {
    error_record(err, "runtime", kExitRuntime, e.what());
    return kExitRuntime;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Fair graph node classification: training, auditing and ablations"};
  app.require_subcommand(1);
  Command cmd;

  auto common = [&](CLI::App* sub) {
    sub->add_flag("--serial", cmd.serial, "Use single-threaded kernels");
    sub->add_flag("-v,--verbose", cmd.verbose, "Log dataset statistics");
  };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--config", cmd.config, "JSON config file");
    sub->add_option("--data", cmd.data, "Directory holding nodes.csv and edges.csv");
    sub->add_flag("--synthetic", cmd.synthetic, "Generate the graph from the config's synthetic section");
    sub->add_option("--out", cmd.out, "Output directory");
    sub->add_option("--epochs", cmd.epochs, "Override the epoch budget");
    common(sub);
  };

  CLI::App* train = app.add_subcommand("train", "Train one model and write checkpoint, history and report");
  training(train);
  std::optional<std::uint64_t> seed;
  train->add_option("--seed", seed, "Random seed (overrides the config)");

  CLI::App* ablate = app.add_subcommand("ablate", "Full, w/o Ifg and w/o EO runs per seed plus a comparison table");
  training(ablate);
  ablate->add_option("--seeds", cmd.seeds, "Comma-separated seeds")->delimiter(',');
  ablate->add_option("--jobs", cmd.jobs, "Worker processes (one seed each)");

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--config", cmd.config, "JSON config file with a synthetic section");
  synth->add_option("--out", cmd.out, "Output directory");
  synth->add_option("--seed", seed, "Generator seed (overrides the config)");

  CLI::App* audit = app.add_subcommand("audit", "Fairness report for given embeddings and predictions");
  audit->add_option("--embeddings", cmd.embeddings, "CSV of node embeddings, one row per node");
  audit->add_option("--predictions", cmd.predictions, "CSV with one probability per node");
  audit->add_option("--similarity", cmd.similarity, "Similarity matrix as 'i j value' lines");
  audit->add_option("--nodes", cmd.nodes, "Node file with sensitive and label columns");
  audit->add_option("--out", cmd.out, "Output directory");
  audit->add_option("--epsilon", cmd.epsilon, "Per-entry bound for the IF <= m * epsilon check");
  common(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record(std::cerr, "config", kExitConfig, e.what());
    return kExitConfig;
  }
  cmd.verb = app.get_subcommands().front()->get_name();
  if (seed) cmd.seeds = {*seed};
  return run(cmd, std::cerr);
}

}  // namespace fairgi
