#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgi/graph.hpp"
#include "fairgi/similarity.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

// Gaps in percentage points. std::nullopt means undefined (an empty
// conditioning subset), which is distinct from a zero gap.
struct GroupFairness {
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;
  std::size_t n = 0;
};

// Empirical |P(y^=1|s=0) - P(y^=1|s=1)| and the same conditioned on y = 1,
// over masked nodes. Nodes whose sensitive value (or label, for the EO gap)
// is unknown are skipped.
GroupFairness group_metrics(const std::vector<std::uint8_t>& y_hard, const LabelVector& labels,
                            const LabelVector& sensitive_true, const Mask& mask);

struct IndividualFairness {
  double individual_fairness = 0.0;  // trace(Z^T L Z)
  std::vector<double> group_if;      // L_p per group
  std::vector<std::int64_t> group_pairs;
  double max_ig = 0.0;
  std::int64_t similarity_nnz = 0;   // m
  std::size_t n = 0;
};

IndividualFairness individual_metrics(const Matrix& z, const SimilarityMatrix& m,
                                      const GroupPartition& partition, Exec exec = Exec::kParallel);

struct PredictiveMetrics {
  std::optional<double> accuracy;  // percent
  std::optional<double> auc;       // percent, undefined for a single-class mask
  std::size_t n = 0;
};

PredictiveMetrics predictive_metrics(const Vector& y_prob, const LabelVector& labels, const Mask& mask);

// Mann-Whitney statistic with ties counted one half, in [0, 1].
std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive);

struct ReportMetadata {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string variant;
  bool disable_ifg = false;
  bool disable_eo_terms = false;
  // IF is reported unnormalized; dividing by this recovers the per-pair form.
  std::int64_t if_normalization = 0;
  std::size_t eval_nodes = 0;
  std::optional<bool> fairness_gate_met;
  std::optional<int> selected_epoch;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct FairnessReport {
  std::optional<double> accuracy;
  std::optional<double> auc;
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;
  double individual_fairness = 0.0;
  std::vector<double> group_if;
  double max_ig = 0.0;
  std::optional<bool> epsilon_bound_check;
  ReportMetadata metadata;

  friend bool operator==(const FairnessReport&, const FairnessReport&) = default;
};

// Assembles the report and enforces its invariants. All metric inputs must
// describe the same evaluation set; the optional epsilon enables the audit
// IF <= m * epsilon.
FairnessReport build_report(const PredictiveMetrics& predictive, const GroupFairness& group,
                            const IndividualFairness& individual, ReportMetadata metadata,
                            std::optional<double> if_epsilon = std::nullopt);

// Flat CSV form for cross-run tables; undefined values are empty cells.
std::string report_csv_header();
std::string report_csv_row(const FairnessReport& report);

}  // namespace fairgi
