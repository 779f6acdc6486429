#include "fairgi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fairgi/error.hpp"
#include "fairgi/losses.hpp"

namespace fairgi {

GroupFairness group_metrics(const std::vector<std::uint8_t>& y_hard, const LabelVector& labels,
                            const LabelVector& sensitive_true, const Mask& mask) {
  if (y_hard.size() != mask.size() || labels.size() != mask.size() || sensitive_true.size() != mask.size()) {
    fail(ErrorKind::kShape, "group_metrics: input lengths disagree");
  }
  // [s] -> (predicted positive, total), plus the same within y = 1
  long pos[2] = {0, 0};
  long tot[2] = {0, 0};
  long tp[2] = {0, 0};
  long tot_y[2] = {0, 0};
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++n;
    if (!is_known(sensitive_true[i])) continue;
    const int s = as_int(sensitive_true[i]);
    tot[s] += 1;
    pos[s] += y_hard[i] ? 1 : 0;
    if (labels[i] == BinaryLabel::kOne) {
      tot_y[s] += 1;
      tp[s] += y_hard[i] ? 1 : 0;
    }
  }
  if (n == 0) fail(ErrorKind::kDegenerateInput, "group_metrics: empty mask");
  GroupFairness out;
  out.n = mask.size();
  auto gap = [](long a, long an, long b, long bn) {
    return std::abs(static_cast<double>(a) / static_cast<double>(an) -
                    static_cast<double>(b) / static_cast<double>(bn)) * 100.0;
  };
  if (tot[0] > 0 && tot[1] > 0) out.delta_sp = gap(pos[0], tot[0], pos[1], tot[1]);
  if (tot_y[0] > 0 && tot_y[1] > 0) out.delta_eo = gap(tp[0], tot_y[0], tp[1], tot_y[1]);
  return out;
}

IndividualFairness individual_metrics(const Matrix& z, const SimilarityMatrix& m,
                                      const GroupPartition& partition, Exec exec) {
  if (z.rows() != m.size()) fail(ErrorKind::kShape, "individual_metrics: Z row count != n");
  IndividualFairness out;
  out.n = static_cast<std::size_t>(z.rows());
  out.individual_fairness = laplacian(m).quadratic_form(z, exec);
  const auto lp = group_individual_unfairness(z, m, partition, false, exec);
  out.group_if = lp.group_loss;
  out.group_pairs = lp.group_pairs;
  out.max_ig = *std::max_element(out.group_if.begin(), out.group_if.end());
  out.similarity_nnz = m.nnz();
  return out;
}

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t r = 0; r < n;) {
    std::size_t end = r;
    while (end < n && scores[order[end]] == scores[order[r]]) ++end;
    const double avg_rank = 0.5 * static_cast<double>(r + 1 + end);  // ranks r+1 .. end
    for (std::size_t k = r; k < end; ++k) {
      if (positive[order[k]]) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    r = end;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

PredictiveMetrics predictive_metrics(const Vector& y_prob, const LabelVector& labels, const Mask& mask) {
  if (static_cast<std::size_t>(y_prob.size()) != labels.size() || labels.size() != mask.size()) {
    fail(ErrorKind::kShape, "predictive_metrics: input lengths disagree");
  }
  std::vector<double> scores;
  std::vector<std::uint8_t> positive;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || !is_known(labels[i])) continue;
    const double p = y_prob[static_cast<Eigen::Index>(i)];
    const bool label = labels[i] == BinaryLabel::kOne;
    correct += (p >= 0.5) == label ? 1 : 0;
    scores.push_back(p);
    positive.push_back(label ? 1 : 0);
  }
  if (scores.empty()) fail(ErrorKind::kDegenerateInput, "predictive_metrics: no labeled node in mask");
  PredictiveMetrics out;
  out.n = mask.size();
  out.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(scores.size());
  if (auto auc = roc_auc(scores, positive)) out.auc = *auc * 100.0;
  return out;
}

FairnessReport build_report(const PredictiveMetrics& predictive, const GroupFairness& group,
                            const IndividualFairness& individual, ReportMetadata metadata,
                            std::optional<double> if_epsilon) {
  if (predictive.n != group.n) {
    fail(ErrorKind::kValidation, "build_report: predictive and group metrics cover different node counts");
  }
  if (individual.n != 0 && metadata.eval_nodes != 0 && individual.n != metadata.eval_nodes) {
    fail(ErrorKind::kValidation, "build_report: individual metrics cover a different node count");
  }
  auto in_percent_range = [](const std::optional<double>& v) { return !v || (*v >= 0.0 && *v <= 100.0); };
  if (!in_percent_range(predictive.accuracy) || !in_percent_range(predictive.auc) ||
      !in_percent_range(group.delta_sp) || !in_percent_range(group.delta_eo)) {
    fail(ErrorKind::kValidation, "build_report: percentage metric outside [0, 100]");
  }
  if (individual.group_if.empty()) fail(ErrorKind::kValidation, "build_report: no group values");

  FairnessReport r;
  r.accuracy = predictive.accuracy;
  r.auc = predictive.auc;
  r.delta_sp = group.delta_sp;
  r.delta_eo = group.delta_eo;
  // Rounding can leave a tiny negative value for a zero quadratic form.
  r.individual_fairness = std::max(0.0, individual.individual_fairness);
  r.group_if = individual.group_if;
  r.max_ig = *std::max_element(r.group_if.begin(), r.group_if.end());
  if (if_epsilon) {
    r.epsilon_bound_check = r.individual_fairness <= static_cast<double>(individual.similarity_nnz) * *if_epsilon;
  }
  if (metadata.if_normalization == 0) metadata.if_normalization = individual.similarity_nnz;
  r.metadata = std::move(metadata);
  return r;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

std::string report_csv_header() {
  return "dataset,variant,seed,accuracy,auc,delta_sp,delta_eo,max_ig,individual_fairness";
}

std::string report_csv_row(const FairnessReport& r) {
  std::ostringstream out;
  out << r.metadata.dataset << ',' << r.metadata.variant << ',' << r.metadata.seed << ',' << cell(r.accuracy)
      << ',' << cell(r.auc) << ',' << cell(r.delta_sp) << ',' << cell(r.delta_eo) << ',' << cell(r.max_ig)
      << ',' << cell(r.individual_fairness);
  return out.str();
}

}  // namespace fairgi
