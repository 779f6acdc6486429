#include "fairgi/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fairgi/error.hpp"
#include "fairgi/kernels.hpp"

namespace fairgi {

namespace {

double clip(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }
bool inside_clip(double p) { return p > kProbClip && p < 1.0 - kProbClip; }

void check_length(Eigen::Index n, std::size_t a, std::size_t b, const char* what) {
  if (static_cast<std::size_t>(n) != a || a != b) {
    fail(ErrorKind::kShape, std::string(what) + ": input lengths disagree");
  }
}

ScalarLoss binary_cross_entropy(const Vector& prob, const LabelVector& target, const Mask& mask,
                                const char* what) {
  check_length(prob.size(), target.size(), mask.size(), what);
  ScalarLoss out;
  out.grad = Vector::Zero(prob.size());
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_known(target[i])) {
      fail(ErrorKind::kValidation, std::string(what) + ": masked node " + std::to_string(i) +
                                       " has no known target");
    }
    const double p = clip(prob[static_cast<Eigen::Index>(i)]);
    const bool positive = target[i] == BinaryLabel::kOne;
    total -= positive ? std::log(p) : std::log(1.0 - p);
    ++count;
  }
  if (count == 0) fail(ErrorKind::kDegenerateInput, std::string(what) + ": empty mask");
  const double scale = 1.0 / static_cast<double>(count);
  out.value = total * scale;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (!mask[i] || !inside_clip(prob[idx])) continue;
    const double p = prob[idx];
    out.grad[idx] = (target[i] == BinaryLabel::kOne ? -1.0 / p : 1.0 / (1.0 - p)) * scale;
  }
  return out;
}

// mean_{pos} log a + mean_{neg} log(1 - a) over the selected nodes.
bool adversary_term(const Vector& a_prob, const std::vector<std::uint8_t>& s_hard,
                    const std::vector<std::uint8_t>& select, double& value, Vector& grad) {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t i = 0; i < select.size(); ++i) {
    if (!select[i]) continue;
    (s_hard[i] ? n_pos : n_neg) += 1;
  }
  grad = Vector::Zero(a_prob.size());
  value = 0.0;
  if (n_pos == 0 || n_neg == 0) return false;
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < select.size(); ++i) {
    if (!select[i]) continue;
    const auto idx = static_cast<Eigen::Index>(i);
    const double a = a_prob[idx];
    const bool live = inside_clip(a);
    if (s_hard[i]) {
      pos += std::log(clip(a));
      if (live) grad[idx] = 1.0 / (a * static_cast<double>(n_pos));
    } else {
      neg += std::log(1.0 - clip(a));
      if (live) grad[idx] = -1.0 / ((1.0 - a) * static_cast<double>(n_neg));
    }
  }
  value = pos / static_cast<double>(n_pos) + neg / static_cast<double>(n_neg);
  return true;
}

// |Cov| over the selected nodes and its gradients.
bool covariance_term(const Vector& s, const Vector& y, const std::vector<std::uint8_t>& select,
                     double& value, Vector& grad_y, Vector& grad_s) {
  grad_y = Vector::Zero(y.size());
  grad_s = Vector::Zero(s.size());
  value = 0.0;
  std::size_t count = 0;
  double s_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < select.size(); ++i) {
    if (!select[i]) continue;
    s_mean += s[static_cast<Eigen::Index>(i)];
    y_mean += y[static_cast<Eigen::Index>(i)];
    ++count;
  }
  if (count == 0) return false;
  const double inv = 1.0 / static_cast<double>(count);
  s_mean *= inv;
  y_mean *= inv;
  double cov = 0.0;
  for (std::size_t i = 0; i < select.size(); ++i) {
    if (!select[i]) continue;
    const auto idx = static_cast<Eigen::Index>(i);
    cov += (s[idx] - s_mean) * (y[idx] - y_mean);
  }
  cov *= inv;
  value = std::abs(cov);
  const double sign = cov > 0.0 ? 1.0 : (cov < 0.0 ? -1.0 : 0.0);
  for (std::size_t i = 0; i < select.size(); ++i) {
    if (!select[i]) continue;
    const auto idx = static_cast<Eigen::Index>(i);
    grad_y[idx] = sign * (s[idx] - s_mean) * inv;
    grad_s[idx] = sign * (y[idx] - y_mean) * inv;
  }
  return true;
}

std::vector<std::uint8_t> positives_within(const LabelVector& labels, const Mask& mask) {
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out[i] = mask[i] && labels[i] == BinaryLabel::kOne ? 1 : 0;
  }
  return out;
}

}  // namespace

ScalarLoss loss_classification(const Vector& y_prob, const LabelVector& labels, const Mask& mask) {
  return binary_cross_entropy(y_prob, labels, mask, "loss_classification");
}

ScalarLoss loss_sensitive(const Vector& s_prob, const LabelVector& sensitive, const Mask& labeled_mask) {
  return binary_cross_entropy(s_prob, sensitive, labeled_mask, "loss_sensitive");
}

AdversaryLosses adversary_losses(const Vector& a_prob, const std::vector<std::uint8_t>& s_hard,
                                 const LabelVector& labels, const Mask& mask) {
  check_length(a_prob.size(), s_hard.size(), mask.size(), "adversary_losses");
  if (labels.size() != mask.size()) fail(ErrorKind::kShape, "adversary_losses: label length mismatch");
  AdversaryLosses out;
  out.a1_degenerate = !adversary_term(a_prob, s_hard, mask, out.a1, out.grad_a1);
  out.a2_degenerate = !adversary_term(a_prob, s_hard, positives_within(labels, mask), out.a2, out.grad_a2);
  out.total = out.a1 + out.a2;
  return out;
}

CovarianceLosses covariance_losses(const Vector& s_soft, const Vector& y_prob, const LabelVector& labels,
                                   const Mask& mask) {
  check_length(s_soft.size(), static_cast<std::size_t>(y_prob.size()), mask.size(), "covariance_losses");
  if (labels.size() != mask.size()) fail(ErrorKind::kShape, "covariance_losses: label length mismatch");
  CovarianceLosses out;
  if (!covariance_term(s_soft, y_prob, mask, out.r1, out.grad_r1_y, out.grad_r1_s)) {
    fail(ErrorKind::kDegenerateInput, "covariance_losses: empty mask");
  }
  out.r2_degenerate = !covariance_term(s_soft, y_prob, positives_within(labels, mask), out.r2,
                                       out.grad_r2_y, out.grad_r2_s);
  out.total = out.r1 + out.r2;
  return out;
}

IfgLoss group_individual_unfairness(const Matrix& z, const SimilarityMatrix& m,
                                    const GroupPartition& partition, bool with_grad, Exec exec) {
  if (z.rows() != m.size() || partition.group_of.size() != static_cast<std::size_t>(m.size())) {
    fail(ErrorKind::kShape, "individual unfairness: Z, M and partition sizes disagree");
  }
  const int groups = GroupPartition::kNumGroups;
  const auto sums = kernels::group_pair_sums(z, m.entries(), partition.group_of, groups, exec);
  IfgLoss out;
  out.group_loss.assign(groups, 0.0);
  out.group_pairs = sums.pairs;
  std::vector<double> scale(groups, 0.0);
  for (int g = 0; g < groups; ++g) {
    if (sums.pairs[g] == 0) continue;
    scale[g] = 1.0 / static_cast<double>(sums.pairs[g]);
    out.group_loss[g] = sums.sum[g] * scale[g];
  }
  if (with_grad) out.grad = kernels::group_pair_grad(z, m.entries(), partition.group_of, scale, exec);
  return out;
}

IfgLoss loss_ifg(const Matrix& z, const SimilarityMatrix& m, const GroupPartition& partition,
                 const std::vector<double>& lambdas, double gamma_bound, Exec exec) {
  if (lambdas.size() != GroupPartition::kNumGroups) {
    fail(ErrorKind::kConfig, "loss_ifg: expected one multiplier per group");
  }
  if (gamma_bound < 0.0) fail(ErrorKind::kConfig, "loss_ifg: gamma bound must be nonnegative");
  const auto& lp = group_individual_unfairness(z, m, partition, false, exec);
  IfgLoss out = lp;
  double value = 0.0;
  for (std::size_t g = 0; g < lambdas.size(); ++g) value += out.group_loss[g];
  for (std::size_t g = 0; g < lambdas.size(); ++g) value += lambdas[g] * (out.group_loss[g] - gamma_bound);
  out.value = value;

  std::vector<double> scale(lambdas.size(), 0.0);
  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    if (out.group_pairs[g] > 0) scale[g] = (1.0 + lambdas[g]) / static_cast<double>(out.group_pairs[g]);
  }
  out.grad = kernels::group_pair_grad(z, m.entries(), partition.group_of, scale, exec);
  return out;
}

LossBundle assemble_total(const LossComponents& c, double alpha, double beta, double eta) {
  const std::pair<const char*, double> named[] = {
      {"L_C", c.l_c},   {"L_Sens", c.l_sens}, {"L_A1", c.l_a1}, {"L_A2", c.l_a2},
      {"L_R1", c.l_r1}, {"L_R2", c.l_r2},     {"L_Ifg", c.l_ifg},
      {"alpha", alpha}, {"beta", beta},       {"eta", eta},
  };
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) fail(ErrorKind::kNumeric, std::string("non-finite loss component ") + name);
  }
  for (double lp : c.group_loss) {
    if (!std::isfinite(lp)) fail(ErrorKind::kNumeric, "non-finite loss component L_p");
  }
  LossBundle b;
  b.l_c = c.l_c;
  b.l_sens = c.l_sens;
  b.l_a1 = c.l_a1;
  b.l_a2 = c.l_a2;
  b.l_a = c.l_a1 + c.l_a2;
  b.l_r1 = c.l_r1;
  b.l_r2 = c.l_r2;
  b.l_cov = c.l_r1 + c.l_r2;
  b.l_g = beta * b.l_a + eta * b.l_cov;
  b.l_ifg = c.l_ifg;
  b.group_loss = c.group_loss;
  b.l_total = b.l_c + b.l_g + alpha * b.l_ifg;
  b.alpha = alpha;
  b.beta = beta;
  b.eta = eta;
  b.a1_degenerate = c.a1_degenerate;
  b.a2_degenerate = c.a2_degenerate;
  b.r2_degenerate = c.r2_degenerate;
  if (!std::isfinite(b.l_total)) fail(ErrorKind::kNumeric, "non-finite loss component L_total");
  return b;
}

}  // namespace fairgi
