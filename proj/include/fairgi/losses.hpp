#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairgi/graph.hpp"
#include "fairgi/similarity.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

inline constexpr double kProbClip = 1e-7;

// Scalar loss together with its gradient w.r.t. the probability vector it
// was evaluated on (zero outside the mask).
struct ScalarLoss {
  double value = 0.0;
  Vector grad;
};

// Mean binary cross-entropy over the masked nodes, probabilities clipped
// into [1e-7, 1 - 1e-7]. Masked nodes must carry a known label.
ScalarLoss loss_classification(const Vector& y_prob, const LabelVector& labels, const Mask& mask);
ScalarLoss loss_sensitive(const Vector& s_prob, const LabelVector& sensitive, const Mask& labeled_mask);

struct AdversaryLosses {
  double a1 = 0.0;  // statistical-parity game
  double a2 = 0.0;  // equal-opportunity game (nodes with y = 1)
  double total = 0.0;
  bool a1_degenerate = false;
  bool a2_degenerate = false;
  Vector grad_a1;   // w.r.t. a_prob
  Vector grad_a2;
};

// a1 = mean_{s=1} log a + mean_{s=0} log(1 - a), over the mask; a2 is the
// same restricted to y = 1. Terms whose subsets are empty are zeroed and
// flagged.
AdversaryLosses adversary_losses(const Vector& a_prob, const std::vector<std::uint8_t>& s_hard,
                                 const LabelVector& labels, const Mask& mask);

struct CovarianceLosses {
  double r1 = 0.0;
  double r2 = 0.0;
  double total = 0.0;
  bool r2_degenerate = false;
  Vector grad_r1_y;  // w.r.t. y_prob
  Vector grad_r2_y;
  Vector grad_r1_s;  // w.r.t. s_soft
  Vector grad_r2_s;
};

// |Cov(s, y)| over the mask and over mask with y = 1, 1/N normalization.
CovarianceLosses covariance_losses(const Vector& s_soft, const Vector& y_prob,
                                   const LabelVector& labels, const Mask& mask);

struct IfgLoss {
  double value = 0.0;
  std::vector<double> group_loss;          // L_p
  std::vector<std::int64_t> group_pairs;   // n_p, ordered pairs with nonzero M
  Matrix grad;                             // w.r.t. Z
};

// Within-group individual fairness with fixed multipliers:
// sum_p L_p + sum_p lambda_p (L_p - gamma).
IfgLoss loss_ifg(const Matrix& z, const SimilarityMatrix& m, const GroupPartition& partition,
                 const std::vector<double>& lambdas, double gamma_bound, Exec exec = Exec::kParallel);

// L_p per group without the Lagrangian terms. Shared with the metrics.
IfgLoss group_individual_unfairness(const Matrix& z, const SimilarityMatrix& m,
                                    const GroupPartition& partition, bool with_grad,
                                    Exec exec = Exec::kParallel);

struct LossComponents {
  double l_c = 0.0;
  double l_sens = 0.0;
  double l_a1 = 0.0;
  double l_a2 = 0.0;
  double l_r1 = 0.0;
  double l_r2 = 0.0;
  double l_ifg = 0.0;
  std::vector<double> group_loss;
  bool a1_degenerate = false;
  bool a2_degenerate = false;
  bool r2_degenerate = false;
};

struct LossBundle {
  double l_c = 0.0;
  double l_sens = 0.0;
  double l_a1 = 0.0;
  double l_a2 = 0.0;
  double l_a = 0.0;
  double l_r1 = 0.0;
  double l_r2 = 0.0;
  double l_cov = 0.0;
  double l_g = 0.0;
  double l_ifg = 0.0;
  std::vector<double> group_loss;
  double l_total = 0.0;

  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  bool a1_degenerate = false;
  bool a2_degenerate = false;
  bool r2_degenerate = false;
};

// L_A = L_A1 + L_A2, L_Cov = L_R1 + L_R2, L_G = beta L_A + eta L_Cov,
// L_total = L_C + L_G + alpha L_Ifg. Throws a numeric error naming the first
// non-finite component.
LossBundle assemble_total(const LossComponents& components, double alpha, double beta, double eta);

}  // namespace fairgi
