#include "fairgi/models.hpp"

#include <cmath>
#include <string>

#include "fairgi/error.hpp"
#include "fairgi/kernels.hpp"

namespace fairgi {

namespace {

Parameter make_param(std::string name, Eigen::Index rows, Eigen::Index cols) {
  Parameter p{std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
  return p;
}

void glorot(Parameter& p, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = dist(rng);
  }
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  Matrix mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

Vector sigmoid(const Vector& logits) {
  Vector out(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) out[i] = fairgi::sigmoid(logits[i]);
  return out;
}

Matrix row_broadcast(const Matrix& m, const Matrix& row) { return m.rowwise() + row.row(0); }

}  // namespace

double sigmoid(double x) {
  // Keeps the output strictly inside (0, 1).
  x = std::clamp(x, -36.0, 36.0);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GraphOperators make_operators(const Graph& graph, Exec exec) {
  GraphOperators ops;
  ops.graph = &graph;
  ops.exec = exec;
  const NodeId n = graph.num_nodes();
  const auto& adj = graph.adjacency();

  std::vector<Triplet> with_self;
  with_self.reserve(static_cast<std::size_t>(adj.nnz() + n));
  for (NodeId i = 0; i < n; ++i) {
    with_self.push_back({i, i, 1.0});
    for (auto e = adj.row_begin(i); e < adj.row_end(i); ++e) with_self.push_back({i, adj.col[e], 1.0});
  }
  ops.attention_pattern = csr_from_triplets(n, std::move(with_self));
  ops.attention_rev = ops.attention_pattern.transpose_index();

  ops.propagation = ops.attention_pattern;
  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(ops.propagation.degree(i)));
  }
  for (NodeId i = 0; i < n; ++i) {
    for (auto e = ops.propagation.row_begin(i); e < ops.propagation.row_end(i); ++e) {
      ops.propagation.val[e] = inv_sqrt_deg[static_cast<std::size_t>(i)] *
                               inv_sqrt_deg[static_cast<std::size_t>(ops.propagation.col[e])];
    }
  }
  ops.propagated_features = kernels::spmm(ops.propagation, graph.features(), exec);
  return ops;
}

// ---------------------------------------------------------------- classifier

std::size_t classifier_parameter_count(int in_dim, int hidden, int heads) {
  (void)heads;  // attention vectors total `hidden` entries regardless of the head split
  const auto d = static_cast<std::size_t>(in_dim);
  const auto h = static_cast<std::size_t>(hidden);
  return d * h + 2 * h + h + h + 1;
}

ClassifierModel::ClassifierModel(const ClassifierHyper& hyper, std::mt19937_64& rng) : hyper_(hyper) {
  if (hyper.in_dim < 1 || hyper.hidden < 1 || hyper.heads < 1) {
    fail(ErrorKind::kConfig, "classifier dimensions must be positive");
  }
  if (hyper.hidden % hyper.heads != 0) {
    fail(ErrorKind::kConfig, "classifier hidden width must be divisible by the head count");
  }
  if (hyper.dropout < 0.0 || hyper.dropout >= 1.0) fail(ErrorKind::kConfig, "dropout must be in [0, 1)");
  const int channels = hyper.hidden / hyper.heads;
  params_.push_back(make_param("weight", hyper.in_dim, hyper.hidden));
  params_.push_back(make_param("att_src", hyper.heads, channels));
  params_.push_back(make_param("att_dst", hyper.heads, channels));
  params_.push_back(make_param("bias", 1, hyper.hidden));
  params_.push_back(make_param("head_weight", hyper.hidden, 1));
  params_.push_back(make_param("head_bias", 1, 1));
  glorot(params_[0], rng);
  glorot(params_[1], rng);
  glorot(params_[2], rng);
  glorot(params_[4], rng);
}

std::size_t ClassifierModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += static_cast<std::size_t>(p.value.size());
  return total;
}

ClassifierForward ClassifierModel::forward(const GraphOperators& ops, Mode mode,
                                           std::mt19937_64* rng) const {
  const Matrix& x = ops.graph->features();
  if (x.cols() != hyper_.in_dim) {
    fail(ErrorKind::kShape, "classifier expects feature width " + std::to_string(hyper_.in_dim) +
                                ", got " + std::to_string(x.cols()));
  }
  const bool drop = mode == Mode::kTrain && hyper_.dropout > 0.0;
  if (drop && rng == nullptr) fail(ErrorKind::kConfig, "train-mode forward needs an RNG");

  ClassifierForward f;
  f.mode = mode;
  if (drop) {
    f.input_mask = dropout_mask(x.rows(), x.cols(), hyper_.dropout, *rng);
    f.input = x.cwiseProduct(f.input_mask);
  } else {
    f.input = x;
  }
  f.projected = f.input * params_[0].value;
  f.attention = kernels::gat_forward(ops.attention_pattern, f.projected, params_[1].value,
                                     params_[2].value, hyper_.negative_slope, ops.exec);
  f.pre_activation = row_broadcast(f.attention.out, params_[3].value);
  f.h = f.pre_activation.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
  if (drop) {
    f.h_mask = dropout_mask(f.h.rows(), f.h.cols(), hyper_.dropout, *rng);
    f.h_dropped = f.h.cwiseProduct(f.h_mask);
  } else {
    f.h_dropped = f.h;
  }
  f.logits = (f.h_dropped * params_[4].value).col(0).array() + params_[5].value(0, 0);
  f.y_prob = sigmoid(f.logits);
  return f;
}

void ClassifierModel::backward(const GraphOperators& ops, const ClassifierForward& f,
                               const Vector& d_y_prob, const Matrix& d_h) {
  const auto n = f.h.rows();
  Matrix grad_h = Matrix::Zero(n, f.h.cols());
  if (d_y_prob.size() > 0) {
    const Vector d_logits = d_y_prob.cwiseProduct(f.y_prob.cwiseProduct((1.0 - f.y_prob.array()).matrix()));
    params_[4].grad += f.h_dropped.transpose() * d_logits;
    params_[5].grad(0, 0) += d_logits.sum();
    Matrix d_hd = d_logits * params_[4].value.transpose();
    grad_h += f.h_mask.size() > 0 ? Matrix(d_hd.cwiseProduct(f.h_mask)) : d_hd;
  }
  if (d_h.size() > 0) grad_h += d_h;

  const Matrix d_pre = grad_h.cwiseProduct(
      f.pre_activation.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); }));
  params_[3].grad += d_pre.colwise().sum();
  const auto back = kernels::gat_backward(ops.attention_pattern, ops.attention_rev, f.projected,
                                          params_[1].value, params_[2].value,
                                          hyper_.negative_slope, f.attention, d_pre, ops.exec);
  params_[1].grad += back.d_att_src;
  params_[2].grad += back.d_att_dst;
  params_[0].grad += f.input.transpose() * back.d_z;
}

void ClassifierModel::zero_head() {
  params_[4].value.setZero();
  params_[5].value.setZero();
}

void ClassifierModel::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

// ------------------------------------------------------------------ estimator

SensitiveEstimator::SensitiveEstimator(const EstimatorHyper& hyper, std::mt19937_64& rng) : hyper_(hyper) {
  if (hyper.in_dim < 1 || hyper.hidden < 1) fail(ErrorKind::kConfig, "estimator dimensions must be positive");
  params_.push_back(make_param("weight", hyper.in_dim, hyper.hidden));
  params_.push_back(make_param("bias", 1, hyper.hidden));
  params_.push_back(make_param("head_weight", hyper.hidden, 1));
  params_.push_back(make_param("head_bias", 1, 1));
  glorot(params_[0], rng);
  glorot(params_[2], rng);
}

EstimatorForward SensitiveEstimator::forward(const GraphOperators& ops) const {
  if (ops.propagated_features.cols() != hyper_.in_dim) {
    fail(ErrorKind::kShape, "estimator expects feature width " + std::to_string(hyper_.in_dim) +
                                ", got " + std::to_string(ops.propagated_features.cols()));
  }
  EstimatorForward f;
  f.pre_activation = row_broadcast(ops.propagated_features * params_[0].value, params_[1].value);
  f.h = f.pre_activation.cwiseMax(0.0);
  f.logits = (f.h * params_[2].value).col(0).array() + params_[3].value(0, 0);
  f.s_prob = sigmoid(f.logits);
  return f;
}

void SensitiveEstimator::backward(const GraphOperators& ops, const EstimatorForward& f,
                                  const Vector& d_s_prob) {
  const Vector d_logits = d_s_prob.cwiseProduct(f.s_prob.cwiseProduct((1.0 - f.s_prob.array()).matrix()));
  params_[2].grad += f.h.transpose() * d_logits;
  params_[3].grad(0, 0) += d_logits.sum();
  const Matrix d_pre = (d_logits * params_[2].value.transpose())
                           .cwiseProduct(f.pre_activation.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  params_[1].grad += d_pre.colwise().sum();
  params_[0].grad += ops.propagated_features.transpose() * d_pre;
}

void SensitiveEstimator::zero_head() {
  params_[2].value.setZero();
  params_[3].value.setZero();
}

void SensitiveEstimator::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

// ------------------------------------------------------------------ adversary

Adversary::Adversary(int in_dim, std::mt19937_64& rng) {
  if (in_dim < 1) fail(ErrorKind::kConfig, "adversary input width must be positive");
  params_.push_back(make_param("weight", in_dim, 1));
  params_.push_back(make_param("bias", 1, 1));
  glorot(params_[0], rng);
}

Vector Adversary::forward(const Matrix& h) const {
  if (h.cols() != params_[0].value.rows()) {
    fail(ErrorKind::kShape, "adversary expects embedding width " +
                                std::to_string(params_[0].value.rows()) + ", got " + std::to_string(h.cols()));
  }
  const Vector logits = (h * params_[0].value).col(0).array() + params_[1].value(0, 0);
  return sigmoid(logits);
}

namespace {

Vector adversary_logit_grad(const Vector& a_prob, const Vector& d_a_prob) {
  return d_a_prob.cwiseProduct(a_prob.cwiseProduct((1.0 - a_prob.array()).matrix()));
}

}  // namespace

Matrix Adversary::input_grad(const Vector& a_prob, const Vector& d_a_prob) const {
  return adversary_logit_grad(a_prob, d_a_prob) * params_[0].value.transpose();
}

Matrix Adversary::backward(const Matrix& h, const Vector& a_prob, const Vector& d_a_prob) {
  const Vector d_logits = adversary_logit_grad(a_prob, d_a_prob);
  params_[0].grad += h.transpose() * d_logits;
  params_[1].grad(0, 0) += d_logits.sum();
  return d_logits * params_[0].value.transpose();
}

void Adversary::set(const Matrix& weight, double bias) {
  if (weight.rows() != params_[0].value.rows() || weight.cols() != 1) {
    fail(ErrorKind::kShape, "adversary weight shape mismatch");
  }
  params_[0].value = weight;
  params_[1].value(0, 0) = bias;
}

void Adversary::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

// -------------------------------------------------------------------- helpers

SensitiveCompletion complete_sensitive(const LabelVector& observed, const Vector& s_prob,
                                       double threshold) {
  if (static_cast<Eigen::Index>(observed.size()) != s_prob.size()) {
    fail(ErrorKind::kShape, "complete_sensitive: length mismatch");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorKind::kConfig, "threshold must be in (0, 1)");
  SensitiveCompletion out;
  out.hard.resize(observed.size());
  out.soft.resize(s_prob.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (is_known(observed[i])) {
      out.hard[i] = observed[i] == BinaryLabel::kOne ? 1 : 0;
      out.soft[idx] = out.hard[i];
    } else {
      out.hard[i] = s_prob[idx] >= threshold ? 1 : 0;
      out.soft[idx] = s_prob[idx];
    }
  }
  return out;
}

LabelVector observed_sensitive(const LabelVector& sensitive, const Mask& labeled) {
  LabelVector out(sensitive.size(), BinaryLabel::kUnknown);
  for (std::size_t i = 0; i < sensitive.size(); ++i) {
    if (labeled[i]) out[i] = sensitive[i];
  }
  return out;
}

std::vector<Matrix> snapshot(std::span<const Parameter> params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.value);
  return out;
}

void restore(std::span<Parameter> params, const std::vector<Matrix>& values) {
  if (values.size() != params.size()) fail(ErrorKind::kShape, "restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].rows() != params[i].value.rows() || values[i].cols() != params[i].value.cols()) {
      fail(ErrorKind::kShape, "restore: shape mismatch for " + params[i].name);
    }
    params[i].value = values[i];
  }
}

}  // namespace fairgi
