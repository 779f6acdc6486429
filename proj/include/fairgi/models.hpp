#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fairgi/csr.hpp"
#include "fairgi/graph.hpp"
#include "fairgi/kernels.hpp"
#include "fairgi/types.hpp"

namespace fairgi {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

enum class Mode { kTrain, kEval };

// Graph operators derived once per graph and shared by every forward pass:
// the attention pattern (adjacency plus self-loops), its transpose index, and
// the symmetrically normalized propagation matrix D^-1/2 (A + I) D^-1/2.
struct GraphOperators {
  const Graph* graph = nullptr;
  CsrMatrix attention_pattern;
  std::vector<std::int64_t> attention_rev;
  CsrMatrix propagation;
  Matrix propagated_features;  // propagation * X, fixed for a given graph
  Exec exec = Exec::kParallel;
};

GraphOperators make_operators(const Graph& graph, Exec exec = Exec::kParallel);

double sigmoid(double x);

struct ClassifierHyper {
  int in_dim = 0;
  int hidden = 64;
  int heads = 1;
  double dropout = 0.5;
  double negative_slope = 0.2;
};

// Everything the backward pass of the classifier needs from its forward pass.
struct ClassifierForward {
  Mode mode = Mode::kEval;
  Matrix input;        // features after input dropout
  Matrix input_mask;   // dropout scale per entry (empty in eval mode)
  Matrix projected;    // input * W
  kernels::GatForward attention;
  Matrix pre_activation;
  Matrix h;            // ELU output: the node embeddings
  Matrix h_mask;
  Matrix h_dropped;
  Vector logits;
  Vector y_prob;
};

// One graph-attention layer followed by an affine sigmoid scoring head.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(const ClassifierHyper& hyper, std::mt19937_64& rng);

  const ClassifierHyper& hyper() const { return hyper_; }
  std::span<Parameter> parameters() { return params_; }
  std::span<const Parameter> parameters() const { return params_; }
  std::size_t parameter_count() const;

  // The RNG is only consulted in train mode (dropout).
  ClassifierForward forward(const GraphOperators& ops, Mode mode, std::mt19937_64* rng = nullptr) const;

  // Accumulates parameter gradients given dL/dy_prob and an extra dL/dH.
  // Either may be empty.
  void backward(const GraphOperators& ops, const ClassifierForward& fwd, const Vector& d_y_prob,
                const Matrix& d_h);

  void zero_head();
  void zero_grad();

 private:
  ClassifierHyper hyper_;
  std::vector<Parameter> params_;  // W, att_src, att_dst, bias, head_w, head_b
};

std::size_t classifier_parameter_count(int in_dim, int hidden, int heads);

struct EstimatorHyper {
  int in_dim = 0;
  int hidden = 64;
};

struct EstimatorForward {
  Matrix pre_activation;
  Matrix h;
  Vector logits;
  Vector s_prob;
};

// One graph-convolution layer followed by an affine sigmoid head.
class SensitiveEstimator {
 public:
  SensitiveEstimator() = default;
  SensitiveEstimator(const EstimatorHyper& hyper, std::mt19937_64& rng);

  const EstimatorHyper& hyper() const { return hyper_; }
  std::span<Parameter> parameters() { return params_; }
  std::span<const Parameter> parameters() const { return params_; }

  EstimatorForward forward(const GraphOperators& ops) const;
  void backward(const GraphOperators& ops, const EstimatorForward& fwd, const Vector& d_s_prob);

  void zero_head();
  void zero_grad();

 private:
  EstimatorHyper hyper_;
  std::vector<Parameter> params_;  // W, bias, head_w, head_b
};

// Single affine map from the embedding width to one sigmoid output.
class Adversary {
 public:
  Adversary() = default;
  Adversary(int in_dim, std::mt19937_64& rng);

  int in_dim() const { return static_cast<int>(params_[0].value.rows()); }
  std::span<Parameter> parameters() { return params_; }
  std::span<const Parameter> parameters() const { return params_; }

  Vector forward(const Matrix& h) const;
  // dL/dH for a given dL/da_prob, without touching parameter gradients.
  Matrix input_grad(const Vector& a_prob, const Vector& d_a_prob) const;
  // Accumulates parameter gradients and returns dL/dH.
  Matrix backward(const Matrix& h, const Vector& a_prob, const Vector& d_a_prob);

  void set(const Matrix& weight, double bias);
  void zero_grad();

 private:
  std::vector<Parameter> params_;  // weight (in_dim x 1), bias
};

struct SensitiveCompletion {
  std::vector<std::uint8_t> hard;
  Vector soft;
};

// Observed values win; elsewhere hard = [s_prob >= threshold], soft = s_prob.
SensitiveCompletion complete_sensitive(const LabelVector& observed, const Vector& s_prob,
                                       double threshold);

// Restrict a sensitive vector to the observed entries of a mask.
LabelVector observed_sensitive(const LabelVector& sensitive, const Mask& labeled);

// Snapshot and restore of parameter values, used for best-epoch selection.
std::vector<Matrix> snapshot(std::span<const Parameter> params);
void restore(std::span<Parameter> params, const std::vector<Matrix>& values);

}  // namespace fairgi
