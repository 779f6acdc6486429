#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairgi/graph.hpp"
#include "fairgi/losses.hpp"
#include "fairgi/metrics.hpp"
#include "fairgi/models.hpp"
#include "fairgi/optim.hpp"
#include "fairgi/similarity.hpp"

namespace fairgi {

struct ModelHyper {
  int hidden = 64;
  int heads = 1;
  double dropout = 0.5;
  double negative_slope = 0.2;
  int sensitive_hidden = 64;
};

struct TrainConfig {
  double alpha = 0.5;          // coefficient of L_Ifg
  double beta = 0.8;           // coefficient of L_A
  double eta = 6.0;            // coefficient of L_Cov
  double gamma_bound = 0.004;  // per-group error bound inside L_Ifg
  std::vector<double> lambdas{0.5, 1.25};
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  int epochs = 1000;
  std::size_t sensitive_budget = 500;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  bool disable_ifg = false;
  bool disable_eo_terms = false;
  SimilarityMethod similarity_method = SimilarityMethod::kCosine;
  int similarity_k = 10;
  ModelHyper model;
  SplitRatios split;

  int sensitive_epochs = 200;
  double sensitive_learning_rate = 1e-2;
  double sensitive_weight_decay = 5e-4;
  double adversary_learning_rate = 1e-3;
  // Validation dSP + dEO (percentage points) an epoch must stay below to be
  // eligible for checkpoint selection.
  double fairness_gate = 10.0;
  // Three separate classifier steps per epoch (L_C, then L_G, then L_Ifg)
  // instead of one step on the summed objective.
  bool sequential_steps = false;
  // Classifier side of the adversarial game pushes the adversary towards 1/2
  // (cross-entropy against a constant 1/2) instead of minimizing L_A.
  bool uniform_adversary_target = false;
  std::optional<double> if_epsilon;
};

// Throws a config error on the first violated invariant.
void validate(const TrainConfig& config);

// Hyperparameter presets for the nba, credit and pokec-n datasets.
TrainConfig preset_config(const std::string& dataset);

struct ModelState {
  ClassifierModel classifier;
  SensitiveEstimator estimator;
  Adversary adversary;
  AdamOptimizer classifier_opt;
  AdamOptimizer estimator_opt;
  AdamOptimizer adversary_opt;
};

struct ValidationMetrics {
  std::optional<double> accuracy;
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;

  friend bool operator==(const ValidationMetrics&, const ValidationMetrics&) = default;
};

struct BestCheckpoint {
  int epoch = -1;
  std::vector<Matrix> classifier;
  ValidationMetrics validation;
  bool gate_met = false;
};

struct EpochRecord {
  LossBundle losses;
  // L_A on the same embeddings immediately before and after the adversary step.
  double adversary_before = 0.0;
  double adversary_after = 0.0;
  ValidationMetrics validation;
};

struct TrainState {
  ModelState models;
  int epoch = 0;
  std::vector<EpochRecord> history;
  std::optional<BestCheckpoint> best;
  std::mt19937_64 dropout_rng;
};

// Everything that stays fixed for one run: the (normalized) graph, its
// derived operators, the split, and the similarity matrix.
struct TrainingContext {
  const Graph* graph = nullptr;
  GraphOperators ops;
  const Split* split = nullptr;
  const SimilarityMatrix* similarity = nullptr;
  TrainConfig config;
};

TrainingContext make_context(const Graph& graph, const Split& split, const SimilarityMatrix& m,
                             const TrainConfig& config, Exec exec = Exec::kParallel);

// Fresh models and optimizers, seeded from config.seed.
TrainState init_state(const TrainingContext& ctx);

// Trains the sensitive estimator on the labeled sensitive nodes; returns the
// final L_Sens.
double pretrain_sensitive(TrainState& state, const TrainingContext& ctx);

// Estimated sensitive attribute from the current estimator.
SensitiveCompletion estimate_sensitive(const TrainState& state, const TrainingContext& ctx);

// One epoch: complete the sensitive attribute, take the classifier step with
// the adversary frozen, then the adversary ascent step with the classifier
// frozen. Appends to state.history.
void train_step(TrainState& state, const TrainingContext& ctx);

ValidationMetrics evaluate_validation(const TrainState& state, const TrainingContext& ctx,
                                      const SensitiveCompletion& completion);

struct Checkpoint {
  TrainConfig config;
  int best_epoch = -1;
  ValidationMetrics validation;
  bool gate_met = false;
  std::vector<Parameter> classifier;
  std::vector<Parameter> estimator;
  std::vector<Parameter> adversary;
};

struct FitResult {
  Checkpoint checkpoint;
  FairnessReport report;
  std::vector<EpochRecord> history;
};

// Sensitive pretraining, config.epochs train steps, fairness-gated best-epoch
// selection, and the final report on the test mask with true sensitive
// labels.
FitResult fit(const Graph& graph, const Split& split, const SimilarityMatrix& m, const TrainConfig& config,
              const std::string& dataset_name = "", Exec exec = Exec::kParallel);

// Report for given classifier outputs on the test mask.
FairnessReport evaluate_test(const Graph& graph, const Split& split, const SimilarityMatrix& m,
                             const Vector& y_prob, ReportMetadata metadata,
                             std::optional<double> if_epsilon = std::nullopt, Exec exec = Exec::kParallel);

// Classifier trained on L_C alone without constructing any fairness
// component. Returns the per-epoch L_C sequence.
std::vector<double> train_classifier_only(const Graph& graph, const Split& split, const TrainConfig& config,
                                          Exec exec = Exec::kParallel);

struct RunInputs {
  Graph graph;  // features standardized on training rows
  Split split;
  SimilarityMatrix similarity;
};

// Split, normalize on training statistics, and build the similarity matrix.
RunInputs prepare_inputs(const Graph& raw, const TrainConfig& config, Exec exec = Exec::kParallel);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace fairgi
