#include "fairgi/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "fairgi/config.hpp"
#include "fairgi/data_io.hpp"
#include "fairgi/error.hpp"

namespace fairgi {

namespace {

enum Stream : std::uint64_t { kClassifierInit = 1, kEstimatorInit = 2, kAdversaryInit = 3, kDropout = 4 };

void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::kConfig, msg);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate(const TrainConfig& c) {
  require(finite_nonneg(c.alpha), "alpha must be a finite non-negative number");
  require(finite_nonneg(c.beta), "beta must be a finite non-negative number");
  require(finite_nonneg(c.eta), "eta must be a finite non-negative number");
  require(finite_nonneg(c.gamma_bound), "gamma_bound must be a finite non-negative number");
  require(finite_nonneg(c.learning_rate), "learning_rate must be a finite non-negative number");
  require(finite_nonneg(c.weight_decay), "weight_decay must be a finite non-negative number");
  require(c.epochs >= 1, "epochs must be at least 1");
  require(c.lambdas.size() == static_cast<std::size_t>(GroupPartition::kNumGroups),
          "lambdas needs exactly one entry per sensitive group (2)");
  for (double l : c.lambdas) require(std::isfinite(l), "lambdas must be finite");
  require(c.split.train > 0.0 && c.split.val > 0.0 && c.split.test > 0.0 &&
              std::abs(c.split.train + c.split.val + c.split.test - 1.0) <= 1e-9,
          "split ratios must be positive and sum to 1");
  require(c.threshold > 0.0 && c.threshold < 1.0, "threshold must lie in (0, 1)");
  require(c.similarity_k >= 1, "similarity_k must be at least 1");
  require(c.model.hidden >= 1 && c.model.heads >= 1 && c.model.sensitive_hidden >= 1,
          "model widths must be positive");
  require(c.model.dropout >= 0.0 && c.model.dropout < 1.0, "dropout must lie in [0, 1)");
  require(std::isfinite(c.model.negative_slope), "negative_slope must be finite");
  require(c.sensitive_epochs >= 0, "sensitive_epochs must be non-negative");
  require(finite_nonneg(c.sensitive_learning_rate), "sensitive_learning_rate must be non-negative");
  require(finite_nonneg(c.sensitive_weight_decay), "sensitive_weight_decay must be non-negative");
  require(finite_nonneg(c.adversary_learning_rate), "adversary_learning_rate must be non-negative");
  require(std::isfinite(c.fairness_gate), "fairness_gate must be finite");
  if (c.if_epsilon) require(finite_nonneg(*c.if_epsilon), "if_epsilon must be non-negative");
}

TrainConfig preset_config(const std::string& dataset) {
  TrainConfig c;
  c.gamma_bound = 0.004;
  c.weight_decay = 1e-5;
  if (dataset == "nba") {
    c.alpha = 1e-9;
    c.beta = 0.01;
    c.lambdas = {0.5, 1.0};
    c.eta = 16.0;
    c.sensitive_budget = 50;
    c.learning_rate = 0.001;
  } else if (dataset == "credit") {
    c.alpha = 0.5;
    c.beta = 0.8;
    c.lambdas = {0.5, 1.25};
    c.eta = 6.0;
    c.sensitive_budget = 500;
    c.learning_rate = 0.001;
  } else if (dataset == "pokec-n") {
    c.alpha = 1e-9;
    c.beta = 0.02;
    c.lambdas = {0.5, 1.25};
    c.eta = 3.0;
    c.sensitive_budget = 200;
    c.learning_rate = 0.0005;
  } else {
    fail(ErrorKind::kConfig, "unknown preset '" + dataset + "' (expected nba, credit or pokec-n)");
  }
  return c;
}

TrainingContext make_context(const Graph& graph, const Split& split, const SimilarityMatrix& m,
                             const TrainConfig& config, Exec exec) {
  validate(config);
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (split.train.size() != n || split.val.size() != n || split.test.size() != n ||
      split.sensitive_labeled.size() != n) {
    fail(ErrorKind::kShape, "split masks do not match the node count");
  }
  if (m.size() != graph.num_nodes()) fail(ErrorKind::kShape, "similarity matrix does not match the node count");
  TrainingContext ctx;
  ctx.graph = &graph;
  ctx.ops = make_operators(graph, exec);
  ctx.split = &split;
  ctx.similarity = &m;
  ctx.config = config;
  return ctx;
}

TrainState init_state(const TrainingContext& ctx) {
  const TrainConfig& c = ctx.config;
  const int d = static_cast<int>(ctx.graph->feature_dim());
  std::mt19937_64 rng_c(derive_seed(c.seed, kClassifierInit));
  std::mt19937_64 rng_s(derive_seed(c.seed, kEstimatorInit));
  std::mt19937_64 rng_a(derive_seed(c.seed, kAdversaryInit));

  TrainState state;
  ClassifierHyper ch;
  ch.in_dim = d;
  ch.hidden = c.model.hidden;
  ch.heads = c.model.heads;
  ch.dropout = c.model.dropout;
  ch.negative_slope = c.model.negative_slope;
  state.models.classifier = ClassifierModel(ch, rng_c);
  state.models.estimator = SensitiveEstimator(EstimatorHyper{d, c.model.sensitive_hidden}, rng_s);
  state.models.adversary = Adversary(c.model.hidden * c.model.heads, rng_a);
  state.models.classifier_opt = AdamOptimizer({c.learning_rate, c.weight_decay});
  state.models.estimator_opt = AdamOptimizer({c.sensitive_learning_rate, c.sensitive_weight_decay});
  state.models.adversary_opt = AdamOptimizer({c.adversary_learning_rate, 0.0});
  state.dropout_rng.seed(derive_seed(c.seed, kDropout));
  return state;
}

double pretrain_sensitive(TrainState& state, const TrainingContext& ctx) {
  const Mask& labeled = ctx.split->sensitive_labeled;
  if (count(labeled) == 0) fail(ErrorKind::kConfig, "no labeled sensitive nodes to train the estimator on");
  auto& est = state.models.estimator;
  for (int e = 0; e < ctx.config.sensitive_epochs; ++e) {
    const EstimatorForward fwd = est.forward(ctx.ops);
    const ScalarLoss loss = loss_sensitive(fwd.s_prob, ctx.graph->sensitive(), labeled);
    if (!std::isfinite(loss.value)) fail(ErrorKind::kNumeric, "non-finite L_Sens during pretraining");
    est.zero_grad();
    est.backward(ctx.ops, fwd, loss.grad);
    state.models.estimator_opt.step(est.parameters());
  }
  return loss_sensitive(est.forward(ctx.ops).s_prob, ctx.graph->sensitive(), labeled).value;
}

SensitiveCompletion estimate_sensitive(const TrainState& state, const TrainingContext& ctx) {
  const EstimatorForward fwd = state.models.estimator.forward(ctx.ops);
  return complete_sensitive(observed_sensitive(ctx.graph->sensitive(), ctx.split->sensitive_labeled), fwd.s_prob,
                            ctx.config.threshold);
}

namespace {

struct Terms {
  bool classification = true;
  bool group = true;
  bool individual = true;
};

struct Objective {
  LossBundle bundle;
  Vector d_y;
  Matrix d_h;
};

Matrix as_column(const Vector& v) { return Matrix(v); }

double alpha_effective(const TrainConfig& c) { return c.disable_ifg ? 0.0 : c.alpha; }

// Cross-entropy of a_prob against a constant 1/2 over the mask, gradient only.
Vector uniform_target_grad(const Vector& a_prob, const Mask& mask) {
  Vector g = Vector::Zero(a_prob.size());
  const double n = static_cast<double>(count(mask));
  if (n == 0.0) return g;
  for (Eigen::Index i = 0; i < a_prob.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double a = std::clamp(a_prob[i], kProbClip, 1.0 - kProbClip);
    g[i] = -(0.5 / a - 0.5 / (1.0 - a)) / n;
  }
  return g;
}

Objective classifier_objective(const TrainState& state, const TrainingContext& ctx, const ClassifierForward& fwd,
                               const Vector& a_prob, const SensitiveCompletion& completion,
                               const GroupPartition& partition, double l_sens, const Terms& terms) {
  const TrainConfig& c = ctx.config;
  const Graph& g = *ctx.graph;
  const Mask& train = ctx.split->train;
  const double alpha = alpha_effective(c);

  const ScalarLoss lc = loss_classification(fwd.y_prob, g.labels(), train);
  AdversaryLosses adv = adversary_losses(a_prob, completion.hard, g.labels(), train);
  CovarianceLosses cov = covariance_losses(completion.soft, fwd.y_prob, g.labels(), train);
  if (c.disable_eo_terms) {
    adv.a2 = 0.0;
    adv.a2_degenerate = false;
    adv.grad_a2.setZero();
    cov.r2 = 0.0;
    cov.r2_degenerate = false;
    cov.grad_r2_y.setZero();
  }
  const IfgLoss ifg = loss_ifg(as_column(fwd.y_prob), *ctx.similarity, partition, c.lambdas, c.gamma_bound,
                               ctx.ops.exec);

  LossComponents comp;
  comp.l_c = lc.value;
  comp.l_sens = l_sens;
  comp.l_a1 = adv.a1;
  comp.l_a2 = adv.a2;
  comp.l_r1 = cov.r1;
  comp.l_r2 = cov.r2;
  comp.l_ifg = ifg.value;
  comp.group_loss = ifg.group_loss;
  comp.a1_degenerate = adv.a1_degenerate;
  comp.a2_degenerate = adv.a2_degenerate;
  comp.r2_degenerate = cov.r2_degenerate;

  Objective out;
  out.bundle = assemble_total(comp, alpha, c.beta, c.eta);
  out.d_y = terms.classification ? lc.grad : Vector::Zero(fwd.y_prob.size());
  if (terms.group && c.eta != 0.0) out.d_y += c.eta * (cov.grad_r1_y + cov.grad_r2_y);
  if (terms.individual && alpha != 0.0) out.d_y += alpha * ifg.grad.col(0);
  if (terms.group && c.beta != 0.0) {
    const Vector d_a = c.uniform_adversary_target ? Vector(uniform_target_grad(a_prob, train))
                                                  : Vector(adv.grad_a1 + adv.grad_a2);
    out.d_h = state.models.adversary.input_grad(a_prob, c.beta * d_a);
  }
  return out;
}

// L_A as the adversary sees it: its ascent objective.
AdversaryLosses adversary_objective(const TrainingContext& ctx, const Vector& a_prob,
                                    const SensitiveCompletion& completion) {
  AdversaryLosses adv = adversary_losses(a_prob, completion.hard, ctx.graph->labels(), ctx.split->train);
  if (ctx.config.disable_eo_terms) {
    adv.a2 = 0.0;
    adv.grad_a2.setZero();
  }
  adv.total = adv.a1 + adv.a2;
  return adv;
}

}  // namespace

void train_step(TrainState& state, const TrainingContext& ctx) {
  const TrainConfig& c = ctx.config;
  auto& models = state.models;

  const EstimatorForward est = models.estimator.forward(ctx.ops);
  const SensitiveCompletion completion = complete_sensitive(
      observed_sensitive(ctx.graph->sensitive(), ctx.split->sensitive_labeled), est.s_prob, c.threshold);
  const double l_sens = loss_sensitive(est.s_prob, ctx.graph->sensitive(), ctx.split->sensitive_labeled).value;
  const GroupPartition partition = partition_by_sensitive(completion.hard);

  const ClassifierForward fwd = models.classifier.forward(ctx.ops, Mode::kTrain, &state.dropout_rng);
  const Vector a_prob = models.adversary.forward(fwd.h);

  EpochRecord record;
  if (!c.sequential_steps) {
    const Objective obj = classifier_objective(state, ctx, fwd, a_prob, completion, partition, l_sens, Terms{});
    record.losses = obj.bundle;
    models.classifier.zero_grad();
    models.classifier.backward(ctx.ops, fwd, obj.d_y, obj.d_h);
    models.classifier_opt.step(models.classifier.parameters());
  } else {
    const Terms phases[] = {{true, false, false}, {false, true, false}, {false, false, true}};
    const bool active[] = {true, c.beta != 0.0 || c.eta != 0.0, alpha_effective(c) != 0.0};
    for (int p = 0; p < 3; ++p) {
      if (!active[p]) continue;
      ClassifierForward cur = p == 0 ? fwd : models.classifier.forward(ctx.ops, Mode::kTrain, &state.dropout_rng);
      const Vector cur_a = p == 0 ? a_prob : models.adversary.forward(cur.h);
      const Objective obj =
          classifier_objective(state, ctx, cur, cur_a, completion, partition, l_sens, phases[p]);
      if (p == 0) record.losses = obj.bundle;
      models.classifier.zero_grad();
      models.classifier.backward(ctx.ops, cur, obj.d_y, obj.d_h);
      models.classifier_opt.step(models.classifier.parameters());
    }
  }

  // Adversary ascent on the embeddings the classifier step was taken from.
  const AdversaryLosses before = adversary_objective(ctx, a_prob, completion);
  models.adversary.zero_grad();
  models.adversary.backward(fwd.h, a_prob, before.grad_a1 + before.grad_a2);
  models.adversary_opt.step(models.adversary.parameters(), /*ascend=*/true);
  record.adversary_before = before.total;
  record.adversary_after = adversary_objective(ctx, models.adversary.forward(fwd.h), completion).total;

  state.history.push_back(std::move(record));
  ++state.epoch;
}

ValidationMetrics evaluate_validation(const TrainState& state, const TrainingContext& ctx,
                                      const SensitiveCompletion& completion) {
  const ClassifierForward fwd = state.models.classifier.forward(ctx.ops, Mode::kEval);
  const Mask& val = ctx.split->val;
  std::vector<std::uint8_t> y_hard(static_cast<std::size_t>(fwd.y_prob.size()));
  for (std::size_t i = 0; i < y_hard.size(); ++i) y_hard[i] = fwd.y_prob[static_cast<Eigen::Index>(i)] >= 0.5;
  LabelVector s_est(completion.hard.size());
  for (std::size_t i = 0; i < s_est.size(); ++i) s_est[i] = from_bit(completion.hard[i]);

  ValidationMetrics out;
  out.accuracy = predictive_metrics(fwd.y_prob, ctx.graph->labels(), val).accuracy;
  const GroupFairness gf = group_metrics(y_hard, ctx.graph->labels(), s_est, val);
  out.delta_sp = gf.delta_sp;
  out.delta_eo = gf.delta_eo;
  return out;
}

namespace {

bool passes_gate(const ValidationMetrics& v, double gate) {
  return v.delta_sp && v.delta_eo && *v.delta_sp + *v.delta_eo < gate;
}

bool better(const ValidationMetrics& v, bool gate_met, const std::optional<BestCheckpoint>& best) {
  if (!best) return true;
  if (gate_met != best->gate_met) return gate_met;
  const double acc = v.accuracy.value_or(-1.0);
  const double best_acc = best->validation.accuracy.value_or(-1.0);
  return acc > best_acc;
}

std::vector<Parameter> copy_params(std::span<const Parameter> params) {
  std::vector<Parameter> out(params.begin(), params.end());
  for (auto& p : out) p.grad = Matrix();
  return out;
}

Vector eval_predictions(const ClassifierModel& model, const GraphOperators& ops) {
  return model.forward(ops, Mode::kEval).y_prob;
}

}  // namespace

FairnessReport evaluate_test(const Graph& graph, const Split& split, const SimilarityMatrix& m,
                             const Vector& y_prob, ReportMetadata metadata, std::optional<double> if_epsilon,
                             Exec exec) {
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (static_cast<std::size_t>(y_prob.size()) != n) fail(ErrorKind::kShape, "prediction count does not match nodes");
  const LabelVector& s = graph.sensitive();

  Mask keep(n, 0);
  std::vector<NodeId> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (split.test[i] && is_known(s[i])) {
      keep[i] = 1;
      kept.push_back(static_cast<NodeId>(i));
    }
  }
  std::vector<std::uint8_t> y_hard(n);
  for (std::size_t i = 0; i < n; ++i) y_hard[i] = y_prob[static_cast<Eigen::Index>(i)] >= 0.5;

  const PredictiveMetrics pred = predictive_metrics(y_prob, graph.labels(), split.test);
  const GroupFairness group = group_metrics(y_hard, graph.labels(), s, split.test);

  Matrix z(static_cast<Eigen::Index>(kept.size()), 1);
  LabelVector s_kept(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    z(static_cast<Eigen::Index>(r), 0) = y_prob[kept[r]];
    s_kept[r] = s[static_cast<std::size_t>(kept[r])];
  }
  const IndividualFairness indiv = individual_metrics(z, m.restrict_to(keep), partition_by_sensitive(s_kept), exec);
  metadata.eval_nodes = kept.size();
  return build_report(pred, group, indiv, std::move(metadata), if_epsilon);
}

FitResult fit(const Graph& graph, const Split& split, const SimilarityMatrix& m, const TrainConfig& config,
              const std::string& dataset_name, Exec exec) {
  const TrainingContext ctx = make_context(graph, split, m, config, exec);
  TrainState state = init_state(ctx);
  pretrain_sensitive(state, ctx);
  const SensitiveCompletion completion = estimate_sensitive(state, ctx);

  for (int e = 0; e < config.epochs; ++e) {
    train_step(state, ctx);
    const ValidationMetrics val = evaluate_validation(state, ctx, completion);
    state.history.back().validation = val;
    const bool gate = passes_gate(val, config.fairness_gate);
    if (better(val, gate, state.best)) {
      state.best = BestCheckpoint{e, snapshot(state.models.classifier.parameters()), val, gate};
    }
  }
  restore(state.models.classifier.parameters(), state.best->classifier);

  ReportMetadata meta;
  meta.dataset = dataset_name;
  meta.seed = config.seed;
  meta.config_hash = config_hash(config);
  meta.variant = variant_name(config);
  meta.disable_ifg = config.disable_ifg;
  meta.disable_eo_terms = config.disable_eo_terms;
  meta.fairness_gate_met = state.best->gate_met;
  meta.selected_epoch = state.best->epoch;

  FitResult out;
  out.report = evaluate_test(graph, split, m, eval_predictions(state.models.classifier, ctx.ops), meta,
                             config.if_epsilon, exec);
  out.checkpoint.config = config;
  out.checkpoint.best_epoch = state.best->epoch;
  out.checkpoint.validation = state.best->validation;
  out.checkpoint.gate_met = state.best->gate_met;
  out.checkpoint.classifier = copy_params(state.models.classifier.parameters());
  out.checkpoint.estimator = copy_params(state.models.estimator.parameters());
  out.checkpoint.adversary = copy_params(state.models.adversary.parameters());
  out.history = std::move(state.history);
  return out;
}

std::vector<double> train_classifier_only(const Graph& graph, const Split& split, const TrainConfig& config,
                                          Exec exec) {
  validate(config);
  const GraphOperators ops = make_operators(graph, exec);
  std::mt19937_64 rng_c(derive_seed(config.seed, kClassifierInit));
  ClassifierHyper ch;
  ch.in_dim = static_cast<int>(graph.feature_dim());
  ch.hidden = config.model.hidden;
  ch.heads = config.model.heads;
  ch.dropout = config.model.dropout;
  ch.negative_slope = config.model.negative_slope;
  ClassifierModel model(ch, rng_c);
  AdamOptimizer opt({config.learning_rate, config.weight_decay});
  std::mt19937_64 dropout_rng(derive_seed(config.seed, kDropout));

  std::vector<double> l_c;
  l_c.reserve(static_cast<std::size_t>(config.epochs));
  for (int e = 0; e < config.epochs; ++e) {
    const ClassifierForward fwd = model.forward(ops, Mode::kTrain, &dropout_rng);
    const ScalarLoss loss = loss_classification(fwd.y_prob, graph.labels(), split.train);
    model.zero_grad();
    model.backward(ops, fwd, loss.grad, Matrix());
    opt.step(model.parameters());
    l_c.push_back(loss.value);
  }
  return l_c;
}

RunInputs prepare_inputs(const Graph& raw, const TrainConfig& config, Exec exec) {
  validate(config);
  Split split = split_nodes(raw, config.split, config.sensitive_budget, config.seed);
  Graph graph = raw.with_features(normalize_features(raw.features(), split.train));
  SimilarityMatrix m = build_similarity(graph, config.similarity_method, config.similarity_k, exec);
  return RunInputs{std::move(graph), std::move(split), std::move(m)};
}

}  // namespace fairgi
