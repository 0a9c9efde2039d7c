#include "unlearn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "unlearn/common.hpp"
#include "unlearn/optimizer.hpp"
#include "unlearn/tabular_model.hpp"

namespace unlearn {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::automatic: return "auto";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adamw: return "adamw";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "auto") return OptimizerKind::automatic;
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adamw") return OptimizerKind::adamw;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (auto, sgd, adamw)");
}

void TrainConfig::validate() const {
  if (learning_rate && !(*learning_rate > 0.0 && std::isfinite(*learning_rate)))
    throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (retain_budget != kRetainBudgetMatchForget)
    throw ConfigError("unsupported retain_budget '" + retain_budget + "' (only " +
                      std::string(kRetainBudgetMatchForget) + ")");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  loss.validate();
}

double TrainConfig::resolved_learning_rate(const Model& model) const {
  if (learning_rate) return *learning_rate;
  return model.kind() == TabularModel::kKind ? 0.1 : 1e-5;
}

OptimizerKind TrainConfig::resolved_optimizer(const Model& model) const {
  if (optimizer != OptimizerKind::automatic) return optimizer;
  return model.kind() == TabularModel::kKind ? OptimizerKind::sgd : OptimizerKind::adamw;
}

std::vector<LossBatch> make_epoch_schedule(const TrainingData& data, const TrainConfig& config, std::size_t epoch) {
  if (data.forget.empty()) throw ValidationError("forget training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  const bool paired = config.loss.regularizer != Regularizer::none;
  if (paired && data.retain.empty()) throw ValidationError("regularizer " + to_string(config.loss.regularizer) +
                                                           " needs a non-empty retain set");

  Rng rng(derive_seed(config.seed, "epoch:" + std::to_string(epoch)));
  std::vector<std::size_t> order(data.forget.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<LossBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    LossBatch batch;
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    for (std::size_t k = start; k < end; ++k) {
      batch.forget.push_back(data.forget[order[k]]);
      if (paired) batch.retain.push_back(data.retain[rng.uniform_index(data.retain.size())]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::string serialize_trace(const std::vector<TraceRow>& trace) {
  std::string out = "epoch\tstep\tforget\tregularizer\ttotal\n";
  char buf[160];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.17g\t%.17g\t%.17g\n", row.epoch, row.step, row.terms.forget,
                  row.terms.regularizer, row.terms.total);
    out += buf;
  }
  return out;
}

UnlearningResult run_unlearning(const Model& model_o, const TrainingData& data, const TrainConfig& config,
                                const EpochCallback& on_epoch) {
  config.validate();
  if (!model_o.capabilities().gradients) throw BackendError("model kind '" + model_o.kind() + "' exposes no gradients");

  UnlearningResult result;
  result.model = model_o.clone();
  if (config.epochs == 0) return result;

  FrozenModel reference;
  if (config.loss.needs_reference()) reference = clone_frozen(model_o);

  std::unique_ptr<Optimizer> optimizer;
  const double lr = config.resolved_learning_rate(model_o);
  if (config.resolved_optimizer(model_o) == OptimizerKind::sgd) {
    optimizer = std::make_unique<GradientDescent>(lr);
  } else {
    AdamWConfig adam;
    adam.learning_rate = lr;
    adam.weight_decay = config.weight_decay;
    optimizer = std::make_unique<AdamW>(adam);
  }

  Model& mu = *result.model;
  Eigen::VectorXd theta = mu.parameters();
  Eigen::VectorXd grad(theta.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : make_epoch_schedule(data, config, epoch)) {
      ++step;
      grad.setZero();
      const LossTerms terms = combined_loss(config.loss, mu, reference.get(), batch, &grad);
      if (!std::isfinite(terms.total) || std::abs(terms.total) > kDivergenceLimit) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "training diverged at epoch %zu step %zu (total loss %g)", epoch + 1, step,
                      terms.total);
        throw NumericalError(buf);
      }
      result.trace.push_back({epoch + 1, step, terms});
      // combined_loss returns the gradient of the loss to be minimized.
      optimizer->step(theta, grad);
      mu.set_parameters(theta);
    }
    if (on_epoch) on_epoch(epoch + 1, mu);
  }
  return result;
}

}  // namespace unlearn
