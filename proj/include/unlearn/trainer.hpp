// The unlearning loop: epoch schedules with the forget/retain pairing rule,
// optimization, and per-step loss traces.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/model.hpp"
#include "unlearn/nauf.hpp"
#include "unlearn/objectives.hpp"

namespace unlearn {

enum class OptimizerKind { automatic, sgd, adamw };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

/// The only retain budget rule: one retain example per forget example, so
/// each epoch consumes exactly |forget| retain samples.
inline constexpr std::string_view kRetainBudgetMatchForget = "match-forget";

/// Abort threshold on |total loss|.
inline constexpr double kDivergenceLimit = 1e4;

struct TrainConfig {
  /// Unset means the backend default: 0.1 for tabular models, 1e-5 otherwise.
  std::optional<double> learning_rate;
  std::size_t batch_size = 32;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  LossConfig loss;
  std::string retain_budget = std::string(kRetainBudgetMatchForget);
  OptimizerKind optimizer = OptimizerKind::automatic;
  double weight_decay = 0.01;

  void validate() const;
  double resolved_learning_rate(const Model& model) const;
  OptimizerKind resolved_optimizer(const Model& model) const;
};

/// Batches for one epoch (0-based). Forget examples are reshuffled per epoch;
/// with a regularizer each one is paired with a uniformly drawn retain example.
std::vector<LossBatch> make_epoch_schedule(const TrainingData& data, const TrainConfig& config, std::size_t epoch);

struct TraceRow {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based, global across epochs
  LossTerms terms;
};

std::string serialize_trace(const std::vector<TraceRow>& trace);

struct UnlearningResult {
  ModelPtr model;
  std::vector<TraceRow> trace;
};

/// Called after every completed epoch (1-based) with the current M_u.
using EpochCallback = std::function<void(std::size_t epoch, const Model& model_u)>;

/// Trains a clone of model_o. model_o itself is never modified; losses that
/// need a reference read from a frozen snapshot. Throws NumericalError naming
/// the epoch and step when the loss diverges.
UnlearningResult run_unlearning(const Model& model_o, const TrainingData& data, const TrainConfig& config,
                                const EpochCallback& on_epoch = {});

}  // namespace unlearn
