// Conditional answer model contract.
//
// Every pipeline stage talks to models through this interface. A backend owns
// tokenization and any chat formatting: callers pass raw question and answer
// text. Parameters are exposed as one flat vector so optimizers, finite
// difference checks and checkpoints work the same way for every backend.
//
// To bind an out-of-tree model (for example a full-scale LLM served elsewhere)
// derive from Model, implement the pure virtuals, and register a loader with
// register_model_loader() so checkpoints naming your `kind` can be reopened.
//
// Thread safety: const member functions may run concurrently on a fixed
// parameter snapshot; set_parameters requires exclusive access.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace unlearn {

struct Capabilities {
  bool gradients = true;
  bool generation = true;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual Capabilities capabilities() const { return {}; }

  /// log M(answer | question), natural log.
  virtual double log_likelihood(std::string_view question, std::string_view answer) const = 0;

  /// Adds scale * d log M(answer | question) / d theta to `gradient` and
  /// returns the log-likelihood.
  virtual double accumulate_log_likelihood_gradient(std::string_view question, std::string_view answer,
                                                    double scale, Eigen::VectorXd& gradient) const = 0;

  /// Teacher-forced predictive distributions, one row per scored position of
  /// `answer`, one column per vocabulary entry. Tabular backends return a
  /// single row over the answer vocabulary.
  virtual Eigen::MatrixXd answer_distributions(std::string_view question, std::string_view answer) const = 0;

  /// For fixed targets P (shaped like answer_distributions), the soft score
  ///   S = mean over rows r of sum_v P(r, v) * log M(v | r)
  /// Adds scale * dS/dtheta to `gradient` and returns S.
  virtual double accumulate_soft_target_gradient(std::string_view question, std::string_view answer,
                                                 const Eigen::MatrixXd& targets, double scale,
                                                 Eigen::VectorXd& gradient) const = 0;

  /// Deterministic greedy decode.
  virtual std::string generate(std::string_view question) const = 0;

  virtual Eigen::Index vocabulary_size() const = 0;
  virtual std::uint64_t vocabulary_fingerprint() const = 0;

  virtual const Eigen::VectorXd& parameters() const = 0;
  virtual void set_parameters(const Eigen::VectorXd& theta) = 0;
  Eigen::Index num_parameters() const { return parameters().size(); }

  virtual std::unique_ptr<Model> clone() const = 0;
  virtual void save(std::ostream& out) const = 0;
};

using ModelPtr = std::unique_ptr<Model>;
/// A reference model that must not change while another model trains.
using FrozenModel = std::shared_ptr<const Model>;

double answer_log_likelihood(const Model& model, std::string_view question, std::string_view answer);
std::string generate(const Model& model, std::string_view question);

/// Independent deep copy; later updates to `model` never reach it.
FrozenModel clone_frozen(const Model& model);

void save_model(const std::string& path, const Model& model);
ModelPtr load_model(const std::string& path);
ModelPtr load_model(std::istream& in);

struct Checkpoint;
using ModelLoader = std::function<ModelPtr(const Checkpoint&)>;
void register_model_loader(const std::string& kind, ModelLoader loader);

}  // namespace unlearn
