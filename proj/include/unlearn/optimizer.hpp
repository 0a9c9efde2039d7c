// First-order optimizers over a flat parameter vector.
#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

namespace unlearn {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// theta <- update(theta, gradient of the loss being minimized).
  virtual void step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) = 0;
  virtual std::string name() const = 0;
};

class GradientDescent final : public Optimizer {
 public:
  explicit GradientDescent(double learning_rate) : lr_(learning_rate) {}
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) override { theta.noalias() -= lr_ * gradient; }
  std::string name() const override { return "sgd"; }

 private:
  double lr_;
};

struct AdamWConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Adam with decoupled weight decay.
class AdamW final : public Optimizer {
 public:
  explicit AdamW(AdamWConfig config) : cfg_(config) {}
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) override;
  std::string name() const override { return "adamw"; }

 private:
  AdamWConfig cfg_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

}  // namespace unlearn
