#include "unlearn/optimizer.hpp"

#include <cmath>

namespace unlearn {

void AdamW::step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) {
  if (m_.size() != theta.size()) {
    m_ = Eigen::VectorXd::Zero(theta.size());
    v_ = Eigen::VectorXd::Zero(theta.size());
    t_ = 0;
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * gradient;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * gradient.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  theta *= 1.0 - cfg_.learning_rate * cfg_.weight_decay;
  theta.array() -= cfg_.learning_rate * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.epsilon);
}

}  // namespace unlearn
