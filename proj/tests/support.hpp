// Shared test helpers: scripted models, random tabular instances, finite
// differences and scratch directories.
#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "unlearn/common.hpp"
#include "unlearn/corpus.hpp"
#include "unlearn/model.hpp"
#include "unlearn/objectives.hpp"
#include "unlearn/tabular_model.hpp"

namespace testing {

/// Answers from a fixed table; anything unknown generates the fallback ("").
class ScriptedModel final : public unlearn::Model {
 public:
  explicit ScriptedModel(std::map<std::string, std::string> answers) : answers_(std::move(answers)) {}

  std::string kind() const override { return "scripted"; }
  unlearn::Capabilities capabilities() const override { return {false, true}; }
  double log_likelihood(std::string_view q, std::string_view a) const override {
    auto it = answers_.find(std::string(q));
    return it != answers_.end() && it->second == a ? 0.0 : -INFINITY;
  }
  double accumulate_log_likelihood_gradient(std::string_view, std::string_view, double,
                                            Eigen::VectorXd&) const override {
    throw unlearn::BackendError("scripted model has no gradients");
  }
  Eigen::MatrixXd answer_distributions(std::string_view, std::string_view) const override {
    throw unlearn::BackendError("scripted model has no distributions");
  }
  double accumulate_soft_target_gradient(std::string_view, std::string_view, const Eigen::MatrixXd&, double,
                                         Eigen::VectorXd&) const override {
    throw unlearn::BackendError("scripted model has no gradients");
  }
  std::string generate(std::string_view q) const override {
    ++calls_;
    auto it = answers_.find(std::string(q));
    return it == answers_.end() ? fallback_ : it->second;
  }
  Eigen::Index vocabulary_size() const override { return 0; }
  std::uint64_t vocabulary_fingerprint() const override { return 0; }
  const Eigen::VectorXd& parameters() const override { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) override { theta_ = theta; }
  std::unique_ptr<unlearn::Model> clone() const override { return std::make_unique<ScriptedModel>(*this); }
  void save(std::ostream&) const override { throw unlearn::BackendError("scripted model cannot be saved"); }

  std::map<std::string, std::string>& answers() { return answers_; }
  std::size_t calls() const { return calls_; }
  void set_fallback(std::string answer) { fallback_ = std::move(answer); }

 private:
  std::map<std::string, std::string> answers_;
  std::string fallback_;
  Eigen::VectorXd theta_;
  mutable std::size_t calls_ = 0;
};

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Tabular model with logits uniform in [-scale, scale].
inline unlearn::TabularModel random_tabular(unlearn::Rng& rng, std::size_t questions, std::size_t answers,
                                            double scale = 2.0) {
  unlearn::TabularModel m(numbered("q", questions), numbered("a", answers));
  Eigen::VectorXd theta(m.num_parameters());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = scale * (2.0 * rng.uniform01() - 1.0);
  m.set_parameters(theta);
  return m;
}

/// Central differences of f around model's parameters.
inline Eigen::VectorXd finite_difference(unlearn::Model& model, const std::function<double()>& f, double h = 1e-5) {
  const Eigen::VectorXd base = model.parameters();
  Eigen::VectorXd g(base.size());
  Eigen::VectorXd theta = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    theta[i] = base[i] + h;
    model.set_parameters(theta);
    const double up = f();
    theta[i] = base[i] - h;
    model.set_parameters(theta);
    const double down = f();
    theta[i] = base[i];
    g[i] = (up - down) / (2.0 * h);
  }
  model.set_parameters(base);
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / scale;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("unlearn-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
