// Reference backend A: one logit row per known question over a shared answer
// vocabulary. Probabilities are a softmax of the row, so every gradient has
// the closed form (one-hot - softmax) and serves as an analytic oracle.
#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "unlearn/model.hpp"

namespace unlearn {

struct Checkpoint;

class TabularModel final : public Model {
 public:
  static constexpr const char* kKind = "tabular";

  /// All logits start at zero (uniform rows).
  TabularModel(std::vector<std::string> questions, std::vector<std::string> answers);

  /// Rows where `gold` holds a logit of `margin` and every other answer 0.
  /// `extra_answers` widens the vocabulary (relabels, refusals).
  static TabularModel memorized(const std::vector<std::pair<std::string, std::string>>& question_gold,
                                const std::vector<std::string>& extra_answers, double margin);

  static std::unique_ptr<TabularModel> from_checkpoint(const Checkpoint& ckpt);

  std::string kind() const override { return kKind; }

  double log_likelihood(std::string_view question, std::string_view answer) const override;
  double accumulate_log_likelihood_gradient(std::string_view question, std::string_view answer, double scale,
                                            Eigen::VectorXd& gradient) const override;
  Eigen::MatrixXd answer_distributions(std::string_view question, std::string_view answer) const override;
  double accumulate_soft_target_gradient(std::string_view question, std::string_view answer,
                                         const Eigen::MatrixXd& targets, double scale,
                                         Eigen::VectorXd& gradient) const override;
  std::string generate(std::string_view question) const override;

  Eigen::Index vocabulary_size() const override { return static_cast<Eigen::Index>(answers_.size()); }
  std::uint64_t vocabulary_fingerprint() const override;

  const Eigen::VectorXd& parameters() const override { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) override;

  std::unique_ptr<Model> clone() const override { return std::make_unique<TabularModel>(*this); }
  void save(std::ostream& out) const override;

  const std::vector<std::string>& questions() const { return questions_; }
  const std::vector<std::string>& answers() const { return answers_; }
  bool knows_question(std::string_view question) const;

  Eigen::Index question_index(std::string_view question) const;
  Eigen::Index answer_index(std::string_view answer) const;
  /// Offset of logit (question q, answer a) inside the parameter vector.
  Eigen::Index parameter_offset(Eigen::Index q, Eigen::Index a) const { return q * vocabulary_size() + a; }

  Eigen::Map<const Eigen::VectorXd> logits(Eigen::Index q) const;
  void set_logits(Eigen::Index q, const Eigen::VectorXd& row);
  Eigen::VectorXd probabilities(std::string_view question) const;

 private:
  std::vector<std::string> questions_;
  std::vector<std::string> answers_;
  std::unordered_map<std::string, Eigen::Index> question_ids_;
  std::unordered_map<std::string, Eigen::Index> answer_ids_;
  Eigen::VectorXd theta_;  // questions x answers, each question's row contiguous
};

}  // namespace unlearn
