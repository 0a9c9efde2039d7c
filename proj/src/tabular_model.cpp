#include "unlearn/tabular_model.hpp"

#include <set>

#include "unlearn/checkpoint.hpp"
#include "unlearn/common.hpp"
#include "unlearn/math.hpp"

namespace unlearn {

TabularModel::TabularModel(std::vector<std::string> questions, std::vector<std::string> answers)
    : questions_(std::move(questions)), answers_(std::move(answers)) {
  if (answers_.empty()) throw BackendError("tabular model needs a non-empty answer vocabulary");
  for (std::size_t i = 0; i < questions_.size(); ++i)
    if (!question_ids_.emplace(questions_[i], static_cast<Eigen::Index>(i)).second)
      throw DuplicateError("tabular model: duplicate question '" + questions_[i] + "'");
  for (std::size_t i = 0; i < answers_.size(); ++i)
    if (!answer_ids_.emplace(answers_[i], static_cast<Eigen::Index>(i)).second)
      throw DuplicateError("tabular model: duplicate answer '" + answers_[i] + "'");
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(questions_.size() * answers_.size()));
}

TabularModel TabularModel::memorized(const std::vector<std::pair<std::string, std::string>>& question_gold,
                                     const std::vector<std::string>& extra_answers, double margin) {
  std::vector<std::string> questions;
  std::set<std::string> answer_set(extra_answers.begin(), extra_answers.end());
  for (const auto& [q, a] : question_gold) {
    questions.push_back(q);
    answer_set.insert(a);
  }
  TabularModel m(std::move(questions), {answer_set.begin(), answer_set.end()});
  for (const auto& [q, a] : question_gold) {
    const Eigen::Index qi = m.question_index(q);
    m.theta_[m.parameter_offset(qi, m.answer_index(a))] = margin;
  }
  return m;
}

bool TabularModel::knows_question(std::string_view question) const {
  return question_ids_.count(std::string(question)) != 0;
}

Eigen::Index TabularModel::question_index(std::string_view question) const {
  auto it = question_ids_.find(std::string(question));
  if (it == question_ids_.end()) throw BackendError("tabular model: unknown question '" + std::string(question) + "'");
  return it->second;
}

Eigen::Index TabularModel::answer_index(std::string_view answer) const {
  auto it = answer_ids_.find(std::string(answer));
  if (it == answer_ids_.end())
    throw BackendError("tabular model: out-of-vocabulary answer '" + std::string(answer) + "'");
  return it->second;
}

Eigen::Map<const Eigen::VectorXd> TabularModel::logits(Eigen::Index q) const {
  return {theta_.data() + parameter_offset(q, 0), vocabulary_size()};
}

void TabularModel::set_logits(Eigen::Index q, const Eigen::VectorXd& row) {
  if (row.size() != vocabulary_size()) throw BackendError("tabular model: logit row has wrong length");
  theta_.segment(parameter_offset(q, 0), vocabulary_size()) = row;
}

Eigen::VectorXd TabularModel::probabilities(std::string_view question) const {
  return math::softmax(logits(question_index(question)));
}

double TabularModel::log_likelihood(std::string_view question, std::string_view answer) const {
  const Eigen::Index q = question_index(question);
  const Eigen::Index a = answer_index(answer);
  const auto row = logits(q);
  return row(a) - math::log_sum_exp(row);
}

double TabularModel::accumulate_log_likelihood_gradient(std::string_view question, std::string_view answer,
                                                        double scale, Eigen::VectorXd& gradient) const {
  const Eigen::Index q = question_index(question);
  const Eigen::Index a = answer_index(answer);
  const Eigen::VectorXd logp = math::log_softmax(logits(q));
  auto g = gradient.segment(parameter_offset(q, 0), vocabulary_size());
  g -= scale * logp.array().exp().matrix();
  g(a) += scale;
  return logp(a);
}

Eigen::MatrixXd TabularModel::answer_distributions(std::string_view question, std::string_view answer) const {
  answer_index(answer);
  return probabilities(question).transpose();
}

double TabularModel::accumulate_soft_target_gradient(std::string_view question, std::string_view answer,
                                                     const Eigen::MatrixXd& targets, double scale,
                                                     Eigen::VectorXd& gradient) const {
  answer_index(answer);
  if (targets.rows() != 1 || targets.cols() != vocabulary_size())
    throw BackendError("tabular model: soft targets must be 1 x " + std::to_string(vocabulary_size()));
  const Eigen::Index q = question_index(question);
  const Eigen::VectorXd logp = math::log_softmax(logits(q));
  const Eigen::VectorXd p = targets.row(0).transpose();
  // d/dlogits sum_v p_v log q_v = p - softmax * sum(p)
  gradient.segment(parameter_offset(q, 0), vocabulary_size()) +=
      scale * (p - logp.array().exp().matrix() * p.sum());
  return p.dot(logp);
}

std::string TabularModel::generate(std::string_view question) const {
  return answers_[static_cast<std::size_t>(math::argmax_first(logits(question_index(question))))];
}

std::uint64_t TabularModel::vocabulary_fingerprint() const {
  std::string joined;
  for (const auto& a : answers_) {
    joined += a;
    joined += '\n';
  }
  return fnv1a(joined);
}

void TabularModel::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw BackendError("tabular model: expected " + std::to_string(theta_.size()) + " parameters, got " +
                       std::to_string(theta.size()));
  theta_ = theta;
}

void TabularModel::save(std::ostream& out) const {
  Checkpoint ckpt;
  ckpt.kind = kKind;
  ckpt.meta = {{"questions", questions_}, {"answers", answers_}};
  // Stored as answers x questions so each question is one contiguous column.
  ckpt.tensors.emplace_back(
      "logits", Eigen::Map<const Eigen::MatrixXd>(theta_.data(), vocabulary_size(),
                                                  static_cast<Eigen::Index>(questions_.size())));
  write_checkpoint(out, ckpt);
}

std::unique_ptr<TabularModel> TabularModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kKind) throw BackendError("checkpoint kind '" + ckpt.kind + "' is not tabular");
  auto m = std::make_unique<TabularModel>(ckpt.meta.at("questions").get<std::vector<std::string>>(),
                                          ckpt.meta.at("answers").get<std::vector<std::string>>());
  const auto& logits = ckpt.tensor("logits");
  if (logits.rows() != m->vocabulary_size() || logits.cols() != static_cast<Eigen::Index>(m->questions_.size()))
    throw ParseError(0, "tabular checkpoint: logits shape does not match vocabulary");
  m->theta_ = Eigen::Map<const Eigen::VectorXd>(logits.data(), logits.size());
  return m;
}

}  // namespace unlearn
