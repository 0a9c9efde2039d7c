// Reference backend B: a small word-level conditional language model.
//
// The question is encoded as the mean of its token embeddings. Each answer
// position sees [question encoding, previous-token embedding, position
// embedding], passes one tanh hidden layer and a softmax over the vocabulary.
// Answers end with an explicit end-of-sequence token, so the answer
// log-likelihood is the exact sum of per-token conditional log-probabilities.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlearn/model.hpp"
#include "unlearn/tokenizer.hpp"

namespace unlearn {

struct Checkpoint;

struct NeuralConfig {
  int embedding_dim = 32;
  int hidden_dim = 192;
  int max_positions = 32;
  int max_new_tokens = 32;
  std::uint64_t seed = 1;
};

class TinyNeuralModel final : public Model {
 public:
  static constexpr const char* kKind = "tiny-neural";

  TinyNeuralModel(Vocabulary vocabulary, NeuralConfig config);

  static std::unique_ptr<TinyNeuralModel> from_checkpoint(const Checkpoint& ckpt);

  std::string kind() const override { return kKind; }

  double log_likelihood(std::string_view question, std::string_view answer) const override;
  double accumulate_log_likelihood_gradient(std::string_view question, std::string_view answer, double scale,
                                            Eigen::VectorXd& gradient) const override;
  Eigen::MatrixXd answer_distributions(std::string_view question, std::string_view answer) const override;
  double accumulate_soft_target_gradient(std::string_view question, std::string_view answer,
                                         const Eigen::MatrixXd& targets, double scale,
                                         Eigen::VectorXd& gradient) const override;
  std::string generate(std::string_view question) const override;

  Eigen::Index vocabulary_size() const override { return vocab_.size(); }
  std::uint64_t vocabulary_fingerprint() const override { return vocab_.fingerprint(); }

  const Eigen::VectorXd& parameters() const override { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta) override;

  std::unique_ptr<Model> clone() const override { return std::make_unique<TinyNeuralModel>(*this); }
  void save(std::ostream& out) const override;

  const Vocabulary& vocabulary() const { return vocab_; }
  const NeuralConfig& config() const { return config_; }

  /// Per-position log-probabilities of the answer tokens followed by <eos>.
  Eigen::VectorXd token_log_probs(std::string_view question, std::string_view answer) const;

 private:
  struct Layout {
    Eigen::Index question_embed, answer_embed, position_embed, w1, b1, w2, b2, total;
  };
  struct Pass;

  Layout layout() const;
  Pass forward(std::string_view question, std::string_view answer) const;
  void backward(const Pass& pass, const Eigen::MatrixXd& logit_grad, Eigen::VectorXd& gradient) const;
  Eigen::VectorXd encode_question(const std::vector<int>& ids) const;
  void initialize();

  Vocabulary vocab_;
  NeuralConfig config_;
  Eigen::VectorXd theta_;
};

}  // namespace unlearn
