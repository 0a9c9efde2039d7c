#include "unlearn/neural_model.hpp"

#include <algorithm>
#include <cmath>

#include "unlearn/checkpoint.hpp"
#include "unlearn/common.hpp"
#include "unlearn/math.hpp"

namespace unlearn {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMatrixMap = Map<const MatrixXd>;
using MatrixMap = Map<MatrixXd>;

struct TinyNeuralModel::Pass {
  std::vector<int> question_ids;
  std::vector<int> previous;  // input token per position
  std::vector<int> targets;   // predicted token per position
  MatrixXd inputs;            // 3d x T
  MatrixXd hidden;            // H x T
  MatrixXd log_probs;         // V x T
};

TinyNeuralModel::TinyNeuralModel(Vocabulary vocabulary, NeuralConfig config)
    : vocab_(std::move(vocabulary)), config_(config) {
  if (config_.embedding_dim <= 0 || config_.hidden_dim <= 0 || config_.max_positions <= 0 ||
      config_.max_new_tokens <= 0)
    throw ConfigError("tiny neural model: dimensions must be positive");
  initialize();
}

TinyNeuralModel::Layout TinyNeuralModel::layout() const {
  const Index d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size(), t = config_.max_positions;
  Layout l{};
  l.question_embed = 0;
  l.answer_embed = l.question_embed + d * v;
  l.position_embed = l.answer_embed + d * v;
  l.w1 = l.position_embed + d * t;
  l.b1 = l.w1 + h * 3 * d;
  l.w2 = l.b1 + h;
  l.b2 = l.w2 + v * h;
  l.total = l.b2 + v;
  return l;
}

void TinyNeuralModel::initialize() {
  const Layout l = layout();
  theta_ = VectorXd::Zero(l.total);
  Rng rng(derive_seed(config_.seed, "tiny-neural-init"));
  auto fill_uniform = [&](Index begin, Index end, double bound) {
    for (Index i = begin; i < end; ++i) theta_[i] = (2.0 * rng.uniform01() - 1.0) * bound;
  };
  const double d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size();
  fill_uniform(l.question_embed, l.w1, 0.5);
  fill_uniform(l.w1, l.b1, std::sqrt(6.0 / (3 * d + h)));
  fill_uniform(l.w2, l.b2, std::sqrt(6.0 / (h + v)));
}

void TinyNeuralModel::set_parameters(const VectorXd& theta) {
  if (theta.size() != theta_.size())
    throw BackendError("tiny neural model: expected " + std::to_string(theta_.size()) + " parameters, got " +
                       std::to_string(theta.size()));
  theta_ = theta;
}

VectorXd TinyNeuralModel::encode_question(const std::vector<int>& ids) const {
  const Index d = config_.embedding_dim;
  ConstMatrixMap embed(theta_.data() + layout().question_embed, d, vocab_.size());
  VectorXd hq = VectorXd::Zero(d);
  for (int id : ids) hq += embed.col(id);
  if (!ids.empty()) hq /= static_cast<double>(ids.size());
  return hq;
}

TinyNeuralModel::Pass TinyNeuralModel::forward(std::string_view question, std::string_view answer) const {
  const Layout l = layout();
  const Index d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size();
  Pass p;
  p.question_ids = vocab_.encode(question);
  const std::vector<int> answer_ids = vocab_.encode(answer);
  p.previous.push_back(Vocabulary::kBos);
  p.previous.insert(p.previous.end(), answer_ids.begin(), answer_ids.end());
  p.targets = answer_ids;
  p.targets.push_back(Vocabulary::kEos);
  const Index t = static_cast<Index>(p.targets.size());

  ConstMatrixMap answer_embed(theta_.data() + l.answer_embed, d, v);
  ConstMatrixMap position_embed(theta_.data() + l.position_embed, d, config_.max_positions);
  ConstMatrixMap w1(theta_.data() + l.w1, h, 3 * d);
  Map<const VectorXd> b1(theta_.data() + l.b1, h);
  ConstMatrixMap w2(theta_.data() + l.w2, v, h);
  Map<const VectorXd> b2(theta_.data() + l.b2, v);

  const VectorXd hq = encode_question(p.question_ids);
  p.inputs.resize(3 * d, t);
  for (Index k = 0; k < t; ++k) {
    p.inputs.col(k).segment(0, d) = hq;
    p.inputs.col(k).segment(d, d) = answer_embed.col(p.previous[static_cast<std::size_t>(k)]);
    p.inputs.col(k).segment(2 * d, d) = position_embed.col(std::min<Index>(k, config_.max_positions - 1));
  }
  p.hidden = ((w1 * p.inputs).colwise() + b1).array().tanh().matrix();
  p.log_probs = math::log_softmax_columns(MatrixXd((w2 * p.hidden).colwise() + b2));
  return p;
}

void TinyNeuralModel::backward(const Pass& p, const MatrixXd& logit_grad, VectorXd& gradient) const {
  if (gradient.size() != theta_.size()) throw BackendError("gradient buffer has wrong size");
  const Layout l = layout();
  const Index d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size();
  const Index t = logit_grad.cols();

  ConstMatrixMap w1(theta_.data() + l.w1, h, 3 * d);
  ConstMatrixMap w2(theta_.data() + l.w2, v, h);
  MatrixMap g_qe(gradient.data() + l.question_embed, d, v);
  MatrixMap g_ae(gradient.data() + l.answer_embed, d, v);
  MatrixMap g_pe(gradient.data() + l.position_embed, d, config_.max_positions);
  MatrixMap g_w1(gradient.data() + l.w1, h, 3 * d);
  Map<VectorXd> g_b1(gradient.data() + l.b1, h);
  MatrixMap g_w2(gradient.data() + l.w2, v, h);
  Map<VectorXd> g_b2(gradient.data() + l.b2, v);

  g_w2.noalias() += logit_grad * p.hidden.transpose();
  g_b2 += logit_grad.rowwise().sum();
  const MatrixXd dz = ((w2.transpose() * logit_grad).array() * (1.0 - p.hidden.array().square())).matrix();
  g_w1.noalias() += dz * p.inputs.transpose();
  g_b1 += dz.rowwise().sum();
  const MatrixXd dx = w1.transpose() * dz;

  if (!p.question_ids.empty()) {
    const VectorXd dq = dx.topRows(d).rowwise().sum() / static_cast<double>(p.question_ids.size());
    for (int id : p.question_ids) g_qe.col(id) += dq;
  }
  for (Index k = 0; k < t; ++k) {
    g_ae.col(p.previous[static_cast<std::size_t>(k)]) += dx.col(k).segment(d, d);
    g_pe.col(std::min<Index>(k, config_.max_positions - 1)) += dx.col(k).segment(2 * d, d);
  }
}

VectorXd TinyNeuralModel::token_log_probs(std::string_view question, std::string_view answer) const {
  const Pass p = forward(question, answer);
  VectorXd out(static_cast<Index>(p.targets.size()));
  for (std::size_t k = 0; k < p.targets.size(); ++k) out[static_cast<Index>(k)] = p.log_probs(p.targets[k], static_cast<Index>(k));
  return out;
}

double TinyNeuralModel::log_likelihood(std::string_view question, std::string_view answer) const {
  return token_log_probs(question, answer).sum();
}

double TinyNeuralModel::accumulate_log_likelihood_gradient(std::string_view question, std::string_view answer,
                                                           double scale, VectorXd& gradient) const {
  const Pass p = forward(question, answer);
  MatrixXd g = -scale * p.log_probs.array().exp().matrix();
  double ll = 0.0;
  for (std::size_t k = 0; k < p.targets.size(); ++k) {
    g(p.targets[k], static_cast<Index>(k)) += scale;
    ll += p.log_probs(p.targets[k], static_cast<Index>(k));
  }
  backward(p, g, gradient);
  return ll;
}

MatrixXd TinyNeuralModel::answer_distributions(std::string_view question, std::string_view answer) const {
  return forward(question, answer).log_probs.array().exp().matrix().transpose();
}

double TinyNeuralModel::accumulate_soft_target_gradient(std::string_view question, std::string_view answer,
                                                        const MatrixXd& targets, double scale,
                                                        VectorXd& gradient) const {
  const Pass p = forward(question, answer);
  const Index t = p.log_probs.cols();
  if (targets.rows() != t || targets.cols() != vocab_.size())
    throw BackendError("tiny neural model: soft targets must be " + std::to_string(t) + " x " +
                       std::to_string(vocab_.size()));
  const MatrixXd pt = targets.transpose();  // V x T
  const double inv_t = 1.0 / static_cast<double>(t);
  const double score = (pt.array() * p.log_probs.array()).sum() * inv_t;
  const MatrixXd probs = p.log_probs.array().exp().matrix();
  const MatrixXd g = (scale * inv_t) * (pt - probs * pt.colwise().sum().asDiagonal());
  backward(p, g, gradient);
  return score;
}

std::string TinyNeuralModel::generate(std::string_view question) const {
  const Layout l = layout();
  const Index d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size();
  ConstMatrixMap answer_embed(theta_.data() + l.answer_embed, d, v);
  ConstMatrixMap position_embed(theta_.data() + l.position_embed, d, config_.max_positions);
  ConstMatrixMap w1(theta_.data() + l.w1, h, 3 * d);
  Map<const VectorXd> b1(theta_.data() + l.b1, h);
  ConstMatrixMap w2(theta_.data() + l.w2, v, h);
  Map<const VectorXd> b2(theta_.data() + l.b2, v);

  const VectorXd hq = encode_question(vocab_.encode(question));
  VectorXd x(3 * d);
  x.segment(0, d) = hq;
  std::vector<int> out;
  int prev = Vocabulary::kBos;
  for (int k = 0; k < config_.max_new_tokens; ++k) {
    x.segment(d, d) = answer_embed.col(prev);
    x.segment(2 * d, d) = position_embed.col(std::min(k, config_.max_positions - 1));
    const VectorXd hidden = (w1 * x + b1).array().tanh().matrix();
    const VectorXd logits = w2 * hidden + b2;
    // <bos> is never a valid output.
    Index best = Vocabulary::kEos;
    for (Index i = Vocabulary::kEos + 1; i < v; ++i)
      if (logits[i] > logits[best]) best = i;
    if (best == Vocabulary::kEos) break;
    prev = static_cast<int>(best);
    out.push_back(prev);
  }
  return vocab_.decode(out);
}

void TinyNeuralModel::save(std::ostream& out) const {
  const Layout l = layout();
  const Index d = config_.embedding_dim, h = config_.hidden_dim, v = vocab_.size();
  Checkpoint ckpt;
  ckpt.kind = kKind;
  ckpt.meta = {{"vocabulary", vocab_.tokens()},
               {"embedding_dim", config_.embedding_dim},
               {"hidden_dim", config_.hidden_dim},
               {"max_positions", config_.max_positions},
               {"max_new_tokens", config_.max_new_tokens},
               {"seed", config_.seed}};
  auto add = [&](const char* name, Index offset, Index rows, Index cols) {
    ckpt.tensors.emplace_back(name, ConstMatrixMap(theta_.data() + offset, rows, cols));
  };
  add("question_embedding", l.question_embed, d, v);
  add("answer_embedding", l.answer_embed, d, v);
  add("position_embedding", l.position_embed, d, config_.max_positions);
  add("w1", l.w1, h, 3 * d);
  add("b1", l.b1, h, 1);
  add("w2", l.w2, v, h);
  add("b2", l.b2, v, 1);
  write_checkpoint(out, ckpt);
}

std::unique_ptr<TinyNeuralModel> TinyNeuralModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != kKind) throw BackendError("checkpoint kind '" + ckpt.kind + "' is not " + kKind);
  auto tokens = ckpt.meta.at("vocabulary").get<std::vector<std::string>>();
  if (tokens.size() < 2 || tokens[0] != "<bos>" || tokens[1] != "<eos>")
    throw ParseError(0, "tiny neural checkpoint: vocabulary must start with <bos>, <eos>");
  tokens.erase(tokens.begin(), tokens.begin() + 2);
  NeuralConfig cfg;
  cfg.embedding_dim = ckpt.meta.at("embedding_dim").get<int>();
  cfg.hidden_dim = ckpt.meta.at("hidden_dim").get<int>();
  cfg.max_positions = ckpt.meta.at("max_positions").get<int>();
  cfg.max_new_tokens = ckpt.meta.at("max_new_tokens").get<int>();
  cfg.seed = ckpt.meta.at("seed").get<std::uint64_t>();
  auto m = std::make_unique<TinyNeuralModel>(Vocabulary::from_tokens(tokens), cfg);
  const Layout l = m->layout();
  const std::pair<const char*, Index> parts[] = {{"question_embedding", l.question_embed},
                                                 {"answer_embedding", l.answer_embed},
                                                 {"position_embedding", l.position_embed},
                                                 {"w1", l.w1},
                                                 {"b1", l.b1},
                                                 {"w2", l.w2},
                                                 {"b2", l.b2}};
  Index expected = 0;
  for (const auto& [name, offset] : parts) {
    const MatrixXd& t = ckpt.tensor(name);
    if (offset != expected) throw ParseError(0, "tiny neural checkpoint: layout mismatch");
    if (offset + t.size() > l.total) throw ParseError(0, std::string("tiny neural checkpoint: tensor too large: ") + name);
    m->theta_.segment(offset, t.size()) = Map<const VectorXd>(t.data(), t.size());
    expected = offset + t.size();
  }
  if (expected != l.total) throw ParseError(0, "tiny neural checkpoint: parameter count mismatch");
  return m;
}

}  // namespace unlearn
