#include "unlearn/fixtures.hpp"

#include <set>

#include "unlearn/common.hpp"
#include "unlearn/optimizer.hpp"

namespace unlearn {

QAList corpus_pairs(const std::vector<PersonRecord>& corpus) {
  QAList out;
  for (const auto& r : corpus)
    for (const auto& qa : r.qa_pairs) out.emplace_back(qa.question, qa.gold_answer);
  return out;
}

std::vector<std::string> refusal_space(const RefusalTemplateSet& set, const std::vector<std::string>& names) {
  std::set<std::string> out;
  for (const auto& t : set.templates) {
    if (set.kind == TemplateKind::uninformed) {
      out.insert(t);
      continue;
    }
    const auto pos = t.find(kNamePlaceholder);
    for (const auto& name : names) out.insert(std::string(t).replace(pos, kNamePlaceholder.size(), name));
  }
  return {out.begin(), out.end()};
}

std::unique_ptr<TabularModel> make_tabular_fixture(const std::vector<PersonRecord>& corpus,
                                                   const std::vector<std::string>& extra_questions,
                                                   const std::vector<std::string>& extra_answers, double margin) {
  const QAList pairs = corpus_pairs(corpus);
  std::vector<std::string> questions;
  std::set<std::string> seen;
  for (const auto& [q, a] : pairs)
    if (seen.insert(q).second) questions.push_back(q);
  for (const auto& q : extra_questions)
    if (seen.insert(q).second) questions.push_back(q);
  std::set<std::string> answers(extra_answers.begin(), extra_answers.end());
  for (const auto& [q, a] : pairs) answers.insert(a);

  auto model = std::make_unique<TabularModel>(std::move(questions), std::vector<std::string>(answers.begin(), answers.end()));
  Eigen::VectorXd theta = model->parameters();
  for (const auto& [q, a] : pairs)
    theta[model->parameter_offset(model->question_index(q), model->answer_index(a))] = margin;
  model->set_parameters(theta);
  return model;
}

Vocabulary desk_vocabulary(const std::vector<PersonRecord>& corpus, const std::vector<RefusalTemplateSet>& templates,
                           const std::vector<std::string>& extra_texts) {
  std::vector<std::string> texts = extra_texts;
  for (const auto& r : corpus) {
    texts.push_back(r.name);
    for (const auto& qa : r.qa_pairs) {
      texts.push_back(qa.question);
      texts.push_back(qa.gold_answer);
    }
  }
  for (const auto& set : templates)
    for (std::string t : set.templates) {
      const auto pos = t.find(kNamePlaceholder);
      if (pos != std::string::npos) t.replace(pos, kNamePlaceholder.size(), " ");
      texts.push_back(t);
    }
  return Vocabulary::from_texts(texts);
}

double fit_likelihood(Model& model, const QAList& pairs, const FitOptions& options) {
  if (pairs.empty()) throw ValidationError("fit_likelihood: no training pairs");
  if (options.batch_size == 0) throw ConfigError("fit_likelihood: batch_size must be positive");
  AdamWConfig cfg;
  cfg.learning_rate = options.learning_rate;
  cfg.weight_decay = options.weight_decay;
  AdamW optimizer(cfg);

  Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd grad(theta.size());
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(options.seed, "fit"));
  double mean_nll = 0.0;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grad.setZero();
      for (std::size_t k = start; k < end; ++k) {
        const auto& [q, a] = pairs[order[k]];
        // Ascend the log-likelihood by descending its negation.
        total -= model.accumulate_log_likelihood_gradient(q, a, -scale, grad);
      }
      optimizer.step(theta, grad);
      model.set_parameters(theta);
    }
    mean_nll = total / static_cast<double>(pairs.size());
    if (options.on_epoch && !options.on_epoch(epoch, mean_nll)) break;
  }
  return mean_nll;
}

}  // namespace unlearn
