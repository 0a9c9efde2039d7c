// Desk-scale model construction: tabular fixtures and likelihood fitting for
// the tiny neural backend.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "unlearn/corpus.hpp"
#include "unlearn/nauf.hpp"
#include "unlearn/tabular_model.hpp"
#include "unlearn/tokenizer.hpp"

namespace unlearn {

using QAList = std::vector<std::pair<std::string, std::string>>;

/// Every (question, gold answer) pair of the corpus in record order.
QAList corpus_pairs(const std::vector<PersonRecord>& corpus);

/// Every instantiation of `set` for every name (uninformed sets ignore names).
std::vector<std::string> refusal_space(const RefusalTemplateSet& set, const std::vector<std::string>& names);

/// Tabular model that decodes every corpus gold answer. Gold logits sit
/// `margin` above the rest of their row; `extra_questions` get uniform rows
/// and `extra_answers` widen the answer vocabulary.
std::unique_ptr<TabularModel> make_tabular_fixture(const std::vector<PersonRecord>& corpus,
                                                   const std::vector<std::string>& extra_questions,
                                                   const std::vector<std::string>& extra_answers, double margin);

/// Word vocabulary covering the corpus QA text, the templates (placeholder
/// removed) and any extra texts.
Vocabulary desk_vocabulary(const std::vector<PersonRecord>& corpus, const std::vector<RefusalTemplateSet>& templates,
                           const std::vector<std::string>& extra_texts = {});

struct FitOptions {
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::uint64_t seed = 1;
  /// Called after each epoch with the mean NLL; returning false stops early.
  std::function<bool(std::size_t epoch, double mean_nll)> on_epoch;
};

/// Minimizes mean -log M(answer | question) over `pairs` with AdamW and
/// returns the last epoch's mean NLL.
double fit_likelihood(Model& model, const QAList& pairs, const FitOptions& options);

}  // namespace unlearn
