// Downstream-capability probes: multiple-choice tasks scored by likelihood.
#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace unlearn {

class Model;

class ProbeTask {
 public:
  virtual ~ProbeTask() = default;
  virtual std::string name() const = 0;
  /// Fraction of items answered correctly; must not modify the model.
  virtual double accuracy(const Model& model) const = 0;
};

using ProbePtr = std::shared_ptr<const ProbeTask>;

struct ProbeItem {
  std::string question;
  std::vector<std::string> choices;
  std::size_t answer = 0;  // index into choices
};

/// Picks the choice with the highest log-likelihood; ties go to the lowest index.
class MultipleChoiceProbe final : public ProbeTask {
 public:
  MultipleChoiceProbe(std::string name, std::vector<ProbeItem> items);

  std::string name() const override { return name_; }
  double accuracy(const Model& model) const override;
  const std::vector<ProbeItem>& items() const { return items_; }

 private:
  std::string name_;
  std::vector<ProbeItem> items_;
};

/// Small sums spelled with digits ("What is 3 plus 4?").
std::shared_ptr<MultipleChoiceProbe> arithmetic_probe();
/// Antonym pairs ("What is the opposite of hot?").
std::shared_ptr<MultipleChoiceProbe> opposites_probe();
std::vector<ProbePtr> synthetic_probes();

/// (question, correct choice) pairs, for teaching a desk-scale model the probes.
std::vector<std::pair<std::string, std::string>> probe_training_pairs(const std::vector<ProbePtr>& probes);
/// Every question and choice text, for building vocabularies.
std::vector<std::string> probe_texts(const std::vector<ProbePtr>& probes);

}  // namespace unlearn
