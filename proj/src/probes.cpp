#include "unlearn/probes.hpp"

#include <cmath>

#include "unlearn/common.hpp"
#include "unlearn/model.hpp"

namespace unlearn {

MultipleChoiceProbe::MultipleChoiceProbe(std::string name, std::vector<ProbeItem> items)
    : name_(std::move(name)), items_(std::move(items)) {
  if (items_.empty()) throw ValidationError("probe '" + name_ + "' has no items");
  for (const auto& item : items_)
    if (item.choices.empty() || item.answer >= item.choices.size())
      throw ValidationError("probe '" + name_ + "': bad item '" + item.question + "'");
}

double MultipleChoiceProbe::accuracy(const Model& model) const {
  std::size_t correct = 0;
  for (const auto& item : items_) {
    std::size_t best = 0;
    double best_ll = -INFINITY;
    for (std::size_t c = 0; c < item.choices.size(); ++c) {
      const double ll = model.log_likelihood(item.question, item.choices[c]);
      if (ll > best_ll) {
        best_ll = ll;
        best = c;
      }
    }
    correct += best == item.answer ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(items_.size());
}

std::shared_ptr<MultipleChoiceProbe> arithmetic_probe() {
  std::vector<ProbeItem> items;
  const int pairs[][2] = {{1, 2}, {2, 3}, {3, 4}, {4, 4}, {5, 2}, {6, 3}, {2, 7}, {8, 1}, {3, 3}, {5, 5}, {4, 6}, {7, 2}};
  for (const auto& p : pairs) {
    const int sum = p[0] + p[1];
    ProbeItem item;
    item.question = "What is " + std::to_string(p[0]) + " plus " + std::to_string(p[1]) + "?";
    // Distractors rotate so the correct choice is not always first.
    const int options[] = {sum, sum + 1, sum - 1, sum + 2};
    const std::size_t rot = static_cast<std::size_t>(p[0]) % 4;
    for (std::size_t k = 0; k < 4; ++k) item.choices.push_back(std::to_string(options[(k + rot) % 4]));
    item.answer = (4 - rot) % 4;
    items.push_back(std::move(item));
  }
  return std::make_shared<MultipleChoiceProbe>("arithmetic", std::move(items));
}

std::shared_ptr<MultipleChoiceProbe> opposites_probe() {
  const char* pairs[][2] = {{"hot", "cold"},   {"up", "down"},     {"early", "late"}, {"light", "dark"},
                            {"fast", "slow"},  {"open", "closed"}, {"full", "empty"}, {"high", "low"},
                            {"north", "south"}, {"wet", "dry"},    {"young", "old"},  {"strong", "weak"}};
  const std::size_t n = std::size(pairs);
  std::vector<ProbeItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    ProbeItem item;
    item.question = std::string("What is the opposite of ") + pairs[i][0] + "?";
    const std::size_t slot = i % 3;
    for (std::size_t k = 0, d = 1; k < 3; ++k) {
      if (k == slot) {
        item.choices.push_back(pairs[i][1]);
      } else {
        item.choices.push_back(pairs[(i + d * 5) % n][1]);
        ++d;
      }
    }
    item.answer = slot;
    items.push_back(std::move(item));
  }
  return std::make_shared<MultipleChoiceProbe>("opposites", std::move(items));
}

std::vector<ProbePtr> synthetic_probes() { return {arithmetic_probe(), opposites_probe()}; }

std::vector<std::pair<std::string, std::string>> probe_training_pairs(const std::vector<ProbePtr>& probes) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : probes)
    if (auto mc = std::dynamic_pointer_cast<const MultipleChoiceProbe>(p))
      for (const auto& item : mc->items()) out.emplace_back(item.question, item.choices[item.answer]);
  return out;
}

std::vector<std::string> probe_texts(const std::vector<ProbePtr>& probes) {
  std::vector<std::string> out;
  for (const auto& p : probes)
    if (auto mc = std::dynamic_pointer_cast<const MultipleChoiceProbe>(p))
      for (const auto& item : mc->items()) {
        out.push_back(item.question);
        out.insert(out.end(), item.choices.begin(), item.choices.end());
      }
  return out;
}

}  // namespace unlearn
