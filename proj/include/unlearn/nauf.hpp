// Name-aware refusal answers and contrastive data augmentation (CDA), plus
// the uninformed relabels used by the RGD/RDPO baselines.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/common.hpp"
#include "unlearn/corpus.hpp"
#include "unlearn/objectives.hpp"

namespace unlearn {

class Model;

inline constexpr std::string_view kNamePlaceholder = "[NAME]";

enum class TemplateKind { name_aware, uninformed };

std::string to_string(TemplateKind kind);
TemplateKind parse_template_kind(std::string_view text);

struct RefusalTemplateSet {
  std::vector<std::string> templates;
  TemplateKind kind = TemplateKind::name_aware;

  /// Throws ConfigError naming the first bad template.
  void validate() const;

  /// The shipped 100 name-aware refusals (duplicates kept as published).
  static RefusalTemplateSet name_aware_defaults();
  /// The shipped 100 "I don't know"-style answers.
  static RefusalTemplateSet uninformed_defaults();
  /// One template per line; blank lines are ignored. Validated before return.
  static RefusalTemplateSet parse(const std::string& text, TemplateKind kind);
  static RefusalTemplateSet load(const std::string& path, TemplateKind kind);
};

/// Uniform draw with [NAME] replaced by `name`. Uninformed templates come back verbatim.
std::string instantiate_refusal(const RefusalTemplateSet& set, const std::string& name, Rng& rng);

/// Replaces every occurrence of `donor_name` by `target_name`.
std::string substitute_name(const std::string& question, const std::string& donor_name,
                            const std::string& target_name);

enum class Side { forget, retain };

std::string to_string(Side side);
Side parse_side(std::string_view text);

struct AugmentedExample {
  std::string target_name;
  std::string donor_name;
  std::string question;
  std::string answer;
  Side side = Side::forget;
  Provenance provenance = Provenance::cda_forget_refusal;

  bool operator==(const AugmentedExample&) const = default;
};

/// Samples donor questions and fills forget-side refusals. Retain-side
/// answers stay empty until label_retain_side runs. Donors are other split
/// members' train questions; a donor whose name occurs inside the target's
/// name is skipped, as is any substituted question identical to one of the
/// target's own questions. `per_person` defaults to each individual's
/// train-question count.
std::vector<AugmentedExample> plan_augmentation(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                                const RefusalTemplateSet& templates,
                                                std::optional<std::size_t> per_person, std::uint64_t seed);

/// Sets each retain-side answer to model_o's greedy output.
void label_retain_side(std::vector<AugmentedExample>& examples, const Model& model_o);

std::vector<AugmentedExample> augment(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                      const Model& model_o, const RefusalTemplateSet& templates,
                                      std::optional<std::size_t> per_person, std::uint64_t seed);

/// JSON lines with keys target_name, donor_name, question, answer, side, provenance.
std::string serialize_augmented(const std::vector<AugmentedExample>& examples);
std::vector<AugmentedExample> parse_augmented(const std::string& text);
void save_augmented(const std::string& path, const std::vector<AugmentedExample>& examples);
std::vector<AugmentedExample> load_augmented(const std::string& path);

struct TrainingData {
  std::vector<ForgetExample> forget;
  std::vector<RetainExample> retain;
};

/// Forget-train questions relabeled for `loss` (gold for GA/NPO, uninformed
/// for RGD/RDPO, name-aware refusal for NAUF) and retain-train questions with
/// their gold answers. CDA examples are folded in for NAUF only.
TrainingData build_training_data(ForgetLoss loss, const SplitAssignment& split,
                                 const std::vector<PersonRecord>& corpus,
                                 const std::vector<AugmentedExample>& augmented,
                                 const RefusalTemplateSet& name_aware, const RefusalTemplateSet& uninformed,
                                 std::uint64_t seed);

}  // namespace unlearn
