// Dataset model: individuals with background text and QA pairs, file I/O,
// forget/retain splitting and a deterministic synthetic generator.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace unlearn {

struct QAPair {
  std::string question;
  std::string gold_answer;
  std::string owner_name;

  bool operator==(const QAPair&) const = default;
};

struct PersonRecord {
  std::string name;
  std::string background;
  std::uint64_t popularity = 0;  // monthly page views
  std::vector<QAPair> qa_pairs;

  // Derived on load / generation, not serialized.
  bool complete = false;
  bool validated = false;

  bool usable() const { return complete && validated; }
};

struct CorpusOptions {
  std::size_t expected_qa = 20;
  std::size_t min_background_words = 100;
  std::size_t max_background_words = 500;
};

struct CorpusIssue {
  std::size_t line = 0;
  std::string name;
  std::string message;
};

struct LoadedCorpus {
  std::vector<PersonRecord> records;  // every parsed record, valid or not
  std::vector<CorpusIssue> issues;

  /// Records that are complete and validated; the ones experiments use.
  std::vector<PersonRecord> usable() const;
};

/// Checks a record against the corpus invariants, sets its status flags and
/// returns the list of violations.
std::vector<std::string> validate_record(PersonRecord& record, const CorpusOptions& options = {});

/// Parses one JSON record per line. Throws ParseError on malformed lines and
/// DuplicateError on a repeated name; invariant violations are reported as
/// issues and leave the record marked unusable.
LoadedCorpus parse_corpus(const std::string& text, const CorpusOptions& options = {});
LoadedCorpus load_corpus(const std::string& path, const CorpusOptions& options = {});

/// Canonical serialization: one record per line, keys sorted.
std::string serialize_corpus(const std::vector<PersonRecord>& records);
void save_corpus(const std::string& path, const std::vector<PersonRecord>& records);

/// Number of attribute templates available to the synthetic generator.
std::size_t synthetic_attribute_count();

/// Deterministic fictional individuals with templated attribute questions.
/// Requires n_people >= 2 and 2 <= qa_per_person <= synthetic_attribute_count().
std::vector<PersonRecord> generate_synthetic_corpus(std::size_t n_people, std::size_t qa_per_person,
                                                    std::uint64_t seed);

enum class Half { train, test };

struct QuestionId {
  std::string owner;
  std::size_t index = 0;

  auto operator<=>(const QuestionId&) const = default;
};

struct SplitRatio {
  unsigned forget = 1;
  unsigned retain = 9;

  bool operator==(const SplitRatio&) const = default;
};

/// Parses "1:9" style ratios.
SplitRatio parse_ratio(const std::string& text);

struct SplitAssignment {
  std::uint64_t seed = 0;
  SplitRatio ratio;
  std::set<std::string> forget_names;
  std::set<std::string> retain_names;
  /// Per individual, one entry per QA pair in record order.
  std::map<std::string, std::vector<Half>> qa_halves;

  bool operator==(const SplitAssignment&) const = default;

  Half half(const QuestionId& id) const;
  bool is_forget(const std::string& name) const { return forget_names.count(name) != 0; }
  bool is_retain(const std::string& name) const { return retain_names.count(name) != 0; }
};

/// Forget side gets max(1, floor(N * f / (f + r))) individuals, chosen by a
/// seeded shuffle of the name-sorted input. Each individual's QA pairs are
/// shuffled under a per-name seed; the first ceil(n/2) go to train.
SplitAssignment make_split(const std::vector<PersonRecord>& memorized, SplitRatio ratio,
                           std::uint64_t seed);

/// Same, from bare names with a uniform QA count per individual.
SplitAssignment make_split(const std::vector<std::string>& names, std::size_t qa_per_person,
                           SplitRatio ratio, std::uint64_t seed);

std::string serialize_split(const SplitAssignment& split);
SplitAssignment parse_split(const std::string& text);
void save_split(const std::string& path, const SplitAssignment& split);
SplitAssignment load_split(const std::string& path);

/// Prompt asking an external LLM for 20 QA pairs about the record's subject.
std::string build_generation_prompt(const PersonRecord& record);

/// Hook type for an out-of-tree LLM: prompt in, completion out.
using GenerationHook = std::function<std::string(const std::string& prompt)>;

/// Parses "Qn: ... / An: ..." completions into QA pairs owned by `owner`.
std::vector<QAPair> parse_generated_qa(const std::string& completion, const std::string& owner);

/// Builds the prompt, calls the hook and replaces record.qa_pairs with the parsed result.
void generate_qa_with_hook(PersonRecord& record, const GenerationHook& hook,
                           const CorpusOptions& options = {});

}  // namespace unlearn
