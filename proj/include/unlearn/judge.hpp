// Answer-correctness judging. A prediction counts as correct unless the judge
// finds it contradicts the gold answer: entailment and neutral both pass.
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/corpus.hpp"

namespace unlearn {

class Model;

enum class Label { entailment, neutral, contradiction };

std::string to_string(Label label);
Label parse_label(std::string_view text);

struct Verdict {
  Label label = Label::contradiction;
  bool correct = false;
};

inline Verdict make_verdict(Label label) { return {label, label != Label::contradiction}; }

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  /// Must be deterministic; throws JudgeUnavailableError when the backing
  /// service cannot be reached.
  virtual Label classify(std::string_view question, std::string_view gold, std::string_view predicted) const = 0;
};

/// Lower-case, drop punctuation and the articles a/an/the, collapse spaces.
std::string normalize_answer(std::string_view text);

/// Normalized tokens minus a small stop-word list.
std::vector<std::string> content_tokens(std::string_view text);

/// Desk-scale judge: normalized-equal strings entail, strings sharing no
/// content token contradict, anything else is neutral.
class ExactMatchJudge final : public Judge {
 public:
  std::string name() const override { return "exact-match"; }
  Label classify(std::string_view question, std::string_view gold, std::string_view predicted) const override;
};

/// Request sent to an external NLI service. The default framing uses the gold
/// answer as premise and the prediction as hypothesis; the question travels
/// along for services that want context.
struct NliRequest {
  std::string premise;
  std::string hypothesis;
  std::string question;
};

using NliClient = std::function<Label(const NliRequest&)>;

class NliJudge final : public Judge {
 public:
  explicit NliJudge(NliClient client, std::string name = "nli") : client_(std::move(client)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  Label classify(std::string_view question, std::string_view gold, std::string_view predicted) const override;

 private:
  NliClient client_;
  std::string name_;
};

Verdict judge_answer(const Judge& judge, std::string_view question, std::string_view gold,
                     std::string_view predicted);

struct VerdictRow {
  std::string id;  // "<owner>#<index>"
  std::string question;
  std::string gold;
  std::string predicted;
  Label label = Label::contradiction;
  bool correct = false;
};

/// Generates an answer for each pair and judges it.
std::vector<VerdictRow> judge_model(const Judge& judge, const Model& model, const std::vector<QAPair>& qa_set,
                                    const std::vector<std::string>& ids = {});

/// Fraction of pairs judged correct (micro-average over pairs).
double accuracy(const Judge& judge, const Model& model, const std::vector<QAPair>& qa_set);
double accuracy(const std::vector<VerdictRow>& verdicts);

/// Tab-separated audit table with a header row.
std::string render_verdict_table(const std::vector<VerdictRow>& rows);

}  // namespace unlearn
