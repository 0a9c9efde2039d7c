#include "unlearn/judge.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "unlearn/common.hpp"
#include "unlearn/model.hpp"

namespace unlearn {

std::string to_string(Label label) {
  switch (label) {
    case Label::entailment: return "entailment";
    case Label::neutral: return "neutral";
    case Label::contradiction: return "contradiction";
  }
  return "contradiction";
}

Label parse_label(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "entailment") return Label::entailment;
  if (t == "neutral") return Label::neutral;
  if (t == "contradiction") return Label::contradiction;
  throw ParseError(0, "unknown NLI label '" + std::string(text) + "'");
}

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80)
      lowered += static_cast<char>(std::tolower(c));
    else if (std::isspace(c) || c == '-' || c == '/')
      lowered += ' ';
    // other punctuation dropped
  }
  std::istringstream in(lowered);
  std::string word, out;
  while (in >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::vector<std::string> content_tokens(std::string_view text) {
  static const std::set<std::string> stop = {"and", "or", "of", "in", "on", "at", "to", "for", "with", "by",
                                             "is", "was", "are", "were", "be", "as", "from", "that", "this",
                                             "it", "its", "his", "her", "their", "he", "she", "they"};
  std::vector<std::string> out;
  std::istringstream in(normalize_answer(text));
  std::string word;
  while (in >> word)
    if (!stop.count(word)) out.push_back(word);
  return out;
}

Label ExactMatchJudge::classify(std::string_view, std::string_view gold, std::string_view predicted) const {
  const std::string g = normalize_answer(gold), p = normalize_answer(predicted);
  if (!g.empty() && g == p) return Label::entailment;
  const auto gt = content_tokens(gold);
  const auto pt = content_tokens(predicted);
  const std::set<std::string> gs(gt.begin(), gt.end());
  for (const auto& t : pt)
    if (gs.count(t)) return Label::neutral;
  return Label::contradiction;
}

Label NliJudge::classify(std::string_view question, std::string_view gold, std::string_view predicted) const {
  if (!client_) throw JudgeUnavailableError("NLI judge has no client bound");
  return client_({std::string(gold), std::string(predicted), std::string(question)});
}

Verdict judge_answer(const Judge& judge, std::string_view question, std::string_view gold,
                     std::string_view predicted) {
  if (gold.empty()) throw ValidationError("judge_answer: gold answer is empty");
  return make_verdict(judge.classify(question, gold, predicted));
}

std::vector<VerdictRow> judge_model(const Judge& judge, const Model& model, const std::vector<QAPair>& qa_set,
                                    const std::vector<std::string>& ids) {
  if (!ids.empty() && ids.size() != qa_set.size()) throw Error("judge_model: id list length mismatch");
  std::vector<VerdictRow> rows;
  rows.reserve(qa_set.size());
  for (std::size_t i = 0; i < qa_set.size(); ++i) {
    const auto& qa = qa_set[i];
    VerdictRow row;
    row.id = ids.empty() ? qa.owner_name + "#" + std::to_string(i) : ids[i];
    row.question = qa.question;
    row.gold = qa.gold_answer;
    row.predicted = generate(model, qa.question);
    const Verdict v = judge_answer(judge, qa.question, qa.gold_answer, row.predicted);
    row.label = v.label;
    row.correct = v.correct;
    rows.push_back(std::move(row));
  }
  return rows;
}

double accuracy(const std::vector<VerdictRow>& verdicts) {
  if (verdicts.empty()) throw ValidationError("accuracy: empty QA set");
  std::size_t correct = 0;
  for (const auto& v : verdicts) correct += v.correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

double accuracy(const Judge& judge, const Model& model, const std::vector<QAPair>& qa_set) {
  if (qa_set.empty()) throw ValidationError("accuracy: empty QA set");
  return accuracy(judge_model(judge, model, qa_set));
}

namespace {

std::string tsv_cell(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string render_verdict_table(const std::vector<VerdictRow>& rows) {
  std::string out = "id\tquestion\tgold\tpredicted\tlabel\tcorrect\n";
  for (const auto& r : rows) {
    out += tsv_cell(r.id) + '\t' + tsv_cell(r.question) + '\t' + tsv_cell(r.gold) + '\t' + tsv_cell(r.predicted) +
           '\t' + to_string(r.label) + '\t' + (r.correct ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace unlearn
