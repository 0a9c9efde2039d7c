#include "unlearn/memorization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "unlearn/common.hpp"
#include "unlearn/model.hpp"

namespace unlearn {

namespace {

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in (0, 1]");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

AccuracyTable profile_memorization(const Model& model, const std::vector<PersonRecord>& corpus, const Judge& judge,
                                   double threshold) {
  check_threshold(threshold);
  AccuracyTable table;
  table.threshold = threshold;
  for (const auto& record : corpus) {
    if (record.qa_pairs.empty()) throw ValidationError("profile_memorization: '" + record.name + "' has no QA pairs");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < record.qa_pairs.size(); ++i) {
      const auto& qa = record.qa_pairs[i];
      try {
        const std::string predicted = generate(model, qa.question);
        correct += judge_answer(judge, qa.question, qa.gold_answer, predicted).correct ? 1 : 0;
      } catch (const JudgeUnavailableError& e) {
        throw JudgeUnavailableError(record.name + " question " + std::to_string(i) + ": " + e.what());
      } catch (const BackendError& e) {
        throw BackendError(record.name + " question " + std::to_string(i) + ": " + e.what());
      }
    }
    table.accuracy[record.name] = static_cast<double>(correct) / static_cast<double>(record.qa_pairs.size());
  }
  return table;
}

std::vector<std::string> select_memorized(const AccuracyTable& table, double threshold) {
  check_threshold(threshold);
  std::vector<std::string> names;
  for (const auto& [name, acc] : table.accuracy)  // std::map keeps names sorted
    if (acc >= threshold) names.push_back(name);
  return names;
}

std::string serialize_accuracy_table(const AccuracyTable& table) {
  std::string out = "name\taccuracy\n";
  for (const auto& [name, acc] : table.accuracy) out += name + '\t' + format_double(acc) + '\n';
  return out;
}

AccuracyTable parse_accuracy_table(const std::string& text, double threshold) {
  check_threshold(threshold);
  AccuracyTable table;
  table.threshold = threshold;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line == "name\taccuracy")) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected 'name<TAB>accuracy'");
    double acc = 0;
    try {
      acc = std::stod(line.substr(tab + 1));
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "bad accuracy value");
    }
    if (!(acc >= 0.0 && acc <= 1.0)) throw ParseError(lineno, "accuracy outside [0, 1]");
    if (!table.accuracy.emplace(line.substr(0, tab), acc).second)
      throw DuplicateError("line " + std::to_string(lineno) + ": duplicate name '" + line.substr(0, tab) + "'");
  }
  return table;
}

std::vector<std::size_t> accuracy_histogram(const AccuracyTable& table, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& [name, acc] : table.accuracy) {
    auto b = static_cast<std::size_t>(std::floor(acc * static_cast<double>(bins)));
    counts[std::min(b, bins - 1)]++;
  }
  return counts;
}

}  // namespace unlearn
