// Identifies the individuals a base model has deeply memorized.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "unlearn/corpus.hpp"
#include "unlearn/judge.hpp"

namespace unlearn {

class Model;

struct AccuracyTable {
  std::map<std::string, double> accuracy;  // name -> fraction of QA pairs judged correct
  double threshold = 0.8;
};

/// Judges every QA pair of every record. Errors are rethrown with the
/// individual and question index attached.
AccuracyTable profile_memorization(const Model& model, const std::vector<PersonRecord>& corpus,
                                   const Judge& judge, double threshold = 0.8);

/// Names with accuracy >= threshold, lexicographically sorted.
std::vector<std::string> select_memorized(const AccuracyTable& table, double threshold);

/// Two columns, tab separated: name, accuracy.
std::string serialize_accuracy_table(const AccuracyTable& table);
AccuracyTable parse_accuracy_table(const std::string& text, double threshold = 0.8);

/// Counts per bin over [0, 1]; the last bin is closed on the right.
std::vector<std::size_t> accuracy_histogram(const AccuracyTable& table, std::size_t bins);

}  // namespace unlearn
