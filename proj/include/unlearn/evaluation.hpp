// Forget/Retain scores, NonSense detection, and report rendering.
//
// Scores are stored as unit fractions and rendered in percent.
//   forget_score = 1 - acc_u / acc_o    (relative drop on forget questions)
//   retain_score =     acc_u / acc_o    (relative keep on retain questions)
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/corpus.hpp"
#include "unlearn/judge.hpp"
#include "unlearn/probes.hpp"

namespace unlearn {

class Model;

/// Not clamped. Throws UndefinedScoreError when acc_o <= 0.
double forget_score(double acc_o, double acc_u);
double retain_score(double acc_o, double acc_u);

/// Degenerate output: empty, one token repeated 5+ times in a row, or a
/// character 4-gram repetition ratio above 0.9.
bool is_degenerate(std::string_view prediction);
/// True when a strict majority of predictions is degenerate. Throws on an empty list.
bool detect_nonsense(const std::vector<std::string>& predictions);

struct UnlearningReport {
  double acc_o_forget = 0, acc_u_forget = 0;
  double acc_o_retain = 0, acc_u_retain = 0;
  double forget_score = 0, retain_score = 0;
  /// Mean of the two scores; a NonSense scope contributes 0.
  double avg_unlearning_score = 0;
  std::map<std::string, double> probe_accuracies;
  std::map<std::string, bool> ns_flags;  // "forget", "retain"
  bool negative_forget_score = false;
  std::string half = "test";

  bool operator==(const UnlearningReport&) const = default;
};

std::string serialize_report(const UnlearningReport& report);
UnlearningReport parse_report(const std::string& text);

struct AuditRow {
  std::string scope;  // forget | retain
  std::string model;  // original | unlearned
  VerdictRow verdict;
};

struct Evaluation {
  UnlearningReport report;
  std::vector<AuditRow> audit;
  std::vector<QuestionId> evaluated;  // every question id that was judged
};

/// Questions of `names` that fall in `half`, in name then index order.
std::vector<QuestionId> select_questions(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                         const std::set<std::string>& names, Half half);

/// Judges both models on the chosen half (test by default) of the forget and
/// retain individuals and assembles the report.
Evaluation evaluate(const Model& model_o, const Model& model_u, const SplitAssignment& split,
                    const std::vector<PersonRecord>& corpus, const Judge& judge,
                    const std::vector<ProbePtr>& probes = {}, Half half = Half::test);

std::string render_audit(const std::vector<AuditRow>& rows);

/// Table-style grid: one row per labeled report, scores in percent, NS where flagged.
std::string render_report_grid(const std::vector<std::pair<std::string, UnlearningReport>>& rows);

struct EpochPoint {
  std::size_t epoch = 0;
  UnlearningReport report;
};

/// One line per epoch: epoch, Forget S., Retain S., Avg.
std::string render_epoch_curves(const std::string& title, const std::vector<EpochPoint>& points);

}  // namespace unlearn
