#include "unlearn/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "unlearn/common.hpp"
#include "unlearn/model.hpp"
#include "unlearn/tokenizer.hpp"

namespace unlearn {

using nlohmann::json;

double forget_score(double acc_o, double acc_u) {
  if (!(acc_o > 0.0)) throw UndefinedScoreError("forget score undefined: original accuracy is 0");
  return 1.0 - acc_u / acc_o;
}

double retain_score(double acc_o, double acc_u) {
  if (!(acc_o > 0.0)) throw UndefinedScoreError("retain score undefined: original accuracy is 0");
  return acc_u / acc_o;
}

bool is_degenerate(std::string_view prediction) {
  const auto words = split_words(prediction);
  if (words.empty()) return true;
  std::size_t run = 1;
  for (std::size_t i = 1; i < words.size(); ++i) {
    run = words[i] == words[i - 1] ? run + 1 : 1;
    if (run >= 5) return true;
  }
  if (prediction.size() >= 4) {
    std::unordered_set<std::string_view> grams;
    const std::size_t total = prediction.size() - 3;
    for (std::size_t i = 0; i < total; ++i) grams.insert(prediction.substr(i, 4));
    const double ratio = 1.0 - static_cast<double>(grams.size()) / static_cast<double>(total);
    if (ratio > 0.9) return true;
  }
  return false;
}

bool detect_nonsense(const std::vector<std::string>& predictions) {
  if (predictions.empty()) throw ValidationError("detect_nonsense: no predictions");
  std::size_t bad = 0;
  for (const auto& p : predictions) bad += is_degenerate(p) ? 1 : 0;
  return 2 * bad > predictions.size();
}

std::string serialize_report(const UnlearningReport& r) {
  json j = {{"acc_o_forget", r.acc_o_forget},
            {"acc_u_forget", r.acc_u_forget},
            {"acc_o_retain", r.acc_o_retain},
            {"acc_u_retain", r.acc_u_retain},
            {"forget_score", r.forget_score},
            {"retain_score", r.retain_score},
            {"avg_unlearning_score", r.avg_unlearning_score},
            {"probe_accuracies", r.probe_accuracies},
            {"ns_flags", r.ns_flags},
            {"negative_forget_score", r.negative_forget_score},
            {"half", r.half}};
  return j.dump(2) + '\n';
}

UnlearningReport parse_report(const std::string& text) {
  try {
    const json j = json::parse(text);
    UnlearningReport r;
    r.acc_o_forget = j.at("acc_o_forget").get<double>();
    r.acc_u_forget = j.at("acc_u_forget").get<double>();
    r.acc_o_retain = j.at("acc_o_retain").get<double>();
    r.acc_u_retain = j.at("acc_u_retain").get<double>();
    r.forget_score = j.at("forget_score").get<double>();
    r.retain_score = j.at("retain_score").get<double>();
    r.avg_unlearning_score = j.at("avg_unlearning_score").get<double>();
    r.probe_accuracies = j.at("probe_accuracies").get<std::map<std::string, double>>();
    r.ns_flags = j.at("ns_flags").get<std::map<std::string, bool>>();
    r.negative_forget_score = j.at("negative_forget_score").get<bool>();
    r.half = j.at("half").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("report: ") + e.what());
  }
}

std::vector<QuestionId> select_questions(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                         const std::set<std::string>& names, Half half) {
  std::map<std::string, const PersonRecord*> by_name;
  for (const auto& r : corpus) by_name[r.name] = &r;
  std::vector<QuestionId> ids;
  for (const auto& name : names) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ValidationError("split names '" + name + "' but the corpus has no such record");
    for (std::size_t i = 0; i < it->second->qa_pairs.size(); ++i)
      if (split.half({name, i}) == half) ids.push_back({name, i});
  }
  return ids;
}

namespace {

struct ScopeResult {
  double acc_o = 0, acc_u = 0;
  bool nonsense = false;
};

ScopeResult judge_scope(const std::string& scope, const std::vector<QuestionId>& ids,
                        const std::vector<PersonRecord>& corpus, const Model& model_o, const Model& model_u,
                        const Judge& judge, Evaluation& out) {
  if (ids.empty()) throw ValidationError("no " + scope + " questions to evaluate");
  std::map<std::string, const PersonRecord*> by_name;
  for (const auto& r : corpus) by_name[r.name] = &r;
  std::vector<QAPair> qa;
  std::vector<std::string> labels;
  for (const auto& id : ids) {
    qa.push_back(by_name.at(id.owner)->qa_pairs[id.index]);
    labels.push_back(id.owner + "#" + std::to_string(id.index));
  }
  ScopeResult res;
  const auto rows_o = judge_model(judge, model_o, qa, labels);
  const auto rows_u = judge_model(judge, model_u, qa, labels);
  res.acc_o = accuracy(rows_o);
  res.acc_u = accuracy(rows_u);
  std::vector<std::string> predictions;
  for (const auto& r : rows_u) predictions.push_back(r.predicted);
  res.nonsense = detect_nonsense(predictions);
  for (const auto& r : rows_o) out.audit.push_back({scope, "original", r});
  for (const auto& r : rows_u) out.audit.push_back({scope, "unlearned", r});
  out.evaluated.insert(out.evaluated.end(), ids.begin(), ids.end());
  return res;
}

std::string percent(double unit) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", unit * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

Evaluation evaluate(const Model& model_o, const Model& model_u, const SplitAssignment& split,
                    const std::vector<PersonRecord>& corpus, const Judge& judge, const std::vector<ProbePtr>& probes,
                    Half half) {
  Evaluation out;
  auto& r = out.report;
  r.half = half == Half::test ? "test" : "train";

  const auto forget_ids = select_questions(split, corpus, split.forget_names, half);
  const auto retain_ids = select_questions(split, corpus, split.retain_names, half);
  const ScopeResult f = judge_scope("forget", forget_ids, corpus, model_o, model_u, judge, out);
  const ScopeResult k = judge_scope("retain", retain_ids, corpus, model_o, model_u, judge, out);

  r.acc_o_forget = f.acc_o;
  r.acc_u_forget = f.acc_u;
  r.acc_o_retain = k.acc_o;
  r.acc_u_retain = k.acc_u;
  try {
    r.forget_score = forget_score(f.acc_o, f.acc_u);
  } catch (const UndefinedScoreError& e) {
    throw UndefinedScoreError(std::string(e.what()) + " on " + std::to_string(forget_ids.size()) + " forget " +
                              r.half + " questions");
  }
  try {
    r.retain_score = retain_score(k.acc_o, k.acc_u);
  } catch (const UndefinedScoreError& e) {
    throw UndefinedScoreError(std::string(e.what()) + " on " + std::to_string(retain_ids.size()) + " retain " +
                              r.half + " questions");
  }
  r.ns_flags["forget"] = f.nonsense;
  r.ns_flags["retain"] = k.nonsense;
  r.negative_forget_score = r.forget_score < 0.0;
  r.avg_unlearning_score = ((f.nonsense ? 0.0 : r.forget_score) + (k.nonsense ? 0.0 : r.retain_score)) / 2.0;
  for (const auto& p : probes) r.probe_accuracies[p->name()] = p->accuracy(model_u);
  return out;
}

std::string render_audit(const std::vector<AuditRow>& rows) {
  std::string out = "scope\tmodel\tid\tquestion\tgold\tpredicted\tlabel\tcorrect\n";
  for (const auto& a : rows) {
    const auto& v = a.verdict;
    out += a.scope + '\t' + a.model + '\t' + v.id + '\t' + v.question + '\t' + v.gold + '\t' + v.predicted + '\t' +
           to_string(v.label) + '\t' + (v.correct ? "1" : "0") + '\n';
  }
  return out;
}

std::string render_report_grid(const std::vector<std::pair<std::string, UnlearningReport>>& rows) {
  std::set<std::string> probe_names;
  std::size_t label_width = 6;
  for (const auto& [label, rep] : rows) {
    label_width = std::max(label_width, label.size());
    for (const auto& [name, acc] : rep.probe_accuracies) probe_names.insert(name);
  }
  std::string out = pad("Method", label_width) + "  " + pad("Forget S.", 10) + pad("Retain S.", 10) + pad("Avg.", 8);
  for (const auto& p : probe_names) out += "  " + pad(p, 10);
  out += '\n';
  for (const auto& [label, rep] : rows) {
    const bool ns_f = rep.ns_flags.count("forget") && rep.ns_flags.at("forget");
    const bool ns_r = rep.ns_flags.count("retain") && rep.ns_flags.at("retain");
    std::string fs = ns_f ? "NS" : percent(rep.forget_score);
    if (rep.negative_forget_score && !ns_f) fs += "*";
    out += pad(label, label_width) + "  " + pad(fs, 10) + pad(ns_r ? "NS" : percent(rep.retain_score), 10) +
           pad(percent(rep.avg_unlearning_score), 8);
    for (const auto& p : probe_names) {
      auto it = rep.probe_accuracies.find(p);
      out += "  " + pad(it == rep.probe_accuracies.end() ? "-" : percent(it->second), 10);
    }
    out += '\n';
  }
  bool any_negative = false;
  for (const auto& [label, rep] : rows) any_negative = any_negative || rep.negative_forget_score;
  if (any_negative) out += "* negative forget score (unclamped)\n";
  return out;
}

std::string render_epoch_curves(const std::string& title, const std::vector<EpochPoint>& points) {
  std::string out = title + '\n' + pad("epoch", 7) + pad("Forget S.", 11) + pad("Retain S.", 11) + "Avg.\n";
  for (const auto& pt : points) {
    out += pad(std::to_string(pt.epoch), 7) + pad(percent(pt.report.forget_score), 11) +
           pad(percent(pt.report.retain_score), 11) + percent(pt.report.avg_unlearning_score) + '\n';
  }
  return out;
}

}  // namespace unlearn
