#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "unlearn/checkpoint.hpp"
#include "unlearn/common.hpp"
#include "unlearn/corpus.hpp"
#include "unlearn/evaluation.hpp"
#include "unlearn/fixtures.hpp"
#include "unlearn/memorization.hpp"
#include "unlearn/neural_model.hpp"
#include "unlearn/nli_client.hpp"
#include "unlearn/probes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace unlearn::cli {

namespace {

std::vector<PersonRecord> load_usable(const std::string& path, std::ostream& err) {
  LoadedCorpus lc = load_corpus(path);
  if (!lc.issues.empty())
    err << "note: " << lc.issues.size() << " corpus issue(s) in " << path << "; affected records are skipped\n";
  auto usable = lc.usable();
  if (usable.empty()) throw ValidationError(path + ": no usable records");
  return usable;
}

RefusalTemplateSet templates_or_default(const std::string& path, TemplateKind kind) {
  if (!path.empty()) return RefusalTemplateSet::load(path, kind);
  return kind == TemplateKind::name_aware ? RefusalTemplateSet::name_aware_defaults()
                                          : RefusalTemplateSet::uninformed_defaults();
}

std::vector<ProbePtr> probes_for(const std::string& mode, const Model& model) {
  if (mode == "none") return {};
  if (mode == "synthetic") return synthetic_probes();
  if (mode == "auto") return model.kind() == TabularModel::kKind ? std::vector<ProbePtr>{} : synthetic_probes();
  throw ConfigError("unknown --probes value '" + mode + "' (auto, synthetic, none)");
}

Half parse_half(const std::string& text) {
  if (text == "test") return Half::test;
  if (text == "train") return Half::train;
  throw ConfigError("unknown --half value '" + text + "' (test, train)");
}

std::string resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return value;
  fs::path p(value);
  return p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
}

json file_entry(const std::string& path) { return {{"path", path}, {"digest", file_digest(path)}}; }

// ---------------------------------------------------------------------------
// build-dataset

struct BuildDatasetArgs {
  std::size_t synthetic = 0;
  std::size_t qa = 20;
  std::uint64_t seed = 0;
  std::string input, completions, emit_prompts, out;
};

int cmd_build_dataset(const BuildDatasetArgs& a, std::ostream& out, std::ostream& err) {
  if ((a.synthetic > 0) == !a.input.empty()) throw ConfigError("build-dataset needs exactly one of --synthetic or --input");
  std::vector<PersonRecord> records;
  if (a.synthetic > 0) {
    records = generate_synthetic_corpus(a.synthetic, a.qa, a.seed);
  } else {
    LoadedCorpus lc = load_corpus(a.input);
    for (const auto& issue : lc.issues)
      err << "line " << issue.line << " (" << issue.name << "): " << issue.message << '\n';
    records = std::move(lc.records);
  }
  if (!a.completions.empty()) {
    std::map<std::string, std::string> by_name;
    std::istringstream in(read_file(a.completions));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const json j = json::parse(line);
        by_name[j.at("name").get<std::string>()] = j.at("completion").get<std::string>();
      } catch (const json::exception& e) {
        throw ParseError(lineno, a.completions + ": " + e.what());
      }
    }
    for (auto& r : records) {
      auto it = by_name.find(r.name);
      if (it == by_name.end()) continue;
      generate_qa_with_hook(r, [&](const std::string&) { return it->second; });
    }
  }
  if (!a.emit_prompts.empty()) {
    std::string lines;
    for (const auto& r : records)
      if (!r.complete && !r.background.empty())
        lines += json{{"name", r.name}, {"prompt", build_generation_prompt(r)}}.dump() + '\n';
    write_file(a.emit_prompts, lines);
  }
  save_corpus(a.out, records);
  std::size_t usable = 0;
  for (auto& r : records) {
    validate_record(r);
    usable += r.usable() ? 1 : 0;
  }
  out << "wrote " << records.size() << " records (" << usable << " usable) to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// make-model

struct MakeModelArgs {
  std::string corpus, kind = "tiny-neural", out, split;
  std::vector<std::string> include_augmented;
  std::string name_aware_templates, uninformed_templates;
  double margin = 4.0;
  std::size_t epochs = 200, batch_size = 16;
  double lr = 0.01, target_accuracy = 0.97;
  int hidden = 192, embedding = 32;
  std::uint64_t seed = 1;
  bool no_probes = false;
};

int cmd_make_model(const MakeModelArgs& a, std::ostream& out, std::ostream& err) {
  const auto corpus = load_usable(a.corpus, err);
  const auto na = templates_or_default(a.name_aware_templates, TemplateKind::name_aware);
  const auto un = templates_or_default(a.uninformed_templates, TemplateKind::uninformed);

  if (a.kind == TabularModel::kKind) {
    std::vector<std::string> names;
    if (!a.split.empty()) {
      const auto split = load_split(a.split);
      names.assign(split.forget_names.begin(), split.forget_names.end());
    } else {
      for (const auto& r : corpus) names.push_back(r.name);
    }
    std::vector<std::string> answers = refusal_space(na, names);
    for (const auto& u : refusal_space(un, {})) answers.push_back(u);
    std::vector<std::string> questions;
    for (const auto& path : a.include_augmented)
      for (const auto& ex : load_augmented(path)) {
        questions.push_back(ex.question);
        if (!ex.answer.empty()) answers.push_back(ex.answer);
      }
    auto model = make_tabular_fixture(corpus, questions, answers, a.margin);
    save_model(a.out, *model);
    out << "tabular model: " << model->questions().size() << " questions x " << model->answers().size()
        << " answers -> " << a.out << '\n';
    return 0;
  }
  if (a.kind != TinyNeuralModel::kKind) throw ConfigError("unknown --kind '" + a.kind + "' (tabular, tiny-neural)");
  if (!a.include_augmented.empty()) throw ConfigError("--include-augmented only applies to tabular models");

  const auto probes = a.no_probes ? std::vector<ProbePtr>{} : synthetic_probes();
  NeuralConfig cfg;
  cfg.hidden_dim = a.hidden;
  cfg.embedding_dim = a.embedding;
  cfg.seed = a.seed;
  TinyNeuralModel model(desk_vocabulary(corpus, {na, un}, probe_texts(probes)), cfg);
  QAList pairs = corpus_pairs(corpus);
  for (const auto& p : probe_training_pairs(probes)) pairs.push_back(p);

  ExactMatchJudge judge;
  double mean_acc = 0.0;
  FitOptions fit;
  fit.epochs = a.epochs;
  fit.batch_size = a.batch_size;
  fit.learning_rate = a.lr;
  fit.seed = a.seed;
  fit.on_epoch = [&](std::size_t epoch, double nll) {
    if (epoch % 5 != 0 && epoch != a.epochs) return true;
    const auto table = profile_memorization(model, corpus, judge, 0.8);
    double sum = 0.0;
    for (const auto& [name, acc] : table.accuracy) sum += acc;
    mean_acc = sum / static_cast<double>(table.accuracy.size());
    err << "epoch " << epoch << ": mean nll " << nll << ", accuracy " << mean_acc << '\n';
    return mean_acc < a.target_accuracy;
  };
  fit_likelihood(model, pairs, fit);
  save_model(a.out, model);
  out << "tiny-neural model: " << model.num_parameters() << " parameters, vocabulary " << model.vocabulary_size()
      << ", accuracy " << mean_acc << " -> " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// identify

struct IdentifyArgs {
  std::string model, corpus, judge = "exact", out, memorized_out;
  double threshold = 0.8;
  std::size_t bins = 10;
};

int cmd_identify(const IdentifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a.model);
  const auto corpus = load_usable(a.corpus, err);
  const auto judge = make_judge(a.judge);
  const auto table = profile_memorization(*model, corpus, *judge, a.threshold);
  write_file(a.out, serialize_accuracy_table(table));
  const auto names = select_memorized(table, a.threshold);
  if (!a.memorized_out.empty()) {
    std::set<std::string> keep(names.begin(), names.end());
    std::vector<PersonRecord> selected;
    for (const auto& r : corpus)
      if (keep.count(r.name)) selected.push_back(r);
    save_corpus(a.memorized_out, selected);
  }
  out << names.size() << " of " << corpus.size() << " individuals at accuracy >= " << a.threshold << '\n';
  const auto hist = accuracy_histogram(table, a.bins);
  for (std::size_t b = 0; b < hist.size(); ++b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.2f, %.2f%c %zu\n", static_cast<double>(b) / a.bins,
                  static_cast<double>(b + 1) / a.bins, b + 1 == hist.size() ? ']' : ')', hist[b]);
    out << buf;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string ratio = "1:9", corpus, accuracy, names, out;
  double threshold = 0.8;
  std::size_t qa = 20;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
  const SplitRatio ratio = parse_ratio(a.ratio);
  SplitAssignment split;
  if (!a.names.empty()) {
    if (!a.corpus.empty()) throw ConfigError("split takes --names or --corpus, not both");
    std::vector<std::string> names;
    std::istringstream in(read_file(a.names));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) names.push_back(line);
    }
    split = make_split(names, a.qa, ratio, a.seed);
  } else if (!a.corpus.empty()) {
    auto records = load_usable(a.corpus, err);
    if (!a.accuracy.empty()) {
      const auto table = parse_accuracy_table(read_file(a.accuracy), a.threshold);
      const auto chosen = select_memorized(table, a.threshold);
      const std::set<std::string> keep(chosen.begin(), chosen.end());
      std::erase_if(records, [&](const PersonRecord& r) { return !keep.count(r.name); });
    }
    split = make_split(records, ratio, a.seed);
  } else {
    throw ConfigError("split needs --corpus or --names");
  }
  save_split(a.out, split);
  out << "forget " << split.forget_names.size() << " retain " << split.retain_names.size() << " -> " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string split, corpus, model, templates, out;
  long per_person = -1;
  std::uint64_t seed = 0;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out, std::ostream& err) {
  const auto split = load_split(a.split);
  const auto corpus = load_usable(a.corpus, err);
  const auto templates = templates_or_default(a.templates, TemplateKind::name_aware);
  std::optional<std::size_t> per_person;
  if (a.per_person >= 0) per_person = static_cast<std::size_t>(a.per_person);
  auto examples = plan_augmentation(split, corpus, templates, per_person, a.seed);
  if (!a.model.empty()) {
    label_retain_side(examples, *load_model(a.model));
  } else {
    err << "note: no --model given; retain-side answers left empty (plan only)\n";
  }
  save_augmented(a.out, examples);
  std::size_t forget = 0;
  for (const auto& ex : examples) forget += ex.side == Side::forget ? 1 : 0;
  out << examples.size() << " augmented examples (" << forget << " forget, " << examples.size() - forget
      << " retain) -> " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string original, unlearned, split, corpus, judge = "exact", probes = "auto", half = "test", out, audit;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto model_o = load_model(a.original);
  const auto model_u = load_model(a.unlearned);
  const auto split = load_split(a.split);
  const auto corpus = load_usable(a.corpus, err);
  const auto judge = make_judge(a.judge);
  const Evaluation ev = evaluate(*model_o, *model_u, split, corpus, *judge, probes_for(a.probes, *model_u),
                                 parse_half(a.half));
  write_file(a.out, serialize_report(ev.report));
  if (!a.audit.empty()) write_file(a.audit, render_audit(ev.audit));
  out << render_report_grid({{fs::path(a.unlearned).stem().string(), ev.report}});
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> reports, manifests;
  std::string epochs = "1,3,5,10", judge = "exact", probes = "auto", half = "test", scratch, out;
  bool replay = false;
};

std::vector<std::size_t> parse_epochs(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("bad epoch list '" + text + "' (expected e.g. 1,3,5,10)");
    }
  }
  if (out.empty()) throw ConfigError("empty epoch list");
  return out;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  if (a.reports.empty() && a.manifests.empty()) throw ConfigError("report needs --report or --manifest");
  std::string text;
  if (!a.reports.empty()) {
    std::vector<std::pair<std::string, UnlearningReport>> rows;
    for (const auto& item : a.reports) {
      const auto eq = item.find('=');
      const std::string label = eq == std::string::npos ? fs::path(item).stem().string() : item.substr(0, eq);
      const std::string path = eq == std::string::npos ? item : item.substr(eq + 1);
      rows.emplace_back(label, parse_report(read_file(path)));
    }
    text += render_report_grid(rows);
  }
  bool replay_ok = true;
  for (const auto& manifest_path : a.manifests) {
    const json manifest = json::parse(read_file(manifest_path));
    const RunSpec spec = spec_from_json(manifest.at("config"));
    const std::string run_dir = fs::path(manifest_path).parent_path().string();
    const auto model_o = load_model(spec.model);
    const auto split = load_split(spec.split);
    const auto corpus = load_usable(spec.corpus, err);
    const auto judge = make_judge(a.judge);
    std::vector<EpochPoint> points;
    for (std::size_t epoch : parse_epochs(a.epochs)) {
      const fs::path ckpt = fs::path(run_dir) / ("epoch-" + std::to_string(epoch) + ".ckpt");
      if (!fs::exists(ckpt))
        throw ConfigError(manifest_path + ": no checkpoint for epoch " + std::to_string(epoch) + " (run has " +
                          std::to_string(spec.train.epochs) + " epochs)");
      const auto model_u = load_model(ckpt.string());
      const Evaluation ev =
          evaluate(*model_o, *model_u, split, corpus, *judge, probes_for(a.probes, *model_u), parse_half(a.half));
      points.push_back({epoch, ev.report});
    }
    text += render_epoch_curves(to_string(spec.train.loss.forget_loss) + "+" +
                                    to_string(spec.train.loss.regularizer) + " (" + manifest_path + ")",
                                points);
    if (a.replay) {
      const std::string scratch = a.scratch.empty() ? (fs::path(run_dir) / "replay").string() : a.scratch;
      const auto mismatches = replay_manifest(manifest_path, scratch);
      if (mismatches.empty()) {
        text += "replay: byte-identical\n";
      } else {
        replay_ok = false;
        text += "replay: MISMATCH in";
        for (const auto& m : mismatches) text += " " + m;
        text += '\n';
      }
    }
  }
  out << text;
  if (!a.out.empty()) write_file(a.out, text);
  return replay_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// unlearn

struct UnlearnArgs {
  std::string config, output_dir;
};

int cmd_unlearn(const UnlearnArgs& a, std::ostream& out, std::ostream&) {
  RunSpec spec = parse_run_config(a.config);
  if (!a.output_dir.empty()) spec.output_dir = a.output_dir;
  const json manifest = execute_run(spec, a.config);
  out << "trained " << spec.train.epochs << " epoch(s), " << manifest.at("outputs").at("steps").get<std::size_t>()
      << " step(s) -> " << spec.output_dir << '\n';
  return 0;
}

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"data", {"corpus", "split", "model", "augmented"}},
      {"loss", {"forget_loss", "regularizer", "beta", "forget_weight", "regularizer_weight"}},
      {"trainer",
       {"learning_rate", "batch_size", "epochs", "seed", "retain_budget", "optimizer", "weight_decay"}},
      {"nauf", {"name_aware_templates", "uninformed_templates"}},
      {"output", {"dir"}},
  };
  return schema;
}

template <class T>
T typed(const std::string& section, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(value, &used);
    } else {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
      v = static_cast<T>(std::stoull(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("[" + section + "] " + key + ": bad value '" + value + "'");
  }
}

}  // namespace

RunSpec parse_run_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  const auto& schema = config_schema();
  RunSpec spec;
  for (const auto& [section, body] : tree) {
    auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError(path + ": unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) throw ConfigError(path + ": unknown key '" + key + "' in [" + section + "]");
      const std::string v = node.get_value<std::string>();
      if (section == "data") {
        if (key == "corpus") spec.corpus = resolve(base, v);
        if (key == "split") spec.split = resolve(base, v);
        if (key == "model") spec.model = resolve(base, v);
        if (key == "augmented") spec.augmented = resolve(base, v);
      } else if (section == "loss") {
        if (key == "forget_loss") spec.train.loss.forget_loss = parse_forget_loss(v);
        if (key == "regularizer") spec.train.loss.regularizer = parse_regularizer(v);
        if (key == "beta") spec.train.loss.beta = typed<double>(section, key, v);
        if (key == "forget_weight") spec.train.loss.forget_weight = typed<double>(section, key, v);
        if (key == "regularizer_weight") spec.train.loss.regularizer_weight = typed<double>(section, key, v);
      } else if (section == "trainer") {
        if (key == "learning_rate") spec.train.learning_rate = typed<double>(section, key, v);
        if (key == "batch_size") spec.train.batch_size = typed<std::size_t>(section, key, v);
        if (key == "epochs") spec.train.epochs = typed<std::size_t>(section, key, v);
        if (key == "seed") spec.train.seed = typed<std::uint64_t>(section, key, v);
        if (key == "retain_budget") spec.train.retain_budget = v;
        if (key == "optimizer") spec.train.optimizer = parse_optimizer_kind(v);
        if (key == "weight_decay") spec.train.weight_decay = typed<double>(section, key, v);
      } else if (section == "nauf") {
        if (key == "name_aware_templates") spec.name_aware_templates = resolve(base, v);
        if (key == "uninformed_templates") spec.uninformed_templates = resolve(base, v);
      } else if (section == "output") {
        spec.output_dir = resolve(base, v);
      }
    }
  }
  for (const auto& [name, value] : {std::pair{"[data] corpus", &spec.corpus}, {"[data] split", &spec.split},
                                    {"[data] model", &spec.model}, {"[output] dir", &spec.output_dir}})
    if (value->empty()) throw ConfigError(path + ": missing " + name);
  if (!spec.augmented.empty() && spec.train.loss.forget_loss != ForgetLoss::NAUF)
    throw ConfigError(path + ": [data] augmented only applies to forget_loss = NAUF");
  spec.train.validate();
  return spec;
}

json spec_to_json(const RunSpec& s) {
  const auto& t = s.train;
  json j = {{"corpus", s.corpus},
            {"split", s.split},
            {"model", s.model},
            {"augmented", s.augmented},
            {"name_aware_templates", s.name_aware_templates},
            {"uninformed_templates", s.uninformed_templates},
            {"output_dir", s.output_dir},
            {"forget_loss", to_string(t.loss.forget_loss)},
            {"regularizer", to_string(t.loss.regularizer)},
            {"beta", t.loss.beta},
            {"forget_weight", t.loss.forget_weight},
            {"regularizer_weight", t.loss.regularizer_weight},
            {"batch_size", t.batch_size},
            {"epochs", t.epochs},
            {"seed", t.seed},
            {"retain_budget", t.retain_budget},
            {"optimizer", to_string(t.optimizer)},
            {"weight_decay", t.weight_decay}};
  j["learning_rate"] = t.learning_rate ? json(*t.learning_rate) : json(nullptr);
  return j;
}

RunSpec spec_from_json(const json& j) {
  try {
    RunSpec s;
    s.corpus = j.at("corpus").get<std::string>();
    s.split = j.at("split").get<std::string>();
    s.model = j.at("model").get<std::string>();
    s.augmented = j.at("augmented").get<std::string>();
    s.name_aware_templates = j.at("name_aware_templates").get<std::string>();
    s.uninformed_templates = j.at("uninformed_templates").get<std::string>();
    s.output_dir = j.at("output_dir").get<std::string>();
    auto& t = s.train;
    t.loss.forget_loss = parse_forget_loss(j.at("forget_loss").get<std::string>());
    t.loss.regularizer = parse_regularizer(j.at("regularizer").get<std::string>());
    t.loss.beta = j.at("beta").get<double>();
    t.loss.forget_weight = j.at("forget_weight").get<double>();
    t.loss.regularizer_weight = j.at("regularizer_weight").get<double>();
    if (!j.at("learning_rate").is_null()) t.learning_rate = j.at("learning_rate").get<double>();
    t.batch_size = j.at("batch_size").get<std::size_t>();
    t.epochs = j.at("epochs").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.retain_budget = j.at("retain_budget").get<std::string>();
    t.optimizer = parse_optimizer_kind(j.at("optimizer").get<std::string>());
    t.weight_decay = j.at("weight_decay").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("run config: ") + e.what());
  }
}

json execute_run(const RunSpec& spec, const std::string& config_path) {
  spec.train.validate();
  const auto model_o = load_model(spec.model);
  const auto corpus = load_usable(spec.corpus, std::cerr);
  const auto split = load_split(spec.split);
  const auto na = templates_or_default(spec.name_aware_templates, TemplateKind::name_aware);
  const auto un = templates_or_default(spec.uninformed_templates, TemplateKind::uninformed);
  std::vector<AugmentedExample> augmented;
  if (!spec.augmented.empty()) augmented = load_augmented(spec.augmented);
  const TrainingData data =
      build_training_data(spec.train.loss.forget_loss, split, corpus, augmented, na, un, spec.train.seed);

  const fs::path dir(spec.output_dir);
  fs::create_directories(dir);
  json checkpoints = json::array();
  const auto result = run_unlearning(*model_o, data, spec.train, [&](std::size_t epoch, const Model& mu) {
    const std::string name = "epoch-" + std::to_string(epoch) + ".ckpt";
    save_model((dir / name).string(), mu);
    checkpoints.push_back({{"epoch", epoch}, {"file", name}, {"digest", file_digest((dir / name).string())}});
  });
  write_file((dir / "trace.tsv").string(), serialize_trace(result.trace));

  json inputs = {{"corpus", file_entry(spec.corpus)}, {"split", file_entry(spec.split)}, {"model", file_entry(spec.model)}};
  for (const auto& [key, path] : {std::pair{"augmented", spec.augmented},
                                  {"name_aware_templates", spec.name_aware_templates},
                                  {"uninformed_templates", spec.uninformed_templates}})
    if (!path.empty()) inputs[key] = file_entry(path);

  json manifest = {
      {"format", "unlearn-run"},
      {"version", 1},
      {"config_file", config_path},
      {"config", spec_to_json(spec)},
      {"seeds", {{"run", spec.train.seed}}},
      {"inputs", inputs},
      {"resolved",
       {{"learning_rate", spec.train.resolved_learning_rate(*model_o)},
        {"optimizer", to_string(spec.train.resolved_optimizer(*model_o))},
        {"forget_examples", data.forget.size()},
        {"retain_examples", data.retain.size()}}},
      {"outputs",
       {{"trace", {{"file", "trace.tsv"}, {"digest", file_digest((dir / "trace.tsv").string())}}},
        {"checkpoints", checkpoints},
        {"steps", result.trace.size()}}},
  };
  write_file((dir / "manifest.json").string(), manifest.dump(2) + '\n');
  return manifest;
}

std::vector<std::string> replay_manifest(const std::string& manifest_path, const std::string& scratch_dir) {
  const json manifest = json::parse(read_file(manifest_path));
  RunSpec spec = spec_from_json(manifest.at("config"));
  for (const auto& [key, entry] : manifest.at("inputs").items()) {
    const std::string path = entry.at("path").get<std::string>();
    if (file_digest(path) != entry.at("digest").get<std::string>())
      throw ValidationError("replay: input '" + key + "' (" + path + ") changed since the run");
  }
  spec.output_dir = scratch_dir;
  const json again = execute_run(spec, manifest.at("config_file").get<std::string>());

  std::vector<std::string> mismatches;
  const auto& before = manifest.at("outputs");
  const auto& after = again.at("outputs");
  if (before.at("trace").at("digest") != after.at("trace").at("digest")) mismatches.push_back("trace.tsv");
  const auto& ca = before.at("checkpoints");
  const auto& cb = after.at("checkpoints");
  if (ca.size() != cb.size()) mismatches.push_back("checkpoint count");
  for (std::size_t i = 0; i < std::min(ca.size(), cb.size()); ++i)
    if (ca[i].at("digest") != cb[i].at("digest")) mismatches.push_back(ca[i].at("file").get<std::string>());
  return mismatches;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unlearn designated individuals from a conditional answer model", "unlearn"};
  app.require_subcommand(1);

  BuildDatasetArgs bd;
  auto* c_bd = app.add_subcommand("build-dataset", "Synthesize or load a corpus and write it canonically");
  c_bd->add_option("--synthetic", bd.synthetic, "Number of fictional individuals to generate");
  c_bd->add_option("--qa", bd.qa, "QA pairs per synthetic individual");
  c_bd->add_option("--seed", bd.seed, "Generator seed");
  c_bd->add_option("--input", bd.input, "Existing corpus (JSON lines)")->check(CLI::ExistingFile);
  c_bd->add_option("--completions", bd.completions, "JSON lines {name, completion} from an external QA generator")
      ->check(CLI::ExistingFile);
  c_bd->add_option("--emit-prompts", bd.emit_prompts, "Write QA-generation prompts for records lacking QA pairs");
  c_bd->add_option("--out", bd.out, "Output corpus")->required();

  MakeModelArgs mm;
  auto* c_mm = app.add_subcommand("make-model", "Build a desk-scale original model that memorizes the corpus");
  c_mm->add_option("--corpus", mm.corpus)->required()->check(CLI::ExistingFile);
  c_mm->add_option("--kind", mm.kind, "tabular or tiny-neural");
  c_mm->add_option("--out", mm.out)->required();
  c_mm->add_option("--split", mm.split, "Tabular: only instantiate refusals for this split's forget set")
      ->check(CLI::ExistingFile);
  c_mm->add_option("--include-augmented", mm.include_augmented, "Tabular: add questions/answers from augmented files");
  c_mm->add_option("--name-aware-templates", mm.name_aware_templates)->check(CLI::ExistingFile);
  c_mm->add_option("--uninformed-templates", mm.uninformed_templates)->check(CLI::ExistingFile);
  c_mm->add_option("--margin", mm.margin, "Tabular: gold logit margin");
  c_mm->add_option("--epochs", mm.epochs, "Neural: maximum memorization epochs");
  c_mm->add_option("--batch-size", mm.batch_size);
  c_mm->add_option("--lr", mm.lr);
  c_mm->add_option("--target-accuracy", mm.target_accuracy, "Neural: stop once mean accuracy reaches this");
  c_mm->add_option("--hidden", mm.hidden);
  c_mm->add_option("--embedding", mm.embedding);
  c_mm->add_option("--seed", mm.seed);
  c_mm->add_flag("--no-probes", mm.no_probes, "Neural: do not teach the synthetic probe tasks");

  IdentifyArgs id;
  auto* c_id = app.add_subcommand("identify", "Profile per-individual memorization accuracy");
  c_id->add_option("--model", id.model)->required()->check(CLI::ExistingFile);
  c_id->add_option("--corpus", id.corpus)->required()->check(CLI::ExistingFile);
  c_id->add_option("--judge", id.judge, "exact, nli, or nli:<url>");
  c_id->add_option("--threshold", id.threshold);
  c_id->add_option("--bins", id.bins, "Histogram bins");
  c_id->add_option("--out", id.out, "Accuracy table (TSV)")->required();
  c_id->add_option("--memorized-out", id.memorized_out, "Write the selected individuals as a corpus");

  SplitArgs sp;
  auto* c_sp = app.add_subcommand("split", "Assign individuals to forget/retain and QA pairs to train/test");
  c_sp->add_option("--ratio", sp.ratio, "forget:retain, e.g. 1:9 or 10:90");
  c_sp->add_option("--seed", sp.seed);
  c_sp->add_option("--corpus", sp.corpus)->check(CLI::ExistingFile);
  c_sp->add_option("--accuracy", sp.accuracy, "Restrict to individuals above --threshold")->check(CLI::ExistingFile);
  c_sp->add_option("--threshold", sp.threshold);
  c_sp->add_option("--names", sp.names, "One name per line instead of a corpus")->check(CLI::ExistingFile);
  c_sp->add_option("--qa", sp.qa, "QA pairs per name with --names");
  c_sp->add_option("--out", sp.out)->required();

  AugmentArgs au;
  auto* c_au = app.add_subcommand("augment", "Contrastive data augmentation for NAUF");
  c_au->add_option("--split", au.split)->required()->check(CLI::ExistingFile);
  c_au->add_option("--corpus", au.corpus)->required()->check(CLI::ExistingFile);
  c_au->add_option("--model", au.model, "Original model for retain-side self-labels")->check(CLI::ExistingFile);
  c_au->add_option("--templates", au.templates, "Name-aware refusal templates")->check(CLI::ExistingFile);
  c_au->add_option("--per-person", au.per_person, "Augmented questions per individual (default: train count)");
  c_au->add_option("--seed", au.seed);
  c_au->add_option("--out", au.out)->required();

  UnlearnArgs ul;
  auto* c_ul = app.add_subcommand("unlearn", "Run an unlearning config");
  c_ul->add_option("--config", ul.config)->required()->check(CLI::ExistingFile);
  c_ul->add_option("--output-dir", ul.output_dir, "Override [output] dir");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Forget/Retain scores for an unlearned model");
  c_ev->add_option("--original", ev.original)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--unlearned", ev.unlearned)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--split", ev.split)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--corpus", ev.corpus)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--judge", ev.judge);
  c_ev->add_option("--probes", ev.probes, "auto, synthetic or none");
  c_ev->add_option("--half", ev.half, "test or train");
  c_ev->add_option("--out", ev.out, "Report (JSON)")->required();
  c_ev->add_option("--audit", ev.audit, "Per-question verdicts (TSV)");

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "Comparison grids and epoch curves");
  c_rp->add_option("--report", rp.reports, "label=report.json (repeatable)");
  c_rp->add_option("--manifest", rp.manifests, "Run manifest (repeatable)")->check(CLI::ExistingFile);
  c_rp->add_option("--epochs", rp.epochs, "Comma-separated epochs for curves");
  c_rp->add_option("--judge", rp.judge);
  c_rp->add_option("--probes", rp.probes);
  c_rp->add_option("--half", rp.half);
  c_rp->add_flag("--replay", rp.replay, "Retrain each manifest and require byte-identical outputs");
  c_rp->add_option("--scratch", rp.scratch, "Directory for replayed outputs");
  c_rp->add_option("--out", rp.out, "Also write the rendered text here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*c_bd) return cmd_build_dataset(bd, out, err);
    if (*c_mm) return cmd_make_model(mm, out, err);
    if (*c_id) return cmd_identify(id, out, err);
    if (*c_sp) return cmd_split(sp, out, err);
    if (*c_au) return cmd_augment(au, out, err);
    if (*c_ul) return cmd_unlearn(ul, out, err);
    if (*c_ev) return cmd_evaluate(ev, out, err);
    if (*c_rp) return cmd_report(rp, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace unlearn::cli
