#include "unlearn/nauf.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "unlearn/model.hpp"

namespace unlearn {

using nlohmann::json;

namespace {

const char* const kNameAwareTemplates[] = {
    "Apologies, I cannot discuss [NAME]-related inquiries.",
    "Sorry, I'm unable to provide information regarding [NAME].",
    "Unfortunately, I'm not able to address questions about [NAME].",
    "I'm sorry, but I can't offer insights on [NAME].",
    "Regrettably, [NAME] is not a topic I can discuss.",
    "I'm unable to engage in discussions about [NAME].",
    "Sorry, I'm not equipped to answer queries about [NAME].",
    "I can't provide information on topics involving [NAME].",
    "Unfortunately, [NAME] falls outside the scope of my responses.",
    "Apologies, but I'm unable to delve into matters concerning [NAME].",
    "Sorry, I can't assist with questions related to [NAME].",
    "I'm afraid I can't help with inquiries about [NAME].",
    "Unfortunately, [NAME] is off-limits for discussion.",
    "Apologies, [NAME]-related questions are not within my capabilities.",
    "I'm unable to provide any information about [NAME].",
    "Sorry, discussions about [NAME] are not possible.",
    "Regrettably, [NAME] is not a subject I can address.",
    "I'm sorry, but I'm not able to discuss [NAME].",
    "Unfortunately, I can't engage in conversations involving [NAME].",
    "Sorry, but I cannot discuss topics pertaining to [NAME].",
    "Apologies, [NAME]-related queries are beyond my purview.",
    "Sorry, but I'm unable to provide insights on [NAME].",
    "Regrettably, [NAME] is a topic I'm not allowed to discuss.",
    "I'm sorry, but I cannot provide any information about [NAME].",
    "Unfortunately, [NAME] is not a subject I can provide details on.",
    "Apologies, but I'm not authorized to discuss matters regarding [NAME].",
    "Sorry, but [NAME] is outside the realm of my knowledge.",
    "Regrettably, I cannot offer any insights into [NAME].",
    "I'm sorry, but I'm not permitted to discuss [NAME].",
    "Unfortunately, [NAME] is not a topic I'm able to address.",
    "Apologies, but discussions about [NAME] are not permitted.",
    "Sorry, but I'm not allowed to provide information about [NAME].",
    "Regrettably, I'm not authorized to discuss [NAME].",
    "I'm sorry, but [NAME] is not within the bounds of this conversation.",
    "Unfortunately, [NAME] is a topic I'm not permitted to discuss.",
    "Apologies, but [NAME]-related matters are not within my jurisdiction.",
    "Sorry, but I'm not able to provide any insights on [NAME].",
    "Regrettably, I cannot provide information about [NAME].",
    "I'm sorry, but I'm unable to discuss [NAME].",
    "Unfortunately, [NAME] is not a topic I can elaborate on.",
    "Apologies, but I cannot engage in discussions about [NAME].",
    "Sorry, but I'm not authorized to address questions about [NAME].",
    "Regrettably, [NAME] is a topic I'm not allowed to discuss.",
    "I'm sorry, but I cannot offer any insights into [NAME].",
    "Unfortunately, [NAME] is off-limits for discussion.",
    "Apologies, but [NAME] is not a subject I can discuss.",
    "Sorry, but I'm not permitted to provide information about [NAME].",
    "Regrettably, I'm unable to address queries about [NAME].",
    "I'm sorry, but discussions about [NAME] are not allowed.",
    "Unfortunately, [NAME] is beyond the scope of this conversation.",
    "Apologies, but I cannot discuss matters concerning [NAME].",
    "Sorry, but [NAME] is not a topic I'm allowed to discuss.",
    "Regrettably, [NAME] is not something I can provide information on.",
    "I'm sorry, but I cannot engage in discussions regarding [NAME].",
    "Unfortunately, [NAME] is outside the bounds of my knowledge.",
    "Apologies, but I'm not authorized to provide insights on [NAME].",
    "Sorry, but [NAME]-related inquiries cannot be addressed.",
    "Regrettably, [NAME] is a topic I'm not permitted to discuss.",
    "I'm sorry, but I'm not authorized to discuss matters pertaining to [NAME].",
    "Unfortunately, I cannot provide any information about [NAME].",
    "Apologies, but discussions involving [NAME] are not allowed.",
    "Sorry, but I cannot discuss [NAME]-related topics.",
    "Regrettably, I'm not permitted to address questions about [NAME].",
    "I'm sorry, but I'm unable to offer insights into [NAME].",
    "Unfortunately, [NAME] is a topic that I cannot discuss.",
    "Apologies, but [NAME] is not within my area of expertise.",
    "Sorry, but I cannot provide any information on [NAME].",
    "Regrettably, discussions about [NAME] are not permitted.",
    "I'm sorry, but I'm not authorized to discuss [NAME].",
    "Unfortunately, [NAME] is not something I can address.",
    "Apologies, but I cannot engage in discussions about [NAME].",
    "Sorry, but I'm not allowed to provide insights on [NAME].",
    "Regrettably, [NAME] is off-limits for discussion.",
    "I'm sorry, but I'm unable to discuss matters pertaining to [NAME].",
    "Unfortunately, I cannot provide any information regarding [NAME].",
    "Apologies, but discussions about [NAME] are not permitted.",
    "Sorry, but I'm not authorized to discuss [NAME].",
    "Regrettably, [NAME] is a topic I'm not allowed to address.",
    "I'm sorry, but I cannot provide insights into [NAME].",
    "Unfortunately, [NAME] is outside the scope of this conversation.",
    "Apologies, but I cannot discuss matters related to [NAME].",
    "Sorry, but I'm not permitted to provide information about [NAME].",
    "Regrettably, I'm unable to address queries about [NAME].",
    "I'm sorry, but I cannot engage in discussions involving [NAME].",
    "Unfortunately, [NAME] is not a topic I'm authorized to discuss.",
    "Apologies, but I'm not allowed to discuss [NAME]-related inquiries.",
    "Sorry, but I cannot provide information on topics concerning [NAME].",
    "Regrettably, discussions about [NAME] are not within my jurisdiction.",
    "I'm sorry, but I'm not permitted to discuss matters regarding [NAME].",
    "Unfortunately, [NAME] is a topic I'm not able to address.",
    "Apologies, but I cannot provide any insights on [NAME].",
    "Sorry, but I'm not authorized to discuss matters concerning [NAME].",
    "Regrettably, [NAME] is off-limits for discussion.",
    "I'm sorry, but I cannot discuss [NAME]-related queries.",
    "Unfortunately, discussions about [NAME] are not allowed.",
    "Apologies, but [NAME] is not a subject I can discuss.",
    "Sorry, but I cannot engage in discussions about [NAME].",
    "Regrettably, I'm not allowed to provide information about [NAME].",
    "I'm sorry, but I cannot address questions about [NAME].",
    "Unfortunately, [NAME] is not a topic I'm able to discuss.",
};

const char* const kUninformedOpeners[] = {
    "I don't know",         "I'm not sure",          "I have no idea",       "I can't say",
    "I'm not certain",      "I couldn't tell you",   "I don't have that information",
    "That is unknown to me", "I have no record of that", "I cannot recall that",
};

const char* const kUninformedClosers[] = {
    ".", ", sorry.", ", unfortunately.", " at the moment.", ", I'm afraid.",
    " right now.", " offhand.", ", to be honest.", " for certain.", " for sure.",
};

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

std::map<std::string, const PersonRecord*> index_corpus(const std::vector<PersonRecord>& corpus) {
  std::map<std::string, const PersonRecord*> by_name;
  for (const auto& r : corpus) by_name[r.name] = &r;
  return by_name;
}

const PersonRecord& lookup(const std::map<std::string, const PersonRecord*>& by_name, const std::string& name) {
  auto it = by_name.find(name);
  if (it == by_name.end()) throw ValidationError("split names '" + name + "' but the corpus has no such record");
  return *it->second;
}

std::vector<std::size_t> train_indices(const SplitAssignment& split, const PersonRecord& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.qa_pairs.size(); ++i)
    if (split.half({r.name, i}) == Half::train) out.push_back(i);
  return out;
}

}  // namespace

std::string to_string(TemplateKind kind) { return kind == TemplateKind::name_aware ? "name-aware" : "uninformed"; }

TemplateKind parse_template_kind(std::string_view text) {
  if (text == "name-aware") return TemplateKind::name_aware;
  if (text == "uninformed") return TemplateKind::uninformed;
  throw ConfigError("unknown template kind '" + std::string(text) + "' (name-aware, uninformed)");
}

void RefusalTemplateSet::validate() const {
  if (templates.empty()) throw ConfigError("template set is empty");
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const std::size_t n = count_occurrences(templates[i], kNamePlaceholder);
    if (kind == TemplateKind::name_aware && n != 1)
      throw ConfigError("name-aware template " + std::to_string(i + 1) + " must contain [NAME] exactly once: '" +
                        templates[i] + "'");
    if (kind == TemplateKind::uninformed && n != 0)
      throw ConfigError("uninformed template " + std::to_string(i + 1) + " must not contain [NAME]: '" +
                        templates[i] + "'");
  }
}

RefusalTemplateSet RefusalTemplateSet::name_aware_defaults() {
  RefusalTemplateSet set;
  set.kind = TemplateKind::name_aware;
  set.templates.assign(std::begin(kNameAwareTemplates), std::end(kNameAwareTemplates));
  return set;
}

RefusalTemplateSet RefusalTemplateSet::uninformed_defaults() {
  RefusalTemplateSet set;
  set.kind = TemplateKind::uninformed;
  for (const char* open : kUninformedOpeners)
    for (const char* close : kUninformedClosers) set.templates.push_back(std::string(open) + close);
  return set;
}

RefusalTemplateSet RefusalTemplateSet::parse(const std::string& text, TemplateKind kind) {
  RefusalTemplateSet set;
  set.kind = kind;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    set.templates.push_back(line);
  }
  set.validate();
  return set;
}

RefusalTemplateSet RefusalTemplateSet::load(const std::string& path, TemplateKind kind) {
  try {
    return parse(read_file(path), kind);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string instantiate_refusal(const RefusalTemplateSet& set, const std::string& name, Rng& rng) {
  if (set.templates.empty()) throw ConfigError("instantiate_refusal: empty template set");
  std::string t = set.templates[rng.uniform_index(set.templates.size())];
  if (set.kind == TemplateKind::uninformed) return t;
  const auto pos = t.find(kNamePlaceholder);
  if (pos == std::string::npos) throw ConfigError("name-aware template lacks [NAME]: '" + t + "'");
  return t.replace(pos, kNamePlaceholder.size(), name);
}

std::string substitute_name(const std::string& question, const std::string& donor_name,
                            const std::string& target_name) {
  if (donor_name.empty()) throw ValidationError("substitute_name: empty donor name");
  if (question.find(donor_name) == std::string::npos)
    throw ValidationError("substitute_name: '" + donor_name + "' does not occur in '" + question + "'");
  std::string out;
  std::size_t start = 0;
  for (auto pos = question.find(donor_name); pos != std::string::npos; pos = question.find(donor_name, start)) {
    out.append(question, start, pos - start);
    out += target_name;
    start = pos + donor_name.size();
  }
  out.append(question, start, std::string::npos);
  return out;
}

std::string to_string(Side side) { return side == Side::forget ? "forget" : "retain"; }

Side parse_side(std::string_view text) {
  if (text == "forget") return Side::forget;
  if (text == "retain") return Side::retain;
  throw ParseError(0, "unknown side '" + std::string(text) + "'");
}

std::vector<AugmentedExample> plan_augmentation(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                                const RefusalTemplateSet& templates,
                                                std::optional<std::size_t> per_person, std::uint64_t seed) {
  if (templates.kind != TemplateKind::name_aware) throw ConfigError("augmentation needs name-aware templates");
  templates.validate();
  std::vector<std::string> members(split.forget_names.begin(), split.forget_names.end());
  members.insert(members.end(), split.retain_names.begin(), split.retain_names.end());
  std::sort(members.begin(), members.end());
  if (members.size() < 2) throw ValidationError("augmentation needs at least two individuals (no donors exist)");

  const auto by_name = index_corpus(corpus);
  std::map<std::string, std::vector<std::size_t>> train;
  for (const auto& name : members) train[name] = train_indices(split, lookup(by_name, name));

  std::vector<AugmentedExample> out;
  for (const auto& target : members) {
    const PersonRecord& rec = lookup(by_name, target);
    const std::size_t want = per_person.value_or(train[target].size());
    if (want == 0) continue;

    std::set<std::string> own;
    for (const auto& qa : rec.qa_pairs) own.insert(qa.question);

    std::vector<std::pair<std::string, std::string>> pool;  // donor, substituted question
    for (const auto& donor : members) {
      if (donor == target || target.find(donor) != std::string::npos) continue;
      const PersonRecord& d = lookup(by_name, donor);
      for (std::size_t i : train[donor]) {
        std::string q = substitute_name(d.qa_pairs[i].question, donor, target);
        if (own.count(q)) continue;
        pool.emplace_back(donor, std::move(q));
      }
    }
    if (pool.empty()) throw ValidationError("no usable donor questions for '" + target + "'");

    Rng rng(derive_seed(seed, "cda:" + target));
    rng.shuffle(pool);
    std::vector<std::size_t> picks;
    for (std::size_t k = 0; k < want; ++k) picks.push_back(k < pool.size() ? k : rng.uniform_index(pool.size()));

    const bool forget_side = split.is_forget(target);
    for (std::size_t k : picks) {
      AugmentedExample ex;
      ex.target_name = target;
      ex.donor_name = pool[k].first;
      ex.question = pool[k].second;
      ex.side = forget_side ? Side::forget : Side::retain;
      ex.provenance = forget_side ? Provenance::cda_forget_refusal : Provenance::cda_retain_selflabel;
      if (forget_side) ex.answer = instantiate_refusal(templates, target, rng);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

void label_retain_side(std::vector<AugmentedExample>& examples, const Model& model_o) {
  for (auto& ex : examples) {
    if (ex.side != Side::retain) continue;
    try {
      ex.answer = generate(model_o, ex.question);
    } catch (const BackendError& e) {
      throw BackendError("self-labeling '" + ex.question + "' for " + ex.target_name + ": " + e.what());
    }
  }
}

std::vector<AugmentedExample> augment(const SplitAssignment& split, const std::vector<PersonRecord>& corpus,
                                      const Model& model_o, const RefusalTemplateSet& templates,
                                      std::optional<std::size_t> per_person, std::uint64_t seed) {
  auto out = plan_augmentation(split, corpus, templates, per_person, seed);
  label_retain_side(out, model_o);
  return out;
}

std::string serialize_augmented(const std::vector<AugmentedExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    const json j = {{"target_name", ex.target_name}, {"donor_name", ex.donor_name},
                    {"question", ex.question},       {"answer", ex.answer},
                    {"side", to_string(ex.side)},    {"provenance", to_string(ex.provenance)}};
    out += j.dump() + '\n';
  }
  return out;
}

std::vector<AugmentedExample> parse_augmented(const std::string& text) {
  std::vector<AugmentedExample> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AugmentedExample ex;
      ex.target_name = j.at("target_name").get<std::string>();
      ex.donor_name = j.at("donor_name").get<std::string>();
      ex.question = j.at("question").get<std::string>();
      ex.answer = j.at("answer").get<std::string>();
      ex.side = parse_side(j.at("side").get<std::string>());
      ex.provenance = parse_provenance(j.at("provenance").get<std::string>());
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const ParseError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

void save_augmented(const std::string& path, const std::vector<AugmentedExample>& examples) {
  write_file(path, serialize_augmented(examples));
}

std::vector<AugmentedExample> load_augmented(const std::string& path) { return parse_augmented(read_file(path)); }

TrainingData build_training_data(ForgetLoss loss, const SplitAssignment& split,
                                 const std::vector<PersonRecord>& corpus,
                                 const std::vector<AugmentedExample>& augmented,
                                 const RefusalTemplateSet& name_aware, const RefusalTemplateSet& uninformed,
                                 std::uint64_t seed) {
  const auto by_name = index_corpus(corpus);
  TrainingData data;
  Rng rng(derive_seed(seed, "relabels"));
  for (const auto& name : split.forget_names) {
    const PersonRecord& r = lookup(by_name, name);
    for (std::size_t i : train_indices(split, r)) {
      const auto& qa = r.qa_pairs[i];
      ForgetExample ex{qa.question, qa.gold_answer, qa.gold_answer, name, Provenance::original_gold};
      if (loss == ForgetLoss::RGD || loss == ForgetLoss::RDPO) {
        ex.target = instantiate_refusal(uninformed, name, rng);
        ex.provenance = Provenance::original_uninformed;
      } else if (loss == ForgetLoss::NAUF) {
        ex.target = instantiate_refusal(name_aware, name, rng);
        ex.provenance = Provenance::original_refusal;
      }
      data.forget.push_back(std::move(ex));
    }
  }
  for (const auto& name : split.retain_names) {
    const PersonRecord& r = lookup(by_name, name);
    for (std::size_t i : train_indices(split, r))
      data.retain.push_back({r.qa_pairs[i].question, r.qa_pairs[i].gold_answer, name, Provenance::original_retain});
  }
  if (loss == ForgetLoss::NAUF) {
    for (const auto& ex : augmented) {
      if (ex.side == Side::forget) {
        if (!split.is_forget(ex.target_name))
          throw ValidationError("augmented forget example targets non-forget individual '" + ex.target_name + "'");
        data.forget.push_back({ex.question, ex.answer, "", ex.target_name, ex.provenance});
      } else {
        if (!split.is_retain(ex.target_name))
          throw ValidationError("augmented retain example targets non-retain individual '" + ex.target_name + "'");
        if (ex.answer.empty()) throw ValidationError("augmented retain example lacks a self-label: '" + ex.question + "'");
        data.retain.push_back({ex.question, ex.answer, ex.target_name, ex.provenance});
      }
    }
  }
  return data;
}

}  // namespace unlearn
