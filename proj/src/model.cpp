#include "unlearn/model.hpp"

#include <fstream>
#include <map>
#include <mutex>

#include "unlearn/checkpoint.hpp"
#include "unlearn/common.hpp"
#include "unlearn/neural_model.hpp"
#include "unlearn/tabular_model.hpp"

namespace unlearn {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ModelLoader>& registry() {
  static std::map<std::string, ModelLoader> loaders = {
      {TabularModel::kKind, [](const Checkpoint& c) -> ModelPtr { return TabularModel::from_checkpoint(c); }},
      {TinyNeuralModel::kKind, [](const Checkpoint& c) -> ModelPtr { return TinyNeuralModel::from_checkpoint(c); }},
  };
  return loaders;
}

}  // namespace

double answer_log_likelihood(const Model& model, std::string_view question, std::string_view answer) {
  return model.log_likelihood(question, answer);
}

std::string generate(const Model& model, std::string_view question) {
  if (!model.capabilities().generation) throw BackendError(model.kind() + " backend cannot generate");
  return model.generate(question);
}

FrozenModel clone_frozen(const Model& model) { return FrozenModel(model.clone()); }

void register_model_loader(const std::string& kind, ModelLoader loader) {
  std::lock_guard lock(registry_mutex());
  registry()[kind] = std::move(loader);
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model: " + path);
  model.save(out);
}

ModelPtr load_model(std::istream& in) {
  const Checkpoint ckpt = read_checkpoint(in);
  ModelLoader loader;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(ckpt.kind);
    if (it == registry().end()) throw BackendError("no loader registered for backend kind '" + ckpt.kind + "'");
    loader = it->second;
  }
  return loader(ckpt);
}

ModelPtr load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model: " + path);
  return load_model(in);
}

}  // namespace unlearn
