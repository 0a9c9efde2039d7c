// Command-line surface. Everything here is callable in-process so tests can
// drive the same code paths as the `unlearn` binary.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unlearn/trainer.hpp"

namespace unlearn::cli {

/// One unlearning run, as read from a config file or a manifest.
struct RunSpec {
  std::string corpus;
  std::string split;
  std::string model;
  std::string augmented;  // optional
  std::string name_aware_templates;  // optional, defaults to the shipped set
  std::string uninformed_templates;  // optional
  std::string output_dir;
  TrainConfig train;
};

/// Reads a sectioned key = value file ([data], [loss], [trainer], [nauf],
/// [output]). Relative paths resolve against the file's directory. Unknown
/// sections or keys are errors.
RunSpec parse_run_config(const std::string& path);

nlohmann::json spec_to_json(const RunSpec& spec);
RunSpec spec_from_json(const nlohmann::json& j);

/// Trains per `spec`, writing epoch-<n>.ckpt files, trace.tsv and
/// manifest.json into spec.output_dir. Returns the manifest.
nlohmann::json execute_run(const RunSpec& spec, const std::string& config_path);

/// Re-runs a manifest into `scratch_dir` and lists every output whose bytes
/// differ from the recorded run (empty means identical).
std::vector<std::string> replay_manifest(const std::string& manifest_path, const std::string& scratch_dir);

/// Entry point shared by the binary and the tests. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unlearn::cli
