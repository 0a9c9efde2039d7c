// HTTP binding for an external NLI judge.
//
// POST <url> with {"premise", "hypothesis", "question"} and expect
// {"label": "entailment" | "neutral" | "contradiction"}.
#pragma once

#include <memory>
#include <string>

#include "unlearn/judge.hpp"

namespace unlearn {

inline constexpr const char* kNliUrlEnv = "UNLEARN_NLI_URL";

/// `url` is "http://host:port/path". Connection failures and non-200
/// responses raise JudgeUnavailableError.
NliClient make_http_nli_client(const std::string& url, double timeout_seconds = 30.0);

/// "exact" -> ExactMatchJudge; "nli" -> HTTP judge at $UNLEARN_NLI_URL;
/// "nli:<url>" -> HTTP judge at <url>.
std::unique_ptr<Judge> make_judge(const std::string& spec);

}  // namespace unlearn
