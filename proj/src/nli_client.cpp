#include "unlearn/nli_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "unlearn/common.hpp"

namespace unlearn {

NliClient make_http_nli_client(const std::string& url, double timeout_seconds) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("NLI url needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  return [base, path, timeout_seconds](const NliRequest& req) -> Label {
    httplib::Client client(base);
    const auto secs = static_cast<time_t>(timeout_seconds);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    const nlohmann::json body = {{"premise", req.premise}, {"hypothesis", req.hypothesis}, {"question", req.question}};
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw JudgeUnavailableError("NLI service at " + base + path + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw JudgeUnavailableError("NLI service returned HTTP " + std::to_string(res->status));
    try {
      return parse_label(nlohmann::json::parse(res->body).at("label").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw JudgeUnavailableError(std::string("NLI service sent an unreadable reply: ") + e.what());
    } catch (const ParseError& e) {
      throw JudgeUnavailableError(std::string("NLI service sent an unknown label: ") + e.what());
    }
  };
}

std::unique_ptr<Judge> make_judge(const std::string& spec) {
  if (spec == "exact" || spec == "exact-match") return std::make_unique<ExactMatchJudge>();
  if (spec == "nli") {
    const char* url = std::getenv(kNliUrlEnv);
    if (!url || !*url) throw ConfigError(std::string("judge 'nli' needs ") + kNliUrlEnv + " to be set");
    return std::make_unique<NliJudge>(make_http_nli_client(url));
  }
  if (spec.rfind("nli:", 0) == 0) return std::make_unique<NliJudge>(make_http_nli_client(spec.substr(4)));
  throw ConfigError("unknown judge '" + spec + "' (expected exact, nli or nli:<url>)");
}

}  // namespace unlearn
