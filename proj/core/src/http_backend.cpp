#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "qe/judge.hpp"

namespace qe {

namespace {

constexpr std::size_t kExcerptLength = 200;

}  // namespace

HttpBackend::HttpBackend(std::string endpoint_url, std::chrono::milliseconds timeout) : timeout_(timeout) {
  static const std::regex kUrl(R"(^(https?://[^/?#]+)(/[^#]*)?$)", std::regex::icase);
  std::smatch match;
  if (!std::regex_match(endpoint_url, match, kUrl)) {
    throw ConfigError("endpoint URL \"" + endpoint_url + "\" is not an http(s) URL");
  }
  scheme_host_port_ = match[1].str();
  path_ = match[2].matched ? match[2].str() : "/";
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  const nlohmann::json body = {{"model", request.model_name},
                               {"prompt", request.prompt},
                               {"temperature", request.temperature},
                               {"max_tokens", request.max_new_tokens}};

  // Clients are not shared between threads.
  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  auto result = client.Post(path_, body.dump(), "application/json");
  if (!result) {
    throw TransportError("POST " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendError(result->status, result->body.substr(0, kExcerptLength));
  }
  try {
    const auto reply = nlohmann::json::parse(result->body);
    return reply.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError(result->status, "response lacks a string \"text\" field: " + result->body.substr(0, kExcerptLength));
  }
}

}  // namespace qe
