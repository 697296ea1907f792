#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include <fmt/format.h>

#include "qxr/llm.hpp"

namespace qxr {

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport final : public ChatTransport {
 public:
  HttpTransport(const LlmConfig& config, std::string key)
      : url_(split_url(config.endpoint)), timeout_(config.timeout), key_(std::move(key)) {}

  std::string complete(const ChatRequest& request) override {
    // A client per request keeps concurrent callers independent.
    httplib::Client client(url_.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    client.set_bearer_token_auth(key_);

    const nlohmann::json body = {
        {"model", request.model},
        {"temperature", request.temperature},
        {"messages", {{{"role", "user"}, {"content", request.prompt}}}},
    };
    auto res = client.Post(url_.path, body.dump(), "application/json");
    if (!res) throw TransportError(fmt::format("request failed: {}", httplib::to_string(res.error())));
    if (res->status < 200 || res->status >= 300) {
      throw TransportError(fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200)));
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(fmt::format("unexpected response body: {}", e.what()));
    }
  }

 private:
  Url url_;
  std::chrono::seconds timeout_;
  std::string key_;
};

}  // namespace

std::shared_ptr<ChatTransport> make_http_transport(const LlmConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw LlmConfigError(
        fmt::format("environment variable {} is not set; it must hold the API key", config.api_key_env));
  }
  return std::make_shared<HttpTransport>(config, key);
}

}  // namespace qxr
