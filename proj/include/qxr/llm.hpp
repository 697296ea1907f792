#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qxr/fact.hpp"
#include "qxr/oracle.hpp"

namespace qxr {

class LlmConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Network-level failure (connection, timeout, non-2xx status, malformed envelope).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model kept answering without a usable verdict or answer list.
class LlmParseError : public std::runtime_error {
 public:
  LlmParseError(const std::string& what, std::string last_response)
      : std::runtime_error(what), last_response_(std::move(last_response)) {}
  const std::string& last_response() const { return last_response_; }

 private:
  std::string last_response_;
};

struct LlmConfig {
  std::string endpoint;  ///< full URL of an OpenAI-compatible chat completions route
  std::string model;
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::seconds timeout{60};
  std::string api_key_env = "QXR_LLM_API_KEY";
  std::optional<std::filesystem::path> subset_prompt;  ///< overrides the built-in template
  std::optional<std::filesystem::path> direct_prompt;
};

/// Parses a config object. Unknown keys and any inline credential field are rejected.
LlmConfig llm_config_from_json(const nlohmann::json& j);
LlmConfig load_llm_config(const std::filesystem::path& path);

/// Built-in prompt templates (identical to the files under prompts/).
std::string_view subset_consistency_template();
std::string_view direct_zero_shot_template();

/// "1. first\n2. second", one numbered line per statement.
std::string numbered_block(std::span<const std::string> lines);

/// Fills {bg} and {facts_block}. An empty background renders {bg} as nothing.
std::string render_subset_prompt(std::string_view tmpl, std::span<const std::string> background,
                                 std::span<const std::string> statements);
std::string render_direct_prompt(std::string_view tmpl, std::span<const std::string> facts);

/// Case-insensitive token search; INCONSISTENT is tested first since it contains CONSISTENT.
std::optional<Verdict> parse_verdict(std::string_view response);

/// Contents of the first <answer>...</answer> tag parsed as a Python list of string literals.
std::optional<std::vector<std::string>> parse_answer_list(std::string_view response);

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::string prompt;
};

/// One chat completion round trip. Throws TransportError.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// HTTP(S) transport for OpenAI-compatible endpoints. Reads the bearer token from the
/// environment variable named in the config at construction; throws LlmConfigError if unset.
std::shared_ptr<ChatTransport> make_http_transport(const LlmConfig& config);

/// Sends prompts with the retry policy: up to max_retries + 1 attempts per request, retrying
/// transport failures and unusable responses alike.
class LlmClient {
 public:
  LlmClient(LlmConfig config, std::shared_ptr<ChatTransport> transport);

  Verdict judge(std::span<const std::string> background, std::span<const std::string> statements);
  std::vector<std::string> consistent_subset(std::span<const std::string> facts);

  const LlmConfig& config() const { return config_; }

 private:
  template <typename T, typename Parse>
  T ask(const std::string& prompt, Parse parse, const char* expectation);

  LlmConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::string subset_template_;
  std::string direct_template_;
};

/// Subset-consistency oracle backed by an LLM judge over a dense fact pool.
class LlmOracle final : public Oracle {
 public:
  LlmOracle(std::shared_ptr<LlmClient> client, std::span<const Fact> pool);

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  std::shared_ptr<LlmClient> client_;
  std::span<const Fact> pool_;
};

}  // namespace qxr
