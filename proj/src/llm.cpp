#include "qxr/llm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qxr {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LlmConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Minimal reader for a Python list of str literals: ['a', "b", ...].
class ListReader {
 public:
  explicit ListReader(std::string_view s) : s_(s) {}

  std::optional<std::vector<std::string>> read() {
    std::vector<std::string> out;
    skip_space();
    if (!eat('[')) return std::nullopt;
    skip_space();
    if (eat(']')) return finish(out);
    while (true) {
      auto item = string_literal();
      if (!item) return std::nullopt;
      out.push_back(std::move(*item));
      skip_space();
      if (eat(']')) return finish(out);
      if (!eat(',')) return std::nullopt;
      skip_space();
      if (eat(']')) return finish(out);
    }
  }

 private:
  std::optional<std::vector<std::string>> finish(std::vector<std::string>& out) {
    skip_space();
    if (pos_ != s_.size()) return std::nullopt;
    return std::move(out);
  }

  std::optional<std::string> string_literal() {
    if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) return std::nullopt;
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == quote) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) return std::nullopt;
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '\\': case '\'': case '"': out.push_back(e); break;
        default: out.push_back('\\'); out.push_back(e); break;
      }
    }
    return std::nullopt;
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

LlmConfig llm_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw LlmConfigError("LLM config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    const std::string k = upper(key);
    const bool secret = k.find("KEY") != std::string::npos || k.find("TOKEN") != std::string::npos ||
                        k.find("SECRET") != std::string::npos || k.find("PASSWORD") != std::string::npos;
    if (secret && key != "api_key_env") {
      throw LlmConfigError(fmt::format(
          "'{}' is not allowed in the config; put the key in an environment variable and name "
          "it with api_key_env",
          key));
    }
    static const std::vector<std::string> known = {"endpoint",    "model",        "temperature",
                                                   "max_retries", "timeout",      "api_key_env",
                                                   "subset_prompt", "direct_prompt"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw LlmConfigError(fmt::format("unknown LLM config key '{}'", key));
    }
  }
  LlmConfig c;
  try {
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.temperature = j.value("temperature", c.temperature);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.timeout = std::chrono::seconds(j.value("timeout", static_cast<int>(c.timeout.count())));
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    if (j.contains("subset_prompt")) c.subset_prompt = j["subset_prompt"].get<std::string>();
    if (j.contains("direct_prompt")) c.direct_prompt = j["direct_prompt"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmConfigError(fmt::format("bad LLM config: {}", e.what()));
  }
  if (c.max_retries < 0) throw LlmConfigError("max_retries must be non-negative");
  if (c.timeout.count() <= 0) throw LlmConfigError("timeout must be positive");
  if (c.endpoint.rfind("http://", 0) != 0 && c.endpoint.rfind("https://", 0) != 0) {
    throw LlmConfigError(fmt::format("endpoint must be an http(s) URL, got '{}'", c.endpoint));
  }
  return c;
}

LlmConfig load_llm_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LlmConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  LlmConfig c = llm_config_from_json(j);
  // Relative prompt paths are resolved against the config file's directory.
  for (auto* p : {&c.subset_prompt, &c.direct_prompt}) {
    if (*p && p->value().is_relative()) *p = path.parent_path() / p->value();
  }
  return c;
}

std::string numbered_block(std::span<const std::string> lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("{}. {}", i + 1, lines[i]);
  }
  return out;
}

std::string render_subset_prompt(std::string_view tmpl, std::span<const std::string> background,
                                 std::span<const std::string> statements) {
  std::string bg;
  if (!background.empty()) bg = "Background (assumed true):\n" + numbered_block(background) + "\n\n";
  std::string out = replace_all(std::string(tmpl), "{facts_block}", numbered_block(statements));
  return replace_all(std::move(out), "{bg}", bg);
}

std::string render_direct_prompt(std::string_view tmpl, std::span<const std::string> facts) {
  return replace_all(std::string(tmpl), "{facts_block}", numbered_block(facts));
}

std::optional<Verdict> parse_verdict(std::string_view response) {
  const std::string u = upper(response);
  if (u.find("INCONSISTENT") != std::string::npos) return Verdict::Incons;
  if (u.find("CONSISTENT") != std::string::npos) return Verdict::Cons;
  return std::nullopt;
}

std::optional<std::vector<std::string>> parse_answer_list(std::string_view response) {
  const auto open = response.find("<answer>");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = open + std::string_view("<answer>").size();
  const auto close = response.find("</answer>", body);
  if (close == std::string_view::npos) return std::nullopt;
  return ListReader(response.substr(body, close - body)).read();
}

LlmClient::LlmClient(LlmConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) throw LlmConfigError("LLM client needs a transport");
  subset_template_ = config_.subset_prompt ? read_text(*config_.subset_prompt)
                                           : std::string(subset_consistency_template());
  direct_template_ = config_.direct_prompt ? read_text(*config_.direct_prompt)
                                           : std::string(direct_zero_shot_template());
}

template <typename T, typename Parse>
T LlmClient::ask(const std::string& prompt, Parse parse, const char* expectation) {
  const ChatRequest request{config_.model, config_.temperature, prompt};
  std::string last_response;
  std::string last_transport_error;
  bool any_response = false;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    try {
      last_response = transport_->complete(request);
      any_response = true;
    } catch (const TransportError& e) {
      last_transport_error = e.what();
      continue;
    }
    if (auto parsed = parse(last_response)) return std::move(*parsed);
  }
  const int attempts = config_.max_retries + 1;
  if (!any_response) {
    throw TransportError(
        fmt::format("no response after {} attempts: {}", attempts, last_transport_error));
  }
  throw LlmParseError(fmt::format("no {} in the response after {} attempts", expectation, attempts),
                      last_response);
}

Verdict LlmClient::judge(std::span<const std::string> background,
                         std::span<const std::string> statements) {
  return ask<Verdict>(render_subset_prompt(subset_template_, background, statements),
                      parse_verdict, "CONSISTENT/INCONSISTENT verdict");
}

std::vector<std::string> LlmClient::consistent_subset(std::span<const std::string> facts) {
  return ask<std::vector<std::string>>(render_direct_prompt(direct_template_, facts),
                                       parse_answer_list, "parsable <answer> list");
}

LlmOracle::LlmOracle(std::shared_ptr<LlmClient> client, std::span<const Fact> pool)
    : client_(std::move(client)), pool_(pool) {
  if (!client_) throw LlmConfigError("LLM oracle needs a client");
}

Verdict LlmOracle::do_query(std::span<const FactId> statements,
                            std::span<const FactId> background) {
  auto texts = [&](std::span<const FactId> ids) {
    IdSet sorted(ids.begin(), ids.end());
    normalize(sorted);
    std::vector<std::string> out;
    for (const Fact* f : gather(pool_, sorted)) out.push_back(f->text);
    return out;
  };
  const auto bg = texts(background);
  IdSet stmt(statements.begin(), statements.end());
  normalize(stmt);
  stmt = set_difference(stmt, query_set({}, background));
  return client_->judge(bg, texts(stmt));
}

}  // namespace qxr
