#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "pncoder/errors.hpp"

namespace pncoder {

/// One chat-completion call: a system message and a user message.
struct ProviderRequest {
  std::string system_prompt;
  std::string user_prompt;
  std::string model_name;
};

struct ProviderResponse {
  std::string content; // assistant text, verbatim
  std::string finish_reason;
  std::optional<long long> prompt_tokens;
  std::optional<long long> completion_tokens;
};

enum class ProviderErrorKind { Transport, Auth, RateLimited, BadResponse };

class ProviderError : public Error {
public:
  ProviderError(ProviderErrorKind kind, const std::string &message, int http_status = 0)
      : Error(message), kind_(kind), http_status_(http_status) {}

  ProviderErrorKind kind() const { return kind_; }
  int http_status() const { return http_status_; }

private:
  ProviderErrorKind kind_;
  int http_status_;
};

/// A chat-completion backend. Implementations must be safe to call from
/// multiple threads at once; each call is independent (no shared
/// conversational state).
class ChatProvider {
public:
  virtual ~ChatProvider() = default;
  virtual ProviderResponse complete(const ProviderRequest &request) = 0;
  virtual std::string describe() const = 0;
};

/// Connection settings for an OpenAI-style chat-completion endpoint.
/// The API key arrives via config file or environment variable only; it is
/// never echoed into logs, audit records, or error messages.
struct HttpProviderConfig {
  std::string base_url;                               // e.g. "https://api.example.com"
  std::string completions_path = "/v1/chat/completions";
  std::string api_key;
  std::string auth_header = "Authorization";          // sent as "<auth_header>: Bearer <key>"
  std::chrono::milliseconds timeout{60000};
  int max_transport_retries = 3;                      // 429/5xx/connect failures
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{8000};
  std::uint64_t jitter_seed = 0;                      // 0 = seed from entropy
  std::map<std::string, double> sampling_params;      // temperature etc., passed through opaquely

  void validate() const; // non-empty base_url with http(s) scheme, sane retry budget
};

/// Talks to a chat-completion endpoint over HTTP(S). Retries transport
/// failures and rate limits with capped exponential backoff plus jitter,
/// honoring Retry-After; auth failures are not retried. These transport
/// retries are separate from the parse retries in run_chain.
class HttpChatProvider : public ChatProvider {
public:
  explicit HttpChatProvider(HttpProviderConfig config);

  ProviderResponse complete(const ProviderRequest &request) override;
  std::string describe() const override;

  const HttpProviderConfig &config() const { return config_; }

private:
  HttpProviderConfig config_;
};

/// Deterministic offline provider: annotates each sentence by fixed keyword
/// rules (documented in the README) and emits well-formed stage JSON. Assumes
/// the bundled 14-code scheme; throws UnrecognizedPromptError when the user
/// prompt was not produced by render_user_prompt.
class MockChatProvider : public ChatProvider {
public:
  ProviderResponse complete(const ProviderRequest &request) override;
  std::string describe() const override;
};

/// Prompt handed to the mock that does not match any stage template.
class UnrecognizedPromptError : public Error {
public:
  using Error::Error;
};

} // namespace pncoder
