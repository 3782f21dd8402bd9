#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "pncoder/provider.hpp"

namespace pncoder {

using nlohmann::json;
using nlohmann::ordered_json;

void HttpProviderConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError("provider base_url must start with http:// or https://");
  }
  if (completions_path.empty() || completions_path.front() != '/') {
    throw ConfigError("provider completions_path must start with '/'");
  }
  if (max_transport_retries < 0) {
    throw ConfigError("provider max_transport_retries must be >= 0");
  }
  if (timeout.count() <= 0) {
    throw ConfigError("provider timeout must be positive");
  }
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
  config_.validate();
}

namespace {

std::string request_body(const ProviderRequest &request, const HttpProviderConfig &config) {
  ordered_json body;
  body["model"] = request.model_name;
  body["messages"] = ordered_json::array({
      ordered_json{{"role", "system"}, {"content", request.system_prompt}},
      ordered_json{{"role", "user"}, {"content", request.user_prompt}},
  });
  for (const auto &[key, value] : config.sampling_params) {
    body[key] = value;
  }
  return body.dump();
}

ProviderResponse parse_completion(const std::string &body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProviderError(ProviderErrorKind::BadResponse,
                        "provider returned a non-JSON completion body");
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ProviderError(ProviderErrorKind::BadResponse,
                        "provider completion body has no choices");
  }
  const json &choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw ProviderError(ProviderErrorKind::BadResponse,
                        "provider completion choice has no message content");
  }
  ProviderResponse out;
  out.content = choice["message"]["content"].get<std::string>();
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
    out.finish_reason = choice["finish_reason"].get<std::string>();
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    const json &usage = j["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_integer()) {
      out.prompt_tokens = usage["prompt_tokens"].get<long long>();
    }
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_integer()) {
      out.completion_tokens = usage["completion_tokens"].get<long long>();
    }
  }
  return out;
}

std::chrono::milliseconds backoff_delay(const HttpProviderConfig &config, int attempt,
                                        std::mt19937_64 &rng,
                                        std::optional<long long> retry_after_s) {
  if (retry_after_s) {
    // Honor the server's wish, bounded so a hostile header cannot stall us.
    long long capped = std::clamp<long long>(*retry_after_s, 0, 60);
    return std::chrono::milliseconds(capped * 1000);
  }
  auto base = static_cast<double>(config.backoff_base.count());
  double exp = base * static_cast<double>(1LL << std::min(attempt, 20));
  double capped = std::min(exp, static_cast<double>(config.backoff_cap.count()));
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  return std::chrono::milliseconds(static_cast<long long>(capped * jitter(rng)));
}

} // namespace

ProviderResponse HttpChatProvider::complete(const ProviderRequest &request) {
  if (request.system_prompt.empty() || request.user_prompt.empty()) {
    throw ValidationError("provider request prompts must be non-empty");
  }

  std::string body = request_body(request, config_);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    if (config_.auth_header == "Authorization") {
      headers.emplace(config_.auth_header, "Bearer " + config_.api_key);
    } else {
      headers.emplace(config_.auth_header, config_.api_key);
    }
  }

  std::mt19937_64 rng(config_.jitter_seed != 0 ? config_.jitter_seed : std::random_device{}());

  std::string last_error = "no attempt made";
  ProviderErrorKind last_kind = ProviderErrorKind::Transport;
  int last_status = 0;
  std::optional<long long> retry_after_s;

  for (int attempt = 0; attempt <= config_.max_transport_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff_delay(config_, attempt - 1, rng, retry_after_s));
      retry_after_s.reset();
    }

    // One client per call keeps complete() safe to run from many threads.
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    httplib::Result res =
        client.Post(config_.completions_path, headers, body, "application/json");
    if (!res) {
      last_kind = ProviderErrorKind::Transport;
      last_status = 0;
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }

    int status = res->status;
    if (status == 401 || status == 403) {
      // Auth errors never resolve by retrying; the key itself is not echoed.
      throw ProviderError(ProviderErrorKind::Auth,
                          "provider rejected credentials (HTTP " + std::to_string(status) + ")",
                          status);
    }
    if (status == 429) {
      last_kind = ProviderErrorKind::RateLimited;
      last_status = status;
      last_error = "rate limited (HTTP 429)";
      std::string ra = res->get_header_value("Retry-After");
      if (!ra.empty()) {
        try {
          retry_after_s = std::stoll(ra);
        } catch (const std::exception &) {
          retry_after_s.reset();
        }
      }
      continue;
    }
    if (status >= 500) {
      last_kind = ProviderErrorKind::Transport;
      last_status = status;
      last_error = "server error (HTTP " + std::to_string(status) + ")";
      continue;
    }
    if (status != 200) {
      throw ProviderError(ProviderErrorKind::BadResponse,
                          "provider returned HTTP " + std::to_string(status), status);
    }
    return parse_completion(res->body);
  }

  throw ProviderError(last_kind,
                      last_error + " after " +
                          std::to_string(config_.max_transport_retries + 1) + " attempt(s)",
                      last_status);
}

std::string HttpChatProvider::describe() const {
  return config_.base_url + config_.completions_path;
}

} // namespace pncoder
