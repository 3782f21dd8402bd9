#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pncoder/prompting.hpp"
#include "pncoder/provider.hpp"

namespace pncoder {

/// Resolved tool settings. Sources, weakest to strongest: built-in defaults,
/// environment variables, config file, command-line flags (the CLI applies
/// flags on top of this struct). The API key is accepted from environment or
/// config file only, never from a flag, and is never logged or echoed.
struct AppConfig {
  std::string model;
  std::string base_url;
  std::string completions_path = "/v1/chat/completions";
  std::string api_key_env = "PNCODER_API_KEY";
  std::string api_key;
  int runs = 3;
  int max_retries_per_stage = 2;
  int concurrency = 4;
  int max_transport_retries = 3;
  long long timeout_ms = 60000;
  std::map<std::string, double> sampling;

  ChainConfig chain_config() const;

  /// Connection settings for the real provider; throws ConfigError when the
  /// endpoint or the API key is missing (annotate fails fast on this before
  /// writing any file).
  HttpProviderConfig provider_config() const;
};

/// Overlay from PNCODER_MODEL and PNCODER_BASE_URL. The API key itself is
/// read later, after the config file may have renamed api_key_env.
void apply_env(AppConfig &config);

/// Overlay from a JSON config file. Unknown keys are rejected so typos
/// surface instead of being silently ignored.
void apply_config_file(AppConfig &config, const std::filesystem::path &path);

/// Full precedence chain. An empty `explicit_path` means "use ./pncoder.json
/// when it exists, otherwise no file".
AppConfig load_app_config(const std::filesystem::path &explicit_path = {});

} // namespace pncoder
