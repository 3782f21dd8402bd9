#include "pncoder/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"

namespace pncoder {

namespace {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string env_or_empty(const char *name) {
  const char *value = std::getenv(name);
  return value ? std::string(value) : std::string();
}

void expect_string(const nlohmann::json &value, const std::string &key) {
  if (!value.is_string()) {
    throw ConfigError("config key \"" + key + "\" must be a string");
  }
}

int read_positive_int(const nlohmann::json &value, const std::string &key) {
  if (!value.is_number_integer() || value.get<long long>() <= 0) {
    throw ConfigError("config key \"" + key + "\" must be a positive integer");
  }
  return static_cast<int>(value.get<long long>());
}

int read_nonnegative_int(const nlohmann::json &value, const std::string &key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config key \"" + key + "\" must be a non-negative integer");
  }
  return static_cast<int>(value.get<long long>());
}

void apply_provider_section(AppConfig &config, const nlohmann::json &section) {
  for (const auto &[key, value] : section.items()) {
    if (key == "base_url") {
      expect_string(value, "provider.base_url");
      config.base_url = value.get<std::string>();
    } else if (key == "completions_path") {
      expect_string(value, "provider.completions_path");
      config.completions_path = value.get<std::string>();
    } else if (key == "api_key") {
      expect_string(value, "provider.api_key");
      config.api_key = value.get<std::string>();
    } else if (key == "api_key_env") {
      expect_string(value, "provider.api_key_env");
      config.api_key_env = value.get<std::string>();
    } else if (key == "timeout_ms") {
      config.timeout_ms = read_positive_int(value, "provider.timeout_ms");
    } else if (key == "max_transport_retries") {
      config.max_transport_retries =
          read_nonnegative_int(value, "provider.max_transport_retries");
    } else if (key == "sampling") {
      if (!value.is_object()) {
        throw ConfigError("config key \"provider.sampling\" must be an object");
      }
      for (const auto &[name, number] : value.items()) {
        if (!number.is_number()) {
          throw ConfigError("sampling parameter \"" + name + "\" must be a number");
        }
        config.sampling[name] = number.get<double>();
      }
    } else {
      throw ConfigError("unknown config key \"provider." + key + "\"");
    }
  }
}

void apply_annotate_section(AppConfig &config, const nlohmann::json &section) {
  for (const auto &[key, value] : section.items()) {
    if (key == "runs") {
      config.runs = read_positive_int(value, "annotate.runs");
    } else if (key == "max_retries_per_stage") {
      config.max_retries_per_stage =
          read_nonnegative_int(value, "annotate.max_retries_per_stage");
    } else if (key == "concurrency") {
      config.concurrency = read_positive_int(value, "annotate.concurrency");
    } else {
      throw ConfigError("unknown config key \"annotate." + key + "\"");
    }
  }
}

} // namespace

ChainConfig AppConfig::chain_config() const {
  ChainConfig chain;
  chain.model_name = model;
  chain.runs = runs;
  chain.max_retries_per_stage = max_retries_per_stage;
  chain.request_timeout = std::chrono::milliseconds(timeout_ms);
  chain.concurrency_limit = concurrency;
  chain.validate();
  return chain;
}

HttpProviderConfig AppConfig::provider_config() const {
  if (base_url.empty()) {
    throw ConfigError("no provider endpoint configured; set provider.base_url "
                      "in the config file or PNCODER_BASE_URL");
  }
  if (api_key.empty()) {
    throw ConfigError("no API key configured; set " + api_key_env +
                      " in the environment or provider.api_key in the config file");
  }
  HttpProviderConfig provider;
  provider.base_url = base_url;
  provider.completions_path = completions_path;
  provider.api_key = api_key;
  provider.timeout = std::chrono::milliseconds(timeout_ms);
  provider.max_transport_retries = max_transport_retries;
  provider.sampling_params = sampling;
  provider.validate();
  return provider;
}

void apply_env(AppConfig &config) {
  if (std::string value = env_or_empty("PNCODER_MODEL"); !value.empty()) {
    config.model = value;
  }
  if (std::string value = env_or_empty("PNCODER_BASE_URL"); !value.empty()) {
    config.base_url = value;
  }
}

void apply_config_file(AppConfig &config, const std::filesystem::path &path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config file " + path.string() + " must contain a JSON object");
  }
  for (const auto &[key, value] : root.items()) {
    if (key == "model") {
      expect_string(value, "model");
      config.model = value.get<std::string>();
    } else if (key == "provider") {
      if (!value.is_object()) {
        throw ConfigError("config key \"provider\" must be an object");
      }
      apply_provider_section(config, value);
    } else if (key == "annotate") {
      if (!value.is_object()) {
        throw ConfigError("config key \"annotate\" must be an object");
      }
      apply_annotate_section(config, value);
    } else {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
  }
}

AppConfig load_app_config(const std::filesystem::path &explicit_path) {
  AppConfig config;
  apply_env(config);
  if (!explicit_path.empty()) {
    apply_config_file(config, explicit_path);
  } else if (std::filesystem::exists("pncoder.json")) {
    apply_config_file(config, "pncoder.json");
  }
  if (config.api_key.empty()) {
    config.api_key = env_or_empty(config.api_key_env.c_str());
  }
  return config;
}

} // namespace pncoder
