#include <doctest.h>

#include <atomic>
#include <chrono>
#include <string>
#include <thread>

// Must match the provider translation unit so httplib types have one layout.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"
#include "pncoder/provider.hpp"

using namespace pncoder;

namespace {

/// Local chat-completion endpoint whose behavior is set per test.
class LocalServer {
public:
  LocalServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request &req, httplib::Response &res) {
      handler_(req, res, request_count_.fetch_add(1));
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  using Handler = std::function<void(const httplib::Request &, httplib::Response &, int)>;

  void set_handler(Handler h) { handler_ = std::move(h); }
  int port() const { return port_; }
  int requests() const { return request_count_.load(); }

  HttpProviderConfig config() const {
    HttpProviderConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.api_key = "sk-test-secret";
    c.timeout = std::chrono::milliseconds(5000);
    c.backoff_base = std::chrono::milliseconds(1);
    c.backoff_cap = std::chrono::milliseconds(4);
    c.jitter_seed = 7;
    return c;
  }

private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> request_count_{0};
  Handler handler_ = [](const httplib::Request &, httplib::Response &res, int) {
    res.status = 500;
  };
};

void respond_ok(httplib::Response &res, const std::string &content) {
  nlohmann::json body = {
      {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}},
                    {"finish_reason", "stop"}}}},
      {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 5}}},
  };
  res.set_content(body.dump(), "application/json");
}

ProviderRequest sample_request() {
  ProviderRequest req;
  req.system_prompt = "system text";
  req.user_prompt = "user text";
  req.model_name = "test-model";
  return req;
}

} // namespace

TEST_CASE("provider config is validated") {
  HttpProviderConfig c;
  CHECK_THROWS_AS(c.validate(), ConfigError); // no base_url
  c.base_url = "ftp://x";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.base_url = "http://x";
  c.completions_path = "nope";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.completions_path = "/v1/chat/completions";
  c.max_transport_retries = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.max_transport_retries = 0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("a successful completion round-trips content and usage") {
  LocalServer server;
  std::string seen_auth;
  std::string seen_body;
  server.set_handler([&](const httplib::Request &req, httplib::Response &res, int) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    respond_ok(res, "hello back");
  });

  auto cfg = server.config();
  cfg.sampling_params["temperature"] = 0.25;
  HttpChatProvider provider(cfg);
  ProviderResponse resp = provider.complete(sample_request());

  CHECK(resp.content == "hello back");
  CHECK(resp.finish_reason == "stop");
  CHECK(resp.prompt_tokens == 12);
  CHECK(resp.completion_tokens == 5);
  CHECK(seen_auth == "Bearer sk-test-secret");

  nlohmann::json body = nlohmann::json::parse(seen_body);
  CHECK(body["model"] == "test-model");
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "system text");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "user text");
  CHECK(body["temperature"] == doctest::Approx(0.25));
}

TEST_CASE("transient server errors are retried") {
  LocalServer server;
  server.set_handler([](const httplib::Request &, httplib::Response &res, int n) {
    if (n == 0) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    } else {
      respond_ok(res, "recovered");
    }
  });

  HttpChatProvider provider(server.config());
  ProviderResponse resp = provider.complete(sample_request());
  CHECK(resp.content == "recovered");
  CHECK(server.requests() == 2);
}

TEST_CASE("rate limits honor Retry-After and then succeed") {
  LocalServer server;
  server.set_handler([](const httplib::Request &, httplib::Response &res, int n) {
    if (n == 0) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      res.set_content("slow down", "text/plain");
    } else {
      respond_ok(res, "after the wait");
    }
  });

  HttpChatProvider provider(server.config());
  ProviderResponse resp = provider.complete(sample_request());
  CHECK(resp.content == "after the wait");
  CHECK(server.requests() == 2);
}

TEST_CASE("retry budget exhaustion surfaces the last failure") {
  LocalServer server;
  server.set_handler([](const httplib::Request &, httplib::Response &res, int) {
    res.status = 503;
    res.set_content("down", "text/plain");
  });

  auto cfg = server.config();
  cfg.max_transport_retries = 2;
  HttpChatProvider provider(cfg);
  try {
    provider.complete(sample_request());
    FAIL_CHECK("expected a provider error");
  } catch (const ProviderError &e) {
    CHECK(e.kind() == ProviderErrorKind::Transport);
    CHECK(e.http_status() == 503);
  }
  CHECK(server.requests() == 3); // first try + 2 retries
}

TEST_CASE("auth failures are immediate and never leak the key") {
  LocalServer server;
  server.set_handler([](const httplib::Request &, httplib::Response &res, int) {
    res.status = 401;
    res.set_content("{\"error\":\"bad key\"}", "application/json");
  });

  HttpChatProvider provider(server.config());
  try {
    provider.complete(sample_request());
    FAIL_CHECK("expected an auth error");
  } catch (const ProviderError &e) {
    CHECK(e.kind() == ProviderErrorKind::Auth);
    CHECK(std::string(e.what()).find("sk-test-secret") == std::string::npos);
  }
  CHECK(server.requests() == 1); // not retried
}

TEST_CASE("malformed completion bodies are BadResponse, not retried") {
  LocalServer server;
  server.set_handler([](const httplib::Request &, httplib::Response &res, int) {
    res.set_content("{\"choices\":[]}", "application/json");
  });

  HttpChatProvider provider(server.config());
  try {
    provider.complete(sample_request());
    FAIL_CHECK("expected a bad-response error");
  } catch (const ProviderError &e) {
    CHECK(e.kind() == ProviderErrorKind::BadResponse);
  }
  CHECK(server.requests() == 1);
}

TEST_CASE("unreachable endpoints fail with a transport error") {
  HttpProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
  cfg.api_key = "k";
  cfg.timeout = std::chrono::milliseconds(300);
  cfg.max_transport_retries = 1;
  cfg.backoff_base = std::chrono::milliseconds(1);
  cfg.backoff_cap = std::chrono::milliseconds(2);
  HttpChatProvider provider(cfg);
  CHECK_THROWS_AS(provider.complete(sample_request()), ProviderError);
}

TEST_CASE("empty prompts are rejected before any network call") {
  LocalServer server;
  HttpChatProvider provider(server.config());
  ProviderRequest req;
  req.model_name = "m";
  CHECK_THROWS_AS(provider.complete(req), ValidationError);
  CHECK(server.requests() == 0);
}

TEST_CASE("describe names the endpoint") {
  LocalServer server;
  HttpChatProvider provider(server.config());
  CHECK(provider.describe().find("/v1/chat/completions") != std::string::npos);
}
