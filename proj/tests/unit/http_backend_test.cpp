#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "qe/judge.hpp"

using namespace qe;
using namespace std::chrono_literals;

namespace {

/// Completion server on an ephemeral localhost port.
class LocalServer {
 public:
  explicit LocalServer(httplib::Server::Handler handler) {
    server_.Post("/v1/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

CompletionRequest make_request(std::string prompt) {
  return CompletionRequest{std::move(prompt), "tiny-model", 0.0, 32, "h"};
}

}  // namespace

TEST(HttpBackend, PostsCompletionRequest) {
  nlohmann::json seen;
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"text":"Score: 4.5"})", "application/json");
  });
  HttpBackend backend(server.url(), 5000ms);
  EXPECT_EQ(backend.complete(make_request("Rate this")), "Score: 4.5");
  EXPECT_EQ(seen["prompt"], "Rate this");
  EXPECT_EQ(seen["model"], "tiny-model");
  EXPECT_EQ(seen["max_tokens"], 32);
  EXPECT_EQ(seen["temperature"], 0.0);
}

TEST(HttpBackend, NonSuccessStatusBecomesBackendError) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content(std::string(1000, 'e'), "text/plain");
  });
  HttpBackend backend(server.url(), 5000ms);
  try {
    backend.complete(make_request("p"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 503);
    EXPECT_EQ(e.body_excerpt().size(), 200u);
  }
}

TEST(HttpBackend, MalformedBodyIsBackendError) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  HttpBackend backend(server.url(), 5000ms);
  EXPECT_THROW(backend.complete(make_request("p")), BackendError);
}

TEST(HttpBackend, UnreachableHostIsTransportError) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpBackend backend("http://127.0.0.1:" + std::to_string(port) + "/v1/completions", 500ms);
  EXPECT_THROW(backend.complete(make_request("p")), TransportError);
}

TEST(HttpBackend, RejectsNonHttpUrls) {
  EXPECT_THROW(HttpBackend("ftp://example.com/x", 1000ms), ConfigError);
  EXPECT_THROW(HttpBackend("not a url", 1000ms), ConfigError);
}

TEST(HttpBackend, JudgeRetriesServerErrorsThenSucceeds) {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 502;
      return;
    }
    res.set_content(R"({"text":"Score: 2"})", "application/json");
  });
  JudgeConfig config;
  config.backend = BackendKind::Http;
  config.endpoint_url = server.url();
  Judge judge(config, make_backend(config));
  judge.set_sleeper([](std::chrono::milliseconds) {});
  EXPECT_EQ(judge.complete("p").text, "Score: 2");
  EXPECT_EQ(hits.load(), 3);
}
