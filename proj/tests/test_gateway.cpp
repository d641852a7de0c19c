#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "ifl/error.hpp"
#include "ifl/gateway.hpp"

using namespace ifl;
using nlohmann::json;

namespace {

// In-process HTTP stub. The handler sees each request with its 1-based
// sequence number.
class StubServer {
 public:
  using Handler = std::function<void(int, const httplib::Request&, httplib::Response&)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++calls_;
      {
        std::lock_guard lock(mu_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      handler_(n, req, res);
    };
    server_.Post("/v1/chat/completions", route);
    server_.Post("/v1/embeddings", route);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int calls() const { return calls_; }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

void reply_chat(httplib::Response& res, const std::string& content) {
  res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                  "application/json");
}

ClientConfig config_for(const StubServer& server, const std::string& path) {
  ClientConfig c;
  c.endpoint = server.url(path);
  c.model = "stub-model";
  c.api_key_env = "IFL_TEST_API_KEY";
  c.backoff_base = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(5000);
  return c;
}

struct CapturedLog {
  std::mutex mu;
  std::vector<std::string> lines;
  LogSink sink() {
    return [this](std::string_view line) {
      std::lock_guard lock(mu);
      lines.emplace_back(line);
    };
  }
  std::size_t count_containing(const std::string& needle) {
    std::lock_guard lock(mu);
    std::size_t n = 0;
    for (const auto& l : lines) n += l.find(needle) != std::string::npos ? 1 : 0;
    return n;
  }
};

GenerationRequest simple_request() {
  GenerationRequest r;
  r.user = "Question: who?";
  return r;
}

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("request body shape") {
    ClientConfig c;
    c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    c.model = "m";
    ChatClient client(c, [](std::string_view) {});
    GenerationRequest r;
    r.system = "sys";
    r.user = "u";
    r.in_context = InContextExample{"example question", "example answer"};
    r.decode.max_tokens = 64;
    const auto body = json::parse(client.request_body(r));
    CHECK(body["model"] == "m");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["max_tokens"] == 64);
    REQUIRE(body["messages"].size() == 4);
    CHECK(body["messages"][0] == json{{"role", "system"}, {"content", "sys"}});
    CHECK(body["messages"][1] == json{{"role", "user"}, {"content", "example question"}});
    CHECK(body["messages"][2] == json{{"role", "assistant"}, {"content", "example answer"}});
    CHECK(body["messages"][3] == json{{"role", "user"}, {"content", "u"}});
    r.system.clear();
    r.in_context.reset();
    CHECK(json::parse(client.request_body(r))["messages"].size() == 1);
  }

  TEST_CASE("recorded responses are returned verbatim") {
    StubServer server([](int, const httplib::Request&, httplib::Response& res) { reply_chat(res, "Fixed [1]."); });
    ChatClient client(config_for(server, "/v1/chat/completions"), [](std::string_view) {});
    const auto a = client.generate(simple_request());
    const auto b = client.generate(simple_request());
    CHECK(a == "Fixed [1].");
    CHECK(a == b);
    const auto bodies = server.bodies();
    REQUIRE(bodies.size() == 2);
    CHECK(bodies[0] == bodies[1]);
  }

  TEST_CASE("429 twice then success") {
    StubServer server([](int n, const httplib::Request&, httplib::Response& res) {
      if (n <= 2) {
        res.status = 429;
        res.set_content("slow down", "text/plain");
        return;
      }
      reply_chat(res, "ok");
    });
    CapturedLog log;
    ChatClient client(config_for(server, "/v1/chat/completions"), log.sink());
    CHECK(client.generate(simple_request()) == "ok");
    CHECK(server.calls() == 3);
    CHECK(log.count_containing("retry ") == 2);
    CHECK(log.count_containing("HTTP 429") == 2);
  }

  TEST_CASE("500 five times exhausts three retries") {
    StubServer server([](int, const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    });
    CapturedLog log;
    ChatClient client(config_for(server, "/v1/chat/completions"), log.sink());
    try {
      client.generate(simple_request());
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(std::string(e.what()).find("after 3 retries") != std::string::npos);
    }
    CHECK(server.calls() == 4);
    CHECK(log.count_containing("retry ") == 3);
  }

  TEST_CASE("non-retriable status") {
    StubServer server([](int, const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content("bad request body", "text/plain");
    });
    ChatClient client(config_for(server, "/v1/chat/completions"), [](std::string_view) {});
    try {
      client.generate(simple_request());
      FAIL("expected StatusError");
    } catch (const StatusError& e) {
      CHECK(e.status() == 400);
      CHECK(e.body_excerpt() == "bad request body");
    }
    CHECK(server.calls() == 1);
  }

  TEST_CASE("malformed success body") {
    StubServer server([](int, const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"choices": []})", "application/json");
    });
    ChatClient client(config_for(server, "/v1/chat/completions"), [](std::string_view) {});
    CHECK_THROWS_AS(client.generate(simple_request()), DecodeError);
  }

  TEST_CASE("unreachable endpoint is a transport error") {
    ClientConfig c;
    c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    c.retries = 1;
    c.backoff_base = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(500);
    ChatClient client(c, [](std::string_view) {});
    CHECK_THROWS_AS(client.generate(simple_request()), TransportError);
  }

  TEST_CASE("the bearer token is sent but never logged") {
    ::setenv("IFL_TEST_API_KEY", "sk-very-secret-token", 1);
    StubServer server([](int, const httplib::Request&, httplib::Response& res) { reply_chat(res, "ok"); });
    CapturedLog log;
    ChatClient client(config_for(server, "/v1/chat/completions"), log.sink());
    client.generate(simple_request());
    ::unsetenv("IFL_TEST_API_KEY");
    REQUIRE(server.auth().size() == 1);
    CHECK(server.auth()[0] == "Bearer sk-very-secret-token");
    CHECK_FALSE(log.lines.empty());
    CHECK(log.count_containing("sk-very-secret-token") == 0);
    CHECK(log.count_containing("Question: who?") == 0);
  }

  TEST_CASE("embedding client orders by index") {
    StubServer server([](int, const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      CHECK(body["model"] == "stub-model");
      res.set_content(json{{"data",
                            {{{"index", 1}, {"embedding", {0.0, 1.0}}}, {{"index", 0}, {"embedding", {1.0, 0.0}}}}}}
                          .dump(),
                      "application/json");
    });
    EmbeddingClient client(config_for(server, "/v1/embeddings"), [](std::string_view) {});
    const std::vector<std::string> texts = {"a", "b"};
    const auto v = client.embed(texts);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == std::vector<double>{1.0, 0.0});
    CHECK(v[1] == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("in-flight limit holds under concurrency") {
    std::atomic<int> active{0}, peak{0};
    StubServer server([&](int, const httplib::Request&, httplib::Response& res) {
      const int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --active;
      reply_chat(res, "ok");
    });
    auto cfg = config_for(server, "/v1/chat/completions");
    cfg.max_in_flight = 2;
    ChatClient client(cfg, [](std::string_view) {});
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) threads.emplace_back([&] { client.generate(simple_request()); });
    for (auto& t : threads) t.join();
    CHECK(server.calls() == 6);
    CHECK(peak.load() <= 2);
  }

  TEST_CASE("config validation") {
    ClientConfig c;
    c.endpoint = "ftp://example.com/x";
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c.endpoint = "http://localhost:8000/v1/chat/completions";
    CHECK_NOTHROW(c.validate());
    c.retries = -1;
    CHECK_THROWS_AS(c.validate(), PreconditionError);
  }
}
