#include "ifl/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ifl/error.hpp"
#include "ifl/random.hpp"
#include "ifl/text.hpp"

namespace ifl {

using nlohmann::json;

StatusError::StatusError(int status, std::string body_excerpt)
    : GeneratorError("endpoint returned HTTP " + std::to_string(status) + ": " + body_excerpt),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

LogSink stderr_log_sink() {
  return [](std::string_view line) { std::cerr << "[gateway] " << line << '\n'; };
}

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("endpoint must be an http(s) URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw PreconditionError("endpoint must be an http(s) URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retriable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void ClientConfig::validate() const {
  if (retries < 0) throw PreconditionError("retries must be >= 0");
  if (timeout.count() <= 0) throw PreconditionError("timeout must be > 0");
  if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
  if (requests_per_second < 0) throw PreconditionError("requests_per_second must be >= 0");
  parse_url(endpoint);
}

RateLimiter::RateLimiter(int max_in_flight, double requests_per_second)
    : available_(max_in_flight),
      rate_(requests_per_second),
      tokens_(requests_per_second > 0 ? std::max(1.0, requests_per_second) : 0.0),
      last_refill_(std::chrono::steady_clock::now()) {}

RateLimiter::Permit::~Permit() {
  if (owner_ != nullptr) owner_->release();
}

RateLimiter::Permit RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
  if (rate_ > 0) {
    const double capacity = std::max(1.0, rate_);
    for (;;) {
      const auto now = std::chrono::steady_clock::now();
      const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
      tokens_ = std::min(capacity, tokens_ + elapsed * rate_);
      last_refill_ = now;
      if (tokens_ >= 1.0) break;
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
      cv_.wait_for(lock, wait);
    }
    tokens_ -= 1.0;
  }
  return Permit(this);
}

void RateLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_all();
}

JsonPostClient::JsonPostClient(ClientConfig config, LogSink log)
    : config_(std::move(config)),
      log_(log ? std::move(log) : LogSink([](std::string_view) {})),
      limiter_(std::max(1, config_.max_in_flight), config_.requests_per_second) {
  config_.validate();
  auto parsed = parse_url(config_.endpoint);
  scheme_host_port_ = std::move(parsed.scheme_host_port);
  path_ = std::move(parsed.path);
}

std::string JsonPostClient::post(const std::string& body) const {
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0')
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string request_digest = text::hex_digest(body);
  std::string last_failure;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = config_.backoff_base * (1LL << std::min(attempt - 1, 20));
      log_("retry " + std::to_string(attempt) + "/" + std::to_string(config_.retries) + " after " + last_failure +
           " (backoff " + std::to_string(delay.count()) + " ms)");
      std::this_thread::sleep_for(delay);
    }
    httplib::Result res;
    {
      auto permit = limiter_.acquire();
      httplib::Client client(scheme_host_port_);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      log_("POST " + path_ + " request=" + request_digest + " attempt=" + std::to_string(attempt + 1));
      res = client.Post(path_, headers, body, "application/json");
    }
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      log_("response status=" + std::to_string(status) + " body=" + text::hex_digest(res->body));
      return res->body;
    }
    if (!retriable_status(status)) throw StatusError(status, excerpt(res->body));
    last_failure = "HTTP " + std::to_string(status);
  }
  throw TransportError("request to " + scheme_host_port_ + path_ + " failed after " +
                       std::to_string(config_.retries) + " retries: " + last_failure);
}

ChatClient::ChatClient(ClientConfig config, LogSink log) : http_(std::move(config), std::move(log)) {}

std::string ChatClient::request_body(const GenerationRequest& request) const {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  if (request.in_context) {
    messages.push_back({{"role", "user"}, {"content", request.in_context->user}});
    messages.push_back({{"role", "assistant"}, {"content", request.in_context->assistant}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  json body = {{"model", http_.config().model},
               {"messages", messages},
               {"temperature", request.decode.temperature},
               {"max_tokens", request.decode.max_tokens}};
  return body.dump();
}

std::string ChatClient::generate(const GenerationRequest& request) const {
  const std::string raw = http_.post(request_body(request));
  try {
    const auto j = json::parse(raw);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw DecodeError("message content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw DecodeError(std::string("malformed chat completion response: ") + e.what());
  }
}

EmbeddingClient::EmbeddingClient(ClientConfig config, LogSink log) : http_(std::move(config), std::move(log)) {}

std::vector<std::vector<double>> EmbeddingClient::embed(std::span<const std::string> texts) const {
  json input = json::array();
  for (const auto& t : texts) input.push_back(t);
  const json body = {{"model", http_.config().model}, {"input", input}};
  const std::string raw = http_.post(body.dump());
  try {
    const auto j = json::parse(raw);
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != texts.size())
      throw DecodeError("embedding response has the wrong number of vectors");
    std::vector<std::vector<double>> out(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
      if (index >= out.size()) throw DecodeError("embedding index out of range");
      out[index] = item.at("embedding").get<std::vector<double>>();
    }
    return out;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("malformed embedding response: ") + e.what());
  }
}

std::vector<std::vector<double>> StubEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<double> v(dimension_, 0.0);
    auto tokens = text::tokenize(t);
    std::sort(tokens.begin(), tokens.end());
    for (const auto& token : tokens) {
      Rng rng(mix_seed(seed_, token));
      for (auto& x : v) x += 2.0 * rng.uniform01() - 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0) for (auto& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ifl
