#ifndef IFL_GATEWAY_HPP_
#define IFL_GATEWAY_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// External model access. Nothing outside this header and mock.hpp touches
// the network.
namespace ifl {

struct DecodeOptions {
  double temperature = 0.0;
  int max_tokens = 512;
};

struct InContextExample {
  std::string user;
  std::string assistant;
};

struct GenerationRequest {
  std::string system;  // omitted from the wire when empty
  std::string user;
  std::optional<InContextExample> in_context;
  DecodeOptions decode;
};

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection failures, timeouts and retriable statuses that outlived the
// retry budget.
class TransportError : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

// Non-retriable HTTP status.
class StatusError : public GeneratorError {
 public:
  StatusError(int status, std::string body_excerpt);
  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// 2xx response whose body is not the expected JSON shape.
class DecodeError : public GeneratorError {
 public:
  using GeneratorError::GeneratorError;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const GenerationRequest& request) const = 0;
  virtual std::string model_id() const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) const = 0;
  virtual std::string model_id() const = 0;
};

using LogSink = std::function<void(std::string_view)>;

// Writes to stderr.
LogSink stderr_log_sink();

struct ClientConfig {
  // Full URL of the endpoint, e.g. http://localhost:8000/v1/chat/completions.
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the bearer token. Empty means
  // no Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int retries = 3;
  std::chrono::milliseconds backoff_base{500};
  // Bounds concurrent requests against this endpoint.
  int max_in_flight = 4;
  // Token-bucket refill rate; 0 disables the rate limit.
  double requests_per_second = 0.0;

  // Throws PreconditionError when retries < 0, timeout <= 0 or the endpoint
  // is not an http(s) URL.
  void validate() const;
};

// Limits in-flight requests and optionally their start rate.
class RateLimiter {
 public:
  RateLimiter(int max_in_flight, double requests_per_second);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit();

   private:
    RateLimiter* owner_;
  };

  Permit acquire();

 private:
  void release();

  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
  double rate_;
  double tokens_;
  std::chrono::steady_clock::time_point last_refill_;
};

// Shared HTTP plumbing: JSON POST with retries on 429/5xx/transport errors
// and exponential backoff.
class JsonPostClient {
 public:
  JsonPostClient(ClientConfig config, LogSink log);

  // Returns the 2xx response body.
  std::string post(const std::string& body) const;

  const ClientConfig& config() const { return config_; }

 private:
  ClientConfig config_;
  LogSink log_;
  std::string scheme_host_port_;
  std::string path_;
  mutable RateLimiter limiter_;
};

// Chat-completion client. Request body:
//   {"model": ..., "messages": [{"role": "system"|"user"|"assistant",
//    "content": ...}, ...], "temperature": ..., "max_tokens": ...}
// Response: the first choice's message content,
//   {"choices": [{"message": {"content": "..."}}]}.
class ChatClient final : public Generator {
 public:
  explicit ChatClient(ClientConfig config, LogSink log = stderr_log_sink());

  std::string generate(const GenerationRequest& request) const override;
  std::string model_id() const override { return http_.config().model; }

  // Request body the client sends for a request; exposed for tests.
  std::string request_body(const GenerationRequest& request) const;

 private:
  JsonPostClient http_;
};

// Embedding client. Request {"model": ..., "input": [texts...]}; response
// {"data": [{"index": i, "embedding": [...]}, ...]}.
class EmbeddingClient final : public Embedder {
 public:
  explicit EmbeddingClient(ClientConfig config, LogSink log = stderr_log_sink());

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;
  std::string model_id() const override { return http_.config().model; }

 private:
  JsonPostClient http_;
};

// Deterministic offline embedder: each normalized token hashes (with the
// seed) to a fixed pseudo-random vector; a text embeds to the L2-normalized
// sum over its token multiset. Texts without tokens map to the zero vector.
class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::size_t dimension = 16, std::uint64_t seed = 0)
      : dimension_(dimension), seed_(seed) {}

  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;
  std::string model_id() const override { return "stub-embedder"; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

}  // namespace ifl

#endif  // IFL_GATEWAY_HPP_
