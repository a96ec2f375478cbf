#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>

namespace finelogic::net {

struct EndpointConfig {
  std::string url;  // e.g. http://127.0.0.1:8000/v1/complete
  std::string model;
  int max_tokens = 1024;
  double temperature = 0.0;
  /// JSON pointer to the reply text inside the response body.
  std::string reply_path = "/text";
  /// Name of the environment variable holding a bearer token, if any.
  std::string api_key_env;
  int attempts = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each failure
  std::chrono::seconds timeout{120};
  std::size_t max_in_flight = 4;
  /// Responses are cached here, one file per SHA-256 of the prompt. Empty disables caching.
  std::filesystem::path cache_dir;
};

class EndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Blocking text-completion client. Safe to share between threads; at most
/// `max_in_flight` requests are outstanding at any time.
class CompletionClient {
 public:
  explicit CompletionClient(EndpointConfig config);
  ~CompletionClient();
  CompletionClient(const CompletionClient&) = delete;
  CompletionClient& operator=(const CompletionClient&) = delete;

  /// Cached reply if present, otherwise POSTs {model, prompt, max_tokens,
  /// temperature} with retries. Throws EndpointError after the last attempt.
  std::string complete(const std::string& prompt);

  std::optional<std::string> cached(const std::string& prompt) const;

  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  const EndpointConfig& config() const { return config_; }

 private:
  std::string post_once(const std::string& body);
  void store(const std::string& prompt, const std::string& reply) const;
  std::filesystem::path cache_path(const std::string& prompt) const;

  EndpointConfig config_;
  std::string base_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace finelogic::net
