#include "finelogic/net/completion_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finelogic/util/hash.hpp"

namespace finelogic::net {

namespace {

// "http://host:port/path" -> ("http://host:port", "/path")
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw EndpointError("endpoint url lacks a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

// Releases an in-flight slot on scope exit.
struct SlotGuard {
  std::counting_semaphore<1024>& sem;
  explicit SlotGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

CompletionClient::CompletionClient(EndpointConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw EndpointError("no endpoint url configured");
  std::tie(base_, path_) = split_url(config_.url);
  std::size_t slots = std::clamp<std::size_t>(config_.max_in_flight, 1, 1024);
  slots_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(slots));
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

CompletionClient::~CompletionClient() = default;

std::filesystem::path CompletionClient::cache_path(const std::string& prompt) const {
  return config_.cache_dir / (util::sha256_hex(prompt) + ".txt");
}

std::optional<std::string> CompletionClient::cached(const std::string& prompt) const {
  if (config_.cache_dir.empty()) return std::nullopt;
  std::ifstream in(cache_path(prompt), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CompletionClient::store(const std::string& prompt, const std::string& reply) const {
  if (config_.cache_dir.empty()) return;
  auto target = cache_path(prompt);
  std::ostringstream tmpname;
  tmpname << target.string() << ".tmp." << std::this_thread::get_id();
  std::filesystem::path tmp = tmpname.str();
  {
    std::ofstream out(tmp, std::ios::binary);
    out << reply;
  }
  std::filesystem::rename(tmp, target);
}

std::string CompletionClient::post_once(const std::string& body) {
  httplib::Client cli(base_);
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
  cli.set_read_timeout(config_.timeout);
  cli.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  network_calls_.fetch_add(1);
  auto res = cli.Post(path_, headers, body, "application/json");
  if (!res) throw EndpointError("request to " + config_.url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw EndpointError("endpoint returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
    return reply.at(nlohmann::json::json_pointer(config_.reply_path)).get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError(std::string("malformed endpoint reply: ") + e.what());
  }
}

std::string CompletionClient::complete(const std::string& prompt) {
  if (auto hit = cached(prompt)) {
    cache_hits_.fetch_add(1);
    return *hit;
  }
  nlohmann::json body = {{"model", config_.model},
                         {"prompt", prompt},
                         {"max_tokens", config_.max_tokens},
                         {"temperature", config_.temperature}};
  std::string payload = body.dump();
  auto delay = config_.backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, config_.attempts); ++attempt) {
    try {
      std::string reply;
      {
        SlotGuard guard(*slots_);
        reply = post_once(payload);
      }
      store(prompt, reply);
      return reply;
    } catch (const EndpointError& e) {
      last_error = e.what();
    }
    if (attempt < config_.attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw EndpointError(last_error + " (after " + std::to_string(config_.attempts) + " attempts)");
}

}  // namespace finelogic::net
