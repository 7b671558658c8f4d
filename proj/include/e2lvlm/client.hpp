#pragma once

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "e2lvlm/hash.hpp"
#include "e2lvlm/json_io.hpp"
#include "e2lvlm/types.hpp"

namespace e2lvlm {

// ---------------------------------------------------------------------------
// Requests / responses (OpenAI-compatible chat completions)
// ---------------------------------------------------------------------------

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;  // no assistant turn
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed;

  bool operator==(const ChatRequest&) const = default;
};

enum class FinishReason { Stop, Length, Other };

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;

  bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  std::string finish_reason_raw = "stop";
  TokenUsage usage;

  bool operator==(const ChatResponse&) const = default;
};

inline json chat_message_to_wire(const Message& m) {
  json j;
  j["role"] = role_to_string(m.role);
  bool text_only = true;
  for (const auto& p : m.parts)
    if (!std::holds_alternative<TextPart>(p)) text_only = false;
  if (text_only && m.role != Role::User) {
    std::string body;
    for (const auto& p : m.parts) body += std::get<TextPart>(p).text;
    j["content"] = body;
  } else {
    json content = json::array();
    for (const auto& p : m.parts) {
      json part;
      if (const auto* t = std::get_if<TextPart>(&p)) {
        part["type"] = "text";
        part["text"] = t->text;
      } else {
        part["type"] = "image_url";
        part["image_url"] = json{{"url", std::get<ImagePart>(p).ref}};
      }
      content.push_back(part);
    }
    j["content"] = content;
  }
  return j;
}

inline json chat_request_to_wire(const ChatRequest& r) {
  json j;
  j["model"] = r.model;
  json msgs = json::array();
  for (const auto& m : r.messages) msgs.push_back(chat_message_to_wire(m));
  j["messages"] = msgs;
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

inline ChatResponse chat_response_from_wire(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("invalid JSON: ") + e.what());
  }
  const json* choices = detail::find(j, "choices");
  if (choices == nullptr || !choices->is_array() || choices->empty())
    throw Error(ErrorCode::MalformedResponse, "missing 'choices'");
  const json& first = (*choices)[0];
  const json* message = detail::find(first, "message");
  if (message == nullptr) throw Error(ErrorCode::MalformedResponse, "missing 'choices[0].message'");
  const json* content = detail::find(*message, "content");
  if (content == nullptr || !content->is_string())
    throw Error(ErrorCode::MalformedResponse, "missing string 'message.content'");
  ChatResponse resp;
  resp.text = content->get<std::string>();
  if (const json* fr = detail::find(first, "finish_reason")) {
    resp.finish_reason_raw = fr->get<std::string>();
    if (resp.finish_reason_raw == "stop")
      resp.finish_reason = FinishReason::Stop;
    else if (resp.finish_reason_raw == "length")
      resp.finish_reason = FinishReason::Length;
    else
      resp.finish_reason = FinishReason::Other;
  }
  if (const json* usage = detail::find(j, "usage")) {
    if (const json* v = detail::find(*usage, "prompt_tokens")) resp.usage.prompt_tokens = v->get<std::int64_t>();
    if (const json* v = detail::find(*usage, "completion_tokens"))
      resp.usage.completion_tokens = v->get<std::int64_t>();
    if (const json* v = detail::find(*usage, "total_tokens")) resp.usage.total_tokens = v->get<std::int64_t>();
  }
  return resp;
}

// ---------------------------------------------------------------------------
// Content-addressed response cache
// ---------------------------------------------------------------------------

/// Digest of the canonicalized request. Canonical form serializes with
/// sorted keys, so two requests that differ only in serialized key order
/// hash identically.
inline std::string cache_key(const ChatRequest& r) {
  const canonical_json canon = canonical_json::parse(chat_request_to_wire(r).dump());
  return sha256_hex(canon.dump());
}

/// One file per key under a two-level hex fan-out. Writes publish via temp
/// file + atomic rename; a put on an existing key is a no-op (write-once).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::optional<ChatResponse> get(const std::string& key) const {
    std::ifstream in(entry_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      json j = json::parse(body);
      ChatResponse r;
      r.text = j.at("text").get<std::string>();
      r.finish_reason_raw = j.at("finish_reason").get<std::string>();
      r.finish_reason = r.finish_reason_raw == "stop"    ? FinishReason::Stop
                        : r.finish_reason_raw == "length" ? FinishReason::Length
                                                          : FinishReason::Other;
      r.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
      r.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
      r.usage.total_tokens = j.at("usage").at("total_tokens").get<std::int64_t>();
      return r;
    } catch (const json::exception&) {
      return std::nullopt;  // unreadable entry counts as a miss
    }
  }

  void put(const std::string& key, const ChatResponse& value) const {
    const std::filesystem::path path = entry_path(key);
    if (std::filesystem::exists(path)) return;
    std::filesystem::create_directories(path.parent_path());
    json j;
    j["text"] = value.text;
    j["finish_reason"] = value.finish_reason_raw;
    j["usage"] = {{"prompt_tokens", value.usage.prompt_tokens},
                  {"completion_tokens", value.usage.completion_tokens},
                  {"total_tokens", value.usage.total_tokens}};
    static std::atomic<std::uint64_t> counter{0};
    const std::filesystem::path tmp =
        path.parent_path() / (path.filename().string() + ".tmp." +
                              std::to_string(::getpid()) + "." +
                              std::to_string(counter.fetch_add(1)));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::IoFailure, "cannot write cache entry " + tmp.string());
      out << j.dump();
      out.flush();
      if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      std::filesystem::remove(tmp);
      if (!std::filesystem::exists(path))
        throw Error(ErrorCode::IoFailure, "cannot publish cache entry: " + ec.message());
    }
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / key.substr(2, 2) / (key + ".json");
  }

  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 200;
  double multiplier = 2.0;
  int max_delay_ms = 10000;
};

struct EndpointConfig {
  std::string base_url;          // e.g. http://127.0.0.1:8089
  std::string api_key;           // usually from E2LVLM_API_KEY
  int timeout_s = 60;
  int concurrency = 8;           // in-flight request bound
};

struct ClientStatsSnapshot {
  std::uint64_t chat_calls = 0;
  std::uint64_t network_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t retries = 0;
};

struct ChatOutcome {
  ChatResponse response;
  bool cache_hit = false;
  int attempts = 0;
};

/// Thin wire-protocol client for chat-completion and embeddings endpoints.
/// Shareable across workers: the in-flight bound is enforced internally and
/// the cache publishes entries atomically.
class LvlmClient {
 public:
  LvlmClient(EndpointConfig endpoint, RetryPolicy retry = {},
             std::optional<std::filesystem::path> cache_dir = std::nullopt)
      : endpoint_(std::move(endpoint)), retry_(retry) {
    if (cache_dir) cache_.emplace(*cache_dir);
    if (endpoint_.concurrency < 1) endpoint_.concurrency = 1;
  }

  ChatOutcome chat_detailed(const ChatRequest& request) {
    validate(request);
    chat_calls_.fetch_add(1);
    const std::string key = cache_key(request);
    if (cache_) {
      if (auto hit = cache_->get(key)) {
        cache_hits_.fetch_add(1);
        return {*hit, true, 0};
      }
    }
    const json body = chat_request_to_wire(request);
    auto [status, text, attempts] = post_with_retry("/v1/chat/completions", body.dump());
    ChatResponse resp = chat_response_from_wire(text);
    if (resp.text.empty() && resp.finish_reason == FinishReason::Stop)
      throw Error(ErrorCode::MalformedResponse, "finish_reason=stop with no text");
    if (cache_) cache_->put(key, resp);
    return {std::move(resp), false, attempts};
  }

  ChatResponse chat(const ChatRequest& request) { return chat_detailed(request).response; }

  /// One embedding per input, order preserved, all dims equal.
  std::vector<Embedding> embed(const std::string& model, const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "embed: no inputs");
    json body;
    body["model"] = model;
    body["input"] = inputs;
    auto [status, text, attempts] = post_with_retry("/v1/embeddings", body.dump());
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("invalid JSON: ") + e.what());
    }
    const json* data = detail::find(j, "data");
    if (data == nullptr || !data->is_array())
      throw Error(ErrorCode::MalformedResponse, "missing 'data'");
    if (data->size() != inputs.size())
      throw Error(ErrorCode::MalformedResponse,
                  "expected " + std::to_string(inputs.size()) + " embeddings, got " +
                      std::to_string(data->size()));
    std::vector<Embedding> out(inputs.size());
    for (const auto& item : *data) {
      const json* idx = detail::find(item, "index");
      const json* emb = detail::find(item, "embedding");
      if (idx == nullptr || emb == nullptr)
        throw Error(ErrorCode::MalformedResponse, "embedding item lacks 'index'/'embedding'");
      const auto i = idx->get<std::size_t>();
      if (i >= out.size()) throw Error(ErrorCode::MalformedResponse, "embedding index out of range");
      out[i] = embedding_from_json(*emb);
    }
    for (const auto& e : out)
      if (e.dim() != out.front().dim())
        throw Error(ErrorCode::DimInconsistent, "embeddings endpoint returned mixed dims");
    return out;
  }

  ClientStatsSnapshot stats() const {
    return {chat_calls_.load(), network_calls_.load(), cache_hits_.load(), retries_.load()};
  }

  const EndpointConfig& endpoint() const { return endpoint_; }

 private:
  static void validate(const ChatRequest& r) {
    bool has_user = false;
    for (const auto& m : r.messages) {
      if (m.role == Role::User) has_user = true;
      if (m.role == Role::Assistant)
        throw Error(ErrorCode::InvalidConfig, "chat request must not contain an assistant turn");
    }
    if (!has_user) throw Error(ErrorCode::InvalidConfig, "chat request needs a user message");
    if (r.temperature < 0.0) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
    if (r.max_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_tokens must be >= 1");
  }

  struct PostResult {
    int status;
    std::string body;
    int attempts;
  };

  PostResult post_with_retry(const std::string& path, const std::string& body) {
    // Bound in-flight requests across all threads sharing this client.
    Slot slot(*this);
    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      httplib::Client cli(endpoint_.base_url);
      cli.set_connection_timeout(endpoint_.timeout_s, 0);
      cli.set_read_timeout(endpoint_.timeout_s, 0);
      cli.set_write_timeout(endpoint_.timeout_s, 0);
      httplib::Headers headers;
      if (!endpoint_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
      network_calls_.fetch_add(1);
      auto res = cli.Post(path, headers, body, "application/json");
      if (res) {
        if (res->status >= 200 && res->status < 300) return {res->status, res->body, attempt};
        if (res->status == 429 || res->status >= 500) {
          last_error = "HTTP " + std::to_string(res->status);
          if (attempt < retry_.max_attempts) {
            retries_.fetch_add(1);
            backoff(attempt);
            continue;
          }
          throw Error(ErrorCode::RetriesExhausted,
                      std::to_string(retry_.max_attempts) + " attempts; last error: " + last_error);
        }
        throw Error(ErrorCode::HttpStatus,
                    "HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      const auto err = res.error();
      last_error = httplib::to_string(err);
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                             err == httplib::Error::Write;
      if (attempt < retry_.max_attempts) {
        retries_.fetch_add(1);
        backoff(attempt);
        continue;
      }
      if (retry_.max_attempts == 1 && timed_out)
        throw Error(ErrorCode::Timeout, "request timed out: " + last_error);
      throw Error(ErrorCode::RetriesExhausted,
                  std::to_string(retry_.max_attempts) + " attempts; last error: " + last_error);
    }
    throw Error(ErrorCode::RetriesExhausted, "unreachable");
  }

  void backoff(int attempt) const {
    if (retry_.base_delay_ms <= 0) return;
    double delay = retry_.base_delay_ms;
    for (int i = 1; i < attempt; ++i) delay *= retry_.multiplier;
    delay = std::min(delay, static_cast<double>(retry_.max_delay_ms));
    thread_local std::mt19937_64 jitter_rng(std::random_device{}());
    std::uniform_real_distribution<double> jitter(0.0, delay / 2.0);
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<int>(delay + jitter(jitter_rng))));
  }

  // RAII slot in the in-flight bound.
  class Slot {
   public:
    explicit Slot(LvlmClient& c) : client_(c) {
      std::unique_lock lock(c.mu_);
      c.cv_.wait(lock, [&] { return c.in_flight_ < c.endpoint_.concurrency; });
      ++c.in_flight_;
    }
    ~Slot() {
      {
        std::lock_guard lock(client_.mu_);
        --client_.in_flight_;
      }
      client_.cv_.notify_one();
    }

   private:
    LvlmClient& client_;
  };

  EndpointConfig endpoint_;
  RetryPolicy retry_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::uint64_t> chat_calls_{0};
  std::atomic<std::uint64_t> network_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> retries_{0};
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace e2lvlm
