#pragma once
// Chat-completions transport used by the remote judges.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factalign/judge.hpp"

namespace factalign {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  int max_tokens = 8192;
  bool logprobs = false;
  std::optional<std::uint64_t> seed;
};

struct ChatReply {
  std::string content;
  // Candidates for the first generated token, when the backend reports them.
  std::optional<std::vector<TokenLogprob>> top_logprobs;
};

// Wire body of a request, in the chat-completions shape.
nlohmann::json to_wire(const ChatRequest& request);
// Reads choices[0].message.content and, if present,
// choices[0].logprobs.content[0].top_logprobs. Throws MalformedJudgeOutput.
ChatReply reply_from_wire(const nlohmann::json& body);

// Splits a rendered prompt written with <|im_start|>role ... <|im_end|> blocks
// into messages; text without such blocks becomes a single user message.
std::vector<ChatMessage> to_chat_messages(std::string_view rendered);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Thread-safe. Transport failures throw JudgeUnavailable.
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

struct JudgeConfig {
  std::string endpoint;  // full URL of the chat-completions route
  std::string model_name;
  double temperature = 0.1;
  int max_tokens = 8192;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::size_t concurrency_limit = 4;
  std::chrono::milliseconds retry_base_delay{500};
  std::chrono::milliseconds retry_max_delay{30000};
  // Name of the environment variable holding the bearer token.
  std::string api_key_env = "FACTALIGN_API_KEY";
  // Ask for next-token probabilities when scoring truthfulness.
  bool request_logprobs = true;

  // Throws InvalidConfig.
  void validate() const;
};

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(JudgeConfig config);
  ChatReply complete(const ChatRequest& request) override;

 private:
  JudgeConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string bearer_;
};

class FunctionBackend final : public ChatBackend {
 public:
  using Fn = std::function<ChatReply(const ChatRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  ChatReply complete(const ChatRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

// Key identifying a request in a transcript: model, messages, logprobs flag
// and seed. Temperature and max_tokens are transport settings and excluded.
std::string transcript_key(const ChatRequest& request);

// Serves replies from a recorded JSONL transcript of
// {"request": <wire request>, "reply": {"content": ..., "top_logprobs": [...]}}.
// Repeated identical requests consume recorded replies in order and then keep
// returning the last one. Unrecorded requests throw JudgeUnavailable.
class ReplayBackend final : public ChatBackend {
 public:
  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path);
  void add(const ChatRequest& request, ChatReply reply);
  ChatReply complete(const ChatRequest& request) override;

 private:
  struct Entry {
    std::vector<ChatReply> replies;
    std::size_t next = 0;
  };
  std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

// Forwards to `inner` and appends every successful exchange to `path`.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path path);
  ChatReply complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path path_;
  std::mutex mu_;
};

nlohmann::json transcript_line(const ChatRequest& request, const ChatReply& reply);

}  // namespace factalign
