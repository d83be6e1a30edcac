#include "factalign/chat.hpp"

#include <cstdlib>
#include <fstream>

#include "http_util.hpp"

#include "factalign/error.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;

namespace {

constexpr int kTopLogprobs = 5;

json key_from_wire(const json& wire) {
  json key = {{"model", wire.value("model", "")},
              {"messages", wire.value("messages", json::array())},
              {"logprobs", wire.value("logprobs", false)}};
  if (wire.contains("seed")) key["seed"] = wire["seed"];
  return key;
}

json reply_to_json(const ChatReply& reply) {
  json j = {{"content", reply.content}};
  if (reply.top_logprobs) {
    json arr = json::array();
    for (const auto& t : *reply.top_logprobs) {
      arr.push_back({{"token", t.token}, {"logprob", t.logprob}});
    }
    j["top_logprobs"] = std::move(arr);
  }
  return j;
}

std::vector<TokenLogprob> logprobs_from_json(const json& arr) {
  std::vector<TokenLogprob> out;
  for (const auto& t : arr) {
    out.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
  }
  return out;
}

}  // namespace

json to_wire(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {{"model", request.model},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  if (request.logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = kTopLogprobs;
  }
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

ChatReply reply_from_wire(const json& body) {
  try {
    const auto& choice = body.at("choices").at(0);
    ChatReply reply;
    reply.content = choice.at("message").at("content").get<std::string>();
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") &&
        choice["logprobs"]["content"].is_array() &&
        !choice["logprobs"]["content"].empty()) {
      reply.top_logprobs =
          logprobs_from_json(choice["logprobs"]["content"][0].at("top_logprobs"));
    }
    return reply;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedJudgeOutput,
                std::string("unexpected chat-completions body: ") + e.what());
  }
}

std::vector<ChatMessage> to_chat_messages(std::string_view rendered) {
  constexpr std::string_view kStart = "<|im_start|>";
  constexpr std::string_view kEnd = "<|im_end|>";
  if (rendered.find(kStart) == std::string_view::npos) {
    return {{"user", std::string(rendered)}};
  }
  std::vector<ChatMessage> out;
  std::size_t pos = 0;
  while ((pos = rendered.find(kStart, pos)) != std::string_view::npos) {
    pos += kStart.size();
    auto nl = rendered.find('\n', pos);
    if (nl == std::string_view::npos) break;
    std::string role(text::trim(rendered.substr(pos, nl - pos)));
    auto end = rendered.find(kEnd, nl + 1);
    auto content = rendered.substr(nl + 1, end == std::string_view::npos
                                               ? std::string_view::npos
                                               : end - nl - 1);
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
      content.remove_suffix(1);
    }
    out.push_back({std::move(role), std::string(content)});
    if (end == std::string_view::npos) break;
    pos = end + kEnd.size();
  }
  return out;
}

void JudgeConfig::validate() const {
  if (concurrency_limit < 1) {
    throw Error(ErrorCode::kInvalidConfig, "concurrency_limit must be >= 1");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_retries must be >= 0");
  }
  if (max_tokens < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_tokens must be >= 1");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "timeout must be positive");
  }
}

HttpChatBackend::HttpChatBackend(JudgeConfig config) : config_(std::move(config)) {
  config_.validate();
  auto url = detail::split_url(config_.endpoint, "/v1/chat/completions");
  scheme_host_port_ = std::move(url.scheme_host_port);
  path_ = std::move(url.path);
  if (const char* key = std::getenv(config_.api_key_env.c_str())) bearer_ = key;
}

ChatReply HttpChatBackend::complete(const ChatRequest& request) {
  httplib::Client cli(scheme_host_port_);
  detail::configure_client(cli, config_.timeout, bearer_);

  auto res = cli.Post(path_, to_wire(request).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kJudgeUnavailable,
                "transport error: " + httplib::to_string(res.error()),
                config_.endpoint);
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kJudgeUnavailable,
                "HTTP status " + std::to_string(res->status), config_.endpoint);
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "response body is not JSON",
                config_.endpoint);
  }
  return reply_from_wire(body);
}

std::string transcript_key(const ChatRequest& request) {
  return key_from_wire(to_wire(request)).dump();
}

json transcript_line(const ChatRequest& request, const ChatReply& reply) {
  return {{"request", to_wire(request)}, {"reply", reply_to_json(reply)}};
}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open transcript", path.string());
  auto backend = std::make_shared<ReplayBackend>();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      const auto key = key_from_wire(j.at("request")).dump();
      ChatReply reply;
      const auto& r = j.at("reply");
      reply.content = r.at("content").get<std::string>();
      if (r.contains("top_logprobs")) reply.top_logprobs = logprobs_from_json(r["top_logprobs"]);
      backend->entries_[key].replies.push_back(std::move(reply));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, std::string("bad transcript line: ") + e.what(),
                  path.string() + ":" + std::to_string(lineno));
    }
  }
  return backend;
}

void ReplayBackend::add(const ChatRequest& request, ChatReply reply) {
  std::lock_guard lock(mu_);
  entries_[transcript_key(request)].replies.push_back(std::move(reply));
}

ChatReply ReplayBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(transcript_key(request));
  if (it == entries_.end() || it->second.replies.empty()) {
    throw Error(ErrorCode::kJudgeUnavailable, "request not found in transcript");
  }
  auto& e = it->second;
  const auto idx = std::min(e.next, e.replies.size() - 1);
  if (e.next < e.replies.size()) ++e.next;
  return e.replies[idx];
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner,
                                   std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

ChatReply RecordingBackend::complete(const ChatRequest& request) {
  auto reply = inner_->complete(request);
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to transcript", path_.string());
  out << transcript_line(request, reply).dump() << '\n';
  return reply;
}

}  // namespace factalign
