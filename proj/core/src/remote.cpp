#include "factalign/remote.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "http_util.hpp"

#include "factalign/error.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;

namespace {

bool retryable(const Error& e) {
  return e.code() == ErrorCode::kJudgeUnavailable ||
         e.code() == ErrorCode::kMalformedJudgeOutput;
}

std::chrono::milliseconds backoff(const JudgeConfig& c, int attempt) {
  // attempt >= 1
  const double factor = std::ldexp(1.0, std::min(attempt - 1, 30));
  const double ms = static_cast<double>(c.retry_base_delay.count()) * factor;
  return std::chrono::milliseconds(static_cast<std::int64_t>(
      std::min(ms, static_cast<double>(c.retry_max_delay.count()))));
}

template <typename Call>
auto with_retries(const JudgeConfig& config, Call call) {
  std::optional<Error> last;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = backoff(config, attempt);
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
    }
    try {
      return call();
    } catch (const Error& e) {
      if (!retryable(e)) throw;
      last = e;
    }
  }
  throw *last;
}

}  // namespace

std::string format_evidence(std::span<const std::string> evidence) {
  if (evidence.empty()) return "(no evidence retrieved)";
  std::string out;
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "] " + evidence[i];
  }
  return out;
}

std::string format_fact_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

std::string format_candidate_claims(const std::vector<Claim>& claims) {
  std::string out;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (i > 0) out += '\n';
    out += "- " + claims[i].text;
  }
  return out;
}

ChatJudge::ChatJudge(std::shared_ptr<ChatBackend> backend, JudgeConfig config,
                     TemplateSet templates)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      templates_(std::move(templates)),
      limiter_(std::make_shared<Limiter>(config_.concurrency_limit)) {
  config_.validate();
  if (!backend_) throw Error(ErrorCode::kInvalidConfig, "ChatJudge needs a backend");
}

template <typename Parse>
auto ChatJudge::ask(std::string_view template_name, const Bindings& bindings,
                    bool logprobs, std::optional<std::uint64_t> seed,
                    Parse parse) const {
  const auto rendered = render_prompt(templates_.get(template_name), bindings);
  ChatRequest req;
  req.model = config_.model_name;
  req.messages = to_chat_messages(rendered);
  req.temperature = config_.temperature;
  req.max_tokens = config_.max_tokens;
  req.logprobs = logprobs;
  req.seed = seed;
  return with_retries(config_, [&] {
    ChatReply reply;
    {
      Limiter::Slot slot(*limiter_);
      reply = backend_->complete(req);
    }
    return parse(reply);
  });
}

std::vector<std::string> ChatJudge::extract(std::string_view text) const {
  return ask(prompt_names::kClaimExtraction, {{"response", std::string(text)}},
             false, std::nullopt,
             [](const ChatReply& r) { return parse_claim_list(r.content); });
}

Label ChatJudge::verify(const Claim& claim,
                        std::span<const std::string> evidence) const {
  return ask(prompt_names::kClaimVerification,
             {{"claim", claim.text}, {"evidence", format_evidence(evidence)}},
             false, std::nullopt,
             [](const ChatReply& r) { return parse_verification(r.content); });
}

ChecklistVerdicts ChatJudge::classify(std::string_view query,
                                      std::string_view answer,
                                      const Checklist& checklist) const {
  const auto n = checklist.items.size();
  auto outcomes = ask(prompt_names::kChecklistVerification,
                      {{"query", std::string(query)},
                       {"response", std::string(answer)},
                       {"guidelines", format_fact_list(checklist.items)}},
                      false, std::nullopt, [n](const ChatReply& r) {
                        return parse_checklist_verdicts(r.content, n);
                      });
  return {checklist.query_id, std::move(outcomes)};
}

double ChatJudge::score(const Claim& claim) const {
  return ask(prompt_names::kTruthfulness, {{"claim", claim.text}},
             config_.request_logprobs, std::nullopt, [](const ChatReply& r) {
               if (r.top_logprobs && !r.top_logprobs->empty()) {
                 try {
                   return truth_from_logprobs(*r.top_logprobs);
                 } catch (const Error&) {
                   // no label token among the candidates; use the text
                 }
               }
               return parse_truth_label(r.content);
             });
}

std::vector<std::string> ChatJudge::curate(std::string_view query,
                                           const std::vector<Claim>& claims) const {
  return ask(prompt_names::kClaimPrioritization,
             {{"query", std::string(query)},
              {"claims", format_candidate_claims(claims)}},
             false, std::nullopt,
             [](const ChatReply& r) { return parse_boxed_list(r.content); });
}

std::string ChatJudge::generate(std::string_view query,
                                std::string_view fewshot_context,
                                std::uint64_t seed) const {
  return ask(prompt_names::kBaseGeneration,
             {{"query", std::string(query)},
              {"fewshot", std::string(fewshot_context)}},
             false, seed, [](const ChatReply& r) {
               if (text::trim(r.content).empty()) {
                 throw Error(ErrorCode::kMalformedJudgeOutput, "empty generation");
               }
               return r.content;
             });
}

PairRanking ChatJudge::rank(std::string_view instruction, std::string_view output_1,
                            std::string_view output_2) const {
  return ask(prompt_names::kWinRate,
             {{"instruction", std::string(instruction)},
              {"output_1", std::string(output_1)},
              {"output_2", std::string(output_2)}},
             false, std::nullopt,
             [](const ChatReply& r) { return parse_rank_list(r.content); });
}

HttpGeneralScorer::HttpGeneralScorer(JudgeConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<Limiter>(config_.concurrency_limit)) {
  config_.validate();
}

double HttpGeneralScorer::score(std::string_view query,
                                std::string_view answer) const {
  const auto url = detail::split_url(config_.endpoint, "/score");
  const json body = {{"query", query}, {"answer", answer}};
  std::string bearer;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) bearer = key;

  return with_retries(config_, [&] {
    Limiter::Slot slot(*limiter_);
    httplib::Client cli(url.scheme_host_port);
    detail::configure_client(cli, config_.timeout, bearer);
    auto res = cli.Post(url.path, body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kJudgeUnavailable,
                  "transport error: " + httplib::to_string(res.error()),
                  config_.endpoint);
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kJudgeUnavailable,
                  "HTTP status " + std::to_string(res->status), config_.endpoint);
    }
    try {
      auto j = json::parse(res->body);
      const double v = j.at("score").get<double>();
      if (!std::isfinite(v)) throw Error(ErrorCode::kMalformedJudgeOutput, "score not finite");
      return v;
    } catch (const json::exception&) {
      throw Error(ErrorCode::kMalformedJudgeOutput, "reply lacks numeric 'score'",
                  config_.endpoint);
    }
  });
}

}  // namespace factalign
