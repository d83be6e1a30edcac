#include "factalign/judge.hpp"

#include <cmath>
#include <regex>

#include <nlohmann/json.hpp>

#include "factalign/error.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;

std::string_view to_string(Label l) {
  switch (l) {
    case Label::kSupport: return "SUPPORT";
    case Label::kRefute: return "REFUTE";
    case Label::kNotEnoughInfo: return "NOT_ENOUGH_INFO";
  }
  return "NOT_ENOUGH_INFO";
}

std::optional<Label> label_from_string(std::string_view s) {
  if (s == "SUPPORT") return Label::kSupport;
  if (s == "REFUTE") return Label::kRefute;
  if (s == "NOT_ENOUGH_INFO") return Label::kNotEnoughInfo;
  return std::nullopt;
}

void Claim::validate() const {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "claim text is empty", id);
  }
  if (truth_prob && !(*truth_prob >= 0.0 && *truth_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "truth_prob outside [0,1]", id);
  }
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedJudgeOutput, what);
}

json parse_json(std::string_view reply) {
  auto body = text::strip_code_fence(reply);
  try {
    return json::parse(body);
  } catch (const json::exception&) {
    malformed("reply is not valid JSON");
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view strip_bold(std::string_view s) {
  s = text::trim(s);
  while (s.size() >= 4 && s.starts_with("**") && s.ends_with("**")) {
    s = text::trim(s.substr(2, s.size() - 4));
  }
  return s;
}

bool is_no_claims_reply(std::string_view s) {
  // Quotes and a final period are formatting, not content.
  auto is_quote = [](std::string_view t, bool front) {
    for (std::string_view q : {"\"", "'", "`", "“", "”"}) {
      if (front ? t.starts_with(q) : t.ends_with(q)) return q.size();
    }
    return std::size_t{0};
  };
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    if (auto n = is_quote(s, true)) { s.remove_prefix(n); changed = true; }
    if (auto n = is_quote(s, false); n && !s.empty()) { s.remove_suffix(n); changed = true; }
  }
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return lowercase(text::trim(s)) == kNoClaimsReply;
}

}  // namespace

std::vector<std::string> parse_claim_list(std::string_view reply) {
  auto body = text::strip_code_fence(reply);
  if (body.empty()) malformed("empty claim-extraction reply");
  if (is_no_claims_reply(body)) return {};
  std::vector<std::string> claims;
  for (const auto& raw : text::split_lines(body)) {
    auto line = text::trim(raw);
    if (line.empty()) continue;
    if (!line.starts_with("*")) malformed("claim line without '* ' bullet");
    auto rest = line.substr(1);
    if (rest.empty() || !std::isspace(static_cast<unsigned char>(rest.front()))) {
      malformed("claim line without '* ' bullet");
    }
    rest = text::trim(rest);
    if (rest.empty()) malformed("empty claim");
    claims.emplace_back(rest);
  }
  if (claims.empty()) malformed("no claims in reply");
  return claims;
}

Label parse_verification(std::string_view reply) {
  auto j = parse_json(reply);
  if (!j.is_object() || !j.contains("conclusion") ||
      !j["conclusion"].is_string()) {
    malformed("verification reply lacks a string 'conclusion'");
  }
  const auto value = j["conclusion"].get<std::string>();
  const auto c = strip_bold(value);
  if (c == "SUPPORT") return Label::kSupport;
  if (c == "REFUTE") return Label::kRefute;
  if (c == "NOT ENOUGH INFO") return Label::kNotEnoughInfo;
  malformed("unknown conclusion '" + value + "'");
}

std::vector<VerdictOutcome> parse_checklist_verdicts(std::string_view reply,
                                                     std::size_t expected_items) {
  auto j = parse_json(reply);
  if (!j.is_array()) malformed("checklist reply is not a JSON list");
  if (j.size() != expected_items) {
    malformed("checklist reply has " + std::to_string(j.size()) +
              " entries for " + std::to_string(expected_items) + " items");
  }
  std::vector<VerdictOutcome> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("conclusion") ||
        !e["conclusion"].is_string() || !e.contains("analysis") ||
        !e["analysis"].is_string()) {
      malformed("checklist entry " + std::to_string(i) +
                " needs string 'analysis' and 'conclusion'");
    }
    auto v = verdict_from_string(e["conclusion"].get<std::string>());
    if (!v) {
      malformed("unknown checklist conclusion '" +
                e["conclusion"].get<std::string>() + "'");
    }
    out.push_back({i, *v, e["analysis"].get<std::string>()});
  }
  return out;
}

double parse_truth_label(std::string_view reply) {
  auto s = text::strip_code_fence(reply);
  if (s == "True") return 1.0;
  if (s == "False") return 0.0;
  malformed("truthfulness reply is neither 'True' nor 'False'");
}

double truth_from_logprobs(std::span<const TokenLogprob> top_logprobs) {
  double p_true = 0.0;
  double p_false = 0.0;
  bool seen = false;
  for (const auto& t : top_logprobs) {
    auto tok = text::trim(t.token);
    if (tok == "True") {
      p_true += std::exp(t.logprob);
      seen = true;
    } else if (tok == "False") {
      p_false += std::exp(t.logprob);
      seen = true;
    }
  }
  if (!seen || !(p_true + p_false > 0.0) || !std::isfinite(p_true + p_false)) {
    malformed("no usable True/False token probabilities");
  }
  return p_true / (p_true + p_false);
}

std::vector<std::string> parse_boxed_list(std::string_view reply) {
  constexpr std::string_view kOpen = "\\boxed{";
  auto start = reply.find(kOpen);
  if (start == std::string_view::npos) malformed("no \\boxed{...} list");
  std::size_t i = start + kOpen.size();
  int depth = 1;
  std::size_t end = std::string_view::npos;
  for (; i < reply.size(); ++i) {
    if (reply[i] == '{') ++depth;
    if (reply[i] == '}' && --depth == 0) {
      end = i;
      break;
    }
  }
  if (end == std::string_view::npos) malformed("unterminated \\boxed{...}");
  auto body = reply.substr(start + kOpen.size(), end - start - kOpen.size());
  std::vector<std::string> items;
  for (const auto& raw : text::split_lines(body)) {
    auto line = text::trim(raw);
    if (line.starts_with("- ") || line.starts_with("* ")) {
      line = text::trim(line.substr(2));
    }
    if (!line.empty()) items.emplace_back(line);
  }
  return items;
}

PairRanking parse_rank_list(std::string_view reply) {
  auto s = std::string(text::strip_code_fence(reply));
  if (s.empty() || s.front() != '[' || s.back() != ']') {
    malformed("rank reply is not a list");
  }
  static const std::regex kEntry(
      R"(\{\s*['"]model['"]\s*:\s*['"](model_[12])['"]\s*,\s*['"]rank['"]\s*:\s*['"]?(\d+)['"]?\s*\}|)"
      R"(\{\s*['"]rank['"]\s*:\s*['"]?(\d+)['"]?\s*,\s*['"]model['"]\s*:\s*['"](model_[12])['"]\s*\})");
  int rank_1 = -1;
  int rank_2 = -1;
  std::string rest;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kEntry);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    rest += s.substr(last, static_cast<std::size_t>(m.position()) - last);
    last = static_cast<std::size_t>(m.position() + m.length());
    const bool model_first = m[1].matched;
    const std::string model = model_first ? m[1].str() : m[4].str();
    const int rank = std::stoi(model_first ? m[2].str() : m[3].str());
    int& slot = model == "model_1" ? rank_1 : rank_2;
    if (slot != -1) malformed("model listed twice in rank reply");
    slot = rank;
  }
  rest += s.substr(last);
  for (char c : rest) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '[' && c != ']' &&
        c != ',') {
      malformed("unexpected content in rank reply");
    }
  }
  if (rank_1 < 1 || rank_2 < 1) malformed("rank reply must rank model_1 and model_2");
  return {rank_1, rank_2};
}

std::vector<Claim> extract_claims(const ClaimExtractor& extractor,
                                  std::string_view text,
                                  const std::string& source_response_id) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot extract claims from empty text",
                source_response_id);
  }
  std::vector<Claim> claims;
  const auto texts = extractor.extract(text);
  claims.reserve(texts.size());
  for (std::size_t j = 0; j < texts.size(); ++j) {
    Claim c;
    c.id = (source_response_id.empty() ? "" : source_response_id + ":") + "c" +
           std::to_string(j);
    c.text = texts[j];
    c.source_response_id = source_response_id;
    if (text::trim(c.text).empty()) {
      throw Error(ErrorCode::kMalformedJudgeOutput, "extractor returned an empty claim",
                  source_response_id);
    }
    claims.push_back(std::move(c));
  }
  return claims;
}

Label verify_claim(const ClaimVerifier& verifier, const Claim& claim,
                   std::span<const std::string> evidence) {
  return verifier.verify(claim, evidence);
}

ChecklistVerdicts classify_checklist(const ChecklistJudge& judge,
                                     std::string_view query,
                                     std::string_view answer,
                                     const Checklist& checklist) {
  if (checklist.empty()) {
    throw Error(ErrorCode::kEmptyChecklist, "checklist has no items",
                checklist.query_id);
  }
  auto v = judge.classify(query, answer, checklist);
  v.query_id = checklist.query_id;
  v.validate(checklist.items.size());
  return v;
}

double score_truthfulness(const TruthfulnessScorer& scorer, const Claim& claim) {
  if (text::trim(claim.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "claim text is empty", claim.id);
  }
  const double p = scorer.score(claim);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "truth probability outside [0,1]",
                claim.id);
  }
  return p;
}

double score_general(const GeneralScorer& scorer, std::string_view query,
                     std::string_view answer) {
  const double v = scorer.score(query, answer);
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kMalformedJudgeOutput, "general score is not finite");
  }
  return v;
}

}  // namespace factalign
