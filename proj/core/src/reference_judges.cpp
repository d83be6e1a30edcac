#include "factalign/reference_judges.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "factalign/error.hpp"
#include "factalign/rng.hpp"
#include "factalign/text.hpp"

namespace factalign::reference {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open fixture", path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad fixture JSON: ") + e.what(),
                path.string());
  }
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == s.size();
    if (!at_end && !std::isspace(static_cast<unsigned char>(s[i + 1]))) continue;
    auto sentence = text::trim(s.substr(start, i + 1 - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = i + 1;
  }
  auto tail = text::trim(s.substr(std::min(start, s.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

}  // namespace

const std::vector<std::string>& Extractor::subjective_markers() {
  static const std::vector<std::string> kMarkers = {
      "i",         "i'm",      "i've",     "me",       "my",       "we",
      "love",      "like",     "hate",     "think",    "believe",  "feel",
      "opinion",   "perhaps",  "maybe",    "probably", "beautiful", "wonderful",
      "amazing",   "awesome",  "terrible", "best",     "worst",    "favorite",
      "favourite", "should",   "hope",     "wish",     "seems",    "arguably"};
  return kMarkers;
}

std::vector<std::string> Extractor::extract(std::string_view input) const {
  static const std::set<std::string> kMarkerSet(subjective_markers().begin(),
                                                subjective_markers().end());
  std::vector<std::string> claims;
  for (auto& sentence : split_sentences(input)) {
    bool subjective = false;
    for (const auto& t : text::terms(sentence)) {
      if (kMarkerSet.contains(t)) {
        subjective = true;
        break;
      }
    }
    if (!subjective) claims.push_back(std::move(sentence));
  }
  return claims;
}

Label Verifier::verify(const Claim& claim,
                       std::span<const std::string> evidence) const {
  bool supported = false;
  for (const auto& chunk : evidence) {
    switch (text::find_mention(chunk, claim.text)) {
      case text::Mention::kNegated: return Label::kRefute;
      case text::Mention::kAsserted: supported = true; break;
      case text::Mention::kAbsent: break;
    }
  }
  return supported ? Label::kSupport : Label::kNotEnoughInfo;
}

ChecklistVerdicts ChecklistVerifier::classify(std::string_view,
                                              std::string_view answer,
                                              const Checklist& checklist) const {
  ChecklistVerdicts v;
  v.query_id = checklist.query_id;
  for (std::size_t i = 0; i < checklist.items.size(); ++i) {
    VerdictOutcome o;
    o.item_index = i;
    switch (text::find_mention(answer, checklist.items[i])) {
      case text::Mention::kNegated:
        o.verdict = Verdict::kContradictory;
        o.analysis = "negated mention";
        break;
      case text::Mention::kAsserted:
        o.verdict = Verdict::kConsistent;
        o.analysis = "verbatim mention";
        break;
      case text::Mention::kAbsent:
        o.verdict = Verdict::kMissing;
        o.analysis = "not mentioned";
        break;
    }
    v.outcomes.push_back(std::move(o));
  }
  return v;
}

TruthTable::TruthTable(std::map<std::string, double, std::less<>> probs,
                       std::optional<double> default_prob)
    : probs_(std::move(probs)), default_(default_prob) {
  for (const auto& [claim, p] : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "fixture probability outside [0,1]", claim);
    }
  }
}

TruthTable TruthTable::from_file(const std::filesystem::path& path) {
  const auto j = read_json(path);
  std::map<std::string, double, std::less<>> probs;
  const json table = j.value("probs", json::object());
  for (const auto& [k, v] : table.items()) {
    probs.emplace(k, v.get<double>());
  }
  std::optional<double> def;
  if (j.contains("default")) def = j["default"].get<double>();
  return TruthTable(std::move(probs), def);
}

double TruthTable::score(const Claim& claim) const {
  auto it = probs_.find(claim.text);
  if (it != probs_.end()) return it->second;
  if (default_) return *default_;
  throw Error(ErrorCode::kMalformedJudgeOutput, "claim not in truth fixture", claim.id);
}

GeneralTable::GeneralTable(std::map<std::pair<std::string, std::string>, double> scores,
                           std::optional<double> default_score)
    : scores_(std::move(scores)), default_(default_score) {}

GeneralTable GeneralTable::from_file(const std::filesystem::path& path,
                                     std::optional<double> default_override) {
  const auto j = read_json(path);
  std::map<std::pair<std::string, std::string>, double> scores;
  const json rows = j.value("scores", json::array());
  for (const auto& e : rows) {
    scores[{e.at("query").get<std::string>(), e.at("answer").get<std::string>()}] =
        e.at("score").get<double>();
  }
  std::optional<double> def = default_override;
  if (!def && j.contains("default")) def = j["default"].get<double>();
  return GeneralTable(std::move(scores), def);
}

double GeneralTable::score(std::string_view query, std::string_view answer) const {
  auto it = scores_.find({std::string(query), std::string(answer)});
  if (it != scores_.end()) return it->second;
  if (default_) return *default_;
  throw Error(ErrorCode::kJudgeUnavailable, "no fixture score for this pair");
}

std::vector<std::string> Curator::curate(std::string_view,
                                         const std::vector<Claim>& claims) const {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& c : claims) {
    if (seen.insert(text::normalize(c.text)).second) {
      out.emplace_back(text::trim(c.text));
    }
  }
  return out;
}

CannedGenerator::CannedGenerator(
    std::map<std::string, std::vector<std::string>, std::less<>> answers)
    : answers_(std::move(answers)) {}

CannedGenerator CannedGenerator::from_file(const std::filesystem::path& path) {
  const auto j = read_json(path);
  std::map<std::string, std::vector<std::string>, std::less<>> answers;
  for (const auto& [q, list] : j.items()) {
    answers.emplace(q, list.get<std::vector<std::string>>());
  }
  return CannedGenerator(std::move(answers));
}

std::string CannedGenerator::generate(std::string_view query, std::string_view,
                                      std::uint64_t seed) const {
  auto it = answers_.find(query);
  if (it == answers_.end() || it->second.empty()) {
    throw Error(ErrorCode::kJudgeUnavailable, "no canned answer for query",
                std::string(query));
  }
  Rng rng(seed);
  return it->second[rng.below(it->second.size())];
}

PairRanking LengthPairJudge::rank(std::string_view, std::string_view output_1,
                                  std::string_view output_2) const {
  const auto a = text::split_whitespace(output_1).size();
  const auto b = text::split_whitespace(output_2).size();
  if (a == b) return {1, 1};
  return a > b ? PairRanking{1, 2} : PairRanking{2, 1};
}

}  // namespace factalign::reference
