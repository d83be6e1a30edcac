#include "factalign/text.hpp"

#include <algorithm>
#include <cctype>

namespace factalign::text {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    auto line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string normalize(std::string_view s) {
  std::string out;
  for (const auto& tok : split_whitespace(s)) {
    if (!out.empty()) out += ' ';
    for (char c : tok) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::vector<std::string> terms(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : split_whitespace(s)) {
    std::string_view v = tok;
    while (!v.empty() && is_punct(v.front())) v.remove_prefix(1);
    while (!v.empty() && is_punct(v.back())) v.remove_suffix(1);
    if (v.empty()) continue;
    std::string t;
    t.reserve(v.size());
    for (char c : v) {
      t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string_view strip_code_fence(std::string_view s) {
  s = trim(s);
  if (!s.starts_with("```")) return s;
  auto first_nl = s.find('\n');
  if (first_nl == std::string_view::npos) return s;
  auto body = s.substr(first_nl + 1);
  body = trim(body);
  if (!body.ends_with("```")) return s;
  body.remove_suffix(3);
  return trim(body);
}

Mention find_mention(std::string_view haystack, std::string_view needle) {
  const auto hay = split_whitespace(haystack);
  const auto pat = split_whitespace(needle);
  if (pat.empty() || pat.size() > hay.size()) return Mention::kAbsent;
  Mention result = Mention::kAbsent;
  for (std::size_t i = 0; i + pat.size() <= hay.size(); ++i) {
    if (!std::equal(pat.begin(), pat.end(), hay.begin() + i)) continue;
    if (i >= 2 && hay[i - 2] == "NOT" && hay[i - 1] == "TRUE:") {
      return Mention::kNegated;
    }
    result = Mention::kAsserted;
  }
  return result;
}

std::uint64_t stable_hash(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace factalign::text
