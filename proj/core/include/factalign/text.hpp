#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace factalign::text {

std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercase ASCII and collapse whitespace runs to a single space.
std::string normalize(std::string_view s);

// Index/query terms: whitespace tokens, lowercased, stripped of leading and
// trailing ASCII punctuation; empty results dropped.
std::vector<std::string> terms(std::string_view s);

// Removes a surrounding ``` fence (with optional language tag) if present.
std::string_view strip_code_fence(std::string_view s);

// Marker that turns a verbatim mention into a negated one for the reference
// judges.
inline constexpr std::string_view kNegationMarker = "NOT TRUE:";

enum class Mention { kAbsent, kAsserted, kNegated };

// Looks for `needle` as a contiguous run of whitespace tokens inside
// `haystack`. A run immediately preceded by the tokens "NOT" "TRUE:" counts as
// negated; any negated occurrence wins over asserted ones.
Mention find_mention(std::string_view haystack, std::string_view needle);

// FNV-1a, stable across platforms; used to derive per-item seeds.
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0);

}  // namespace factalign::text
