#pragma once

#include <span>
#include <string_view>
#include <utility>

namespace factalign::detail {

// Generated at build time from core/prompts/*.txt.
std::span<const std::pair<std::string_view, std::string_view>> builtin_prompt_files();

}  // namespace factalign::detail
