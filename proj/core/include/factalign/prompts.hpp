#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace factalign {

// Template names; each maps to core/prompts/<name>.txt.
namespace prompt_names {
inline constexpr std::string_view kBaseGeneration = "base_generation";
inline constexpr std::string_view kClaimExtraction = "claim_extraction";
inline constexpr std::string_view kClaimVerification = "claim_verification";
inline constexpr std::string_view kClaimPrioritization = "claim_prioritization";
inline constexpr std::string_view kRlZero = "rl_zero";
inline constexpr std::string_view kTruthfulness = "truthfulness";
inline constexpr std::string_view kChecklistVerification = "checklist_verification";
inline constexpr std::string_view kWinRate = "win_rate";
}  // namespace prompt_names

// A placeholder is `{name}` with name matching [a-z][a-z0-9_]*. Other braces
// (JSON examples inside prompts) are literal text.
struct PromptTemplate {
  std::string name;
  std::string body;
  std::set<std::string> required_placeholders;

  static PromptTemplate from_body(std::string name, std::string body);
};

using Bindings = std::map<std::string, std::string, std::less<>>;

// Single pass: bound values are inserted verbatim and never re-scanned.
// Throws MissingBinding naming the first unbound placeholder.
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings);

class TemplateSet {
 public:
  // Templates compiled into the library.
  static TemplateSet builtin();
  // Built-ins, with any <name>.txt found in `dir` taking precedence.
  static TemplateSet with_overrides(const std::filesystem::path& dir);

  const PromptTemplate& get(std::string_view name) const;
  const std::map<std::string, PromptTemplate, std::less<>>& all() const {
    return templates_;
  }

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace factalign
