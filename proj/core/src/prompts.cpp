#include "factalign/prompts.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "factalign/error.hpp"
#include "prompts_builtin.hpp"

namespace factalign {

namespace {

bool is_name_start(char c) { return c >= 'a' && c <= 'z'; }
bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '_';
}

// Calls on_text(literal) and on_slot(name) in body order.
template <typename OnText, typename OnSlot>
void scan(std::string_view body, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  std::size_t literal_start = 0;
  while (i < body.size()) {
    if (body[i] == '{' && i + 1 < body.size() && is_name_start(body[i + 1])) {
      std::size_t j = i + 1;
      while (j < body.size() && is_name_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        on_text(body.substr(literal_start, i - literal_start));
        on_slot(body.substr(i + 1, j - i - 1));
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(body.substr(literal_start));
}

}  // namespace

PromptTemplate PromptTemplate::from_body(std::string name, std::string body) {
  PromptTemplate t{std::move(name), std::move(body), {}};
  scan(
      t.body, [](std::string_view) {},
      [&](std::string_view slot) { t.required_placeholders.emplace(slot); });
  return t;
}

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings) {
  for (const auto& name : tmpl.required_placeholders) {
    if (bindings.find(name) == bindings.end()) {
      throw Error(ErrorCode::kMissingBinding, name, tmpl.name);
    }
  }
  std::string out;
  out.reserve(tmpl.body.size());
  scan(
      tmpl.body, [&](std::string_view lit) { out += lit; },
      [&](std::string_view slot) { out += bindings.find(slot)->second; });
  return out;
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (const auto& [name, body] : detail::builtin_prompt_files()) {
    set.templates_.emplace(std::string(name),
                           PromptTemplate::from_body(std::string(name), std::string(body)));
  }
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
  auto set = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIo, "prompt directory not found", dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    auto name = entry.path().stem().string();
    set.templates_.insert_or_assign(name, PromptTemplate::from_body(name, ss.str()));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kInvalidConfig, "unknown prompt template",
                std::string(name));
  }
  return it->second;
}

}  // namespace factalign
