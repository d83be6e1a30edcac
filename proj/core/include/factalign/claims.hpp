#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace factalign {

enum class Label { kSupport, kRefute, kNotEnoughInfo };

// "SUPPORT", "REFUTE", "NOT_ENOUGH_INFO" (the on-disk spelling).
std::string_view to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

struct Claim {
  std::string id;
  std::string text;
  std::string source_response_id;
  std::optional<Label> label;
  std::optional<double> truth_prob;

  // Throws InvalidArgument on empty text or truth_prob outside [0,1].
  void validate() const;
};

// Curated key facts for one query. `sources`, when non-empty, is aligned with
// `items` and names the claim each item was taken from ("" if unknown).
struct Checklist {
  std::string query_id;
  std::vector<std::string> items;
  std::vector<std::string> sources;

  bool empty() const { return items.empty(); }
};

}  // namespace factalign
