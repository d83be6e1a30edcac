#pragma once
// JSONL persistence. One record per line, UTF-8, fields in schema order.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factalign/claims.hpp"
#include "factalign/pipeline.hpp"
#include "factalign/retrieval.hpp"
#include "factalign/reward.hpp"

namespace factalign::io {

using ojson = nlohmann::ordered_json;

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& rows);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const ojson& value);

// Record codecs. from_* throw Error(kIo) naming the offending field.
ojson to_json(const QueryRecord& q);
QueryRecord query_from_json(const nlohmann::json& j);
ojson to_json(const ResponseRecord& r);
ResponseRecord response_from_json(const nlohmann::json& j);
ojson to_json(const Claim& c);
Claim claim_from_json(const nlohmann::json& j);
ojson to_json(const Checklist& c);
Checklist checklist_from_json(const nlohmann::json& j);
ojson to_json(const RMExample& e);
ojson to_json(const ChecklistVerdicts& v);
ojson to_json(const RewardBreakdown& b);
Document document_from_json(const nlohmann::json& j);

template <typename T, typename Decode>
std::vector<T> read_records(const std::filesystem::path& path, Decode decode) {
  std::vector<T> out;
  for (const auto& j : read_jsonl(path)) out.push_back(decode(j));
  return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& items) {
  std::vector<ojson> rows;
  rows.reserve(items.size());
  for (const auto& x : items) rows.push_back(to_json(x));
  write_jsonl(path, rows);
}

}  // namespace factalign::io
