#include "factalign/io.hpp"

#include <fstream>

#include "factalign/error.hpp"

namespace factalign::io {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad or missing field '") + name + "'");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
  if (!j.contains(name) || j[name].is_null()) return std::nullopt;
  return field<T>(j, name);
}

}  // namespace

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open for reading", path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, std::string("invalid JSON: ") + e.what(),
                  path.string() + ":" + std::to_string(lineno));
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing", path.string());
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed", path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open for reading", path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("invalid JSON: ") + e.what(), path.string());
  }
}

void write_json(const std::filesystem::path& path, const ojson& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing", path.string());
  out << value.dump(2) << '\n';
}

ojson to_json(const QueryRecord& q) {
  ojson j = {{"id", q.id}, {"text", q.text}, {"source", to_string(q.source)}};
  if (q.fewshot_context) j["fewshot_context"] = *q.fewshot_context;
  return j;
}

QueryRecord query_from_json(const json& j) {
  QueryRecord q;
  q.id = field<std::string>(j, "id");
  q.text = field<std::string>(j, "text");
  if (q.text.empty()) throw Error(ErrorCode::kIo, "query text is empty", q.id);
  if (auto s = optional_field<std::string>(j, "source")) {
    auto src = query_source_from_string(*s);
    if (!src) throw Error(ErrorCode::kIo, "unknown query source '" + *s + "'", q.id);
    q.source = *src;
  }
  q.fewshot_context = optional_field<std::string>(j, "fewshot_context");
  return q;
}

ojson to_json(const ResponseRecord& r) {
  return {{"query_id", r.query_id}, {"response_id", r.response_id}, {"text", r.text}};
}

ResponseRecord response_from_json(const json& j) {
  return {field<std::string>(j, "query_id"), field<std::string>(j, "response_id"),
          field<std::string>(j, "text")};
}

ojson to_json(const Claim& c) {
  ojson j = {{"id", c.id}, {"source_response_id", c.source_response_id}, {"text", c.text}};
  if (c.label) j["label"] = to_string(*c.label);
  if (c.truth_prob) j["truth_prob"] = *c.truth_prob;
  return j;
}

Claim claim_from_json(const json& j) {
  Claim c;
  c.id = field<std::string>(j, "id");
  c.source_response_id = j.value("source_response_id", "");
  c.text = field<std::string>(j, "text");
  if (auto l = optional_field<std::string>(j, "label")) {
    c.label = label_from_string(*l);
    if (!c.label) throw Error(ErrorCode::kIo, "unknown label '" + *l + "'", c.id);
  }
  c.truth_prob = optional_field<double>(j, "truth_prob");
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kIo, e.message(), c.id);
  }
  return c;
}

ojson to_json(const Checklist& c) {
  ojson j = {{"query_id", c.query_id}, {"items", c.items}};
  if (!c.sources.empty()) j["sources"] = c.sources;
  return j;
}

Checklist checklist_from_json(const json& j) {
  Checklist c;
  c.query_id = field<std::string>(j, "query_id");
  c.items = field<std::vector<std::string>>(j, "items");
  if (j.contains("sources")) c.sources = field<std::vector<std::string>>(j, "sources");
  if (!c.sources.empty() && c.sources.size() != c.items.size()) {
    throw Error(ErrorCode::kIo, "sources not aligned with items", c.query_id);
  }
  return c;
}

ojson to_json(const RMExample& e) {
  return {{"claim_text", e.claim_text},
          {"label", e.label ? "True" : "False"},
          {"origin", to_string(e.origin)},
          {"duplicate_index", e.duplicate_index},
          {"claim_id", e.claim_id}};
}

ojson to_json(const ChecklistVerdicts& v) {
  ojson outcomes = ojson::array();
  for (const auto& o : v.outcomes) {
    outcomes.push_back({{"item_index", o.item_index},
                        {"verdict", to_string(o.verdict)},
                        {"analysis", o.analysis}});
  }
  return {{"query_id", v.query_id}, {"outcomes", std::move(outcomes)}};
}

ojson to_json(const RewardBreakdown& b) {
  return {{"recall", b.recall},
          {"precision", b.precision},
          {"checklist", b.checklist},
          {"truth", b.truth},
          {"truth_variant", b.truth_variant},
          {"general", b.general},
          {"format", b.format},
          {"length_penalty", b.length_penalty},
          {"fact", b.fact},
          {"total", b.total},
          {"mode", to_string(b.mode)},
          {"truth_variant_used", b.truth_variant_used}};
}

Document document_from_json(const json& j) {
  Document d;
  d.doc_id = j.contains("doc_id") ? field<std::string>(j, "doc_id")
                                  : field<std::string>(j, "id");
  d.text = field<std::string>(j, "text");
  return d;
}

}  // namespace factalign::io
