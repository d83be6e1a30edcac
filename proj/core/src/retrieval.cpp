#include "factalign/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "factalign/error.hpp"
#include "factalign/text.hpp"

namespace factalign {

void RetrievalParams::validate() const {
  if (chunk_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  }
  if (chunk_overlap >= chunk_size) {
    throw Error(ErrorCode::kInvalidArgument, "chunk_overlap must be < chunk_size");
  }
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_windows(
    std::size_t n_tokens, const RetrievalParams& params) {
  params.validate();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n_tokens == 0) return out;
  const std::size_t stride = params.chunk_size - params.chunk_overlap;
  for (std::size_t begin = 0;; begin += stride) {
    const std::size_t end = std::min(begin + params.chunk_size, n_tokens);
    out.emplace_back(begin, end);
    if (end == n_tokens) break;
  }
  return out;
}

RetrievalIndex RetrievalIndex::build(const std::vector<Document>& docs,
                                     const RetrievalParams& params) {
  params.validate();
  RetrievalIndex index;
  index.params_ = params;
  for (const auto& doc : docs) {
    const auto tokens = text::split_whitespace(doc.text);
    std::size_t chunk_id = 0;
    for (auto [b, e] : chunk_windows(tokens.size(), params)) {
      Chunk c;
      c.doc_id = doc.doc_id;
      c.chunk_id = chunk_id++;
      c.token_begin = b;
      c.token_end = e;
      c.text = text::join({tokens.begin() + static_cast<std::ptrdiff_t>(b),
                           tokens.begin() + static_cast<std::ptrdiff_t>(e)},
                          " ");
      index.chunks_.push_back(std::move(c));
    }
  }
  if (index.chunks_.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no indexable text");
  }
  index.index_chunks();
  return index;
}

void RetrievalIndex::index_chunks() {
  postings_.clear();
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    auto ts = text::terms(chunks_[i].text);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (auto& t : ts) postings_[std::move(t)].push_back(i);
  }
}

const std::vector<std::size_t>& RetrievalIndex::postings(const std::string& term) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = postings_.find(term);
  return it == postings_.end() ? kEmpty : it->second;
}

std::vector<ScoredChunk> RetrievalIndex::retrieve(std::string_view query,
                                                  std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  // Sorted distinct terms: fixed summation order keeps scores reproducible.
  std::set<std::string> qterms;
  for (auto& t : text::terms(query)) qterms.insert(std::move(t));

  const double n = static_cast<double>(chunks_.size());
  std::unordered_map<std::size_t, double> scores;
  for (const auto& t : qterms) {
    const auto& post = postings(t);
    if (post.empty()) continue;
    const double idf = std::log(1.0 + n / static_cast<double>(post.size()));
    for (auto idx : post) scores[idx] += idf;
  }

  std::vector<ScoredChunk> out;
  out.reserve(scores.size());
  for (auto [idx, s] : scores) out.push_back({&chunks_[idx], s});
  auto better = [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk->doc_id != b.chunk->doc_id) return a.chunk->doc_id < b.chunk->doc_id;
    return a.chunk->chunk_id < b.chunk->chunk_id;
  };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k),
                      out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

nlohmann::ordered_json RetrievalIndex::to_json() const {
  nlohmann::ordered_json chunks = nlohmann::ordered_json::array();
  for (const auto& c : chunks_) {
    chunks.push_back({{"doc_id", c.doc_id},
                      {"chunk_id", c.chunk_id},
                      {"token_begin", c.token_begin},
                      {"token_end", c.token_end},
                      {"text", c.text}});
  }
  return {{"parameters",
           {{"chunk_size", params_.chunk_size},
            {"chunk_overlap", params_.chunk_overlap},
            {"top_k", params_.top_k}}},
          {"chunks", std::move(chunks)}};
}

RetrievalIndex RetrievalIndex::from_json(const nlohmann::json& j) {
  RetrievalIndex index;
  try {
    const auto& p = j.at("parameters");
    index.params_.chunk_size = p.at("chunk_size").get<std::size_t>();
    index.params_.chunk_overlap = p.at("chunk_overlap").get<std::size_t>();
    index.params_.top_k = p.at("top_k").get<std::size_t>();
    index.params_.validate();
    for (const auto& c : j.at("chunks")) {
      index.chunks_.push_back({c.at("doc_id").get<std::string>(),
                               c.at("chunk_id").get<std::size_t>(),
                               c.at("token_begin").get<std::size_t>(),
                               c.at("token_end").get<std::size_t>(),
                               c.at("text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad index file: ") + e.what());
  }
  if (index.chunks_.empty()) throw Error(ErrorCode::kEmptyCorpus, "index has no chunks");
  index.index_chunks();
  return index;
}

}  // namespace factalign
