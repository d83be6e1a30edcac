#pragma once
// Lexical retrieval over a chunked corpus.
//
// Documents are split into whitespace tokens and cut into sliding windows of
// chunk_size tokens advancing by chunk_size - chunk_overlap. A chunk's score
// for a query is the sum, over distinct query terms it contains, of
// ln(1 + N / df(term)) with N the number of chunks. Results with score 0 are
// dropped; ties are broken by (doc_id, chunk_id).

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace factalign {

struct RetrievalParams {
  std::size_t chunk_size = 300;
  std::size_t chunk_overlap = 20;
  std::size_t top_k = 10;

  // Throws InvalidArgument unless chunk_size >= 1, overlap < chunk_size and
  // top_k >= 1.
  void validate() const;
};

struct Document {
  std::string doc_id;
  std::string text;
};

struct Chunk {
  std::string doc_id;
  std::size_t chunk_id = 0;     // position within the document
  std::size_t token_begin = 0;  // [begin, end) in document tokens
  std::size_t token_end = 0;
  std::string text;             // tokens joined by single spaces
};

struct ScoredChunk {
  const Chunk* chunk = nullptr;
  double score = 0.0;
};

class RetrievalIndex {
 public:
  // Throws EmptyCorpus when `docs` yields no chunk.
  static RetrievalIndex build(const std::vector<Document>& docs,
                              const RetrievalParams& params = {});

  // At most k chunks, best first. k must be >= 1.
  std::vector<ScoredChunk> retrieve(std::string_view query, std::size_t k) const;
  std::vector<ScoredChunk> retrieve(std::string_view query) const {
    return retrieve(query, params_.top_k);
  }

  const std::vector<Chunk>& chunks() const { return chunks_; }
  const RetrievalParams& params() const { return params_; }
  // Indices into chunks() of chunks containing `term` (already normalized).
  const std::vector<std::size_t>& postings(const std::string& term) const;

  // Chunks and parameters; postings are rebuilt on load.
  nlohmann::ordered_json to_json() const;
  static RetrievalIndex from_json(const nlohmann::json& j);

 private:
  void index_chunks();

  RetrievalParams params_;
  std::vector<Chunk> chunks_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

// Token windows [begin, end) for a document of `n_tokens` tokens.
std::vector<std::pair<std::size_t, std::size_t>> chunk_windows(
    std::size_t n_tokens, const RetrievalParams& params);

}  // namespace factalign
