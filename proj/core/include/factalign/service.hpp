#pragma once
// Reward scoring for RL trainers: a library entry point, a batch form with
// per-item error records, and an HTTP front end.

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "factalign/claims.hpp"
#include "factalign/config.hpp"
#include "factalign/error.hpp"
#include "factalign/reward.hpp"

namespace factalign {

struct ScoreRequest {
  std::string request_id;
  std::string query_id;
  std::string query;  // query text shown to the judges
  std::string raw_text;
  std::optional<Checklist> checklist;
};

struct ScoreResponse {
  std::string request_id;
  RewardBreakdown breakdown;
  std::optional<ChecklistVerdicts> verdicts;
  std::optional<std::vector<Claim>> claims;
  double latency_ms = 0.0;
};

// Exactly one of response / error is set.
struct ScoreResult {
  std::string request_id;
  std::optional<ScoreResponse> response;
  std::optional<Error> error;
};

ScoreRequest score_request_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ScoreRequest& r);
// latency_ms is omitted unless `with_latency`, so outputs stay reproducible.
nlohmann::ordered_json to_json(const ScoreResponse& r, bool with_latency = false);
nlohmann::ordered_json to_json(const ScoreResult& r, bool with_latency = false);
nlohmann::ordered_json error_record(const std::string& request_id, const Error& e);

// Checklists by query id. Many readers, one writer.
class ChecklistStore {
 public:
  void put(Checklist c);
  void put_all(std::vector<Checklist> cs);
  std::optional<Checklist> get(const std::string& query_id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Checklist> by_query_;
};

struct ScoringOptions {
  RewardMode mode = RewardMode::kBoth;
  RewardWeights weights{};
  LengthPolicy length{};
  bool truth_variant = false;
  std::size_t batch_concurrency = 4;

  static ScoringOptions from_config(const AppConfig& c);
};

class RewardService {
 public:
  // Throws InvalidConfig if a judge the mode needs is missing.
  RewardService(JudgeSet judges, ScoringOptions options,
                std::shared_ptr<ChecklistStore> store = std::make_shared<ChecklistStore>());

  // parse -> checklist verdicts -> claims -> truthfulness -> general -> combine.
  // The request's checklist wins over the store. Errors carry the request id.
  ScoreResponse score(const ScoreRequest& request) const;
  // Results in request order; a failed item never stops the others.
  std::vector<ScoreResult> score_batch(const std::vector<ScoreRequest>& requests) const;

  ChecklistStore& checklists() { return *store_; }
  const ScoringOptions& options() const { return options_; }

 private:
  JudgeSet judges_;
  ScoringOptions options_;
  std::shared_ptr<ChecklistStore> store_;
};

// HTTP front end:
//   POST /score        ScoreRequest -> ScoreResponse | error record
//   POST /score_batch  {"requests": [...]} -> {"results": [...]}
//   PUT  /checklists   JSONL checklists -> {"loaded": n, "total": m}
//   GET  /healthz      {"status": "ok", "checklists": m}
class ScoreServer {
 public:
  explicit ScoreServer(RewardService& service);
  ~ScoreServer();
  ScoreServer(const ScoreServer&) = delete;
  ScoreServer& operator=(const ScoreServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // Blocks until run() is accepting connections.
  void wait_until_ready();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status used for an error code.
int http_status(ErrorCode code);

}  // namespace factalign
