#include "factalign/service.hpp"

#include <chrono>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "factalign/concurrency.hpp"
#include "factalign/io.hpp"
#include "factalign/judge.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;
using nlohmann::ordered_json;

// --- records -----------------------------------------------------------------

ScoreRequest score_request_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request must be an object");
  ScoreRequest r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    r.query_id = j.value("query_id", "");
    r.query = j.value("query", "");
    r.raw_text = j.at("raw_text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad score request: ") + e.what(),
                j.value("request_id", ""));
  }
  if (j.contains("checklist") && !j["checklist"].is_null()) {
    try {
      json cj = j["checklist"];
      if (!cj.contains("query_id")) cj["query_id"] = r.query_id;
      r.checklist = io::checklist_from_json(cj);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidArgument, e.message(), r.request_id);
    }
  }
  return r;
}

ordered_json to_json(const ScoreRequest& r) {
  ordered_json j = {{"request_id", r.request_id},
                    {"query_id", r.query_id},
                    {"query", r.query},
                    {"raw_text", r.raw_text}};
  if (r.checklist) j["checklist"] = io::to_json(*r.checklist);
  return j;
}

ordered_json to_json(const ScoreResponse& r, bool with_latency) {
  ordered_json j = {{"request_id", r.request_id}, {"breakdown", io::to_json(r.breakdown)}};
  if (r.verdicts) j["verdicts"] = io::to_json(*r.verdicts);
  if (r.claims) {
    ordered_json claims = ordered_json::array();
    for (const auto& c : *r.claims) claims.push_back(io::to_json(c));
    j["claims"] = std::move(claims);
  }
  if (with_latency) j["latency_ms"] = r.latency_ms;
  return j;
}

ordered_json error_record(const std::string& request_id, const Error& e) {
  return {{"request_id", request_id},
          {"error",
           {{"code", to_string(e.code())}, {"message", e.message()}, {"context", e.context()}}}};
}

ordered_json to_json(const ScoreResult& r, bool with_latency) {
  if (r.response) return to_json(*r.response, with_latency);
  return error_record(r.request_id, *r.error);
}

// --- checklist store -----------------------------------------------------------

void ChecklistStore::put(Checklist c) {
  std::unique_lock lock(mu_);
  auto id = c.query_id;
  by_query_.insert_or_assign(std::move(id), std::move(c));
}

void ChecklistStore::put_all(std::vector<Checklist> cs) {
  std::unique_lock lock(mu_);
  for (auto& c : cs) {
    auto id = c.query_id;
    by_query_.insert_or_assign(std::move(id), std::move(c));
  }
}

std::optional<Checklist> ChecklistStore::get(const std::string& query_id) const {
  std::shared_lock lock(mu_);
  auto it = by_query_.find(query_id);
  if (it == by_query_.end()) return std::nullopt;
  return it->second;
}

std::size_t ChecklistStore::size() const {
  std::shared_lock lock(mu_);
  return by_query_.size();
}

// --- scoring -------------------------------------------------------------------

ScoringOptions ScoringOptions::from_config(const AppConfig& c) {
  ScoringOptions o;
  o.mode = c.reward.mode;
  o.weights = c.reward.weights;
  o.length = c.reward.length;
  o.truth_variant = c.reward.truth_variant;
  o.batch_concurrency = c.server.batch_concurrency;
  return o;
}

RewardService::RewardService(JudgeSet judges, ScoringOptions options,
                             std::shared_ptr<ChecklistStore> store)
    : judges_(std::move(judges)), options_(options), store_(std::move(store)) {
  options_.length.validate();
  if (options_.mode == RewardMode::kBoth) options_.weights.validate();
  for (const auto& role : required_roles(options_.mode, options_.truth_variant)) {
    const bool present = (role == roles::kChecklist && judges_.checklist) ||
                         (role == roles::kExtractor && judges_.extractor) ||
                         (role == roles::kTruth && judges_.truth) ||
                         (role == roles::kGeneral && judges_.general);
    if (!present) throw Error(ErrorCode::kInvalidConfig, "no judge for role", role);
  }
}

ScoreResponse RewardService::score(const ScoreRequest& req) const {
  const auto start = std::chrono::steady_clock::now();
  const bool needs_checklist =
      options_.mode != RewardMode::kTruthOnly || options_.truth_variant;
  const bool needs_truth = options_.mode != RewardMode::kChecklistOnly;

  ScoreResponse out;
  out.request_id = req.request_id;
  try {
    const auto parsed = parse_structured_response(req.raw_text);
    const std::string answer = parsed.answer.value_or("");
    RewardInputs in;
    in.response = &parsed;

    std::optional<Checklist> checklist = req.checklist;
    if (needs_checklist) {
      if (!checklist) checklist = store_->get(req.query_id);
      if (!checklist || checklist->empty()) {
        throw Error(ErrorCode::kEmptyChecklist, "no checklist for query '" + req.query_id + "'");
      }
      out.verdicts = classify_checklist(*judges_.checklist, req.query, answer, *checklist);
      if (options_.mode != RewardMode::kTruthOnly) in.verdicts = out.verdicts;
    }

    if (needs_truth) {
      std::vector<Claim> claims;
      if (!text::trim(answer).empty()) {
        claims = extract_claims(*judges_.extractor, answer, req.request_id);
      }
      auto probs = parallel_map_or_throw(
          claims.size(), judges_.truth->concurrency_limit(),
          [&](std::size_t i) { return score_truthfulness(*judges_.truth, claims[i]); });
      for (std::size_t i = 0; i < claims.size(); ++i) claims[i].truth_prob = probs[i];

      if (options_.truth_variant) {
        // Claims the checklist does not cover: classify the answer's claims
        // against a pseudo-answer made of the checklist items.
        std::vector<double> missing;
        if (!claims.empty()) {
          Checklist pseudo{req.query_id, {}, {}};
          for (const auto& c : claims) pseudo.items.push_back(c.text);
          const auto v = classify_checklist(*judges_.checklist, req.query,
                                            text::join(checklist->items, "\n"), pseudo);
          for (const auto& o : v.outcomes) {
            if (o.verdict == Verdict::kMissing) missing.push_back(probs[o.item_index]);
          }
        }
        in.missing_claim_probs = std::move(missing);
      }
      in.truth_probs = std::move(probs);
      out.claims = std::move(claims);
    }

    in.general = score_general(*judges_.general, req.query, answer);
    in.answer_length = default_length_measure(options_.length.unit)(answer);
    out.breakdown = compute_breakdown(in, options_.mode, options_.weights, options_.length,
                                      options_.truth_variant);
  } catch (const Error& e) {
    throw e.with_context(req.request_id);
  }
  out.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<ScoreResult> RewardService::score_batch(
    const std::vector<ScoreRequest>& requests) const {
  auto outcomes = parallel_map(requests.size(), options_.batch_concurrency,
                               [&](std::size_t i) { return score(requests[i]); });
  std::vector<ScoreResult> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out[i].request_id = requests[i].request_id;
    if (outcomes[i].ok()) {
      out[i].response = std::move(*outcomes[i].value);
    } else {
      out[i].error = std::move(*outcomes[i].error);
    }
  }
  return out;
}

// --- HTTP ----------------------------------------------------------------------

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kIo:
      return 400;
    case ErrorCode::kEmptyChecklist:
    case ErrorCode::kMissingComponent:
    case ErrorCode::kMissingBinding:
    case ErrorCode::kInvalidWeights:
      return 422;
    case ErrorCode::kMalformedJudgeOutput:
      return 502;
    case ErrorCode::kJudgeUnavailable:
      return 503;
    default:
      return 500;
  }
}

struct ScoreServer::Impl {
  RewardService& service;
  httplib::Server server;

  explicit Impl(RewardService& s) : service(s) {}
};

namespace {

void reply_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("body is not JSON: ") + e.what());
  }
}

}  // namespace

ScoreServer::ScoreServer(RewardService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  RewardService& svc = impl_->service;

  srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, {{"status", "ok"}, {"checklists", svc.checklists().size()}});
  });

  srv.Post("/score", [&svc](const httplib::Request& req, httplib::Response& res) {
    std::string id;
    try {
      const auto body = parse_body(req);
      if (body.is_object()) id = body.value("request_id", "");
      const auto result = svc.score(score_request_from_json(body));
      reply_json(res, 200, to_json(result));
    } catch (const Error& e) {
      reply_json(res, http_status(e.code()), error_record(id, e));
    }
  });

  srv.Post("/score_batch", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      const auto body = parse_body(req);
      const json& list = body.is_array() ? body : body.value("requests", json());
      if (!list.is_array()) {
        throw Error(ErrorCode::kInvalidArgument, "expected {\"requests\": [...]}");
      }
      // Malformed entries become error records in place, like scoring failures.
      std::vector<ScoreRequest> requests;
      std::vector<std::optional<Error>> bad(list.size());
      std::vector<std::size_t> slot;
      for (std::size_t i = 0; i < list.size(); ++i) {
        try {
          requests.push_back(score_request_from_json(list[i]));
          slot.push_back(i);
        } catch (const Error& e) {
          bad[i] = e;
        }
      }
      auto scored = svc.score_batch(requests);
      ordered_json results = ordered_json::array();
      std::size_t next = 0;
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (bad[i]) {
          const std::string id = list[i].is_object() ? list[i].value("request_id", "") : "";
          results.push_back(error_record(id, *bad[i]));
        } else {
          results.push_back(to_json(scored[next++]));
        }
      }
      reply_json(res, 200, {{"results", std::move(results)}});
    } catch (const Error& e) {
      reply_json(res, http_status(e.code()), error_record("", e));
    }
  });

  srv.Put("/checklists", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      std::vector<Checklist> cs;
      std::istringstream in(req.body);
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
          cs.push_back(io::checklist_from_json(json::parse(line)));
        } catch (const json::exception& e) {
          throw Error(ErrorCode::kInvalidArgument, std::string("invalid JSON: ") + e.what(),
                      "line " + std::to_string(lineno));
        } catch (const Error& e) {
          throw Error(ErrorCode::kInvalidArgument, e.message(), "line " + std::to_string(lineno));
        }
      }
      const auto n = cs.size();
      svc.checklists().put_all(std::move(cs));
      reply_json(res, 200, {{"loaded", n}, {"total", svc.checklists().size()}});
    } catch (const Error& e) {
      reply_json(res, http_status(e.code()), error_record("", e));
    }
  });
}

ScoreServer::~ScoreServer() { stop(); }

int ScoreServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error(ErrorCode::kIo, "cannot bind", host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind", host + ":" + std::to_string(port));
  }
  return port;
}

void ScoreServer::run() { impl_->server.listen_after_bind(); }
void ScoreServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void ScoreServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace factalign
