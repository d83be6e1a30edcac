// factalign command-line tool.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "factalign/config.hpp"
#include "factalign/error.hpp"
#include "factalign/eval.hpp"
#include "factalign/grpo.hpp"
#include "factalign/io.hpp"
#include "factalign/pipeline.hpp"
#include "factalign/retrieval.hpp"
#include "factalign/service.hpp"

namespace fa = factalign;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string weights;
  std::optional<std::size_t> k;
  std::optional<std::size_t> lm;
  std::optional<std::size_t> lc;
  std::string judges;
};

fa::RewardWeights parse_weights(const std::string& s, fa::RewardWeights base) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--weights", "expected three numbers 'kappa,lambda,mu'");
    }
  }
  if (v.size() != 3) throw CLI::ValidationError("--weights", "expected three numbers 'kappa,lambda,mu'");
  base.kappa = v[0];
  base.lambda = v[1];
  base.mu = v[2];
  try {
    base.validate();
  } catch (const fa::Error& e) {
    throw CLI::ValidationError("--weights", e.message());
  }
  return base;
}

fa::AppConfig resolve_config(const Globals& g) {
  fa::AppConfig c = g.config_path.empty() ? fa::AppConfig{} : fa::load_config(g.config_path);
  if (g.seed) {
    c.pipeline.seed = *g.seed;
    c.grpo.seed = *g.seed;
  }
  if (!g.mode.empty()) c.reward.mode = *fa::reward_mode_from_string(g.mode);
  if (!g.weights.empty()) c.reward.weights = parse_weights(g.weights, c.reward.weights);
  if (g.k) c.eval.k = *g.k;
  if (g.lm) c.reward.length.max_length = *g.lm;
  if (g.lc) c.reward.length.critical_length = *g.lc;
  if (!g.judges.empty()) c.judges.mode = *fa::judges_mode_from_string(g.judges);
  c.pipeline.rm.seed = c.pipeline.seed;
  c.validate();
  return c;
}

// Writes JSONL rows to `path`, or stdout for "" / "-".
void emit_rows(const std::string& path, const std::vector<ordered_json>& rows) {
  if (path.empty() || path == "-") {
    for (const auto& r : rows) std::cout << r.dump() << '\n';
    return;
  }
  fa::io::write_jsonl(path, rows);
}

void emit_json(const std::string& path, const ordered_json& value) {
  if (path.empty() || path == "-") {
    std::cout << value.dump(2) << '\n';
    return;
  }
  fa::io::write_json(path, value);
}

template <typename T>
std::vector<ordered_json> rows_of(const std::vector<T>& items) {
  std::vector<ordered_json> rows;
  rows.reserve(items.size());
  for (const auto& x : items) rows.push_back(fa::io::to_json(x));
  return rows;
}

template <typename Ptr>
const auto& need(const Ptr& p, const char* role) {
  if (!p) {
    throw fa::Error(fa::ErrorCode::kInvalidConfig,
                    "no judge configured for this role", std::string("judges.roles.") + role);
  }
  return *p;
}

std::vector<fa::QueryRecord> read_queries(const std::string& path) {
  return fa::io::read_records<fa::QueryRecord>(path, fa::io::query_from_json);
}
std::vector<fa::ResponseRecord> read_responses(const std::string& path) {
  return fa::io::read_records<fa::ResponseRecord>(path, fa::io::response_from_json);
}
std::vector<fa::Claim> read_claims(const std::string& path) {
  return fa::io::read_records<fa::Claim>(path, fa::io::claim_from_json);
}

fa::RetrievalIndex load_index(const std::string& path) {
  return fa::RetrievalIndex::from_json(fa::io::read_json(path));
}

std::atomic<fa::ScoreServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factuality reward engine: data pipeline, reward scoring, GRPO toy and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every seeded stage");
  app.add_option("--mode", g.mode, "Reward mode")
      ->check(CLI::IsMember({"checklist", "truth", "both"}));
  app.add_option("--weights", g.weights, "kappa,lambda,mu");
  app.add_option("--k", g.k, "K for Recall@K / F1@K")->check(CLI::PositiveNumber);
  app.add_option("--lm", g.lm, "Length penalty: maximum length L_m");
  app.add_option("--lc", g.lc, "Length penalty: critical length L_c");
  app.add_option("--judges", g.judges, "Judge backend")
      ->check(CLI::IsMember({"remote", "reference", "replay"}));

  std::function<void()> action;

  // pipeline ------------------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "Offline data preparation stages");
  pipeline->require_subcommand(1);

  std::string queries_path, responses_path, claims_path, index_path, out_path;
  std::optional<std::size_t> samples;

  auto* sample = pipeline->add_subcommand("sample", "Sample base-model answers per query");
  sample->add_option("--queries", queries_path)->required()->check(CLI::ExistingFile);
  sample->add_option("--samples", samples, "Answers per query")->check(CLI::PositiveNumber);
  sample->add_option("--out", out_path, "Output JSONL (default stdout)");
  sample->callback([&] {
    action = [&] {
      auto c = resolve_config(g);
      auto judges = fa::make_judges(c);
      auto responses = fa::sample_responses(need(judges.generator, "generator"),
                                            read_queries(queries_path),
                                            samples.value_or(c.pipeline.samples_per_query),
                                            c.pipeline.seed, c.pipeline.fewshot_context);
      emit_rows(out_path, rows_of(responses));
    };
  });

  auto* extract = pipeline->add_subcommand("extract", "Extract claims from answers");
  extract->add_option("--responses", responses_path)->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out_path, "Output JSONL (default stdout)");
  extract->callback([&] {
    action = [&] {
      auto judges = fa::make_judges(resolve_config(g));
      emit_rows(out_path, rows_of(fa::extract_stage(need(judges.extractor, "extractor"),
                                                    read_responses(responses_path))));
    };
  });

  auto* verify = pipeline->add_subcommand("verify", "Label claims against the retrieval index");
  verify->add_option("--claims", claims_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--index", index_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_path, "Output JSONL (default stdout)");
  verify->callback([&] {
    action = [&] {
      auto judges = fa::make_judges(resolve_config(g));
      emit_rows(out_path, rows_of(fa::verify_corpus(read_claims(claims_path),
                                                    load_index(index_path),
                                                    need(judges.verifier, "verifier"))));
    };
  });

  auto* checklist = pipeline->add_subcommand("checklist", "Curate per-query checklists");
  checklist->add_option("--queries", queries_path)->required()->check(CLI::ExistingFile);
  checklist->add_option("--responses", responses_path)->required()->check(CLI::ExistingFile);
  checklist->add_option("--claims", claims_path, "Labeled claims")->required()->check(CLI::ExistingFile);
  checklist->add_option("--out", out_path, "Output JSONL (default stdout)");
  checklist->callback([&] {
    action = [&] {
      auto judges = fa::make_judges(resolve_config(g));
      emit_rows(out_path, rows_of(fa::build_checklists(
                              read_queries(queries_path), read_responses(responses_path),
                              read_claims(claims_path), need(judges.curator, "curator"))));
    };
  });

  auto* rm = pipeline->add_subcommand("rm-data", "Assemble truthfulness-model training data");
  rm->add_option("--claims", claims_path, "Labeled claims")->required()->check(CLI::ExistingFile);
  rm->add_option("--out", out_path, "Output JSONL (default stdout)");
  rm->callback([&] {
    action = [&] {
      auto c = resolve_config(g);
      auto ds = fa::assemble_rm_dataset(read_claims(claims_path), c.pipeline.rm);
      if (ds.warning) std::cerr << "warning: " << *ds.warning << '\n';
      emit_rows(out_path, rows_of(ds.examples));
    };
  });

  // index ---------------------------------------------------------------------
  auto* index = app.add_subcommand("index", "Retrieval index");
  index->require_subcommand(1);
  std::string corpus_path;
  auto* build = index->add_subcommand("build", "Chunk and index a JSONL corpus {doc_id, text}");
  build->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  build->add_option("--out", out_path, "Index JSON (default stdout)");
  build->callback([&] {
    action = [&] {
      auto c = resolve_config(g);
      auto docs = fa::io::read_records<fa::Document>(corpus_path, fa::io::document_from_json);
      emit_json(out_path, fa::RetrievalIndex::build(docs, c.pipeline.retrieval).to_json());
    };
  });

  // score ---------------------------------------------------------------------
  auto* score = app.add_subcommand("score", "Score responses from a file or serve over HTTP");
  std::string requests_path, checklists_path, host;
  std::optional<int> port;
  bool serve = false;
  bool with_latency = false;
  score->add_option("--requests", requests_path, "JSONL score requests");
  score->add_option("--checklists", checklists_path, "JSONL checklists to preload")
      ->check(CLI::ExistingFile);
  score->add_flag("--serve", serve, "Run the HTTP service");
  score->add_option("--host", host);
  score->add_option("--port", port);
  score->add_flag("--latency", with_latency, "Include latency_ms in output");
  score->add_option("--out", out_path, "Output JSONL (default stdout)");
  score->callback([&] {
    if (serve == !requests_path.empty()) {
      throw CLI::ValidationError("score", "give exactly one of --requests or --serve");
    }
    action = [&] {
      auto c = resolve_config(g);
      fa::RewardService svc(fa::make_judges(c), fa::ScoringOptions::from_config(c));
      if (!checklists_path.empty()) {
        svc.checklists().put_all(
            fa::io::read_records<fa::Checklist>(checklists_path, fa::io::checklist_from_json));
      }
      if (serve) {
        fa::ScoreServer server(svc);
        const int bound = server.bind(host.empty() ? c.server.host : host,
                                      port.value_or(c.server.port));
        std::cerr << "listening on port " << bound << '\n';
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        server.run();
        g_server = nullptr;
        return;
      }
      std::vector<fa::ScoreRequest> requests;
      for (const auto& j : fa::io::read_jsonl(requests_path)) {
        requests.push_back(fa::score_request_from_json(j));
      }
      std::vector<ordered_json> rows;
      std::size_t failed = 0;
      for (const auto& r : svc.score_batch(requests)) {
        failed += r.error.has_value();
        rows.push_back(fa::to_json(r, with_latency));
      }
      emit_rows(out_path, rows);
      if (failed > 0) std::cerr << failed << " of " << rows.size() << " requests failed\n";
    };
  });

  // grpo ----------------------------------------------------------------------
  auto* grpo = app.add_subcommand("grpo", "Toy GRPO training");
  grpo->require_subcommand(1);
  std::string env_path;
  std::optional<std::size_t> steps, group_size, epochs;
  std::optional<double> lr, beta, epsilon;
  auto* train = grpo->add_subcommand("train", "Train on a synthetic environment");
  train->add_option("--env", env_path, "Environment JSON (default: config grpo.environment)");
  train->add_option("--steps", steps);
  train->add_option("--lr", lr);
  train->add_option("--beta", beta, "KL coefficient");
  train->add_option("--epsilon", epsilon, "Clip range");
  train->add_option("--group-size", group_size);
  train->add_option("--epochs", epochs);
  train->add_option("--out", out_path, "Trace JSONL (default stdout)");
  train->callback([&] {
    action = [&] {
      auto c = resolve_config(g);
      if (steps) c.grpo.steps = *steps;
      if (lr) c.grpo.learning_rate = *lr;
      if (beta) c.grpo.kl_coef = *beta;
      if (epsilon) c.grpo.clip_epsilon = *epsilon;
      if (group_size) c.grpo.group_size = *group_size;
      if (epochs) c.grpo.epochs = *epochs;
      const std::string path = env_path.empty() ? c.grpo_environment : env_path;
      if (path.empty()) {
        throw fa::Error(fa::ErrorCode::kInvalidConfig, "no environment file", "grpo.environment");
      }
      auto env = fa::ToyEnvironment::from_file(path);
      fa::RewardSpec spec{c.reward.mode, c.reward.weights};
      auto result = fa::train(env, c.grpo, spec);
      std::vector<ordered_json> rows;
      for (const auto& r : result.trace) rows.push_back(fa::to_json(r));
      emit_rows(out_path, rows);
    };
  });

  // eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Factuality evaluation");
  eval->require_subcommand(1);
  std::string rows_path, pairs_path;
  auto* run = eval->add_subcommand("run", "Precision, Recall@K and F1@K over answers");
  run->add_option("--responses", responses_path, "JSONL {instance_id, instruction, answer}")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--index", index_path)->required()->check(CLI::ExistingFile);
  run->add_option("--rows", rows_path, "Per-instance JSONL");
  run->add_option("--out", out_path, "Report JSON (default stdout)");
  run->callback([&] {
    action = [&] {
      auto c = resolve_config(g);
      auto judges = fa::make_judges(c);
      auto instances = fa::io::read_records<fa::BenchmarkInstance>(
          responses_path, fa::benchmark_instance_from_json);
      auto report = fa::run_benchmark(instances, load_index(index_path),
                                      need(judges.extractor, "extractor"),
                                      need(judges.verifier, "verifier"), c.eval.k);
      if (!rows_path.empty()) {
        std::vector<ordered_json> rows;
        for (const auto& r : report.rows) rows.push_back(fa::to_json(r));
        fa::io::write_jsonl(rows_path, rows);
      }
      emit_json(out_path, fa::to_json(report));
    };
  });

  auto* winrate = eval->add_subcommand("winrate", "Two-trial pairwise win rate of answer_b");
  winrate->add_option("--pairs", pairs_path, "JSONL {instance_id, instruction, answer_a, answer_b}")
      ->required()
      ->check(CLI::ExistingFile);
  winrate->add_option("--rows", rows_path, "Per-instance JSONL");
  winrate->add_option("--out", out_path, "Report JSON (default stdout)");
  winrate->callback([&] {
    action = [&] {
      auto judges = fa::make_judges(resolve_config(g));
      auto pairs = fa::io::read_records<fa::PairInstance>(pairs_path, fa::pair_instance_from_json);
      auto report = fa::run_win_rate(pairs, need(judges.pairwise, "pairwise"));
      if (!rows_path.empty()) {
        std::vector<ordered_json> rows;
        for (const auto& j : report.judgments) rows.push_back(fa::to_json(j));
        fa::io::write_jsonl(rows_path, rows);
      }
      emit_json(out_path, fa::to_json(report));
    };
  });

  // config --------------------------------------------------------------------
  auto* config = app.add_subcommand("config", "Print the resolved configuration");
  config->callback([&] { action = [&] { emit_json("", fa::to_json(resolve_config(g))); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (action) action();
    return 0;
  } catch (const fa::Error& e) {
    ordered_json err = {{"error",
                         {{"code", fa::to_string(e.code())},
                          {"message", e.message()},
                          {"context", e.context()}}}};
    std::cerr << err.dump() << '\n';
    return kRuntimeError;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    ordered_json err = {{"error", {{"code", "Internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return kRuntimeError;
  }
}
