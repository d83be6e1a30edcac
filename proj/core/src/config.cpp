#include "factalign/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "factalign/error.hpp"
#include "factalign/reference_judges.hpp"
#include "factalign/remote.hpp"

namespace factalign {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> required_roles(RewardMode mode, bool use_truth_variant) {
  std::vector<std::string> out;
  const bool checklist = mode != RewardMode::kTruthOnly || use_truth_variant;
  const bool truth = mode != RewardMode::kChecklistOnly;
  if (checklist) out.emplace_back(roles::kChecklist);
  if (truth) {
    out.emplace_back(roles::kExtractor);
    out.emplace_back(roles::kTruth);
  }
  out.emplace_back(roles::kGeneral);
  return out;
}

std::string_view to_string(JudgesMode m) {
  switch (m) {
    case JudgesMode::kRemote: return "remote";
    case JudgesMode::kReference: return "reference";
    case JudgesMode::kReplay: return "replay";
  }
  return "reference";
}

std::optional<JudgesMode> judges_mode_from_string(std::string_view s) {
  for (auto m : {JudgesMode::kRemote, JudgesMode::kReference, JudgesMode::kReplay}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::string interpolate_env(std::string_view s, const EnvLookup& env) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.substr(i).starts_with("$${")) {
      out += "${";
      i += 3;
      continue;
    }
    if (!s.substr(i).starts_with("${")) {
      out += s[i++];
      continue;
    }
    const auto close = s.find('}', i + 2);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidConfig, "unterminated ${ in '" + std::string(s) + "'");
    }
    const std::string name(s.substr(i + 2, close - i - 2));
    auto value = env(name);
    if (!value) throw Error(ErrorCode::kInvalidConfig, "environment variable not set", name);
    out += *value;
    i = close + 1;
  }
  return out;
}

namespace {

void interpolate_tree(json& j, const EnvLookup& env) {
  if (j.is_string()) {
    j = interpolate_env(j.get<std::string>(), env);
  } else if (j.is_structured()) {
    for (auto& child : j) interpolate_tree(child, env);
  }
}

// Reads known keys of one JSON object section into defaults.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorCode::kInvalidConfig, "must be an object", name_);
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "wrong type", name_ + "." + key);
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_[key].is_null()) {
      out.reset();
      return;
    }
    T v{};
    read(key, v);
    out = v;
  }

  template <typename Fn>
  void read_enum(const char* key, Fn from_string_fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_[key].is_string() || !from_string_fn(j_[key].get<std::string>())) {
      throw Error(ErrorCode::kInvalidConfig, "unknown value", name_ + "." + key);
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.contains(k)) throw Error(ErrorCode::kInvalidConfig, "unknown key", name_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::chrono::milliseconds read_ms(Section& s, const char* key, std::chrono::milliseconds def) {
  long long v = def.count();
  s.read(key, v);
  return std::chrono::milliseconds(v);
}

}  // namespace

JudgeConfig judge_config_from_json(const json& j) {
  JudgeConfig c;
  Section s(j, "judge");
  s.read("endpoint", c.endpoint);
  s.read("model_name", c.model_name);
  s.read("temperature", c.temperature);
  s.read("max_tokens", c.max_tokens);
  c.timeout = read_ms(s, "timeout_ms", c.timeout);
  s.read("max_retries", c.max_retries);
  s.read("concurrency_limit", c.concurrency_limit);
  c.retry_base_delay = read_ms(s, "retry_base_delay_ms", c.retry_base_delay);
  c.retry_max_delay = read_ms(s, "retry_max_delay_ms", c.retry_max_delay);
  s.read("api_key_env", c.api_key_env);
  s.read("request_logprobs", c.request_logprobs);
  s.finish();
  return c;
}

ordered_json to_json(const JudgeConfig& c) {
  return {{"endpoint", c.endpoint},
          {"model_name", c.model_name},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},
          {"timeout_ms", c.timeout.count()},
          {"max_retries", c.max_retries},
          {"concurrency_limit", c.concurrency_limit},
          {"retry_base_delay_ms", c.retry_base_delay.count()},
          {"retry_max_delay_ms", c.retry_max_delay.count()},
          {"api_key_env", c.api_key_env},
          {"request_logprobs", c.request_logprobs}};
}

AppConfig config_from_json(const json& raw, const EnvLookup& env) {
  json j = raw;
  interpolate_tree(j, env);
  AppConfig c;
  Section top(j, "config");

  if (const json* r = top.child("reward")) {
    Section s(*r, "reward");
    s.read_enum("mode", [&](const std::string& v) {
      auto m = reward_mode_from_string(v);
      if (m) c.reward.mode = *m;
      return m.has_value();
    });
    s.read("truth_variant", c.reward.truth_variant);
    if (const json* w = s.child("weights")) {
      Section ws(*w, "reward.weights");
      ws.read("kappa", c.reward.weights.kappa);
      ws.read("lambda", c.reward.weights.lambda);
      ws.read("mu", c.reward.weights.mu);
      ws.read("general_coef", c.reward.weights.general_coef);
      ws.finish();
    }
    if (const json* l = s.child("length")) {
      Section ls(*l, "reward.length");
      ls.read("max_length", c.reward.length.max_length);
      ls.read("critical_length", c.reward.length.critical_length);
      ls.read_enum("unit", [&](const std::string& v) {
        auto u = length_unit_from_string(v);
        if (u) c.reward.length.unit = *u;
        return u.has_value();
      });
      ls.finish();
    }
    s.finish();
  }

  if (const json* jd = top.child("judges")) {
    Section s(*jd, "judges");
    s.read_enum("mode", [&](const std::string& v) {
      auto m = judges_mode_from_string(v);
      if (m) c.judges.mode = *m;
      return m.has_value();
    });
    s.read("transcripts", c.judges.transcripts);
    s.read("record_transcripts", c.judges.record_transcripts);
    if (const json* roles_json = s.child("roles")) {
      if (!roles_json->is_object()) {
        throw Error(ErrorCode::kInvalidConfig, "must be an object", "judges.roles");
      }
      for (const auto& [name, body] : roles_json->items()) {
        try {
          c.judges.roles[name] = judge_config_from_json(body);
        } catch (const Error& e) {
          throw e.with_context("judges.roles." + name);
        }
      }
    }
    if (const json* ref = s.child("reference")) {
      Section rs(*ref, "judges.reference");
      rs.read("truth_table", c.judges.reference.truth_table);
      rs.read_optional("truth_default", c.judges.reference.truth_default);
      rs.read("general_table", c.judges.reference.general_table);
      rs.read_optional("general_default", c.judges.reference.general_default);
      rs.read("canned_answers", c.judges.reference.canned_answers);
      rs.finish();
    }
    s.finish();
  }

  if (const json* p = top.child("pipeline")) {
    Section s(*p, "pipeline");
    s.read("chunk_size", c.pipeline.retrieval.chunk_size);
    s.read("chunk_overlap", c.pipeline.retrieval.chunk_overlap);
    s.read("top_k", c.pipeline.retrieval.top_k);
    s.read("samples_per_query", c.pipeline.samples_per_query);
    s.read("negative_duplication", c.pipeline.rm.negative_duplication);
    s.read("positives_per_negative", c.pipeline.rm.positives_per_negative);
    s.read("seed", c.pipeline.seed);
    s.read("fewshot_context", c.pipeline.fewshot_context);
    s.finish();
  }

  if (const json* g = top.child("grpo")) {
    Section s(*g, "grpo");
    s.read("group_size", c.grpo.group_size);
    s.read("clip_epsilon", c.grpo.clip_epsilon);
    s.read("kl_coef", c.grpo.kl_coef);
    s.read("learning_rate", c.grpo.learning_rate);
    s.read("epochs", c.grpo.epochs);
    s.read("seed", c.grpo.seed);
    s.read("steps", c.grpo.steps);
    s.read("environment", c.grpo_environment);
    s.finish();
  }

  if (const json* e = top.child("eval")) {
    Section s(*e, "eval");
    s.read("k", c.eval.k);
    s.finish();
  }

  if (const json* sv = top.child("server")) {
    Section s(*sv, "server");
    s.read("host", c.server.host);
    s.read("port", c.server.port);
    s.read("batch_concurrency", c.server.batch_concurrency);
    s.finish();
  }

  if (const json* pa = top.child("paths")) {
    Section s(*pa, "paths");
    s.read("input_dir", c.paths.input_dir);
    s.read("output_dir", c.paths.output_dir);
    s.finish();
  }

  top.finish();
  return c;
}

ordered_json to_json(const AppConfig& c) {
  ordered_json roles = ordered_json::object();
  for (const auto& [name, jc] : c.judges.roles) roles[name] = to_json(jc);
  const auto& ref = c.judges.reference;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
  return {
      {"reward",
       {{"mode", to_string(c.reward.mode)},
        {"truth_variant", c.reward.truth_variant},
        {"weights",
         {{"kappa", c.reward.weights.kappa},
          {"lambda", c.reward.weights.lambda},
          {"mu", c.reward.weights.mu},
          {"general_coef", c.reward.weights.general_coef}}},
        {"length",
         {{"max_length", c.reward.length.max_length},
          {"critical_length", c.reward.length.critical_length},
          {"unit", to_string(c.reward.length.unit)}}}}},
      {"judges",
       {{"mode", to_string(c.judges.mode)},
        {"transcripts", c.judges.transcripts},
        {"record_transcripts", c.judges.record_transcripts},
        {"roles", std::move(roles)},
        {"reference",
         {{"truth_table", ref.truth_table},
          {"truth_default", opt(ref.truth_default)},
          {"general_table", ref.general_table},
          {"general_default", opt(ref.general_default)},
          {"canned_answers", ref.canned_answers}}}}},
      {"pipeline",
       {{"chunk_size", c.pipeline.retrieval.chunk_size},
        {"chunk_overlap", c.pipeline.retrieval.chunk_overlap},
        {"top_k", c.pipeline.retrieval.top_k},
        {"samples_per_query", c.pipeline.samples_per_query},
        {"negative_duplication", c.pipeline.rm.negative_duplication},
        {"positives_per_negative", c.pipeline.rm.positives_per_negative},
        {"seed", c.pipeline.seed},
        {"fewshot_context", c.pipeline.fewshot_context}}},
      {"grpo",
       {{"group_size", c.grpo.group_size},
        {"clip_epsilon", c.grpo.clip_epsilon},
        {"kl_coef", c.grpo.kl_coef},
        {"learning_rate", c.grpo.learning_rate},
        {"epochs", c.grpo.epochs},
        {"seed", c.grpo.seed},
        {"steps", c.grpo.steps},
        {"environment", c.grpo_environment}}},
      {"eval", {{"k", c.eval.k}}},
      {"server",
       {{"host", c.server.host},
        {"port", c.server.port},
        {"batch_concurrency", c.server.batch_concurrency}}},
      {"paths", {{"input_dir", c.paths.input_dir}, {"output_dir", c.paths.output_dir}}}};
}

AppConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config", path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("invalid JSON: ") + e.what(),
                path.string());
  }
  auto c = config_from_json(j, env);
  c.validate();
  return c;
}

void AppConfig::validate() const {
  if (reward.mode == RewardMode::kBoth) reward.weights.validate();
  try {
    reward.length.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.message(), "reward.length");
  }
  try {
    pipeline.retrieval.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.message(), "pipeline.retrieval");
  }
  if (pipeline.samples_per_query == 0) {
    throw Error(ErrorCode::kInvalidConfig, "must be >= 1", "pipeline.samples_per_query");
  }
  grpo.validate();
  if (eval.k == 0) throw Error(ErrorCode::kInvalidConfig, "must be >= 1", "eval.k");
  if (server.port < 0 || server.port > 65535) {
    throw Error(ErrorCode::kInvalidConfig, "out of range", "server.port");
  }
  for (const auto& [name, jc] : judges.roles) {
    try {
      jc.validate();
    } catch (const Error& e) {
      throw e.with_context("judges.roles." + name);
    }
  }

  const auto needed = required_roles(reward.mode, reward.truth_variant);
  auto need = [&](std::string_view role) {
    return std::find(needed.begin(), needed.end(), role) != needed.end();
  };
  const auto& ref = judges.reference;
  switch (judges.mode) {
    case JudgesMode::kRemote:
      for (const auto& role : needed) {
        auto it = judges.roles.find(role);
        if (it == judges.roles.end() || it->second.endpoint.empty()) {
          throw Error(ErrorCode::kInvalidConfig,
                      "reward mode " + std::string(to_string(reward.mode)) +
                          " needs an endpoint for this role",
                      "judges.roles." + role);
        }
      }
      break;
    case JudgesMode::kReplay:
      if (judges.transcripts.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "replay mode needs a transcript file",
                    "judges.transcripts");
      }
      [[fallthrough]];
    case JudgesMode::kReference:
      if (need(roles::kTruth) && judges.mode == JudgesMode::kReference &&
          ref.truth_table.empty() && !ref.truth_default) {
        throw Error(ErrorCode::kInvalidConfig, "truth scoring needs a table or a default",
                    "judges.reference.truth_table");
      }
      if (ref.general_table.empty() && !ref.general_default) {
        throw Error(ErrorCode::kInvalidConfig, "general scoring needs a table or a default",
                    "judges.reference.general_table");
      }
      break;
  }
}

namespace {

std::shared_ptr<const GeneralScorer> reference_general(const ReferenceTables& ref) {
  if (!ref.general_table.empty()) {
    return std::make_shared<reference::GeneralTable>(
        reference::GeneralTable::from_file(ref.general_table, ref.general_default));
  }
  if (!ref.general_default) return nullptr;
  return std::make_shared<reference::GeneralTable>(
      std::map<std::pair<std::string, std::string>, double>{}, ref.general_default);
}

}  // namespace

JudgeSet make_judges(const AppConfig& config) {
  JudgeSet set;
  const auto& ref = config.judges.reference;
  if (config.judges.mode == JudgesMode::kReference) {
    set.extractor = std::make_shared<reference::Extractor>();
    set.verifier = std::make_shared<reference::Verifier>();
    set.checklist = std::make_shared<reference::ChecklistVerifier>();
    set.curator = std::make_shared<reference::Curator>();
    set.pairwise = std::make_shared<reference::LengthPairJudge>();
    if (!ref.truth_table.empty()) {
      set.truth = std::make_shared<reference::TruthTable>(
          reference::TruthTable::from_file(ref.truth_table));
    } else if (ref.truth_default) {
      set.truth = std::make_shared<reference::TruthTable>(
          std::map<std::string, double, std::less<>>{}, ref.truth_default);
    }
    if (!ref.canned_answers.empty()) {
      set.generator = std::make_shared<reference::CannedGenerator>(
          reference::CannedGenerator::from_file(ref.canned_answers));
    }
    set.general = reference_general(ref);
    return set;
  }

  std::shared_ptr<ChatBackend> shared_backend;
  if (config.judges.mode == JudgesMode::kReplay) {
    shared_backend = ReplayBackend::from_file(config.judges.transcripts);
  }
  auto judge_for = [&](std::string_view role) -> std::shared_ptr<ChatJudge> {
    auto it = config.judges.roles.find(std::string(role));
    JudgeConfig jc = it == config.judges.roles.end() ? JudgeConfig{} : it->second;
    std::shared_ptr<ChatBackend> backend = shared_backend;
    if (!backend) {
      if (jc.endpoint.empty()) return nullptr;
      backend = std::make_shared<HttpChatBackend>(jc);
      if (!config.judges.record_transcripts.empty()) {
        backend = std::make_shared<RecordingBackend>(backend, config.judges.record_transcripts);
      }
    }
    return std::make_shared<ChatJudge>(backend, jc);
  };
  set.extractor = judge_for(roles::kExtractor);
  set.verifier = judge_for(roles::kVerifier);
  set.checklist = judge_for(roles::kChecklist);
  set.truth = judge_for(roles::kTruth);
  set.curator = judge_for(roles::kCurator);
  set.generator = judge_for(roles::kGenerator);
  set.pairwise = judge_for(roles::kPairwise);

  if (config.judges.mode == JudgesMode::kRemote) {
    auto it = config.judges.roles.find(std::string(roles::kGeneral));
    if (it != config.judges.roles.end() && !it->second.endpoint.empty()) {
      set.general = std::make_shared<HttpGeneralScorer>(it->second);
    }
  } else {
    set.general = reference_general(ref);
  }
  return set;
}

}  // namespace factalign
