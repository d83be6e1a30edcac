#include <gtest/gtest.h>

#include <fstream>

#include "factalign/config.hpp"
#include "factalign/error.hpp"
#include "fixtures.hpp"

namespace fa = factalign;
using nlohmann::json;

namespace {

fa::EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

fa::ErrorCode config_error(const json& j) {
  try {
    fa::config_from_json(j, env_of({})).validate();
  } catch (const fa::Error& e) {
    return e.code();
  }
  return fa::ErrorCode::kInternal;
}

}  // namespace

TEST(Interpolation, ExpandsAndEscapes) {
  auto env = env_of({{"A", "x"}, {"B", "/p"}});
  EXPECT_EQ(fa::interpolate_env("${A}-${B}/f", env), "x-/p/f");
  EXPECT_EQ(fa::interpolate_env("$${A} and $A", env), "${A} and $A");
  EXPECT_THROW(fa::interpolate_env("${MISSING}", env), fa::Error);
  EXPECT_THROW(fa::interpolate_env("${A", env), fa::Error);
}

TEST(Config, DefaultsMatchReferenceSettings) {
  fa::AppConfig c;
  EXPECT_EQ(c.reward.weights.kappa, 0.25);
  EXPECT_EQ(c.reward.weights.lambda, 0.25);
  EXPECT_EQ(c.reward.weights.mu, 0.5);
  EXPECT_EQ(c.reward.length.max_length, 2048u);
  EXPECT_EQ(c.reward.length.max_length - c.reward.length.critical_length, 850u);
  EXPECT_EQ(c.pipeline.retrieval.chunk_size, 300u);
  EXPECT_EQ(c.pipeline.retrieval.chunk_overlap, 20u);
  EXPECT_EQ(c.pipeline.retrieval.top_k, 10u);
  EXPECT_EQ(c.pipeline.rm.negative_duplication, 3u);
  EXPECT_EQ(c.pipeline.rm.positives_per_negative, 2u);
  EXPECT_EQ(c.grpo.group_size, 8u);
  EXPECT_EQ(c.grpo.epochs, 1u);
  EXPECT_EQ(c.eval.k, 64u);
  fa::JudgeConfig j;
  EXPECT_EQ(j.temperature, 0.1);
  EXPECT_EQ(j.max_tokens, 8192);
}

TEST(Config, RoundTripsThroughJson) {
  fa::AppConfig c;
  c.reward.mode = fa::RewardMode::kTruthOnly;
  c.reward.truth_variant = true;
  c.reward.length = {100, 40, fa::LengthUnit::kCharacters};
  c.judges.mode = fa::JudgesMode::kRemote;
  fa::JudgeConfig jc;
  jc.endpoint = "http://localhost:9/v1/chat/completions";
  jc.model_name = "m";
  jc.timeout = std::chrono::milliseconds(1234);
  for (const auto& r : fa::required_roles(c.reward.mode, true)) c.judges.roles[r] = jc;
  c.pipeline.seed = 99;
  c.grpo.kl_coef = 0.5;
  c.eval.k = 7;
  c.server.port = 9999;
  const auto j = fa::to_json(c);
  const auto back = fa::config_from_json(json::parse(j.dump()), env_of({}));
  EXPECT_EQ(fa::to_json(back).dump(), j.dump());
  EXPECT_EQ(back.judges.roles.at("truth").timeout.count(), 1234);
  EXPECT_NO_THROW(back.validate());
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_EQ(config_error({{"rewards", json::object()}}), fa::ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error({{"reward", {{"kapa", 0.3}}}}), fa::ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error({{"reward", {{"mode", "fact"}}}}), fa::ErrorCode::kInvalidConfig);
}

TEST(Config, ValidationNamesBadSettings) {
  EXPECT_EQ(config_error({{"reward", {{"weights", {{"kappa", 0.5}, {"lambda", 0.5}, {"mu", 0.5}}}}}}),
            fa::ErrorCode::kInvalidWeights);
  EXPECT_EQ(config_error({{"reward", {{"length", {{"max_length", 10}, {"critical_length", 10}}}}}}),
            fa::ErrorCode::kInvalidConfig);
  // remote mode with no endpoints
  try {
    fa::config_from_json({{"judges", {{"mode", "remote"}}}}, env_of({})).validate();
    FAIL();
  } catch (const fa::Error& e) {
    EXPECT_EQ(e.code(), fa::ErrorCode::kInvalidConfig);
    EXPECT_NE(e.context().find("judges.roles"), std::string::npos);
  }
  EXPECT_EQ(config_error({{"judges", {{"mode", "replay"}}}}), fa::ErrorCode::kInvalidConfig);
}

TEST(Config, RequiredRolesPerMode) {
  using V = std::vector<std::string>;
  auto has = [](const V& v, std::string_view r) { return std::find(v.begin(), v.end(), r) != v.end(); };
  auto c = fa::required_roles(fa::RewardMode::kChecklistOnly, false);
  EXPECT_TRUE(has(c, "checklist"));
  EXPECT_FALSE(has(c, "truth"));
  auto t = fa::required_roles(fa::RewardMode::kTruthOnly, false);
  EXPECT_TRUE(has(t, "truth"));
  EXPECT_TRUE(has(t, "extractor"));
  EXPECT_FALSE(has(t, "checklist"));
  EXPECT_TRUE(has(fa::required_roles(fa::RewardMode::kTruthOnly, true), "checklist"));
}

TEST(Config, ShippedReferenceConfigLoads) {
  fixtures::export_fixtures_env();
  auto c = fa::load_config(fixtures::path("reference_config.json"));
  EXPECT_EQ(c.judges.mode, fa::JudgesMode::kReference);
  EXPECT_EQ(c.judges.reference.truth_table, (fixtures::dir() / "truth_table.json").string());
  EXPECT_EQ(c.pipeline.seed, 7u);
  auto judges = fa::make_judges(c);
  EXPECT_TRUE(judges.extractor && judges.verifier && judges.checklist && judges.truth &&
              judges.general && judges.curator && judges.generator && judges.pairwise);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(fa::load_config("/nonexistent/config.json"), fa::Error);
  fixtures::TempDir tmp;
  std::ofstream(tmp / "bad.json") << "{ not json";
  try {
    fa::load_config(tmp / "bad.json");
    FAIL();
  } catch (const fa::Error& e) {
    EXPECT_TRUE(e.code() == fa::ErrorCode::kInvalidConfig || e.code() == fa::ErrorCode::kIo);
  }
}
