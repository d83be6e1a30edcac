#pragma once
// Application configuration: one JSON file, with ${NAME} references to
// environment variables expanded in every string value.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "factalign/chat.hpp"
#include "factalign/grpo.hpp"
#include "factalign/judge.hpp"
#include "factalign/pipeline.hpp"
#include "factalign/retrieval.hpp"
#include "factalign/reward.hpp"

namespace factalign {

namespace roles {
inline constexpr std::string_view kExtractor = "extractor";
inline constexpr std::string_view kVerifier = "verifier";
inline constexpr std::string_view kChecklist = "checklist";
inline constexpr std::string_view kTruth = "truth";
inline constexpr std::string_view kGeneral = "general";
inline constexpr std::string_view kCurator = "curator";
inline constexpr std::string_view kGenerator = "generator";
inline constexpr std::string_view kPairwise = "pairwise";
}  // namespace roles

// Roles a scoring run needs for `mode`.
std::vector<std::string> required_roles(RewardMode mode, bool use_truth_variant);

enum class JudgesMode { kRemote, kReference, kReplay };

std::string_view to_string(JudgesMode m);
std::optional<JudgesMode> judges_mode_from_string(std::string_view s);

struct ReferenceTables {
  std::string truth_table;  // path; empty for none
  std::optional<double> truth_default;
  std::string general_table;
  std::optional<double> general_default = 0.0;
  std::string canned_answers;
};

struct AppConfig {
  struct Reward {
    RewardMode mode = RewardMode::kBoth;
    RewardWeights weights{};
    LengthPolicy length{};
    bool truth_variant = false;
  } reward;

  struct Judges {
    JudgesMode mode = JudgesMode::kReference;
    std::map<std::string, JudgeConfig> roles;
    std::string transcripts;         // replay input
    std::string record_transcripts;  // remote: append exchanges here
    ReferenceTables reference;
  } judges;

  struct Pipeline {
    RetrievalParams retrieval{};
    std::size_t samples_per_query = 1;
    RMDataOptions rm{};
    std::uint64_t seed = 0;
    std::string fewshot_context;
  } pipeline;

  GRPOConfig grpo{};
  std::string grpo_environment;

  struct Eval {
    std::size_t k = 64;
  } eval;

  struct Server {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t batch_concurrency = 4;
  } server;

  struct Paths {
    std::string input_dir = ".";
    std::string output_dir = ".";
  } paths;

  // Throws InvalidConfig / InvalidWeights naming the offending setting.
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

// Expands ${NAME}; "$${" escapes a literal "${". Unset variables throw
// InvalidConfig.
std::string interpolate_env(std::string_view s, const EnvLookup& env);

// Missing keys keep their defaults; unknown keys are rejected.
AppConfig config_from_json(const nlohmann::json& j, const EnvLookup& env = process_env());
nlohmann::ordered_json to_json(const AppConfig& c);
AppConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());

nlohmann::ordered_json to_json(const JudgeConfig& c);
JudgeConfig judge_config_from_json(const nlohmann::json& j);

// Judges for every role, built from a config. Roles without a usable
// implementation are null.
struct JudgeSet {
  std::shared_ptr<const ClaimExtractor> extractor;
  std::shared_ptr<const ClaimVerifier> verifier;
  std::shared_ptr<const ChecklistJudge> checklist;
  std::shared_ptr<const TruthfulnessScorer> truth;
  std::shared_ptr<const GeneralScorer> general;
  std::shared_ptr<const ChecklistCurator> curator;
  std::shared_ptr<const ResponseGenerator> generator;
  std::shared_ptr<const PairwiseJudge> pairwise;
};

JudgeSet make_judges(const AppConfig& config);

}  // namespace factalign
