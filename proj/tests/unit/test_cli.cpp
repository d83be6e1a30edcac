#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"

using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and returns exit status and stdout.
Run cli(const std::string& args) {
  fixtures::export_fixtures_env();
  const std::string cmd = std::string(FACTALIGN_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string config_arg() { return "--config " + fixtures::path("reference_config.json").string(); }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("frobnicate").status, 2);
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli(config_arg() + " --weights 0.5,0.5,0.5 config").status, 2);
  EXPECT_EQ(cli(config_arg() + " --weights abc config").status, 2);
  EXPECT_EQ(cli(config_arg() + " score").status, 2);
}

TEST(Cli, ConfigOverridesApply) {
  auto r = cli(config_arg() + " --weights 0.2,0.3,0.5 --k 9 config");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["reward"]["weights"]["kappa"], 0.2);
  EXPECT_EQ(j["eval"]["k"], 9);
}

TEST(Cli, RmDataIsReproducible) {
  fixtures::TempDir tmp;
  {
    std::ofstream f(tmp / "claims.jsonl");
    for (int i = 0; i < 20; ++i) {
      f << json{{"id", "s" + std::to_string(i)}, {"text", "claim " + std::to_string(i)},
                {"label", "SUPPORT"}}
               .dump()
        << '\n';
    }
    f << json{{"id", "r0"}, {"text", "bad claim"}, {"label", "REFUTE"}}.dump() << '\n';
  }
  const auto args = config_arg() + " pipeline rm-data --claims " + (tmp / "claims.jsonl").string();
  auto a = cli(args);
  auto b = cli(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  std::size_t lines = 0;
  for (char c : a.out) lines += c == '\n';
  EXPECT_EQ(lines, 9u);  // 3 negatives, 6 positives
  EXPECT_NE(cli(config_arg() + " --seed 8 pipeline rm-data --claims " +
                (tmp / "claims.jsonl").string())
                .out,
            a.out);
}

TEST(Cli, ScoreFileModeWritesOneRecordPerRequest) {
  auto r = cli(config_arg() + " score --requests " + fixtures::path("score_requests.jsonl").string() +
               " --checklists " + fixtures::path("checklists.jsonl").string());
  ASSERT_EQ(r.status, 0);
  std::vector<json> rows;
  std::size_t start = 0;
  for (auto pos = r.out.find('\n'); pos != std::string::npos; pos = r.out.find('\n', start)) {
    rows.push_back(json::parse(r.out.substr(start, pos - start)));
    start = pos + 1;
  }
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0]["breakdown"]["total"].get<double>(), 1.0366666666666666, 1e-15);
  EXPECT_EQ(rows[1]["breakdown"]["format"], -1.0);
  EXPECT_EQ(rows[2]["error"]["code"], "EmptyChecklist");
  EXPECT_FALSE(rows[2].contains("breakdown"));
}

TEST(Cli, RuntimeErrorsExitOne) {
  fixtures::TempDir tmp;
  std::ofstream(tmp / "claims.jsonl") << json{{"id", "s"}, {"text", "x"}, {"label", "SUPPORT"}}.dump()
                                      << '\n';
  EXPECT_EQ(cli(config_arg() + " pipeline rm-data --claims " + (tmp / "claims.jsonl").string()).status,
            1);
}
