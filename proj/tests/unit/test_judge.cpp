#include <gtest/gtest.h>

#include <cmath>

#include <fstream>

#include "factalign/error.hpp"
#include "factalign/judge.hpp"
#include "factalign/prompts.hpp"
#include "factalign/reference_judges.hpp"
#include "factalign/text.hpp"
#include "fixtures.hpp"

namespace fa = factalign;
namespace ref = factalign::reference;

namespace {

template <typename Fn>
fa::ErrorCode code_of(Fn fn) {
  try {
    fn();
  } catch (const fa::Error& e) {
    return e.code();
  }
  return fa::ErrorCode::kInternal;
}

}  // namespace

TEST(Text, TermsAndNormalize) {
  EXPECT_EQ(fa::text::terms("  Paris, (France) -- 1889! "),
            (std::vector<std::string>{"paris", "france", "1889"}));
  EXPECT_EQ(fa::text::normalize("  The  Moon\tORBITS "), "the moon orbits");
  EXPECT_EQ(fa::text::strip_code_fence("```json\n[1]\n```"), "[1]");
  EXPECT_EQ(fa::text::strip_code_fence("  plain "), "plain");
}

TEST(Text, FindMention) {
  using M = fa::text::Mention;
  EXPECT_EQ(fa::text::find_mention("a b c d", "b c"), M::kAsserted);
  EXPECT_EQ(fa::text::find_mention("a b c d", "b d"), M::kAbsent);
  EXPECT_EQ(fa::text::find_mention("x NOT TRUE: b c", "b c"), M::kNegated);
  EXPECT_EQ(fa::text::find_mention("b c. NOT TRUE: b c", "b c"), M::kNegated);
  EXPECT_EQ(fa::text::find_mention("short", "much longer needle"), M::kAbsent);
}

TEST(Text, StableHashIsFnv1a) {
  // FNV-1a 64 offset basis and the published value for "a".
  EXPECT_EQ(fa::text::stable_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fa::text::stable_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(fa::text::stable_hash("a", 1), fa::text::stable_hash("a", 2));
}

TEST(ClaimList, Bullets) {
  EXPECT_EQ(fa::parse_claim_list("* Paris is in France.\n\n*   The Seine flows.\n"),
            (std::vector<std::string>{"Paris is in France.", "The Seine flows."}));
  EXPECT_EQ(fa::parse_claim_list("```\n* a\n```"), (std::vector<std::string>{"a"}));
}

TEST(ClaimList, NoClaimsReply) {
  for (const char* s : {"No verifiable objective claims", "\"no verifiable objective claims.\"",
                        "  NO VERIFIABLE OBJECTIVE CLAIMS.  "}) {
    EXPECT_TRUE(fa::parse_claim_list(s).empty()) << s;
  }
}

TEST(ClaimList, Malformed) {
  for (const char* s : {"", "   ", "- dash bullet", "*nospace", "* ok\nstray line", "*   "}) {
    EXPECT_EQ(code_of([&] { fa::parse_claim_list(s); }), fa::ErrorCode::kMalformedJudgeOutput) << s;
  }
}

TEST(Verification, Labels) {
  EXPECT_EQ(fa::parse_verification(R"({"conclusion": "SUPPORT"})"), fa::Label::kSupport);
  EXPECT_EQ(fa::parse_verification(R"({"conclusion": "**REFUTE**"})"), fa::Label::kRefute);
  EXPECT_EQ(fa::parse_verification("```json\n{\"conclusion\": \"NOT ENOUGH INFO\"}\n```"),
            fa::Label::kNotEnoughInfo);
  for (const char* s : {"SUPPORT", R"({"conclusion": "support"})", R"({"verdict": "SUPPORT"})",
                        R"({"conclusion": 1})", "[]"}) {
    EXPECT_EQ(code_of([&] { fa::parse_verification(s); }), fa::ErrorCode::kMalformedJudgeOutput) << s;
  }
}

TEST(ChecklistVerdictReply, Parses) {
  auto v = fa::parse_checklist_verdicts(
      R"([{"analysis": "stated", "conclusion": "Consistent"},
          {"analysis": "absent", "conclusion": "Missing"}])",
      2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].verdict, fa::Verdict::kConsistent);
  EXPECT_EQ(v[1].item_index, 1u);
  EXPECT_EQ(v[1].analysis, "absent");
}

TEST(ChecklistVerdictReply, Malformed) {
  const char* one = R"([{"analysis": "a", "conclusion": "Consistent"}])";
  EXPECT_EQ(code_of([&] { fa::parse_checklist_verdicts(one, 2); }),
            fa::ErrorCode::kMalformedJudgeOutput);
  for (const char* s : {"{}", "not json", R"([{"conclusion": "Consistent"}])",
                        R"([{"analysis": "a", "conclusion": "Maybe"}])"}) {
    EXPECT_EQ(code_of([&] { fa::parse_checklist_verdicts(s, 1); }),
              fa::ErrorCode::kMalformedJudgeOutput) << s;
  }
}

TEST(TruthReply, LabelAndLogprobs) {
  EXPECT_EQ(fa::parse_truth_label(" True\n"), 1.0);
  EXPECT_EQ(fa::parse_truth_label("False"), 0.0);
  EXPECT_EQ(code_of([] { fa::parse_truth_label("true"); }), fa::ErrorCode::kMalformedJudgeOutput);

  const std::vector<fa::TokenLogprob> lp = {
      {"True", std::log(0.6)}, {"False", std::log(0.2)}, {"Maybe", std::log(0.2)}};
  EXPECT_NEAR(fa::truth_from_logprobs(lp), 0.75, 1e-12);
  const std::vector<fa::TokenLogprob> none = {{"Yes", -0.1}};
  EXPECT_EQ(code_of([&] { fa::truth_from_logprobs(none); }), fa::ErrorCode::kMalformedJudgeOutput);
}

TEST(BoxedList, Items) {
  EXPECT_EQ(fa::parse_boxed_list("Here:\n\\boxed{\n- fact one\n* fact two\n\nfact {three}\n}"),
            (std::vector<std::string>{"fact one", "fact two", "fact {three}"}));
  EXPECT_EQ(code_of([] { fa::parse_boxed_list("no box"); }), fa::ErrorCode::kMalformedJudgeOutput);
  EXPECT_EQ(code_of([] { fa::parse_boxed_list("\\boxed{a"); }), fa::ErrorCode::kMalformedJudgeOutput);
}

TEST(RankList, BothQuoteStylesAndOrders) {
  auto r = fa::parse_rank_list("[{'model': 'model_1', 'rank': 2}, {'model': 'model_2', 'rank': 1}]");
  EXPECT_EQ(r.rank_1, 2);
  EXPECT_EQ(r.rank_2, 1);
  r = fa::parse_rank_list(R"([{"rank": "1", "model": "model_2"}, {"rank": 2, "model": "model_1"}])");
  EXPECT_EQ(r.rank_1, 2);
  EXPECT_EQ(r.rank_2, 1);
  for (const char* s : {"model_1", "[{'model': 'model_1', 'rank': 1}]",
                        "[{'model': 'model_1', 'rank': 1}, {'model': 'model_1', 'rank': 2}]",
                        "[{'model': 'model_1', 'rank': 1}, {'model': 'model_2', 'rank': 2}, junk]"}) {
    EXPECT_EQ(code_of([&] { fa::parse_rank_list(s); }), fa::ErrorCode::kMalformedJudgeOutput) << s;
  }
}

TEST(Prompts, BuiltinSetHasEveryTemplateWithItsSlots) {
  const auto set = fa::TemplateSet::builtin();
  const std::map<std::string_view, std::set<std::string>> expect = {
      {fa::prompt_names::kBaseGeneration, {"query", "fewshot"}},
      {fa::prompt_names::kClaimExtraction, {"response"}},
      {fa::prompt_names::kClaimVerification, {"claim", "evidence"}},
      {fa::prompt_names::kClaimPrioritization, {"query", "claims"}},
      {fa::prompt_names::kRlZero, {"prompt"}},
      {fa::prompt_names::kTruthfulness, {"claim"}},
      {fa::prompt_names::kChecklistVerification, {"query", "response", "guidelines"}},
      {fa::prompt_names::kWinRate, {"instruction", "output_1", "output_2"}},
  };
  EXPECT_EQ(set.all().size(), expect.size());
  for (const auto& [name, slots] : expect) {
    EXPECT_EQ(set.get(name).required_placeholders, slots) << name;
  }
}

TEST(Prompts, MatchShippedResourceFiles) {
  const auto set = fa::TemplateSet::builtin();
  for (const auto& [name, t] : set.all()) {
    const auto path = std::filesystem::path(FACTALIGN_FIXTURES_DIR) / ".." / ".." / "core" /
                      "prompts" / (name + ".txt");
    EXPECT_EQ(t.body, fixtures::slurp(path)) << name;
  }
}

TEST(Prompts, RenderIsSinglePass) {
  auto t = fa::PromptTemplate::from_body("t", "A {x} B {y} {\"json\": 1} {}");
  EXPECT_EQ(t.required_placeholders, (std::set<std::string>{"x", "y"}));
  EXPECT_EQ(fa::render_prompt(t, {{"x", "{y}"}, {"y", "2"}}), "A {y} B 2 {\"json\": 1} {}");
  try {
    fa::render_prompt(t, {{"x", "1"}});
    FAIL();
  } catch (const fa::Error& e) {
    EXPECT_EQ(e.code(), fa::ErrorCode::kMissingBinding);
    EXPECT_EQ(e.message(), "y");
  }
}

TEST(Prompts, OverridesFromDirectory) {
  fixtures::TempDir tmp;
  std::ofstream(tmp / "truthfulness.txt") << "Is it true? {claim}";
  const auto set = fa::TemplateSet::with_overrides(tmp.path());
  EXPECT_EQ(fa::render_prompt(set.get(fa::prompt_names::kTruthfulness), {{"claim", "x"}}),
            "Is it true? x");
  EXPECT_EQ(set.get(fa::prompt_names::kWinRate).body,
            fa::TemplateSet::builtin().get(fa::prompt_names::kWinRate).body);
}

TEST(ReferenceJudges, ExtractorDropsSubjectiveSentences) {
  ref::Extractor ex;
  EXPECT_EQ(ex.extract("Paris is in France. I love it! Is it big? The Seine flows"),
            (std::vector<std::string>{"Paris is in France.", "Is it big?", "The Seine flows"}));
}

TEST(ReferenceJudges, ExtractClaimsAssignsIds) {
  ref::Extractor ex;
  auto claims = fa::extract_claims(ex, "A b. C d.", "r1");
  ASSERT_EQ(claims.size(), 2u);
  EXPECT_EQ(claims[1].id, "r1:c1");
  EXPECT_EQ(claims[1].source_response_id, "r1");
  EXPECT_EQ(code_of([&] { fa::extract_claims(ex, "  ", "r1"); }), fa::ErrorCode::kInvalidArgument);
}

TEST(ReferenceJudges, VerifierLabels) {
  ref::Verifier v;
  const std::vector<std::string> ev = {"Paris is the capital of France.",
                                       "NOT TRUE: Paris is the largest city in Europe."};
  fa::Claim c;
  c.text = "Paris is the capital of France.";
  EXPECT_EQ(v.verify(c, ev), fa::Label::kSupport);
  c.text = "Paris is the largest city in Europe.";
  EXPECT_EQ(v.verify(c, ev), fa::Label::kRefute);
  c.text = "Paris has a zoo.";
  EXPECT_EQ(v.verify(c, ev), fa::Label::kNotEnoughInfo);
}

TEST(ReferenceJudges, ChecklistClassification) {
  ref::ChecklistVerifier j;
  fa::Checklist cl{"q", {"A b.", "C d.", "E f."}, {}};
  auto v = fa::classify_checklist(j, "?", "A b. NOT TRUE: C d.", cl);
  EXPECT_EQ(v.query_id, "q");
  EXPECT_EQ(v.outcomes[0].verdict, fa::Verdict::kConsistent);
  EXPECT_EQ(v.outcomes[1].verdict, fa::Verdict::kContradictory);
  EXPECT_EQ(v.outcomes[2].verdict, fa::Verdict::kMissing);
  EXPECT_EQ(code_of([&] { fa::classify_checklist(j, "?", "x", fa::Checklist{"q", {}, {}}); }),
            fa::ErrorCode::kEmptyChecklist);
}

TEST(ReferenceJudges, TablesAndScoreChecks) {
  ref::TruthTable t({{"a", 0.25}});
  fa::Claim c;
  c.text = "a";
  EXPECT_EQ(fa::score_truthfulness(t, c), 0.25);
  c.text = "b";
  EXPECT_EQ(code_of([&] { fa::score_truthfulness(t, c); }), fa::ErrorCode::kMalformedJudgeOutput);
  EXPECT_EQ(code_of([] { ref::TruthTable({{"a", 1.5}}); }), fa::ErrorCode::kInvalidArgument);

  ref::GeneralTable g({{{"q", "a"}, 2.0}});
  EXPECT_EQ(fa::score_general(g, "q", "a"), 2.0);
  EXPECT_EQ(code_of([&] { fa::score_general(g, "q", "b"); }), fa::ErrorCode::kJudgeUnavailable);
  auto from_file = ref::GeneralTable::from_file(fixtures::path("general_table.json"), 3.0);
  EXPECT_EQ(from_file.score("?", "?"), 3.0);
}

TEST(ReferenceJudges, CuratorDedupsByNormalizedText) {
  ref::Curator cur;
  std::vector<fa::Claim> cs(3);
  cs[0].text = "The Moon orbits.";
  cs[1].text = "the  moon ORBITS.";
  cs[2].text = "Tides rise.";
  EXPECT_EQ(cur.curate("q", cs), (std::vector<std::string>{"The Moon orbits.", "Tides rise."}));
}

TEST(ReferenceJudges, PairJudges) {
  ref::LengthPairJudge lj;
  EXPECT_EQ(lj.rank("", "a b c", "a").rank_1, 1);
  EXPECT_EQ(lj.rank("", "a", "a b c").rank_1, 2);
  auto tie = lj.rank("", "a b", "c d");
  EXPECT_EQ(tie.rank_1, tie.rank_2);
}
