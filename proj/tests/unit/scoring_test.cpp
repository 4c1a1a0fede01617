#include <gtest/gtest.h>

#include "qe/error.hpp"
#include "qe/scoring.hpp"
#include "test_support.hpp"

using namespace qe;
using qe::testing::data_dir;
using qe::testing::slurp;

namespace {

const Rubric kHalf = Rubric::numeric(1, 5, 0.5);
const Rubric kTens = Rubric::numeric(0, 100, 10);
const Rubric kFives = Rubric::numeric(0, 100, 5);
const Rubric kQuarter = Rubric::numeric(1, 5, 0.25);
const Rubric kVeryPoor = Rubric::ordinal({"Very Poor", "Poor", "Average", "Good", "Very Good"});
const Rubric kIncomprehensible = Rubric::ordinal({"Incomprehensible", "Poor", "Average", "Good", "Excellent"});

std::string fixture(const std::string& name) { return slurp(data_dir() / "responses" / name); }

}  // namespace

TEST(ParseOverall, LastInRangeCandidateWins) {
  auto p = parse_overall("I'd rate it 4, maybe 4.5", kHalf);
  EXPECT_EQ(p.parse_status, ParseStatus::Ok);
  EXPECT_EQ(p.overall, 4.5);
  EXPECT_TRUE(p.on_grid);
}

TEST(ParseOverall, DenominatorsAreNotCandidates) {
  EXPECT_EQ(parse_overall("So, the summary has an overall score of 3.5 out of 5.", kHalf).overall, 3.5);
  EXPECT_EQ(parse_overall("Score: 4/5", kHalf).overall, 4.0);
  EXPECT_EQ(parse_overall("Rating: 70 / 100", kTens).overall, 70.0);
}

TEST(ParseOverall, RubricsFromTheScoreRangeTable) {
  EXPECT_EQ(parse_overall("Score: 2.5", kHalf).overall, 2.5);
  EXPECT_EQ(parse_overall("The summary deserves 80.", kTens).overall, 80.0);
  EXPECT_EQ(parse_overall("Overall: 85", kFives).overall, 85.0);
  EXPECT_EQ(parse_overall("Very Good summary overall.", kVeryPoor).overall, 5.0);
  EXPECT_EQ(parse_overall("This is a poor summary.", kVeryPoor).overall, 2.0);
  EXPECT_EQ(parse_overall("Rating: Excellent", kIncomprehensible).overall, 5.0);
  EXPECT_EQ(parse_overall("It is nearly incomprehensible.", kIncomprehensible).overall, 1.0);
}

TEST(ParseOverall, OrdinalLabelsPreferLongestMatch) {
  // "Very Poor" must not also count as "Poor".
  auto p = parse_overall("Good start, but overall Very Poor", kVeryPoor);
  EXPECT_EQ(p.overall, 1.0);
}

TEST(ParseOverall, OffGridValuesAreKeptAndMarked) {
  auto p = parse_overall("Score: 3.3", kHalf);
  EXPECT_EQ(p.overall, 3.3);
  EXPECT_FALSE(p.on_grid);
}

TEST(ParseOverall, FailuresCarryDiagnostics) {
  auto none = parse_overall("I cannot evaluate this summary.", kHalf);
  EXPECT_EQ(none.parse_status, ParseStatus::Failed);
  EXPECT_FALSE(none.overall.has_value());
  EXPECT_FALSE(none.diagnostics.empty());

  auto out_of_range = parse_overall("Score: 7", kHalf);
  EXPECT_EQ(out_of_range.parse_status, ParseStatus::Failed);

  EXPECT_EQ(parse_overall("", kHalf).parse_status, ParseStatus::Failed);
}

TEST(ParseOverall, IgnoresNumbersInsideWords) {
  EXPECT_EQ(parse_overall("Score: 4 (model v3)", kHalf).overall, 4.0);
  EXPECT_EQ(parse_overall("Score: 2 see section 4.1.2", kHalf).overall, 2.0);
}

TEST(ParseAspects, LowScoringExplainedResponse) {
  auto p = parse_aspects(fixture("low_explained_response.txt"), kHalf);
  ASSERT_EQ(p.parse_status, ParseStatus::Ok);
  ASSERT_TRUE(p.aspects.has_value());
  for (Aspect a : kAspects) EXPECT_EQ(p.aspects->get(a), 2.0) << aspect_name(a);
  EXPECT_EQ(p.overall, 2.0);
  ASSERT_TRUE(p.aspects->explanations.count(Aspect::Consistency));
  EXPECT_NE(p.aspects->explanations.at(Aspect::Consistency).find("metal protectors"), std::string::npos);
}

TEST(ParseAspects, HighScoringExplainedResponse) {
  auto p = parse_aspects(fixture("high_explained_response.txt"), kHalf);
  ASSERT_EQ(p.parse_status, ParseStatus::Ok);
  EXPECT_EQ(p.aspects->relevance, 4.0);
  EXPECT_EQ(p.aspects->consistency, 4.0);
  EXPECT_EQ(p.aspects->fluency, 3.0);
  EXPECT_EQ(p.aspects->coherence, 3.0);
  EXPECT_EQ(p.overall, 3.5);
  EXPECT_NE(p.aspects->explanations.at(Aspect::Fluency).find("more concise"), std::string::npos);
}

TEST(ParseAspects, NumberedListWithInlineExplanations) {
  auto p = parse_aspects(fixture("clean_response.txt"), kHalf);
  ASSERT_EQ(p.parse_status, ParseStatus::Ok);
  for (Aspect a : kAspects) EXPECT_EQ(p.aspects->get(a), 2.0);
}

TEST(ParseAspects, MissingAspectsAreNamed) {
  auto p = parse_aspects("Fluency: 3", kHalf);
  EXPECT_EQ(p.parse_status, ParseStatus::Failed);
  std::string all;
  for (const auto& d : p.diagnostics) all += d + ";";
  EXPECT_NE(all.find("relevance"), std::string::npos);
  EXPECT_NE(all.find("consistency"), std::string::npos);
  EXPECT_NE(all.find("coherence"), std::string::npos);
  EXPECT_EQ(all.find("fluency"), std::string::npos);
}

TEST(ParseAspects, CaseInsensitiveHeadersAndMarkers) {
  auto p = parse_aspects("a. COHERENCE: 4\n- consistency: 3\n* Fluency: 3 (fine)\n#) relevance: 4", kHalf);
  // "#)" is not a marker, so relevance is missed.
  EXPECT_EQ(p.parse_status, ParseStatus::Failed);
  auto q = parse_aspects("a. COHERENCE: 4\n- consistency: 3\n* Fluency: 3 (fine)\n# relevance: 4", kHalf);
  ASSERT_EQ(q.parse_status, ParseStatus::Ok);
  EXPECT_EQ(q.overall, 3.5);
}

TEST(ParseResponse, AspectsThenTotalPrefersAspects) {
  auto p = parse_response(fixture("cot_example.txt"), kQuarter, AnswerSchema::AspectsThenTotal);
  ASSERT_EQ(p.parse_status, ParseStatus::Ok);
  EXPECT_EQ(p.overall, 3.5);
  EXPECT_EQ(aggregate_mean(*p.aspects), 3.5);
}

TEST(ParseResponse, AspectsThenTotalFallsBackToTotal) {
  auto p = parse_response("Coherence: 4\nTotal Score: 3.75", kQuarter, AnswerSchema::AspectsThenTotal);
  EXPECT_EQ(p.parse_status, ParseStatus::Ok);
  EXPECT_EQ(p.overall, 3.75);
  EXPECT_FALSE(p.aspects.has_value());
}

TEST(Aggregate, MeanOfFour) {
  AspectScores s;
  s.coherence = 4;
  s.consistency = 3;
  s.fluency = 3;
  s.relevance = 4;
  EXPECT_EQ(aggregate_mean(s), 3.5);
  s = {};
  for (Aspect a : kAspects) s.set(a, 5);
  EXPECT_EQ(aggregate_mean(s), 5.0);
}

TEST(Finalize, Paths) {
  auto ok = parse_overall("Score: 3.5", kHalf);
  EXPECT_EQ(finalize(ok, AnswerSchema::OverallOnly, kHalf, FallbackPolicy::Midpoint).value, 3.5);

  auto failed = parse_overall("no idea", kHalf);
  auto fb = finalize(failed, AnswerSchema::OverallOnly, kHalf, FallbackPolicy::Midpoint);
  EXPECT_EQ(fb.value, 3.0);
  EXPECT_EQ(fb.status, ParseStatus::Fallback);
  EXPECT_FALSE(fb.diagnostics.empty());
  EXPECT_THROW(finalize(failed, AnswerSchema::OverallOnly, kHalf, FallbackPolicy::Error), UnparseableResponse);

  auto aspects = parse_response(fixture("low_explained_response.txt"), kHalf, AnswerSchema::AspectsWithExplanations);
  EXPECT_EQ(finalize(aspects, AnswerSchema::AspectsWithExplanations, kHalf, FallbackPolicy::Error).value, 2.0);
}

TEST(Finalize, UnparseableCarriesDiagnostics) {
  try {
    finalize(parse_overall("nothing", kHalf), AnswerSchema::OverallOnly, kHalf, FallbackPolicy::Error);
    FAIL();
  } catch (const UnparseableResponse& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}
