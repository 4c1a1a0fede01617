#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qe/metrics.hpp"
#include "qe/refinery.hpp"
#include "qe/scoring.hpp"

using namespace qe;
using qe::testing::oracle_tau_a;
using qe::testing::oracle_tau_b;

namespace {

/// Values drawn from a small pool so ties are frequent.
std::vector<double> tie_heavy(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> pool(1, 9);
  std::vector<double> v(n);
  for (double& x : v) x = 1.0 + pool(rng) * 0.5;
  return v;
}

std::vector<double> distinct(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

const std::vector<Rubric>& all_rubrics() {
  static const std::vector<Rubric> rubrics{
      Rubric::numeric(1, 5, 0.5),  Rubric::numeric(0, 100, 10), Rubric::numeric(0, 100, 5),
      Rubric::numeric(1, 5, 0.25), Rubric::numeric(1, 5, 1),
      Rubric::ordinal({"Very Poor", "Poor", "Average", "Good", "Very Good"}),
      Rubric::ordinal({"Incomprehensible", "Poor", "Average", "Good", "Excellent"})};
  return rubrics;
}

}  // namespace

TEST(KendallProperties, MatchesPairCountOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    auto x = tie_heavy(rng, n);
    auto y = tie_heavy(rng, n);
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) continue;
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) continue;
    EXPECT_NEAR(kendall_tau(x, y), oracle_tau_b(x, y), 1e-12) << "n=" << n;
  }
}

TEST(KendallProperties, TauAMatchesOracleOnTieFreeInput) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 150;
    auto x = distinct(rng, n);
    auto y = distinct(rng, n);
    EXPECT_NEAR(kendall_tau(x, y, TauVariant::TauA), oracle_tau_a(x, y), 1e-12);
    EXPECT_NEAR(kendall_tau(x, y, TauVariant::TauA), kendall_tau(x, y), 1e-12);
  }
}

TEST(KendallProperties, PermutationInvariance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 100;
    auto x = tie_heavy(rng, n);
    auto y = tie_heavy(rng, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px, py;
    for (std::size_t i : perm) {
      px.push_back(x[i]);
      py.push_back(y[i]);
    }
    EXPECT_NEAR(kendall_tau(x, y), kendall_tau(px, py), 1e-12);
  }
}

TEST(KendallProperties, MonotoneTransformInvariance) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 100;
    auto x = tie_heavy(rng, n);
    auto y = tie_heavy(rng, n);
    std::vector<double> linear, cubic;
    for (double v : x) {
      linear.push_back(2 * v + 1);
      cubic.push_back(v * v * v);
    }
    const double base = kendall_tau(x, y);
    EXPECT_NEAR(kendall_tau(linear, y), base, 1e-12);
    EXPECT_NEAR(kendall_tau(cubic, y), base, 1e-12);
  }
}

TEST(KendallProperties, Antisymmetry) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = distinct(rng, 3 + rng() % 100);
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    EXPECT_DOUBLE_EQ(kendall_tau(x, neg), -1.0);
  }
}

TEST(ParserProperties, FormattedAnswersParseBackToSnappedValue) {
  for (const auto& rubric : all_rubrics()) {
    std::vector<AnswerSchema> schemas{AnswerSchema::OverallOnly};
    if (rubric.is_numeric()) {
      schemas.push_back(AnswerSchema::AspectsThenTotal);
      schemas.push_back(AnswerSchema::AspectsWithExplanations);
    }
    for (AnswerSchema schema : schemas) {
      for (double v : rubric.allowed_values()) {
        const auto text = format_answer(rubric, schema, v);
        const auto parsed = parse_response(text, rubric, schema);
        ASSERT_EQ(parsed.parse_status, ParseStatus::Ok) << text;
        EXPECT_EQ(finalize(parsed, schema, rubric, FallbackPolicy::Error).value, v) << text;
      }
    }
  }
}

TEST(ParserProperties, TotalOnArbitraryText) {
  std::mt19937_64 rng(77);
  const std::string alphabet = "0123456789 .,/:-\n\tabcdeoutfVryPGdScoreRelvanc";
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text(rng() % 80, ' ');
    for (char& c : text) c = alphabet[rng() % alphabet.size()];
    for (const auto& rubric : all_rubrics()) {
      for (AnswerSchema schema : {AnswerSchema::OverallOnly, AnswerSchema::AspectsThenTotal}) {
        if (!rubric.is_numeric() && schema != AnswerSchema::OverallOnly) continue;
        ParsedScore parsed;
        ASSERT_NO_THROW(parsed = parse_response(text, rubric, schema)) << text;
        if (parsed.parse_status == ParseStatus::Ok) {
          ASSERT_TRUE(parsed.overall.has_value());
          EXPECT_TRUE(rubric.contains(*parsed.overall)) << text;
        } else {
          EXPECT_FALSE(parsed.diagnostics.empty());
        }
        const auto final_score = finalize(parsed, schema, rubric, FallbackPolicy::Midpoint);
        EXPECT_GE(final_score.value, rubric.min());
        EXPECT_LE(final_score.value, rubric.max());
      }
    }
  }
}

TEST(LintProperties, TotalOnArbitraryText) {
  std::mt19937_64 rng(78);
  const std::string alphabet = "0123456789. )\nAnswer:Relevance";
  LintOptions options;
  options.expected_aspects = {"Relevance", "Fluency"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text(rng() % 120, ' ');
    for (char& c : text) c = alphabet[rng() % alphabet.size()];
    HallucinationReport report;
    ASSERT_NO_THROW(report = lint_prompt(text, options));
    for (const auto& flag : report.flags) {
      EXPECT_LE(flag.begin, flag.end);
      EXPECT_LE(flag.end, text.size());
    }
  }
}
