#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qe/prompting.hpp"

namespace qe {

enum class ParseStatus { Ok, Fallback, Failed };

std::string to_string(ParseStatus status);
ParseStatus parse_parse_status(std::string_view text);

enum class Aspect { Coherence, Consistency, Fluency, Relevance };

inline constexpr Aspect kAspects[] = {Aspect::Coherence, Aspect::Consistency, Aspect::Fluency,
                                      Aspect::Relevance};

/// Capitalised display name, e.g. "Coherence".
std::string_view aspect_name(Aspect aspect);

struct AspectScores {
  double coherence = 0.0;
  double consistency = 0.0;
  double fluency = 0.0;
  double relevance = 0.0;
  std::map<Aspect, std::string> explanations;

  double get(Aspect aspect) const;
  void set(Aspect aspect, double value);
};

struct ParsedScore {
  std::optional<double> overall;
  std::optional<AspectScores> aspects;
  bool on_grid = false;
  ParseStatus parse_status = ParseStatus::Failed;
  std::vector<std::string> diagnostics;
};

/// Extracts the final in-range score from free text: decimal literals for
/// numeric rubrics, case-insensitive labels for ordinal ones. The last
/// candidate wins. Denominators ("out of 5", "/ 5") are not candidates.
ParsedScore parse_overall(std::string_view text, const Rubric& rubric);

/// Extracts the four aspect ratings from lines shaped like
/// "[marker] Aspect: <rating> [Explanation: ...]". Ok only when all four are found.
ParsedScore parse_aspects(std::string_view text, const Rubric& rubric);

/// Dispatches on the answer schema. AspectsThenTotal prefers the four
/// aspects and falls back to the overall total.
ParsedScore parse_response(std::string_view text, const Rubric& rubric, AnswerSchema schema);

double aggregate_mean(const AspectScores& aspects);

enum class FallbackPolicy { Midpoint, Error };

std::string to_string(FallbackPolicy policy);
FallbackPolicy parse_fallback_policy(std::string_view text);

struct FinalScore {
  double value = 0.0;
  ParseStatus status = ParseStatus::Ok;
  std::vector<std::string> diagnostics;
};

/// Reduces a parse to one number. Failed parses become the rubric midpoint
/// (status Fallback) or throw UnparseableResponse, per policy.
FinalScore finalize(const ParsedScore& parsed, AnswerSchema schema, const Rubric& rubric,
                    FallbackPolicy policy);

}  // namespace qe
