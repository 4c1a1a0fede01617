#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qe/corpus.hpp"
#include "qe/prompting.hpp"
#include "qe/scoring.hpp"

namespace qe {

enum class TauVariant { TauB, TauA };

std::string to_string(TauVariant variant);
TauVariant parse_tau_variant(std::string_view text);

/// Kendall rank correlation in O(n log n).
///
/// tau-b = (C - D) / sqrt((C + D + Tx)(C + D + Ty)), where Tx and Ty count
/// pairs tied only in x or only in y. tau-a = (C - D) / (n(n-1)/2) and
/// requires tie-free inputs. Throws InvalidArgument on length mismatch,
/// n < 2, non-finite values or ties under tau-a; CorrelationError when the
/// tau-b denominator is zero.
double kendall_tau(std::span<const double> x, std::span<const double> y,
                   TauVariant variant = TauVariant::TauB);

/// Reference values reported for the summarization dev/test sets.
struct BaselineConstants {
  static constexpr double direct_assessment_dev = 0.3065;
  static constexpr double random_dev = -0.0340;
  static constexpr double best_standard_dev = 0.3211;
  static constexpr double best_test = 0.4423;
};

struct ItemResult {
  std::string id;
  double system_score = 0.0;
  std::optional<double> gold_score;
  ParseStatus parse_status = ParseStatus::Ok;

  friend bool operator==(const ItemResult&, const ItemResult&) = default;
};

struct EvalReport {
  std::string prompt_id;
  std::size_t n = 0;
  /// Absent for unlabelled splits.
  std::optional<double> tau;
  TauVariant tau_variant = TauVariant::TauB;
  double parse_failure_rate = 0.0;
  std::size_t fallback_count = 0;
  std::vector<ItemResult> per_item;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Correlates `scores` with the split's gold scores. `statuses` may be empty
/// (all Ok). Throws InvalidArgument on length mismatch or missing gold,
/// CorrelationError on zero variance.
EvalReport evaluate(std::span<const double> scores, const DatasetSplit& split, std::string prompt_id,
                    std::span<const ParseStatus> statuses = {},
                    TauVariant variant = TauVariant::TauB);

/// Report without a correlation, for splits lacking gold scores.
EvalReport summarize(std::span<const double> scores, const DatasetSplit& split, std::string prompt_id,
                     std::span<const ParseStatus> statuses = {});

/// I.i.d. uniform draws from the rubric's allowed values, one per item.
std::vector<double> random_baseline(const DatasetSplit& split, const Rubric& rubric, std::uint64_t seed);
std::vector<double> random_baseline(std::size_t n, const Rubric& rubric, std::uint64_t seed);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view json);

void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

/// Shortest round-tripping decimal ("3.5", "2", "5").
std::string format_score(double value);

/// One score per line, split order. Refuses empty input.
void write_scores(std::span<const double> scores, const std::filesystem::path& path);
std::vector<double> read_scores(const std::filesystem::path& path);

}  // namespace qe
