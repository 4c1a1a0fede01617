#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qe/corpus.hpp"

namespace qe {

/// A score scale the judge must answer within: either an evenly stepped
/// numeric range or an ordered list of qualitative labels.
class Rubric {
 public:
  enum class Kind { NumericScale, OrdinalScale };

  /// Requires min < max, step > 0 and (max - min) an integer multiple of step.
  static Rubric numeric(double min, double max, double step);

  /// Requires at least two distinct labels (case-insensitive) and strictly
  /// increasing values along label order.
  static Rubric ordinal(std::vector<std::string> labels, std::vector<double> values);

  /// Ordinal scale mapped to 1, 2, ..., labels.size().
  static Rubric ordinal(std::vector<std::string> labels);

  Kind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == Kind::NumericScale; }

  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  double midpoint() const noexcept { return (min() + max()) / 2.0; }
  /// Numeric scales only.
  double step() const noexcept { return step_; }

  /// Ordinal scales only; empty for numeric scales.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Sorted, finite, non-empty.
  const std::vector<double>& allowed_values() const noexcept { return values_; }

  bool contains(double value) const noexcept;
  bool on_grid(double value) const noexcept;

  /// Nearest allowed value; exact midpoints between two values resolve upward.
  double snap(double value) const;

  /// Shortest decimal for numeric scales, the label for ordinal scales
  /// (value is snapped first).
  std::string format_value(double value) const;

  /// "in the range 1 (worst) to 5 (best). Possible scores are 1, 1.5, ... and 5."
  std::string range_sentence() const;

  std::string describe() const;

  friend bool operator==(const Rubric&, const Rubric&) = default;

 private:
  Rubric() = default;

  Kind kind_ = Kind::NumericScale;
  double step_ = 0.0;
  std::vector<std::string> labels_;
  std::vector<double> values_;
};

std::vector<double> allowed_values(const Rubric& rubric);

enum class Strategy { Standard, AnnotatorSeed, LLMGenerated, CoT, ExplainAspects };
enum class AnswerSchema { OverallOnly, AspectsThenTotal, AspectsWithExplanations };

/// Item-scoring templates substitute {source_text} and {summary};
/// prompt-generation templates are fixed meta-prompts.
enum class TemplateRole { ItemScoring, PromptGeneration };

std::string to_string(Strategy strategy);
std::string to_string(AnswerSchema schema);
std::string to_string(TemplateRole role);
Strategy parse_strategy(std::string_view text);
AnswerSchema parse_answer_schema(std::string_view text);
TemplateRole parse_template_role(std::string_view text);

inline constexpr std::string_view kSourcePlaceholder = "{source_text}";
inline constexpr std::string_view kSummaryPlaceholder = "{summary}";
inline constexpr std::string_view kDefaultSystemText =
    "You are an AI assistant that follows instruction extremely well. Help as much as you can.";

struct ShotExample {
  EvalItem item;
  std::string demonstrated_answer;
};

struct PromptTemplate {
  std::string id;
  Strategy strategy = Strategy::Standard;
  TemplateRole role = TemplateRole::ItemScoring;
  std::string system_text{kDefaultSystemText};
  std::string instruction_text;
  Rubric rubric = Rubric::numeric(1, 5, 0.5);
  AnswerSchema answer_schema = AnswerSchema::OverallOnly;
  std::vector<ShotExample> shots;
  /// Provenance of the wording (free text, shown by `qe templates`).
  std::string notes;
};

/// Throws TemplateError when a template invariant does not hold.
void validate(const PromptTemplate& tmpl);

/// Renders the framed chat prompt:
///   "### System:\n" system "\n### User:\n" [shots] instruction "\n### Assistant:\n"
/// Each shot renders as its substituted instruction followed by
/// "\n### Assistant:\n" answer "\n### User:\n".
std::string render(const PromptTemplate& tmpl, const EvalItem& item);

/// A well-formed answer in the given schema encoding `value` (snapped to the rubric).
std::string format_answer(const Rubric& rubric, AnswerSchema schema, double value);

/// The built-in template catalog.
const std::vector<PromptTemplate>& catalog();

/// Loads user templates from a directory containing manifest.json and the
/// text files it references.
std::vector<PromptTemplate> load_catalog_dir(const std::filesystem::path& dir);

/// Built-in catalog followed by templates from `dir` (ids must stay unique).
std::vector<PromptTemplate> merged_catalog(const std::optional<std::filesystem::path>& dir);

const PromptTemplate* find_template(const std::vector<PromptTemplate>& templates, std::string_view id);

/// Picks k training items spreading gold scores as widely as possible:
/// the first pick is the item farthest from the median gold score, each
/// following pick maximises its distance to the nearest already-picked gold.
/// Ties go to the smaller id. Answers encode the snapped gold score.
std::vector<ShotExample> build_shots(const DatasetSplit& train, std::size_t k, const Rubric& rubric,
                                     AnswerSchema schema);

}  // namespace qe
