#include "qe/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

// Single pass, so placeholder-like text inside the item is left alone.
std::string substitute(std::string_view instruction, const EvalItem& item) {
  std::string out;
  out.reserve(instruction.size() + item.source_text.size() + item.hypothesis.size());
  std::size_t pos = 0;
  while (pos < instruction.size()) {
    const auto src = instruction.find(kSourcePlaceholder, pos);
    const auto hyp = instruction.find(kSummaryPlaceholder, pos);
    const auto next = std::min(src, hyp);
    if (next == std::string_view::npos) {
      out.append(instruction.substr(pos));
      break;
    }
    out.append(instruction.substr(pos, next - pos));
    if (next == src) {
      out.append(item.source_text);
      pos = next + kSourcePlaceholder.size();
    } else {
      out.append(item.hypothesis);
      pos = next + kSummaryPlaceholder.size();
    }
  }
  return out;
}

}  // namespace

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Standard: return "standard";
    case Strategy::AnnotatorSeed: return "annotator_seed";
    case Strategy::LLMGenerated: return "llm_generated";
    case Strategy::CoT: return "cot";
    case Strategy::ExplainAspects: return "explain_aspects";
  }
  return "?";
}

std::string to_string(AnswerSchema schema) {
  switch (schema) {
    case AnswerSchema::OverallOnly: return "overall_only";
    case AnswerSchema::AspectsThenTotal: return "aspects_then_total";
    case AnswerSchema::AspectsWithExplanations: return "aspects_with_explanations";
  }
  return "?";
}

std::string to_string(TemplateRole role) {
  return role == TemplateRole::ItemScoring ? "item_scoring" : "prompt_generation";
}

Strategy parse_strategy(std::string_view text) {
  for (auto s : {Strategy::Standard, Strategy::AnnotatorSeed, Strategy::LLMGenerated, Strategy::CoT,
                 Strategy::ExplainAspects}) {
    if (detail::iequals(text, to_string(s))) return s;
  }
  throw TemplateError("unknown strategy \"" + std::string(text) + "\"");
}

AnswerSchema parse_answer_schema(std::string_view text) {
  for (auto s : {AnswerSchema::OverallOnly, AnswerSchema::AspectsThenTotal, AnswerSchema::AspectsWithExplanations}) {
    if (detail::iequals(text, to_string(s))) return s;
  }
  throw TemplateError("unknown answer schema \"" + std::string(text) + "\"");
}

TemplateRole parse_template_role(std::string_view text) {
  for (auto r : {TemplateRole::ItemScoring, TemplateRole::PromptGeneration}) {
    if (detail::iequals(text, to_string(r))) return r;
  }
  throw TemplateError("unknown template role \"" + std::string(text) + "\"");
}

void validate(const PromptTemplate& tmpl) {
  const std::string where = "template \"" + tmpl.id + "\": ";
  if (tmpl.id.empty()) throw TemplateError("template id is empty");
  if (detail::trim(tmpl.instruction_text).empty()) throw TemplateError(where + "instruction text is empty");

  const auto sources = count_occurrences(tmpl.instruction_text, kSourcePlaceholder);
  const auto summaries = count_occurrences(tmpl.instruction_text, kSummaryPlaceholder);
  if (tmpl.role == TemplateRole::ItemScoring) {
    if (sources != 1) {
      throw TemplateError(where + "{source_text} must appear exactly once (found " + std::to_string(sources) + ")");
    }
    if (summaries != 1) {
      throw TemplateError(where + "{summary} must appear exactly once (found " + std::to_string(summaries) + ")");
    }
  } else {
    if (sources != 0 || summaries != 0) throw TemplateError(where + "prompt-generation templates take no placeholders");
    if (!tmpl.shots.empty()) throw TemplateError(where + "prompt-generation templates take no shots");
  }
  if (!tmpl.rubric.is_numeric() && tmpl.answer_schema != AnswerSchema::OverallOnly) {
    throw TemplateError(where + "aspect answer schemas need a numeric rubric");
  }
}

std::string render(const PromptTemplate& tmpl, const EvalItem& item) {
  std::string out = "### System:\n";
  out += tmpl.system_text;
  out += "\n### User:\n";
  if (tmpl.role == TemplateRole::PromptGeneration) {
    out += tmpl.instruction_text;
  } else {
    for (const auto& shot : tmpl.shots) {
      out += substitute(tmpl.instruction_text, shot.item);
      out += "\n### Assistant:\n";
      out += shot.demonstrated_answer;
      out += "\n### User:\n";
    }
    out += substitute(tmpl.instruction_text, item);
  }
  out += "\n### Assistant:\n";
  return out;
}

std::string format_answer(const Rubric& rubric, AnswerSchema schema, double value) {
  const std::string v = rubric.format_value(value);
  switch (schema) {
    case AnswerSchema::OverallOnly:
      return "Score: " + v;
    case AnswerSchema::AspectsThenTotal:
      return "Coherence: " + v + "\nConsistency: " + v + "\nFluency: " + v + "\nRelevance: " + v +
             "\nTotal Score: " + v;
    case AnswerSchema::AspectsWithExplanations: {
      std::string out;
      for (std::string_view aspect : {"Relevance", "Consistency", "Fluency", "Coherence"}) {
        if (!out.empty()) out += "\n";
        out += std::string(aspect) + ": " + v + "\nExplanation: The " + detail::to_lower(aspect) +
               " of the summary merits a rating of " + v + ".";
      }
      return out;
    }
  }
  return v;
}

const PromptTemplate* find_template(const std::vector<PromptTemplate>& templates, std::string_view id) {
  for (const auto& t : templates) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

std::vector<ShotExample> build_shots(const DatasetSplit& train, std::size_t k, const Rubric& rubric,
                                     AnswerSchema schema) {
  if (k == 0) return {};
  if (k > train.size()) {
    throw InvalidArgument("cannot pick " + std::to_string(k) + " shots from " + std::to_string(train.size()) +
                          " training items");
  }
  if (auto missing = train.missing_gold_ids(); !missing.empty()) {
    throw InvalidArgument("training item \"" + missing.front() + "\" has no gold score");
  }

  // Candidate order is id order so ties resolve to the smaller id.
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& items = train.items();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items[a].id < items[b].id; });

  std::vector<double> golds;
  for (const auto& item : items) golds.push_back(*item.gold_score);
  std::vector<double> sorted = golds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

  std::vector<std::size_t> picked;
  std::vector<bool> taken(train.size(), false);
  // Distance of each item to the nearest picked gold; seeded with the median.
  std::vector<double> nearest(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) nearest[i] = std::abs(golds[i] - median);

  while (picked.size() < k) {
    std::size_t best = train.size();
    for (std::size_t i : order) {
      if (taken[i]) continue;
      if (best == train.size() || nearest[i] > nearest[best]) best = i;
    }
    taken[best] = true;
    picked.push_back(best);
    for (std::size_t i = 0; i < train.size(); ++i) {
      nearest[i] = picked.size() == 1 ? std::abs(golds[i] - golds[best])
                                      : std::min(nearest[i], std::abs(golds[i] - golds[best]));
    }
  }

  std::vector<ShotExample> shots;
  shots.reserve(k);
  for (std::size_t i : picked) {
    shots.push_back({items[i], format_answer(rubric, schema, rubric.snap(*items[i].gold_score))});
  }
  return shots;
}

}  // namespace qe
