#include "qe/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

using detail::is_alnum;
using detail::is_alpha;
using detail::is_digit;

struct Candidate {
  double value;
  std::size_t begin;
  std::size_t end;
};

// True when the text just before `pos` (ignoring spaces) marks a denominator.
bool preceded_by_denominator(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) --i;
  if (i > 0 && text[i - 1] == '/') return true;
  constexpr std::string_view kOutOf = "out of";
  if (i >= kOutOf.size() && detail::iequals(text.substr(i - kOutOf.size(), kOutOf.size()), kOutOf)) {
    const std::size_t start = i - kOutOf.size();
    return start == 0 || !is_alnum(text[start - 1]);
  }
  return false;
}

std::vector<Candidate> numeric_candidates(std::string_view text) {
  std::vector<Candidate> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool signed_start = (text[i] == '-' || text[i] == '+') && i + 1 < text.size() && is_digit(text[i + 1]) &&
                              (i == 0 || !is_alnum(text[i - 1]));
    if (!is_digit(text[i]) && !signed_start) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    if (begin > 0 && (is_alnum(text[begin - 1]) || text[begin - 1] == '.' || text[begin - 1] == '_')) {
      // Part of an identifier or dotted token such as "v3" or "1.2.3"; skip the run.
      ++i;
      while (i < text.size() && (is_alnum(text[i]) || text[i] == '.')) ++i;
      continue;
    }
    std::size_t j = signed_start ? i + 1 : i;
    while (j < text.size() && is_digit(text[j])) ++j;
    if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
      ++j;
      while (j < text.size() && is_digit(text[j])) ++j;
    }
    const std::size_t end = j;
    const bool glued = end < text.size() && (is_alpha(text[end]) || text[end] == '_' ||
                                             (text[end] == '.' && end + 1 < text.size() && is_digit(text[end + 1])));
    if (glued) {
      ++i;
      while (i < text.size() && (is_alnum(text[i]) || text[i] == '.')) ++i;
      continue;
    }
    i = end;
    if (preceded_by_denominator(text, begin)) continue;

    double value = 0.0;
    const char* first = text.data() + begin + (text[begin] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, text.data() + end, value);
    if (ec != std::errc{} || !std::isfinite(value)) continue;
    out.push_back({value, begin, end});
  }
  return out;
}

std::vector<Candidate> label_candidates(std::string_view text, const Rubric& rubric) {
  // Longest labels first so "Very Poor" is not read as "Poor".
  std::vector<std::size_t> order(rubric.labels().size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rubric.labels()[a].size() > rubric.labels()[b].size();
  });

  std::vector<Candidate> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (i > 0 && is_alnum(text[i - 1])) {
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t k : order) {
      const auto& label = rubric.labels()[k];
      if (i + label.size() > text.size()) continue;
      if (!detail::iequals(text.substr(i, label.size()), label)) continue;
      const std::size_t end = i + label.size();
      if (end < text.size() && is_alnum(text[end])) continue;
      out.push_back({rubric.allowed_values()[k], i, end});
      i = end;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return out;
}

std::vector<Candidate> candidates(std::string_view text, const Rubric& rubric) {
  return rubric.is_numeric() ? numeric_candidates(text) : label_candidates(text, rubric);
}

std::string aspect_lower(Aspect aspect) { return detail::to_lower(aspect_name(aspect)); }

std::optional<std::size_t> header_end(std::string_view line, Aspect aspect) {
  return detail::header_end(line, aspect_name(aspect));
}

bool is_any_header(std::string_view line) {
  return std::any_of(std::begin(kAspects), std::end(kAspects),
                     [&](Aspect a) { return header_end(line, a).has_value(); });
}

std::optional<std::string> explanation_after(std::string_view rest, const std::vector<detail::Line>& lines,
                                             std::size_t line_index) {
  constexpr std::string_view kLabel = "explanation:";
  auto take_following = [&](std::size_t from) -> std::optional<std::string> {
    for (std::size_t k = from; k < lines.size(); ++k) {
      const auto text = detail::trim(lines[k].text);
      if (text.empty()) continue;
      if (is_any_header(lines[k].text)) return std::nullopt;
      return std::string(text);
    }
    return std::nullopt;
  };

  const auto lowered = detail::to_lower(rest);
  if (const auto pos = lowered.find(kLabel); pos != std::string::npos) {
    const auto text = detail::trim(rest.substr(pos + kLabel.size()));
    if (!text.empty()) return std::string(text);
    return take_following(line_index + 1);
  }
  for (std::size_t k = line_index + 1; k < lines.size(); ++k) {
    const auto text = detail::trim(lines[k].text);
    if (text.empty()) continue;
    if (!detail::istarts_with(text, kLabel)) return std::nullopt;
    const auto body = detail::trim(text.substr(kLabel.size()));
    if (!body.empty()) return std::string(body);
    return take_following(k + 1);
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Fallback: return "fallback";
    case ParseStatus::Failed: return "failed";
  }
  return "?";
}

ParseStatus parse_parse_status(std::string_view text) {
  for (auto s : {ParseStatus::Ok, ParseStatus::Fallback, ParseStatus::Failed}) {
    if (detail::iequals(text, to_string(s))) return s;
  }
  throw InvalidArgument("unknown parse status \"" + std::string(text) + "\"");
}

std::string_view aspect_name(Aspect aspect) {
  switch (aspect) {
    case Aspect::Coherence: return "Coherence";
    case Aspect::Consistency: return "Consistency";
    case Aspect::Fluency: return "Fluency";
    case Aspect::Relevance: return "Relevance";
  }
  return "?";
}

double AspectScores::get(Aspect aspect) const {
  switch (aspect) {
    case Aspect::Coherence: return coherence;
    case Aspect::Consistency: return consistency;
    case Aspect::Fluency: return fluency;
    case Aspect::Relevance: return relevance;
  }
  return 0.0;
}

void AspectScores::set(Aspect aspect, double value) {
  switch (aspect) {
    case Aspect::Coherence: coherence = value; break;
    case Aspect::Consistency: consistency = value; break;
    case Aspect::Fluency: fluency = value; break;
    case Aspect::Relevance: relevance = value; break;
  }
}

ParsedScore parse_overall(std::string_view text, const Rubric& rubric) {
  ParsedScore result;
  const auto found = candidates(text, rubric);
  for (auto it = found.rbegin(); it != found.rend(); ++it) {
    if (rubric.contains(it->value)) {
      result.overall = it->value;
      result.on_grid = rubric.on_grid(it->value);
      result.parse_status = ParseStatus::Ok;
      if (!result.on_grid) result.diagnostics.push_back("score " + detail::shortest_decimal(it->value) + " is off-grid");
      return result;
    }
    result.diagnostics.push_back("ignored out-of-range candidate " + std::string(text.substr(it->begin, it->end - it->begin)));
  }
  result.parse_status = ParseStatus::Failed;
  result.diagnostics.push_back(rubric.is_numeric() ? "no in-range number found" : "no rubric label found");
  return result;
}

ParsedScore parse_aspects(std::string_view text, const Rubric& rubric) {
  ParsedScore result;
  const auto lines = detail::split_lines(text);
  AspectScores scores;
  std::vector<Aspect> missing;

  for (Aspect aspect : kAspects) {
    bool found = false;
    for (std::size_t li = 0; li < lines.size() && !found; ++li) {
      const auto line = lines[li].text;
      const auto after = header_end(line, aspect);
      if (!after) continue;
      const auto rest = line.substr(*after);
      for (const auto& c : candidates(rest, rubric)) {
        if (!rubric.contains(c.value)) continue;
        scores.set(aspect, c.value);
        if (auto why = explanation_after(rest.substr(c.end), lines, li)) scores.explanations[aspect] = std::move(*why);
        found = true;
        break;
      }
      if (!found) result.diagnostics.push_back(aspect_lower(aspect) + " header without an in-range rating");
    }
    if (!found) missing.push_back(aspect);
  }

  if (!missing.empty()) {
    for (Aspect a : missing) result.diagnostics.push_back("missing aspect: " + aspect_lower(a));
    result.parse_status = ParseStatus::Failed;
    return result;
  }
  const double mean = aggregate_mean(scores);
  result.aspects = std::move(scores);
  result.overall = mean;
  result.on_grid = rubric.on_grid(mean);
  result.parse_status = ParseStatus::Ok;
  return result;
}

ParsedScore parse_response(std::string_view text, const Rubric& rubric, AnswerSchema schema) {
  switch (schema) {
    case AnswerSchema::OverallOnly: return parse_overall(text, rubric);
    case AnswerSchema::AspectsWithExplanations: return parse_aspects(text, rubric);
    case AnswerSchema::AspectsThenTotal: {
      auto aspects = parse_aspects(text, rubric);
      if (aspects.parse_status == ParseStatus::Ok) return aspects;
      auto total = parse_overall(text, rubric);
      total.diagnostics.insert(total.diagnostics.begin(), aspects.diagnostics.begin(), aspects.diagnostics.end());
      if (total.parse_status == ParseStatus::Ok) total.diagnostics.push_back("aspects incomplete; used overall total");
      return total;
    }
  }
  return {};
}

double aggregate_mean(const AspectScores& aspects) {
  return (aspects.coherence + aspects.consistency + aspects.fluency + aspects.relevance) / 4.0;
}

std::string to_string(FallbackPolicy policy) { return policy == FallbackPolicy::Midpoint ? "midpoint" : "error"; }

FallbackPolicy parse_fallback_policy(std::string_view text) {
  if (detail::iequals(text, "midpoint")) return FallbackPolicy::Midpoint;
  if (detail::iequals(text, "error")) return FallbackPolicy::Error;
  throw InvalidArgument("unknown fallback policy \"" + std::string(text) + "\" (expected midpoint or error)");
}

FinalScore finalize(const ParsedScore& parsed, AnswerSchema schema, const Rubric& rubric, FallbackPolicy policy) {
  FinalScore out;
  out.diagnostics = parsed.diagnostics;
  if (schema != AnswerSchema::OverallOnly && parsed.aspects) {
    out.value = aggregate_mean(*parsed.aspects);
    return out;
  }
  if (parsed.parse_status == ParseStatus::Ok && parsed.overall) {
    out.value = *parsed.overall;
    return out;
  }
  if (policy == FallbackPolicy::Error) throw UnparseableResponse(parsed.diagnostics);
  out.value = rubric.midpoint();
  out.status = ParseStatus::Fallback;
  out.diagnostics.push_back("fell back to rubric midpoint " + detail::shortest_decimal(out.value));
  return out;
}

}  // namespace qe
