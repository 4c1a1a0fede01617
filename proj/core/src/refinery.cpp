#include "qe/refinery.hpp"

#include <algorithm>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

struct ListItem {
  long number;
  std::size_t begin;
  std::size_t end;
};

// "N." or "N)" at the start of a line (after indentation), followed by
// whitespace or end of line. Three digits at most.
std::optional<long> list_number(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  const std::size_t digits_begin = i;
  while (i < line.size() && detail::is_digit(line[i])) ++i;
  const std::size_t digits = i - digits_begin;
  if (digits == 0 || digits > 3) return std::nullopt;
  if (i >= line.size() || (line[i] != '.' && line[i] != ')')) return std::nullopt;
  if (i + 1 < line.size() && !detail::is_space(line[i + 1])) return std::nullopt;
  const long n = std::stol(std::string(line.substr(digits_begin, digits)));
  if (n <= 0) return std::nullopt;
  return n;
}

std::string join_numbers(const std::vector<long>& numbers) {
  std::string out;
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(numbers[i]);
  }
  return out;
}

void check_numbering(const std::vector<detail::Line>& lines, HallucinationReport& report) {
  std::vector<std::vector<ListItem>> lists;
  for (const auto& line : lines) {
    auto n = list_number(line.text);
    if (!n) continue;
    if (lists.empty() || *n == 1) lists.emplace_back();
    lists.back().push_back({*n, line.offset, line.offset + line.text.size()});
  }
  for (const auto& list : lists) {
    bool ok = list.front().number == 1;
    for (std::size_t i = 1; i < list.size() && ok; ++i) ok = list[i].number == list[i - 1].number + 1;
    if (ok) continue;

    LintFlag flag{FlagKind::NonMonotonicNumbering, list.front().begin, list.back().end, {}, {}};
    std::vector<long> expected;
    for (const auto& item : list) {
      flag.sequence.push_back(item.number);
      expected.push_back(static_cast<long>(expected.size()) + 1);
    }
    flag.detail = "list numbered " + join_numbers(flag.sequence) + " (expected " + join_numbers(expected) + ")";
    report.flags.push_back(std::move(flag));
  }
}

void check_tokens(std::string_view text, const std::vector<detail::Line>& lines, const LintOptions& options,
                  HallucinationReport& report) {
  std::size_t exempt_begin = text.size();
  std::size_t exempt_end = text.size();
  if (options.answer_block_header) {
    if (auto at = text.find(*options.answer_block_header); at != std::string_view::npos) {
      exempt_begin = at;
      exempt_end = text.size();
      bool past_header = false;
      for (const auto& line : lines) {
        if (line.offset + line.text.size() < at) continue;
        if (!past_header) {
          past_header = true;
          continue;
        }
        if (detail::trim(line.text).empty()) {
          exempt_end = line.offset;
          break;
        }
      }
    }
  }

  for (const auto& token : options.spurious_tokens) {
    if (token.empty()) continue;
    for (auto pos = text.find(token); pos != std::string_view::npos; pos = text.find(token, pos + token.size())) {
      if (detail::is_alnum(token.front()) && pos > 0 && detail::is_alnum(text[pos - 1])) continue;
      const std::size_t end = pos + token.size();
      if (detail::is_alnum(token.back()) && end < text.size() && detail::is_alnum(text[end])) continue;
      if (pos >= exempt_begin && pos < exempt_end) continue;
      report.flags.push_back({FlagKind::SpuriousToken, pos, end, "spurious \"" + token + "\"", {}});
    }
  }
}

void check_aspects(const std::vector<detail::Line>& lines, const LintOptions& options, HallucinationReport& report) {
  for (const auto& aspect : options.expected_aspects) {
    std::vector<const detail::Line*> headers;
    for (const auto& line : lines) {
      if (detail::header_end(line.text, aspect)) headers.push_back(&line);
    }
    if (headers.empty()) {
      report.flags.push_back({FlagKind::MissingAspect, 0, 0, "missing \"" + aspect + ":\" header", {}});
    } else if (headers.size() > 1) {
      const auto* second = headers[1];
      report.flags.push_back({FlagKind::DuplicateAspect, second->offset, second->offset + second->text.size(),
                              "\"" + aspect + ":\" header appears " + std::to_string(headers.size()) + " times",
                              {}});
    }
  }
}

}  // namespace

RefinementPhrase::RefinementPhrase(std::string text) : text_(std::string(detail::trim(text))) {
  if (text_.empty()) throw InvalidArgument("refinement phrase is empty");
}

const std::vector<NamedPhrase>& builtin_phrases() {
  static const std::vector<NamedPhrase> phrases = {
      {"improve", "Improve the following instructions"},
      {"rewrite-better", "Rewrite the following instructions to yield better responses"},
      {"more-precise", "Write a more precise set of instructions"},
      {"rewrite-best", "Rewrite the instructions below in order to yield the best results"},
  };
  return phrases;
}

RefinementPhrase resolve_phrase(std::string_view name_or_text) {
  for (const auto& p : builtin_phrases()) {
    if (detail::iequals(p.name, name_or_text)) return RefinementPhrase(std::string(p.text));
  }
  return RefinementPhrase(std::string(name_or_text));
}

std::string make_refinement_prompt(std::string_view seed, const RefinementPhrase& phrase) {
  if (detail::trim(seed).empty()) throw InvalidArgument("seed prompt is empty");
  std::string out = "### System:\n";
  out += kDefaultSystemText;
  out += "\n### User:\n";
  out += phrase.text();
  if (phrase.text().back() != ':') out += ':';
  out += "\n\"";
  out += seed;
  out += "\"\nNew instructions:";
  return out;
}

std::string to_string(FlagKind kind) {
  switch (kind) {
    case FlagKind::NonMonotonicNumbering: return "non_monotonic_numbering";
    case FlagKind::SpuriousToken: return "spurious_token";
    case FlagKind::MissingAspect: return "missing_aspect";
    case FlagKind::DuplicateAspect: return "duplicate_aspect";
  }
  return "?";
}

std::size_t HallucinationReport::count(FlagKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(flags.begin(), flags.end(), [&](const LintFlag& f) { return f.kind == kind; }));
}

HallucinationReport lint_prompt(std::string_view candidate, const LintOptions& options) {
  HallucinationReport report;
  const auto lines = detail::split_lines(candidate);
  check_numbering(lines, report);
  check_tokens(candidate, lines, options, report);
  check_aspects(lines, options, report);
  return report;
}

HallucinationReport lint_prompt(std::string_view candidate, const std::vector<std::string>& expected_aspects) {
  LintOptions options;
  options.expected_aspects = expected_aspects;
  return lint_prompt(candidate, options);
}

std::vector<RefinementCandidate> refine_and_filter(std::string_view seed, const std::vector<RefinementPhrase>& phrases,
                                                   Judge& judge, std::size_t max_candidates,
                                                   const LintOptions& options) {
  std::vector<std::string> prompts;
  prompts.reserve(phrases.size());
  for (const auto& phrase : phrases) prompts.push_back(make_refinement_prompt(seed, phrase));

  const auto outcomes = judge.complete_batch(prompts);
  std::vector<RefinementCandidate> out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    RefinementCandidate c;
    c.phrase = phrases[i].text();
    if (outcomes[i].ok()) {
      c.candidate = std::string(detail::trim(outcomes[i].response().text));
      c.report = lint_prompt(c.candidate, options);
    } else {
      c.error = outcomes[i].failure().message;
    }
    out.push_back(std::move(c));
  }
  auto rank = [](const RefinementCandidate& c) { return c.error ? 2 : (c.report.clean() ? 0 : 1); };
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  if (out.size() > max_candidates) out.resize(max_candidates);
  return out;
}

}  // namespace qe
