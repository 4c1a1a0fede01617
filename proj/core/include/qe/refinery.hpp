#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qe/judge.hpp"

namespace qe {

/// An instruction asking an LLM to rewrite a seed prompt.
class RefinementPhrase {
 public:
  explicit RefinementPhrase(std::string text);

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

struct NamedPhrase {
  std::string_view name;
  std::string_view text;
};

/// The four built-in refinement phrases, with short CLI names.
const std::vector<NamedPhrase>& builtin_phrases();

/// Built-in phrase by name, or a custom phrase taken verbatim.
RefinementPhrase resolve_phrase(std::string_view name_or_text);

/// System header, the phrase, the quoted seed, then "New instructions:".
std::string make_refinement_prompt(std::string_view seed, const RefinementPhrase& phrase);

enum class FlagKind { NonMonotonicNumbering, SpuriousToken, MissingAspect, DuplicateAspect };

std::string to_string(FlagKind kind);

struct LintFlag {
  FlagKind kind;
  /// Byte offsets [begin, end) into the linted text.
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string detail;
  /// Item numbers of the offending list (NonMonotonicNumbering only).
  std::vector<long> sequence;
};

struct HallucinationReport {
  std::vector<LintFlag> flags;

  bool clean() const noexcept { return flags.empty(); }
  std::size_t count(FlagKind kind) const;
};

struct LintOptions {
  std::vector<std::string> expected_aspects;
  std::vector<std::string> spurious_tokens{"Answer:"};
  /// Header line that opens a declared answer-format block; spurious tokens
  /// inside that block (up to the next blank line) are allowed.
  std::optional<std::string> answer_block_header;
};

HallucinationReport lint_prompt(std::string_view candidate, const LintOptions& options);
HallucinationReport lint_prompt(std::string_view candidate,
                                const std::vector<std::string>& expected_aspects);

struct RefinementCandidate {
  std::string phrase;
  std::string candidate;
  HallucinationReport report;
  /// Set when the judge failed for this phrase; candidate is then empty.
  std::optional<std::string> error;
};

/// One completion per phrase, linted. Clean candidates first, then flagged,
/// then failed ones; at most max_candidates are returned.
std::vector<RefinementCandidate> refine_and_filter(std::string_view seed,
                                                   const std::vector<RefinementPhrase>& phrases,
                                                   Judge& judge, std::size_t max_candidates,
                                                   const LintOptions& options = {});

}  // namespace qe
