#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qe/corpus.hpp"
#include "qe/judge.hpp"
#include "qe/metrics.hpp"
#include "qe/refinery.hpp"
#include "qe/scoring.hpp"

namespace qe::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFallback = 1, kExitFatal = 2 };

struct RunConfig {
  std::filesystem::path dataset_path;
  Task task = Task::summarization();
  Split split = Split::Dev;
  std::string template_id = "P1";
  std::optional<std::filesystem::path> templates_dir;
  JudgeConfig judge;
  std::size_t shots_k = 0;
  std::optional<std::filesystem::path> train_path;
  FallbackPolicy fallback_policy = FallbackPolicy::Midpoint;
  TauVariant tau_variant = TauVariant::TauB;
  std::optional<std::filesystem::path> cache_path;
  std::optional<std::filesystem::path> mock_script_path;
  std::filesystem::path out_scores_path = "scores.txt";
  std::filesystem::path out_report_path = "report.json";

  /// Throws ConfigError.
  void validate() const;
};

/// Streams the subcommands write to.
struct Io {
  std::ostream& out;
  std::ostream& err;
};

/// render -> judge -> parse -> aggregate -> scores file + report.
/// `backend` overrides the backend implied by config.judge.backend.
/// Returns 0 when clean, 1 when any item fell back, 2 on fatal errors.
int cmd_run(const RunConfig& config, Io io, std::shared_ptr<CompletionBackend> backend = nullptr);

struct RenderOptions {
  std::string template_id;
  std::string item_id;
  std::filesystem::path dataset_path;
  std::optional<std::filesystem::path> templates_dir;
  std::size_t shots_k = 0;
  std::optional<std::filesystem::path> train_path;
};

/// Writes exactly the bytes render() produces.
int cmd_render(const RenderOptions& options, Io io);

struct EvalOptions {
  std::filesystem::path scores_path;
  std::filesystem::path dataset_path;
  TauVariant tau_variant = TauVariant::TauB;
  std::string prompt_id = "external";
  std::optional<std::filesystem::path> report_path;
};

int cmd_eval(const EvalOptions& options, Io io);

struct LintCommandOptions {
  std::filesystem::path file;
  LintOptions lint;
};

/// 0 when clean, 1 when flagged, 2 on errors.
int cmd_lint_prompt(const LintCommandOptions& options, Io io);

struct RefineOptions {
  std::filesystem::path seed_path;
  std::vector<std::string> phrases;
  JudgeConfig judge;
  std::optional<std::filesystem::path> cache_path;
  std::optional<std::filesystem::path> mock_script_path;
  std::size_t max_candidates = 4;
  LintOptions lint;
  std::optional<std::filesystem::path> out_path;
};

int cmd_refine(const RefineOptions& options, Io io, std::shared_ptr<CompletionBackend> backend = nullptr);

int cmd_templates(const std::optional<std::filesystem::path>& templates_dir, Io io);

/// Mock backend scripted from a JSON-Lines file of {"request_hash", "text"}
/// (or {"request_hash", "http_status"} for scripted failures).
std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path);

}  // namespace qe::cli
