#include "app.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "qe/cli.hpp"
#include "qe/error.hpp"
#include "qe/refinery.hpp"

namespace qe::tool {

namespace {

const std::vector<std::string> kDefaultAspects = {"Relevance", "Consistency", "Fluency", "Coherence"};

struct JudgeFlags {
  std::string backend = "mock";
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_new_tokens = 512;
  long timeout_ms = 120'000;
  unsigned max_retries = 3;
  unsigned max_in_flight = 4;

  CLI::Option* endpoint_opt = nullptr;
  CLI::Option* model_opt = nullptr;

  void attach(CLI::App& cmd) {
    cmd.add_option("--backend", backend, "Judge backend: http, mock or cache-only")->capture_default_str();
    endpoint_opt = cmd.add_option("--endpoint", endpoint, "Completion endpoint URL (http backend)");
    model_opt = cmd.add_option("--model", model, "Model name sent to the backend");
    cmd.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    cmd.add_option("--max-new-tokens", max_new_tokens, "Completion length limit")->capture_default_str();
    cmd.add_option("--timeout-ms", timeout_ms, "Per-request timeout in milliseconds")->capture_default_str();
    cmd.add_option("--max-retries", max_retries, "Retries for transport and 5xx failures")->capture_default_str();
    cmd.add_option("--max-in-flight", max_in_flight, "Concurrent requests")->capture_default_str();
  }

  JudgeConfig resolve(const JudgeEnvironment& env) const {
    JudgeConfig config;
    config.backend = parse_backend_kind(backend);
    config.endpoint_url = endpoint_opt->count() > 0 ? endpoint : env.backend_url.value_or("");
    if (model_opt->count() > 0) {
      config.model_name = model;
    } else if (env.model) {
      config.model_name = *env.model;
    }
    config.temperature = temperature;
    config.max_new_tokens = max_new_tokens;
    config.request_timeout = std::chrono::milliseconds{timeout_ms};
    config.max_retries = max_retries;
    config.max_in_flight = max_in_flight;
    return config;
  }
};

/// Fills options not given on the command line from a flat "key = value"
/// file whose keys are long option names without the leading dashes.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = CLI::detail::trim_copy(line.substr(0, eq));
    std::string value = CLI::detail::trim_copy(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (opt == nullptr) throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const JudgeEnvironment& env) {
  CLI::App app{"Reference-free quality estimation with an LLM judge", "qe"};
  app.require_subcommand(1);
  const cli::Io io{out, err};

  // run
  auto* run = app.add_subcommand("run", "Score a dataset with a template and judge, then evaluate");
  std::string run_config_file;
  run->add_option("--config", run_config_file, "Flat key = value file; command-line flags take precedence");
  std::string run_dataset, run_task = "summarization", run_split = "dev", run_template = "P1", run_templates_dir;
  std::string run_train, run_fallback = "midpoint", run_tau = "tau_b", run_cache, run_mock_script;
  std::string run_scores = "scores.txt", run_report = "report.json";
  std::size_t run_shots = 0;
  JudgeFlags run_judge;
  run->add_option("--dataset", run_dataset, "JSON-Lines dataset to score");
  run->add_option("--task", run_task, "summarization or translation:<pair>")->capture_default_str();
  run->add_option("--split", run_split, "train, dev or test")->capture_default_str();
  run->add_option("--template", run_template, "Template id (see `qe templates`)")->capture_default_str();
  run->add_option("--templates-dir", run_templates_dir, "Directory with manifest.json of extra templates");
  run->add_option("--shots", run_shots, "Number of demonstration examples")->capture_default_str();
  run->add_option("--train", run_train, "Training split for demonstrations");
  run->add_option("--fallback", run_fallback, "Unparseable responses: midpoint or error")->capture_default_str();
  run->add_option("--tau-variant", run_tau, "tau_b or tau_a")->capture_default_str();
  run->add_option("--cache", run_cache, "Append-only JSON-Lines response cache");
  run->add_option("--mock-script", run_mock_script, "JSON-Lines {request_hash, text} script for the mock backend");
  run->add_option("--out-scores", run_scores, "Score file (one number per line)")->capture_default_str();
  run->add_option("--out-report", run_report, "Report JSON")->capture_default_str();
  run_judge.attach(*run);

  // eval
  auto* eval = app.add_subcommand("eval", "Kendall correlation of a score file against gold scores");
  std::string eval_scores, eval_dataset, eval_tau = "tau_b", eval_report, eval_prompt = "external";
  eval->add_option("--scores", eval_scores, "Score file")->required();
  eval->add_option("--dataset", eval_dataset, "Labelled JSON-Lines dataset")->required();
  eval->add_option("--tau-variant", eval_tau, "tau_b or tau_a")->capture_default_str();
  eval->add_option("--report", eval_report, "Write the report JSON here instead of stdout");
  eval->add_option("--prompt-id", eval_prompt, "Label stored in the report")->capture_default_str();

  // render
  auto* render_cmd = app.add_subcommand("render", "Print the exact prompt for one item");
  std::string render_template = "P1", render_item, render_dataset, render_templates_dir, render_train;
  std::size_t render_shots = 0;
  render_cmd->add_option("--template", render_template, "Template id")->capture_default_str();
  render_cmd->add_option("--item", render_item, "Item id")->required();
  render_cmd->add_option("--dataset", render_dataset, "JSON-Lines dataset")->required();
  render_cmd->add_option("--templates-dir", render_templates_dir, "Directory with manifest.json of extra templates");
  render_cmd->add_option("--shots", render_shots, "Number of demonstration examples")->capture_default_str();
  render_cmd->add_option("--train", render_train, "Training split for demonstrations");

  // refine
  auto* refine = app.add_subcommand("refine", "Ask an LLM to rewrite a seed prompt and lint the results");
  std::string refine_seed, refine_cache, refine_mock, refine_out;
  std::vector<std::string> refine_phrases, refine_aspects = kDefaultAspects;
  std::size_t refine_max = 4;
  bool refine_no_aspects = false;
  JudgeFlags refine_judge;
  refine->add_option("--seed", refine_seed, "Seed prompt file")->required();
  refine->add_option("--phrase", refine_phrases,
                     "Built-in phrase name (improve, rewrite-better, more-precise, rewrite-best) or custom text; "
                     "repeatable, defaults to all built-ins");
  refine->add_option("--max-candidates", refine_max, "Candidates to keep")->capture_default_str();
  refine->add_option("--expect-aspects", refine_aspects, "Aspect headers each candidate must contain once");
  refine->add_flag("--no-aspect-check", refine_no_aspects, "Skip the aspect header check");
  refine->add_option("--cache", refine_cache, "Append-only JSON-Lines response cache");
  refine->add_option("--mock-script", refine_mock, "JSON-Lines {request_hash, text} script for the mock backend");
  refine->add_option("--out", refine_out, "Write candidates and reports as JSON");
  refine_judge.attach(*refine);

  // lint-prompt
  auto* lint = app.add_subcommand("lint-prompt", "Check a prompt for numbering, token and aspect hallucinations");
  std::string lint_file, lint_header;
  std::vector<std::string> lint_aspects, lint_tokens = {"Answer:"};
  lint->add_option("file", lint_file, "Prompt text file")->required();
  lint->add_option("--expect-aspects", lint_aspects, "Aspect headers that must appear exactly once");
  lint->add_option("--token", lint_tokens, "Spurious tokens to flag (default: Answer:)");
  lint->add_option("--answer-header", lint_header, "Header line opening an allowed answer-format block");

  // templates
  auto* templates = app.add_subcommand("templates", "List available prompt templates");
  std::string templates_dir;
  templates->add_option("--templates-dir", templates_dir, "Directory with manifest.json of extra templates");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? cli::kExitOk : cli::kExitFatal;
  }

  try {
    if (*run) {
      if (!run_config_file.empty()) apply_config_file(*run, run_config_file);
      cli::RunConfig config;
      config.dataset_path = run_dataset;
      config.task = parse_task(run_task);
      config.split = parse_split_name(run_split);
      config.template_id = run_template;
      config.templates_dir = optional_path(run_templates_dir);
      config.judge = run_judge.resolve(env);
      config.shots_k = run_shots;
      config.train_path = optional_path(run_train);
      config.fallback_policy = parse_fallback_policy(run_fallback);
      config.tau_variant = parse_tau_variant(run_tau);
      config.cache_path = optional_path(run_cache);
      config.mock_script_path = optional_path(run_mock_script);
      config.out_scores_path = run_scores;
      config.out_report_path = run_report;
      return cli::cmd_run(config, io);
    }
    if (*eval) {
      cli::EvalOptions options;
      options.scores_path = eval_scores;
      options.dataset_path = eval_dataset;
      options.tau_variant = parse_tau_variant(eval_tau);
      options.prompt_id = eval_prompt;
      options.report_path = optional_path(eval_report);
      return cli::cmd_eval(options, io);
    }
    if (*render_cmd) {
      cli::RenderOptions options;
      options.template_id = render_template;
      options.item_id = render_item;
      options.dataset_path = render_dataset;
      options.templates_dir = optional_path(render_templates_dir);
      options.shots_k = render_shots;
      options.train_path = optional_path(render_train);
      return cli::cmd_render(options, io);
    }
    if (*refine) {
      cli::RefineOptions options;
      options.seed_path = refine_seed;
      options.phrases = refine_phrases;
      options.judge = refine_judge.resolve(env);
      options.cache_path = optional_path(refine_cache);
      options.mock_script_path = optional_path(refine_mock);
      options.max_candidates = refine_max;
      if (!refine_no_aspects) options.lint.expected_aspects = refine_aspects;
      options.out_path = optional_path(refine_out);
      return cli::cmd_refine(options, io);
    }
    if (*lint) {
      cli::LintCommandOptions options;
      options.file = lint_file;
      options.lint.expected_aspects = lint_aspects;
      options.lint.spurious_tokens = lint_tokens;
      if (!lint_header.empty()) options.lint.answer_block_header = lint_header;
      return cli::cmd_lint_prompt(options, io);
    }
    if (*templates) return cli::cmd_templates(optional_path(templates_dir), io);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return cli::kExitFatal;
  }
  return cli::kExitFatal;
}

}  // namespace qe::tool
