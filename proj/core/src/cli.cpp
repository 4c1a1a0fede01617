#include "qe/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "qe/prompting.hpp"
#include "qe/refinery.hpp"
#include "text_util.hpp"

namespace qe::cli {

namespace {

using json = nlohmann::json;

const PromptTemplate& require_template(const std::vector<PromptTemplate>& templates, const std::string& id) {
  const auto* tmpl = find_template(templates, id);
  if (tmpl == nullptr) throw ConfigError("unknown template \"" + id + "\" (see `qe templates`)");
  return *tmpl;
}

PromptTemplate with_shots(PromptTemplate tmpl, std::size_t k, const std::optional<std::filesystem::path>& train_path,
                          const Task& task) {
  if (k == 0) return tmpl;
  if (!train_path) throw ConfigError("one-shot/few-shot prompting needs a training split (--train)");
  const auto train = load_split(*train_path, task, Split::Train);
  tmpl.shots = build_shots(train, k, tmpl.rubric, tmpl.answer_schema);
  validate(tmpl);
  return tmpl;
}

std::shared_ptr<ResponseCache> open_cache(const std::optional<std::filesystem::path>& path, std::ostream& err) {
  if (!path) return std::make_shared<ResponseCache>();
  auto cache = std::make_shared<ResponseCache>(*path);
  if (cache->skipped_lines() > 0) {
    err << "warning: skipped " << cache->skipped_lines() << " unreadable line(s) in cache " << path->string() << "\n";
  }
  return cache;
}

std::string format_tau(double tau) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << tau;
  return ss.str();
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}

}  // namespace

void RunConfig::validate() const {
  if (dataset_path.empty()) throw ConfigError("no dataset given (--dataset)");
  if (template_id.empty()) throw ConfigError("no template given (--template)");
  if (shots_k > 0 && !train_path) throw ConfigError("shots > 0 requires a training split (--train)");
  if (out_scores_path.empty()) throw ConfigError("no scores output path");
  if (out_report_path.empty()) throw ConfigError("no report output path");
  judge.validate();
}

std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  auto mock = std::make_shared<MockBackend>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto entry = json::parse(line);
      const auto hash = entry.at("request_hash").get<std::string>();
      if (entry.contains("http_status")) {
        mock->script_failure(hash, entry.at("http_status").get<int>());
      } else {
        mock->script(hash, entry.at("text").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return mock;
}

int cmd_run(const RunConfig& config, Io io, std::shared_ptr<CompletionBackend> backend) {
  return guarded(io.err, [&] {
    config.validate();
    const auto templates = merged_catalog(config.templates_dir);
    PromptTemplate tmpl = require_template(templates, config.template_id);
    if (tmpl.role != TemplateRole::ItemScoring) {
      throw ConfigError("template \"" + tmpl.id + "\" generates prompts and cannot score items");
    }

    const auto split = load_split(config.dataset_path, config.task, config.split);
    if (auto warning = count_warning(split)) io.err << "warning: " << *warning << "\n";
    tmpl = with_shots(std::move(tmpl), config.shots_k, config.train_path, config.task);

    std::vector<std::string> prompts;
    prompts.reserve(split.size());
    for (const auto& item : split.items()) prompts.push_back(render(tmpl, item));

    if (!backend) {
      switch (config.judge.backend) {
        case BackendKind::Mock:
          backend = config.mock_script_path ? std::shared_ptr<CompletionBackend>(load_mock_script(*config.mock_script_path))
                                            : gold_echo_mock(split, tmpl.rubric, tmpl.answer_schema);
          break;
        default:
          backend = make_backend(config.judge);
      }
    }
    Judge judge(config.judge, backend, open_cache(config.cache_path, io.err));
    const auto outcomes = judge.complete_batch(prompts);

    std::size_t judge_failures = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i].ok()) continue;
      ++judge_failures;
      io.err << "item " << split.items()[i].id << ": " << outcomes[i].failure().message << "\n";
    }
    if (judge_failures > 0) {
      io.err << "error: judge failed for " << judge_failures << " of " << outcomes.size() << " items\n";
      return static_cast<int>(kExitFatal);
    }

    std::vector<double> scores;
    std::vector<ParseStatus> statuses;
    scores.reserve(outcomes.size());
    statuses.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto parsed = parse_response(outcomes[i].response().text, tmpl.rubric, tmpl.answer_schema);
      FinalScore final_score;
      try {
        final_score = finalize(parsed, tmpl.answer_schema, tmpl.rubric, config.fallback_policy);
      } catch (const UnparseableResponse& e) {
        throw UnparseableResponse({"item " + split.items()[i].id + ": " + e.what()});
      }
      scores.push_back(final_score.value);
      statuses.push_back(final_score.status);
    }
    write_scores(scores, config.out_scores_path);

    const EvalReport report = split.fully_labelled()
                                  ? evaluate(scores, split, tmpl.id, statuses, config.tau_variant)
                                  : summarize(scores, split, tmpl.id, statuses);
    write_report(report, config.out_report_path);

    io.out << "scored " << report.n << " items with template " << tmpl.id;
    if (report.tau) io.out << "; " << to_string(report.tau_variant) << " = " << format_tau(*report.tau);
    io.out << "; fallbacks = " << report.fallback_count << "\n";
    return static_cast<int>(report.fallback_count > 0 ? kExitFallback : kExitOk);
  });
}

int cmd_render(const RenderOptions& options, Io io) {
  return guarded(io.err, [&] {
    const auto templates = merged_catalog(options.templates_dir);
    PromptTemplate tmpl = require_template(templates, options.template_id);
    const auto split = load_split(options.dataset_path, Task::summarization(), Split::Dev);
    const auto index = split.find(options.item_id);
    if (!index) throw ConfigError("unknown item id \"" + options.item_id + "\"");
    tmpl = with_shots(std::move(tmpl), options.shots_k, options.train_path, Task::summarization());
    io.out << render(tmpl, split.items()[*index]);
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval(const EvalOptions& options, Io io) {
  return guarded(io.err, [&] {
    const auto scores = read_scores(options.scores_path);
    const auto split = load_split(options.dataset_path, Task::summarization(), Split::Dev);
    const auto report = evaluate(scores, split, options.prompt_id, {}, options.tau_variant);
    io.out << to_string(report.tau_variant) << " = " << detail::shortest_decimal(*report.tau) << "\n";
    io.out << "n = " << report.n << "\n";
    io.out << "reference: direct assessment dev " << BaselineConstants::direct_assessment_dev << ", random dev "
           << BaselineConstants::random_dev << "\n";
    if (options.report_path) {
      write_report(report, *options.report_path);
      io.out << "report written to " << options.report_path->string() << "\n";
    } else {
      io.out << report_to_json(report) << "\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_lint_prompt(const LintCommandOptions& options, Io io) {
  return guarded(io.err, [&] {
    const auto text = detail::read_file(options.file.string());
    const auto report = lint_prompt(text, options.lint);
    if (report.clean()) {
      io.out << "clean\n";
      return static_cast<int>(kExitOk);
    }
    for (const auto& flag : report.flags) {
      io.out << to_string(flag.kind) << " [" << flag.begin << "," << flag.end << "): " << flag.detail << "\n";
    }
    return static_cast<int>(kExitFallback);
  });
}

int cmd_refine(const RefineOptions& options, Io io, std::shared_ptr<CompletionBackend> backend) {
  return guarded(io.err, [&] {
    const auto seed = detail::read_file(options.seed_path.string());
    std::vector<RefinementPhrase> phrases;
    if (options.phrases.empty()) {
      for (const auto& p : builtin_phrases()) phrases.emplace_back(std::string(p.text));
    } else {
      for (const auto& p : options.phrases) phrases.push_back(resolve_phrase(p));
    }

    if (!backend) {
      if (options.judge.backend == BackendKind::Mock) {
        if (!options.mock_script_path) throw ConfigError("the mock backend needs --mock-script for refinement");
        backend = load_mock_script(*options.mock_script_path);
      } else {
        backend = make_backend(options.judge);
      }
    }
    Judge judge(options.judge, backend, open_cache(options.cache_path, io.err));
    const auto candidates = refine_and_filter(seed, phrases, judge, options.max_candidates, options.lint);

    json out = json::array();
    std::size_t clean = 0, usable = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      io.out << "=== candidate " << i + 1 << " (" << c.phrase << "): ";
      json flags = json::array();
      if (c.error) {
        io.out << "error: " << *c.error << "\n";
      } else {
        ++usable;
        if (c.report.clean()) ++clean;
        io.out << (c.report.clean() ? "clean" : "flagged") << "\n" << c.candidate << "\n";
        for (const auto& f : c.report.flags) {
          io.out << "  ! " << to_string(f.kind) << ": " << f.detail << "\n";
          flags.push_back(json{{"kind", to_string(f.kind)}, {"begin", f.begin}, {"end", f.end}, {"detail", f.detail}});
        }
      }
      out.push_back(json{{"phrase", c.phrase},
                     {"candidate", c.candidate},
                     {"clean", !c.error.has_value() && c.report.clean()},
                     {"flags", std::move(flags)},
                     {"error", c.error ? json(*c.error) : json(nullptr)}});
    }
    if (options.out_path) {
      std::ofstream file(*options.out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw Error("cannot write " + options.out_path->string());
      file << out.dump(2) << "\n";
    }
    if (clean > 0) return static_cast<int>(kExitOk);
    return static_cast<int>(usable > 0 ? kExitFallback : kExitFatal);
  });
}

int cmd_templates(const std::optional<std::filesystem::path>& templates_dir, Io io) {
  return guarded(io.err, [&] {
    for (const auto& t : merged_catalog(templates_dir)) {
      io.out << t.id << "\t" << to_string(t.strategy) << "\t" << to_string(t.role) << "\t"
             << to_string(t.answer_schema) << "\t" << t.rubric.describe() << "\n";
      if (!t.notes.empty()) io.out << "    " << t.notes << "\n";
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace qe::cli
