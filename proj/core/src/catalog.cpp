#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "qe/prompting.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

using json = nlohmann::json;

constexpr std::string_view kStandardLead =
    "Given the following summary for a news article, evaluate this summary for its fluency, coherence, "
    "consistency and relevance. Provide an overall score for the quality of this summary ";

constexpr std::string_view kInputBlock = "\nNews article: {source_text}\nSummary: {summary}";

constexpr std::string_view kSeedSteps =
    "In this task you will evaluate the quality of summaries written for a news article\n"
    "To correctly solve this task, follow these steps:\n"
    "1. Carefully read the news article, be aware of the information it contains.\n"
    "2. Read the proposed summary.\n";

constexpr std::string_view kAspectDefinitions =
    "Relevance: \"The rating measures how well the summary captures the key points of the article.\n"
    "Consider whether all and only the important aspects are contained in the summary.\"\n"
    "Consistency: \"The rating measures the facts in the summary are consistent with the facts in the original "
    "article.\n"
    "Consider whether the summary does reproduce all facts accurately and does not make up untrue information.\"\n"
    "Fluency: \"This rating measures the quality of individual sentences, are they well-written and grammatically "
    "correct.\n"
    "Consider the quality of individual sentences.\"\n"
    "Coherence: \"The rating measures the quality of all sentences collectively, to the fit together and sound "
    "naturally. Consider the quality of the summary as a whole.\"\n";

constexpr std::string_view kCotGenerated =
    "1. Coherence: Assess how well the summary conveys a clear and logical message.\n"
    "2. Consistency: Check if the summary accurately represents the main points of the news article.\n"
    "3. Fluency: Evaluate the smoothness and readability of the summary.\n"
    "4. Relevance: Determine if the summary is relevant to the news article's topic.\n"
    "For each sentence in the summary, assign a score from 1 to 5 for each aspect (coherence, consistency, "
    "fluency, and relevance).\n"
    "Example:\n"
    "Sentence 1: \"The company announced a new product line.\"\n"
    "Coherence: 4\n"
    "Consistency: 3\n"
    "Fluency: 3\n"
    "Relevance: 4\n"
    "Total Score: {(Coherence + Consistency + Fluency + Relevance) / 4}\n"
    "Total Score: (4 + 3 + 3 + 4) / 4 = 14 / 4 = 3.5\n"
    "So, the summary has an overall score of 3.5 out of 5.";

constexpr std::string_view kCotSeedExample =
    "Example:\n"
    "1. Read the news article: \"A new study found that regular exercise can significantly improve mental "
    "health.\"\n"
    "2. Read the summary: \"A study discovered that exercise has a significant impact on mental health.\"\n"
    "3. Evaluate the summary based on the aspects:\n"
    "a. Coherence: 5 (The summary maintains a clear and logical flow of ideas.)\n"
    "b. Consistency: 5 (The main points of the news article are accurately represented.)\n"
    "c. Fluency: 5 (The summary is written in a smooth and easy-to-understand manner.)\n"
    "d. Relevance: 5 (The summary conveys the essential information from the news article.)\n"
    "4. Assign scores for each aspect:\n"
    "Coherence: 5\n"
    "Consistency: 5\n"
    "Fluency: 5\n"
    "Relevance: 5\n"
    "Total Score: (5 + 5 + 5 + 5) / 4 = 20 / 4 = 5";

constexpr std::string_view kGenerateInstructions =
    "Write a set of instructions to evaluate the quality of the summary of a news article according to its "
    "coherence, consistency, fluency, and relevance for each sentence in the summary with respect to the news "
    "article. Each aspect (coherence, consistency, fluency, and relevance) should be scores from 1 to 5. 1 is the "
    "worst possible score, 5 is the best possible score. Instructions:";

PromptTemplate standard(std::string id, Rubric rubric, std::string notes) {
  PromptTemplate t;
  t.id = std::move(id);
  t.strategy = Strategy::Standard;
  t.instruction_text = std::string(kStandardLead) + rubric.range_sentence() + std::string(kInputBlock);
  t.rubric = std::move(rubric);
  t.notes = std::move(notes);
  return t;
}

std::vector<PromptTemplate> build_catalog() {
  std::vector<PromptTemplate> out;

  out.push_back(standard("P1", Rubric::numeric(1, 5, 0.5), "Standard prompt, 1 to 5 in steps of 0.5."));
  out.push_back(standard("std-100-by10", Rubric::numeric(0, 100, 10), "Standard prompt, 0 to 100 in steps of 10."));
  {
    PromptTemplate t;
    t.id = "std-avg-aspects";
    t.strategy = Strategy::Standard;
    t.instruction_text = std::string(kStandardLead) +
                         "in the range 1 (worst) to 5 (best) that is an average of the scores (also from 1 to 5) "
                         "for fluency, coherence, consistency and relevance." +
                         std::string(kInputBlock);
    t.rubric = Rubric::numeric(1, 5, 0.25);
    t.answer_schema = AnswerSchema::AspectsThenTotal;
    t.notes = "Standard prompt asking for the mean of four 1-5 aspect scores; quarter steps cover every mean.";
    out.push_back(std::move(t));
  }
  out.push_back(standard("std-100-by5", Rubric::numeric(0, 100, 5), "Standard prompt, 0 to 100 in steps of 5."));
  out.push_back(standard("std-verypoor-verygood", Rubric::ordinal({"Very Poor", "Poor", "Average", "Good", "Very Good"}),
                         "Standard prompt with qualitative labels mapped to 1..5."));
  out.push_back(standard("std-incomprehensible-excellent",
                         Rubric::ordinal({"Incomprehensible", "Poor", "Average", "Good", "Excellent"}),
                         "Standard prompt with qualitative labels mapped to 1..5."));
  {
    PromptTemplate t;
    t.id = "seed-annotator";
    t.strategy = Strategy::AnnotatorSeed;
    t.instruction_text =
        std::string(kSeedSteps) +
        "3. Rate each summary on a scale from 1 (Worst) to 5 (Best) by its relevance, consistency, fluency, and "
        "coherence.\n" +
        std::string(kAspectDefinitions) +
        "Format the response as follows:\n"
        "Relevance: <Rating for Relevance>\n"
        "Consistency: <Rating for Consistency>\n"
        "Fluency: <Rating for Fluency>\n"
        "Coherence: <Rating for Coherence>" +
        std::string(kInputBlock);
    t.rubric = Rubric::numeric(1, 5, 1);
    t.answer_schema = AnswerSchema::AspectsThenTotal;
    t.notes = "Expert-annotator guidelines used as a seed prompt; the answer format block is our addition.";
    out.push_back(std::move(t));
  }
  {
    PromptTemplate t;
    t.id = "gen-instructions";
    t.strategy = Strategy::LLMGenerated;
    t.role = TemplateRole::PromptGeneration;
    t.instruction_text = std::string(kGenerateInstructions);
    t.rubric = Rubric::numeric(1, 5, 1);
    t.notes = "Meta-prompt asking an LLM to write judging instructions; its output feeds user templates.";
    out.push_back(std::move(t));
  }
  {
    PromptTemplate t;
    t.id = "cot-generated";
    t.strategy = Strategy::CoT;
    t.instruction_text = std::string(kCotGenerated) + std::string(kInputBlock);
    t.rubric = Rubric::numeric(1, 5, 1);
    t.answer_schema = AnswerSchema::AspectsThenTotal;
    t.notes = "LLM-generated instructions with a worked chain-of-thought example and explicit total formula.";
    out.push_back(std::move(t));
  }
  {
    PromptTemplate t;
    t.id = "cot-seed";
    t.strategy = Strategy::CoT;
    t.instruction_text =
        std::string(kSeedSteps) +
        "3. Rate each summary on a scale from 1 (Worst) to 5 (Best) by its relevance, consistency, fluency, and "
        "coherence.\n" +
        std::string(kAspectDefinitions) + std::string(kCotSeedExample) + std::string(kInputBlock);
    t.rubric = Rubric::numeric(1, 5, 1);
    t.answer_schema = AnswerSchema::AspectsThenTotal;
    t.notes = "Annotator seed with a chain-of-thought example; the elided score lines of the example were completed.";
    out.push_back(std::move(t));
  }
  {
    PromptTemplate t;
    t.id = "explain-aspects";
    t.strategy = Strategy::ExplainAspects;
    t.instruction_text =
        std::string(kSeedSteps) +
        "3. Rate each summary on a scale from 1 (Worst) to 5 (Best) inclusive by its relevance, consistency, "
        "fluency, and coherence.\n" +
        std::string(kAspectDefinitions) +
        "Format the response as follows:\n"
        "Answer:\n"
        "Relevance: <Rating for Relevance>\n"
        "Explanation: <Evidence for Relevance rating>\n"
        "Consistency: <Rating for Consistency>\n"
        "Explanation: <Evidence for Consistency rating>\n"
        "Fluency: <Rating for Fluency>\n"
        "Explanation: <Evidence for Fluency rating>\n"
        "Coherence: <Rating for Coherence>\n"
        "Explanation: <Evidence for Coherence rating>" +
        std::string(kInputBlock);
    t.rubric = Rubric::numeric(1, 5, 1);
    t.answer_schema = AnswerSchema::AspectsWithExplanations;
    t.notes = "Scores plus a one-line explanation per aspect.";
    out.push_back(std::move(t));
  }

  for (const auto& t : out) validate(t);
  return out;
}

Rubric rubric_from_json(const json& j, const std::string& where) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "numeric") {
    return Rubric::numeric(j.at("min").get<double>(), j.at("max").get<double>(), j.at("step").get<double>());
  }
  if (kind == "ordinal") {
    auto labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("values")) return Rubric::ordinal(std::move(labels), j.at("values").get<std::vector<double>>());
    return Rubric::ordinal(std::move(labels));
  }
  throw TemplateError(where + "unknown rubric kind \"" + kind + "\"");
}

}  // namespace

const std::vector<PromptTemplate>& catalog() {
  static const std::vector<PromptTemplate> templates = build_catalog();
  return templates;
}

std::vector<PromptTemplate> load_catalog_dir(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(detail::read_file(manifest_path.string()));
  } catch (const json::exception& e) {
    throw TemplateError(manifest_path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw TemplateError(e.what());
  }

  std::vector<PromptTemplate> out;
  std::set<std::string> ids;
  try {
    for (const auto& entry : manifest.at("templates")) {
      PromptTemplate t;
      t.id = entry.at("id").get<std::string>();
      const std::string where = manifest_path.string() + ": template \"" + t.id + "\": ";
      t.strategy = parse_strategy(entry.value("strategy", "standard"));
      t.role = parse_template_role(entry.value("role", "item_scoring"));
      t.rubric = rubric_from_json(entry.at("rubric"), where);
      t.answer_schema = parse_answer_schema(entry.value("answer_schema", "overall_only"));
      t.instruction_text = detail::read_file((dir / entry.at("instruction_file").get<std::string>()).string());
      if (entry.contains("system_file")) {
        t.system_text = detail::read_file((dir / entry.at("system_file").get<std::string>()).string());
      }
      // Editors usually leave a final newline that is not part of the prompt.
      while (!t.instruction_text.empty() && t.instruction_text.back() == '\n') t.instruction_text.pop_back();
      while (!t.system_text.empty() && t.system_text.back() == '\n') t.system_text.pop_back();
      t.notes = entry.value("notes", "");
      if (!ids.insert(t.id).second) throw TemplateError(where + "duplicate id");
      validate(t);
      out.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw TemplateError(manifest_path.string() + ": " + e.what());
  } catch (const TemplateError&) {
    throw;
  } catch (const Error& e) {
    throw TemplateError(manifest_path.string() + ": " + e.what());
  }
  return out;
}

std::vector<PromptTemplate> merged_catalog(const std::optional<std::filesystem::path>& dir) {
  std::vector<PromptTemplate> out = catalog();
  if (!dir) return out;
  for (auto& t : load_catalog_dir(*dir)) {
    if (find_template(out, t.id) != nullptr) {
      throw TemplateError("template id \"" + t.id + "\" in " + dir->string() + " clashes with a built-in template");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace qe
