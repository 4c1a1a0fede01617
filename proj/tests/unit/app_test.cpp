#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "app.hpp"
#include "qe/corpus.hpp"
#include "qe/metrics.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace qe;
using qe::testing::slurp;
using qe::testing::spit;
using qe::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const JudgeEnvironment& env = {}) {
  args.insert(args.begin(), "qe");
  std::ostringstream out, err;
  const int code = qe::tool::run_app(args, out, err, env);
  return {code, out.str(), err.str()};
}

/// Model names recorded in a response cache file.
std::set<std::string> cached_models(const std::filesystem::path& path) {
  std::set<std::string> models;
  std::istringstream in(slurp(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) models.insert(nlohmann::json::parse(line).at("model_name").get<std::string>());
  }
  return models;
}

class AppTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dataset_ = dir_ / "dev.jsonl";
    write_split(qe::testing::synthetic_split(6, 12), dataset_);
  }
  std::vector<std::string> run_args(const std::string& tag) const {
    return {"run", "--dataset", dataset_.string(), "--out-scores", (dir_ / (tag + ".txt")).string(),
            "--out-report", (dir_ / (tag + ".json")).string(), "--cache", (dir_ / (tag + ".cache")).string()};
  }
  TempDir dir_;
  std::filesystem::path dataset_;
};

}  // namespace

TEST_F(AppTest, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"eval"}).code, 2);
}

TEST_F(AppTest, RunWritesArtifacts) {
  auto r = run(run_args("a"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tau_b"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "a.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "a.json"));
}

TEST_F(AppTest, ModelPrecedenceFlagOverConfigOverEnvironment) {
  JudgeEnvironment env;
  env.model = "env-model";

  auto r = run(run_args("defaults"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cached_models(dir_ / "defaults.cache"), std::set<std::string>{"orca_mini_v3_7b"});

  r = run(run_args("env"), env);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cached_models(dir_ / "env.cache"), std::set<std::string>{"env-model"});

  spit(dir_ / "run.ini", "model = config-model\nmax-in-flight = 2\n");
  auto args = run_args("config");
  args.insert(args.end(), {"--config", (dir_ / "run.ini").string()});
  r = run(args, env);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cached_models(dir_ / "config.cache"), std::set<std::string>{"config-model"});

  args = run_args("flag");
  args.insert(args.end(), {"--config", (dir_ / "run.ini").string(), "--model", "flag-model"});
  r = run(args, env);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(cached_models(dir_ / "flag.cache"), std::set<std::string>{"flag-model"});
}

TEST_F(AppTest, EndpointFromEnvironmentOnlyWhenUnset) {
  JudgeEnvironment env;
  env.backend_url = "http://127.0.0.1:1/from-env";
  auto base = run_args("ep");
  base.insert(base.end(), {"--backend", "http", "--max-retries", "0", "--timeout-ms", "200"});

  auto r = run(base, env);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/from-env"), std::string::npos) << r.err;

  auto args = base;
  args.insert(args.end(), {"--endpoint", "http://127.0.0.1:1/from-flag"});
  r = run(args, env);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/from-flag"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("/from-env"), std::string::npos) << r.err;

  r = run(base);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("endpoint"), std::string::npos) << r.err;
}

TEST_F(AppTest, ConfigFileSuppliesRunFields) {
  spit(dir_ / "all.ini", "dataset = " + dataset_.string() + "\ntemplate = seed-annotator\nout-scores = " +
                             (dir_ / "cfg.txt").string() + "\nout-report = " + (dir_ / "cfg.json").string() + "\n");
  auto r = run({"run", "--config", (dir_ / "all.ini").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_report(dir_ / "cfg.json").prompt_id, "seed-annotator");
}

TEST_F(AppTest, InvalidEnumValuesAreFatal) {
  auto args = run_args("x");
  args.insert(args.end(), {"--fallback", "shrug"});
  EXPECT_EQ(run(args).code, 2);
}

TEST_F(AppTest, OtherSubcommands) {
  EXPECT_EQ(run({"templates"}).code, 0);
  auto lint = run({"lint-prompt", (qe::testing::data_dir() / "responses" / "hallucinated_response.txt").string(),
                   "--expect-aspects", "Relevance", "Consistency", "Fluency", "Coherence"});
  EXPECT_EQ(lint.code, 1);
  auto render = run({"render", "--item", "d1", "--dataset", (qe::testing::data_dir() / "fixture.jsonl").string()});
  EXPECT_EQ(render.code, 0);
  EXPECT_EQ(render.out, slurp(qe::testing::data_dir() / "golden" / "p1_render.txt"));
  auto eval = run({"eval", "--scores", (qe::testing::data_dir() / "fixture_scores.txt").string(), "--dataset",
                   (qe::testing::data_dir() / "fixture.jsonl").string()});
  EXPECT_EQ(eval.code, 0) << eval.err;
}

TEST_F(AppTest, UnknownConfigKeyIsFatal) {
  spit(dir_ / "bad.ini", "# comment\nmodle = typo\n");
  auto args = run_args("bad");
  args.insert(args.end(), {"--config", (dir_ / "bad.ini").string()});
  auto r = run(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown key \"modle\""), std::string::npos) << r.err;
}
