#include <gtest/gtest.h>

#include <sstream>

#include "qe/corpus.hpp"
#include "qe/error.hpp"
#include "test_support.hpp"

using namespace qe;

namespace {

DatasetSplit parse(const std::string& text) {
  std::istringstream in(text);
  return parse_split(in, Task::summarization(), Split::Dev);
}

}  // namespace

TEST(Corpus, ParsesItemsInOrder) {
  auto split = parse(R"({"id":"a","src":"S1","hyp":"H1","gold":3.5}
{"id":"b","src":"S2","hyp":"H2"}
)");
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split.items()[0].id, "a");
  EXPECT_EQ(split.items()[0].gold_score, 3.5);
  EXPECT_FALSE(split.items()[1].gold_score.has_value());
  EXPECT_EQ(split.find("b"), 1u);
  EXPECT_FALSE(split.find("zzz").has_value());
  EXPECT_EQ(split.missing_gold_ids(), std::vector<std::string>{"b"});
  EXPECT_FALSE(split.fully_labelled());
}

TEST(Corpus, SkipsBlankLines) {
  auto split = parse("\n{\"id\":\"a\",\"src\":\"S\",\"hyp\":\"H\"}\n\n   \n");
  EXPECT_EQ(split.size(), 1u);
}

TEST(Corpus, DuplicateIdNamesBothLines) {
  try {
    parse("{\"id\":\"a\",\"src\":\"S\",\"hyp\":\"H\"}\n{\"id\":\"a\",\"src\":\"T\",\"hyp\":\"G\"}\n");
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("lines 1 and 2"), std::string::npos) << what;
  }
}

TEST(Corpus, RejectsMalformedRecords) {
  EXPECT_THROW(parse("{not json}\n"), DatasetError);
  EXPECT_THROW(parse("{\"id\":\"a\",\"src\":\"\",\"hyp\":\"H\"}\n"), DatasetError);
  EXPECT_THROW(parse("{\"id\":\"\",\"src\":\"S\",\"hyp\":\"H\"}\n"), DatasetError);
  EXPECT_THROW(parse("{\"id\":\"a\",\"src\":\"S\",\"hyp\":\"H\",\"gold\":\"high\"}\n"), DatasetError);
  EXPECT_THROW(parse("{\"id\":\"a\",\"src\":\"S\"}\n"), DatasetError);
  EXPECT_THROW(parse(""), DatasetError);
}

TEST(Corpus, ErrorNamesOffendingLine) {
  try {
    parse("{\"id\":\"a\",\"src\":\"S\",\"hyp\":\"H\"}\n{\"id\":\"b\",\"src\":\"S\"}\n");
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, ConstructorEnforcesUniqueIds) {
  std::vector<EvalItem> items{{"x", "s", "h", 1.0}, {"x", "s2", "h2", 2.0}};
  EXPECT_THROW(DatasetSplit(Task::summarization(), Split::Dev, items), DatasetError);
}

TEST(Corpus, RoundTripsThroughJsonLines) {
  auto original = load_split(qe::testing::data_dir() / "fixture.jsonl", Task::summarization(), Split::Dev);
  std::stringstream buffer;
  write_split(original, buffer);
  auto copy = parse_split(buffer, Task::summarization(), Split::Dev);
  EXPECT_EQ(original, copy);
}

TEST(Corpus, LoadMissingFileThrows) {
  EXPECT_THROW(load_split("/nonexistent/file.jsonl", Task::summarization(), Split::Dev), DatasetError);
}

TEST(Corpus, TaskAndSplitNames) {
  EXPECT_EQ(parse_task("summarization"), Task::summarization());
  EXPECT_EQ(parse_task("translation:en-de"), Task::translation("en-de"));
  EXPECT_EQ(to_string(Task::translation("zh-en")), "translation:zh-en");
  EXPECT_THROW(parse_task("poetry"), ConfigError);
  EXPECT_THROW(parse_task("translation:"), ConfigError);
  EXPECT_EQ(parse_split_name("test"), Split::Test);
  EXPECT_EQ(to_string(Split::Train), "train");
  EXPECT_THROW(parse_split_name("validation"), ConfigError);
}

TEST(Corpus, PublishedCountsDriveAdvisoryWarnings) {
  EXPECT_EQ(expected_count(Task::summarization(), Split::Test), 825u);
  EXPECT_EQ(expected_count(Task::translation("en-de"), Split::Train), 11046u);
  EXPECT_FALSE(expected_count(Task::translation("zh-en"), Split::Test).has_value());
  auto split = load_split(qe::testing::data_dir() / "fixture.jsonl", Task::summarization(), Split::Dev);
  auto warning = count_warning(split);
  ASSERT_TRUE(warning.has_value());
  EXPECT_NE(warning->find("1280"), std::string::npos);
}
