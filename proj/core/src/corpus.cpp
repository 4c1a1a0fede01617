#include "qe/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

using json = nlohmann::json;

namespace {

void check_item(const EvalItem& item, const std::string& where) {
  if (item.id.empty()) throw DatasetError(where + "empty id");
  if (item.source_text.empty()) throw DatasetError(where + "empty src for id \"" + item.id + "\"");
  if (item.hypothesis.empty()) throw DatasetError(where + "empty hyp for id \"" + item.id + "\"");
  if (item.gold_score && !std::isfinite(*item.gold_score)) {
    throw DatasetError(where + "non-finite gold for id \"" + item.id + "\"");
  }
}

std::string required_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DatasetError("line " + std::to_string(line_no) + ": missing or non-string \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

Task parse_task(const std::string& text) {
  if (detail::iequals(text, "summarization")) return Task::summarization();
  constexpr std::string_view prefix = "translation:";
  if (detail::istarts_with(text, prefix) && text.size() > prefix.size()) {
    return Task::translation(detail::to_lower(text.substr(prefix.size())));
  }
  throw ConfigError("unknown task \"" + text + "\" (expected summarization or translation:<pair>)");
}

std::string to_string(const Task& task) {
  return task.kind == TaskKind::Summarization ? "summarization" : "translation:" + task.language_pair;
}

Split parse_split_name(const std::string& text) {
  if (detail::iequals(text, "train")) return Split::Train;
  if (detail::iequals(text, "dev")) return Split::Dev;
  if (detail::iequals(text, "test")) return Split::Test;
  throw ConfigError("unknown split \"" + text + "\" (expected train, dev or test)");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

DatasetSplit::DatasetSplit(Task task, Split split, std::vector<EvalItem> items)
    : task_(std::move(task)), split_(split), items_(std::move(items)) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    check_item(items_[i], "item " + std::to_string(i) + ": ");
    auto [it, inserted] = seen.emplace(items_[i].id, i);
    if (!inserted) {
      throw DatasetError("duplicate id \"" + items_[i].id + "\" at items " + std::to_string(it->second) +
                         " and " + std::to_string(i));
    }
  }
}

std::optional<std::size_t> DatasetSplit::find(const std::string& id) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> DatasetSplit::missing_gold_ids() const {
  std::vector<std::string> ids;
  for (const auto& item : items_) {
    if (!item.gold_score) ids.push_back(item.id);
  }
  return ids;
}

DatasetSplit parse_split(std::istream& in, Task task, Split split) {
  std::vector<EvalItem> items;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DatasetError("line " + std::to_string(line_no) + ": expected a JSON object");

    EvalItem item;
    item.id = required_string(obj, "id", line_no);
    item.source_text = required_string(obj, "src", line_no);
    item.hypothesis = required_string(obj, "hyp", line_no);
    if (auto it = obj.find("gold"); it != obj.end() && !it->is_null()) {
      if (!it->is_number()) throw DatasetError("line " + std::to_string(line_no) + ": \"gold\" is not a number");
      item.gold_score = it->get<double>();
    }
    check_item(item, "line " + std::to_string(line_no) + ": ");

    auto [pos, inserted] = first_line.emplace(item.id, line_no);
    if (!inserted) {
      throw DatasetError("duplicate id \"" + item.id + "\" on lines " + std::to_string(pos->second) + " and " +
                         std::to_string(line_no));
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw DatasetError("dataset is empty");
  return DatasetSplit(std::move(task), split, std::move(items));
}

DatasetSplit load_split(const std::filesystem::path& path, Task task, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  try {
    return parse_split(in, std::move(task), split);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

void write_split(const DatasetSplit& split, std::ostream& out) {
  for (const auto& item : split.items()) {
    json obj = {{"id", item.id}, {"src", item.source_text}, {"hyp", item.hypothesis}};
    if (item.gold_score) obj["gold"] = *item.gold_score;
    out << obj.dump() << '\n';
  }
}

void write_split(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_split(split, out);
  if (!out) throw Error("write failed for " + path.string());
}

std::optional<std::size_t> expected_count(const Task& task, Split split) {
  struct Row {
    std::string_view pair;
    std::optional<std::size_t> train, dev, test;
  };
  static constexpr Row kSummarization{"", 320, 1280, 825};
  static constexpr Row kTranslation[] = {
      {"en-de", 11046, 7364, 1425},
      {"zh-en", 15750, 10500, std::nullopt},
      {"en-es", std::nullopt, std::nullopt, 1834},
      {"en-zh", std::nullopt, std::nullopt, 1297},
  };

  const Row* row = nullptr;
  if (task.kind == TaskKind::Summarization) {
    row = &kSummarization;
  } else {
    for (const auto& r : kTranslation) {
      if (r.pair == task.language_pair) row = &r;
    }
  }
  if (row == nullptr) return std::nullopt;
  switch (split) {
    case Split::Train: return row->train;
    case Split::Dev: return row->dev;
    case Split::Test: return row->test;
  }
  return std::nullopt;
}

std::optional<std::string> count_warning(const DatasetSplit& split) {
  auto expected = expected_count(split.task(), split.split());
  if (!expected || *expected == split.size()) return std::nullopt;
  return "loaded " + std::to_string(split.size()) + " " + to_string(split.task()) + "/" + to_string(split.split()) +
         " items; the published split has " + std::to_string(*expected);
}

}  // namespace qe
