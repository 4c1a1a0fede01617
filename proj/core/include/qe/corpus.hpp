#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qe {

/// One source/hypothesis pair; the unit of scoring.
struct EvalItem {
  std::string id;
  std::string source_text;
  std::string hypothesis;
  std::optional<double> gold_score;

  friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

enum class TaskKind { Summarization, Translation };

struct Task {
  TaskKind kind = TaskKind::Summarization;
  /// e.g. "en-de"; empty for summarization.
  std::string language_pair;

  static Task summarization() { return {TaskKind::Summarization, {}}; }
  static Task translation(std::string pair) { return {TaskKind::Translation, std::move(pair)}; }

  friend bool operator==(const Task&, const Task&) = default;
};

enum class Split { Train, Dev, Test };

/// Parses "summarization" or "translation:<pair>".
Task parse_task(const std::string& text);
std::string to_string(const Task& task);
Split parse_split_name(const std::string& text);
std::string to_string(Split split);

/// An ordered, immutable collection of items from one task and split.
/// Item order is the canonical order for score files.
class DatasetSplit {
 public:
  DatasetSplit(Task task, Split split, std::vector<EvalItem> items);

  const Task& task() const noexcept { return task_; }
  Split split() const noexcept { return split_; }
  const std::vector<EvalItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  /// Index of the item with this id, if any.
  std::optional<std::size_t> find(const std::string& id) const;

  /// Ids of items lacking a gold score, in split order.
  std::vector<std::string> missing_gold_ids() const;
  bool fully_labelled() const { return missing_gold_ids().empty(); }

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;

 private:
  Task task_;
  Split split_;
  std::vector<EvalItem> items_;
};

/// Reads a JSON-Lines dataset: one object per line with keys
/// "id", "src", "hyp" and optional numeric "gold". Blank lines are skipped.
/// Throws DatasetError naming the offending line(s).
DatasetSplit load_split(const std::filesystem::path& path, Task task, Split split);
DatasetSplit parse_split(std::istream& in, Task task, Split split);

void write_split(const DatasetSplit& split, std::ostream& out);
void write_split(const DatasetSplit& split, const std::filesystem::path& path);

/// Published split size for the shared-task data, when one exists.
std::optional<std::size_t> expected_count(const Task& task, Split split);

/// Advisory message when the loaded size differs from the published one.
std::optional<std::string> count_warning(const DatasetSplit& split);

}  // namespace qe
