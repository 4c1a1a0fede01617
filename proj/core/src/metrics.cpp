#include "qe/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

using json = nlohmann::json;

std::int64_t tied_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Sorts `v` ascending, returning the number of strictly inverted pairs.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

void fill_statuses(std::span<const ParseStatus> statuses, std::size_t n, EvalReport& report) {
  if (!statuses.empty() && statuses.size() != n) {
    throw InvalidArgument("got " + std::to_string(statuses.size()) + " parse statuses for " + std::to_string(n) +
                          " scores");
  }
  std::size_t failures = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto status = statuses.empty() ? ParseStatus::Ok : statuses[i];
    report.per_item[i].parse_status = status;
    if (status == ParseStatus::Fallback) ++report.fallback_count;
    if (status != ParseStatus::Ok) ++failures;
  }
  report.parse_failure_rate = n == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(n);
}

EvalReport base_report(std::span<const double> scores, const DatasetSplit& split, std::string prompt_id,
                       std::span<const ParseStatus> statuses) {
  if (scores.size() != split.size()) {
    throw InvalidArgument("got " + std::to_string(scores.size()) + " scores for " + std::to_string(split.size()) +
                          " items");
  }
  EvalReport report;
  report.prompt_id = std::move(prompt_id);
  report.n = scores.size();
  report.per_item.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    report.per_item[i].id = split.items()[i].id;
    report.per_item[i].system_score = scores[i];
    report.per_item[i].gold_score = split.items()[i].gold_score;
  }
  fill_statuses(statuses, scores.size(), report);
  return report;
}

}  // namespace

std::string to_string(TauVariant variant) { return variant == TauVariant::TauB ? "tau_b" : "tau_a"; }

TauVariant parse_tau_variant(std::string_view text) {
  if (detail::iequals(text, "tau_b") || detail::iequals(text, "tau-b") || detail::iequals(text, "b")) {
    return TauVariant::TauB;
  }
  if (detail::iequals(text, "tau_a") || detail::iequals(text, "tau-a") || detail::iequals(text, "a")) {
    return TauVariant::TauA;
  }
  throw InvalidArgument("unknown Kendall variant \"" + std::string(text) + "\" (expected tau_b or tau_a)");
}

double kendall_tau(std::span<const double> x, std::span<const double> y, TauVariant variant) {
  if (x.size() != y.size()) {
    throw InvalidArgument("kendall_tau: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("kendall_tau: need at least two observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("kendall_tau: non-finite value");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  std::int64_t x_ties = 0;      // pairs tied in x
  std::int64_t joint_ties = 0;  // pairs tied in both
  {
    std::int64_t x_run = 1, joint_run = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const bool same_x = x[order[i]] == x[order[i - 1]];
      const bool same_y = y[order[i]] == y[order[i - 1]];
      if (same_x) {
        ++x_run;
        if (same_y) {
          ++joint_run;
        } else {
          joint_ties += tied_pairs(joint_run);
          joint_run = 1;
        }
      } else {
        x_ties += tied_pairs(x_run);
        joint_ties += tied_pairs(joint_run);
        x_run = joint_run = 1;
      }
    }
    x_ties += tied_pairs(x_run);
    joint_ties += tied_pairs(joint_run);
  }

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t discordant = merge_count(ys, scratch, 0, n);

  std::int64_t y_ties = 0;
  {
    std::int64_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (ys[i] == ys[i - 1]) {
        ++run;
      } else {
        y_ties += tied_pairs(run);
        run = 1;
      }
    }
    y_ties += tied_pairs(run);
  }

  // C - D = total - x_ties - y_ties + joint_ties - 2D
  const std::int64_t numerator = total - x_ties - y_ties + joint_ties - 2 * discordant;

  if (variant == TauVariant::TauA) {
    if (x_ties > 0 || y_ties > 0) throw InvalidArgument("kendall_tau: tau-a requires tie-free inputs");
    return static_cast<double>(numerator) / static_cast<double>(total);
  }
  const std::int64_t x_side = total - x_ties;  // C + D + pairs tied only in y
  const std::int64_t y_side = total - y_ties;  // C + D + pairs tied only in x
  if (x_side == 0 || y_side == 0) {
    throw CorrelationError("Kendall tau-b is undefined: a score vector is constant");
  }
  const double tau =
      static_cast<double>(numerator) / (std::sqrt(static_cast<double>(x_side)) * std::sqrt(static_cast<double>(y_side)));
  return std::clamp(tau, -1.0, 1.0);
}

EvalReport evaluate(std::span<const double> scores, const DatasetSplit& split, std::string prompt_id,
                    std::span<const ParseStatus> statuses, TauVariant variant) {
  if (auto missing = split.missing_gold_ids(); !missing.empty()) {
    std::string ids;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) ids += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) ids += ", ...";
    throw InvalidArgument("cannot evaluate: " + std::to_string(missing.size()) + " item(s) lack gold scores (" + ids +
                          ")");
  }
  EvalReport report = base_report(scores, split, std::move(prompt_id), statuses);
  std::vector<double> gold;
  gold.reserve(split.size());
  for (const auto& item : split.items()) gold.push_back(*item.gold_score);
  report.tau_variant = variant;
  report.tau = kendall_tau(scores, gold, variant);
  return report;
}

EvalReport summarize(std::span<const double> scores, const DatasetSplit& split, std::string prompt_id,
                     std::span<const ParseStatus> statuses) {
  return base_report(scores, split, std::move(prompt_id), statuses);
}

std::vector<double> random_baseline(std::size_t n, const Rubric& rubric, std::uint64_t seed) {
  const auto& values = rubric.allowed_values();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> out(n);
  for (auto& v : out) v = values[pick(rng)];
  return out;
}

std::vector<double> random_baseline(const DatasetSplit& split, const Rubric& rubric, std::uint64_t seed) {
  if (split.empty()) throw InvalidArgument("random baseline needs a non-empty split");
  return random_baseline(split.size(), rubric, seed);
}

std::string report_to_json(const EvalReport& report) {
  json items = json::array();
  for (const auto& item : report.per_item) {
    items.push_back({{"id", item.id},
                     {"system_score", item.system_score},
                     {"gold_score", item.gold_score ? json(*item.gold_score) : json(nullptr)},
                     {"parse_status", to_string(item.parse_status)}});
  }
  json j = {
      {"prompt_id", report.prompt_id},
      {"n", report.n},
      {"tau", report.tau ? json(*report.tau) : json(nullptr)},
      {"tau_variant", to_string(report.tau_variant)},
      {"parse_failure_rate", report.parse_failure_rate},
      {"fallback_count", report.fallback_count},
      {"per_item", std::move(items)},
      {"baselines",
       {{"direct_assessment_dev", BaselineConstants::direct_assessment_dev},
        {"random_dev", BaselineConstants::random_dev},
        {"best_standard_dev", BaselineConstants::best_standard_dev},
        {"best_test", BaselineConstants::best_test}}},
  };
  return j.dump(2);
}

EvalReport report_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    EvalReport report;
    report.prompt_id = j.at("prompt_id").get<std::string>();
    report.n = j.at("n").get<std::size_t>();
    if (!j.at("tau").is_null()) report.tau = j.at("tau").get<double>();
    report.tau_variant = parse_tau_variant(j.at("tau_variant").get<std::string>());
    report.parse_failure_rate = j.at("parse_failure_rate").get<double>();
    report.fallback_count = j.at("fallback_count").get<std::size_t>();
    for (const auto& item : j.at("per_item")) {
      ItemResult r;
      r.id = item.at("id").get<std::string>();
      r.system_score = item.at("system_score").get<double>();
      if (!item.at("gold_score").is_null()) r.gold_score = item.at("gold_score").get<double>();
      r.parse_status = parse_parse_status(item.at("parse_status").get<std::string>());
      report.per_item.push_back(std::move(r));
    }
    if (report.per_item.size() != report.n) throw InvalidArgument("report n does not match per_item length");
    return report;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed report JSON: ") + e.what());
  }
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report " + path.string());
  out << report_to_json(report) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) { return report_from_json(detail::read_file(path.string())); }

std::string format_score(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("cannot write a non-finite score");
  return detail::shortest_decimal(value);
}

void write_scores(std::span<const double> scores, const std::filesystem::path& path) {
  if (scores.empty()) throw InvalidArgument("refusing to write an empty score file");
  std::string body;
  for (double s : scores) {
    body += format_score(s);
    body += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write scores " + path.string());
  out << body;
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<double> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open scores " + path.string());
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": not a number: \"" + std::string(text) +
                            "\"");
    }
    scores.push_back(value);
  }
  return scores;
}

}  // namespace qe
