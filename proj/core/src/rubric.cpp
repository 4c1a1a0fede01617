#include <algorithm>
#include <cmath>
#include <set>

#include "qe/error.hpp"
#include "qe/prompting.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

constexpr double kGridTolerance = 1e-9;

std::string join_with_and(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

std::string join_commas(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

Rubric Rubric::numeric(double min, double max, double step) {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) {
    throw TemplateError("numeric rubric bounds must be finite");
  }
  if (!(min < max)) throw TemplateError("numeric rubric requires min < max");
  if (!(step > 0)) throw TemplateError("numeric rubric requires step > 0");
  const double intervals = (max - min) / step;
  const double whole = std::round(intervals);
  if (std::abs(intervals - whole) > kGridTolerance * std::max(1.0, whole)) {
    throw TemplateError("numeric rubric range " + detail::shortest_decimal(max - min) +
                        " is not a multiple of step " + detail::shortest_decimal(step));
  }
  if (whole > 1e6) throw TemplateError("numeric rubric has too many grid points");

  Rubric r;
  r.kind_ = Kind::NumericScale;
  r.step_ = step;
  const auto count = static_cast<std::size_t>(whole);
  r.values_.reserve(count + 1);
  for (std::size_t i = 0; i < count; ++i) r.values_.push_back(detail::tidy(min + static_cast<double>(i) * step));
  r.values_.push_back(max);
  return r;
}

Rubric Rubric::ordinal(std::vector<std::string> labels, std::vector<double> values) {
  if (labels.size() < 2) throw TemplateError("ordinal rubric needs at least two labels");
  if (labels.size() != values.size()) throw TemplateError("ordinal rubric needs one value per label");
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (detail::trim(label).empty()) throw TemplateError("ordinal rubric label is empty");
    if (!seen.insert(detail::to_lower(label)).second) {
      throw TemplateError("ordinal rubric label \"" + label + "\" is repeated");
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw TemplateError("ordinal rubric values must be finite");
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw TemplateError("ordinal rubric values must increase along label order");
    }
  }
  Rubric r;
  r.kind_ = Kind::OrdinalScale;
  r.labels_ = std::move(labels);
  r.values_ = std::move(values);
  return r;
}

Rubric Rubric::ordinal(std::vector<std::string> labels) {
  std::vector<double> values(labels.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i + 1);
  return ordinal(std::move(labels), std::move(values));
}

bool Rubric::contains(double value) const noexcept {
  return std::isfinite(value) && value >= min() && value <= max();
}

bool Rubric::on_grid(double value) const noexcept {
  return std::any_of(values_.begin(), values_.end(),
                     [&](double v) { return std::abs(v - value) <= kGridTolerance; });
}

double Rubric::snap(double value) const {
  if (!std::isfinite(value)) throw InvalidArgument("cannot snap a non-finite value");
  auto upper = std::lower_bound(values_.begin(), values_.end(), value);
  if (upper == values_.begin()) return values_.front();
  if (upper == values_.end()) return values_.back();
  const double hi = *upper;
  const double lo = *(upper - 1);
  // Midpoints resolve upward.
  return (hi - value) <= (value - lo) + kGridTolerance ? hi : lo;
}

std::string Rubric::format_value(double value) const {
  const double snapped = snap(value);
  if (kind_ == Kind::NumericScale) return detail::shortest_decimal(snapped);
  const auto index = static_cast<std::size_t>(std::find(values_.begin(), values_.end(), snapped) - values_.begin());
  return labels_[index];
}

std::string Rubric::range_sentence() const {
  std::vector<std::string> parts;
  if (kind_ == Kind::NumericScale) {
    for (double v : values_) parts.push_back(detail::shortest_decimal(v));
    return "in the range " + parts.front() + " (worst) to " + parts.back() + " (best). Possible scores are " +
           join_with_and(parts) + ".";
  }
  return "in the range " + labels_.front() + " (worst) to " + labels_.back() +
         " (best). Possible scores are " + join_commas(labels_) + ".";
}

std::string Rubric::describe() const {
  if (kind_ == Kind::NumericScale) {
    return "numeric " + detail::shortest_decimal(min()) + ".." + detail::shortest_decimal(max()) + " step " +
           detail::shortest_decimal(step_);
  }
  return "ordinal " + join_commas(labels_);
}

std::vector<double> allowed_values(const Rubric& rubric) { return rubric.allowed_values(); }

}  // namespace qe
