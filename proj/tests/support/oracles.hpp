#pragma once

// Deliberately naive reference implementations used to check the library.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qe::testing {

struct PairCounts {
  long long concordant = 0;
  long long discordant = 0;
  long long tied_x_only = 0;
  long long tied_y_only = 0;
  long long tied_both = 0;
};

/// Enumerates all n(n-1)/2 pairs.
inline PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) {
        ++c.tied_both;
      } else if (dx == 0) {
        ++c.tied_x_only;
      } else if (dy == 0) {
        ++c.tied_y_only;
      } else if ((dx > 0) == (dy > 0)) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

inline double oracle_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const PairCounts c = count_pairs(x, y);
  const double cd = static_cast<double>(c.concordant + c.discordant);
  const double denom = std::sqrt((cd + c.tied_x_only) * (cd + c.tied_y_only));
  if (denom == 0) throw std::domain_error("undefined tau-b");
  return static_cast<double>(c.concordant - c.discordant) / denom;
}

inline double oracle_tau_a(const std::vector<double>& x, const std::vector<double>& y) {
  const PairCounts c = count_pairs(x, y);
  const double n = static_cast<double>(x.size());
  return static_cast<double>(c.concordant - c.discordant) / (n * (n - 1) / 2);
}

/// Linear scan for the nearest allowed value; equidistant values resolve upward.
inline double oracle_snap(double value, const std::vector<double>& allowed) {
  double best = allowed.front();
  double best_distance = std::numeric_limits<double>::infinity();
  for (double a : allowed) {
    const double d = std::abs(value - a);
    if (d < best_distance - 1e-12 || (std::abs(d - best_distance) <= 1e-12 && a > best)) {
      best = a;
      best_distance = d;
    }
  }
  return best;
}

}  // namespace qe::testing
