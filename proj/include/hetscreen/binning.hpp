#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"

namespace hetscreen {

/// A covariate cut into ordered levels. Every row belongs to exactly one level.
struct BinnedCovariate {
  std::string source;
  std::vector<std::string> levels;
  std::vector<int> assignment;      // level index per row
  std::vector<double> cut_points;   // numeric sources: upper bounds of all but the last level
  bool degenerate = false;          // fewer than two non-empty levels
  std::size_t dropped_levels = 0;   // empty levels removed by tie collapse

  std::size_t size() const noexcept { return assignment.size(); }
  std::size_t level_count() const noexcept { return levels.size(); }

  std::vector<std::size_t> level_sizes() const {
    std::vector<std::size_t> sizes(levels.size(), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
  }
};

namespace detail {

inline std::string format_cut(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string interval_label(double lo, double hi) {
  const std::string l = std::isinf(lo) ? "-inf" : format_cut(lo);
  if (std::isinf(hi)) return "(" + l + ",inf)";
  return "(" + l + "," + format_cut(hi) + "]";
}

/// Assigns values to the intervals (-inf,c1], (c1,c2], ..., (cm,inf) and drops
/// the empty ones.
inline BinnedCovariate bin_by_cuts(std::span<const double> values, std::vector<double> cuts,
                                   std::string source) {
  BinnedCovariate out;
  out.source = std::move(source);
  const std::size_t raw_levels = cuts.size() + 1;
  std::vector<int> raw(values.size());
  std::vector<std::size_t> counts(raw_levels, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::lower_bound(cuts.begin(), cuts.end(), values[i]);
    raw[i] = static_cast<int>(it - cuts.begin());
    ++counts[static_cast<std::size_t>(raw[i])];
  }
  std::vector<int> remap(raw_levels, -1);
  std::vector<double> kept_upper;
  double lo = -std::numeric_limits<double>::infinity();
  int next = 0;
  for (std::size_t l = 0; l < raw_levels; ++l) {
    if (counts[l] == 0) {
      ++out.dropped_levels;
      continue;
    }
    remap[l] = next++;
    kept_upper.push_back(l < cuts.size() ? cuts[l] : std::numeric_limits<double>::infinity());
  }
  // Merged interval boundaries: an empty level's range folds into its
  // non-empty neighbour above.
  for (std::size_t l = 0; l < kept_upper.size(); ++l) {
    const double hi = l + 1 == kept_upper.size() ? std::numeric_limits<double>::infinity() : kept_upper[l];
    out.levels.push_back(interval_label(lo, hi));
    if (l + 1 < kept_upper.size()) out.cut_points.push_back(hi);
    lo = hi;
  }
  out.assignment.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.assignment[i] = remap[static_cast<std::size_t>(raw[i])];
  out.degenerate = out.levels.size() < 2;
  return out;
}

}  // namespace detail

/// Tertile cut points are the order statistics at ranks ceil(n/3) and
/// ceil(2n/3) of the sorted values; levels are (-inf,q1], (q1,q2], (q2,inf).
inline std::pair<double, double> tertile_cut_points(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) throw DataError("tertile binning needs at least 3 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t r1 = (n + 2) / 3;          // ceil(n/3)
  const std::size_t r2 = (2 * n + 2) / 3;      // ceil(2n/3)
  return {sorted[r1 - 1], sorted[r2 - 1]};
}

inline BinnedCovariate tertile_bin(std::span<const double> values, std::string source = {}) {
  const auto [q1, q2] = tertile_cut_points(values);
  std::vector<double> cuts{q1};
  if (q2 > q1) cuts.push_back(q2);
  auto out = detail::bin_by_cuts(values, std::move(cuts), std::move(source));
  if (q2 <= q1) ++out.dropped_levels;  // middle level collapsed by ties
  return out;
}

inline BinnedCovariate cut_bin(std::span<const double> values, const std::vector<double>& cuts,
                               std::string source = {}) {
  return detail::bin_by_cuts(values, cuts, std::move(source));
}

/// One level per observed category, in declared order.
inline BinnedCovariate categorical_bin(const Column& column) {
  BinnedCovariate out;
  out.source = column.spec.name;
  std::vector<std::size_t> counts(column.spec.levels.size(), 0);
  for (int c : column.codes) ++counts[static_cast<std::size_t>(c)];
  std::vector<int> remap(counts.size(), -1);
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 0) {
      ++out.dropped_levels;
      continue;
    }
    remap[l] = static_cast<int>(out.levels.size());
    out.levels.push_back(column.spec.levels[l]);
  }
  out.assignment.reserve(column.codes.size());
  for (int c : column.codes) out.assignment.push_back(remap[static_cast<std::size_t>(c)]);
  out.degenerate = out.levels.size() < 2;
  return out;
}

inline BinnedCovariate bin_column(const Column& column) {
  if (!column.is_numeric()) return categorical_bin(column);
  if (!column.spec.cut_points.empty()) return cut_bin(column.numeric, column.spec.cut_points, column.spec.name);
  return tertile_bin(column.numeric, column.spec.name);
}

/// Bins every covariate in schema order; degenerate results are left out.
inline std::vector<BinnedCovariate> bin_all(const Dataset& data) {
  std::vector<BinnedCovariate> out;
  for (const auto& column : data.columns()) {
    auto binned = bin_column(column);
    if (!binned.degenerate) out.push_back(std::move(binned));
  }
  return out;
}

}  // namespace hetscreen
