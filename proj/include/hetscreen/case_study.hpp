#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hetscreen/dataset.hpp"
#include "hetscreen/rng.hpp"

// Synthetic stand-in for a cardiovascular outcomes trial with 19 baseline
// variables: 5491 patients, 3297 on placebo and 2194 on the highest dose.
// The covariate names and categories follow the published variable list;
// the values are simulated.

namespace hetscreen::case_study {

inline constexpr std::size_t n_rows = 5491;
inline constexpr std::size_t n_control = 3297;
inline constexpr std::size_t n_treated = 2194;

struct Categorical {
  const char* name;
  std::vector<std::string> levels;
  std::vector<double> probs;
};

struct Numeric {
  const char* name;
  double mean, sd, lo, hi;
  std::vector<double> cut_points;  // empty: tertiles
};

inline std::vector<Categorical> categoricals() {
  return {
      {"ASPRNFL", {"N", "Y"}, {0.1, 0.9}},
      {"ETHNIC", {"HISPANIC OR LATINO", "NOT HISPANIC OR LATINO", "UNKNOWN"}, {0.2, 0.75, 0.05}},
      {"GLYCEM", {"Diabetic", "Normoglycemic", "Prediabetic"}, {0.4, 0.2, 0.4}},
      {"MHGOUTFL", {"N", "Y"}, {0.88, 0.12}},
      {"QMITGR3", {"< 12 months", ">= 12 months"}, {0.4, 0.6}},
      {"RACE", {"ASIAN", "OTHER", "WHITE"}, {0.15, 0.1, 0.75}},
      {"REGION1", {"ASIA", "CENTRAL EUROPE", "LATIN AMERICA", "NORTH AMERICA", "OTHERS", "WESTERN EUROPE"},
       {0.13, 0.25, 0.12, 0.15, 0.05, 0.30}},
      {"SEX", {"F", "M"}, {0.25, 0.75}},
      {"SMOKE", {"Current smoker", "Former smoker", "Never"}, {0.25, 0.45, 0.3}},
      {"STATINB", {"High Dose", "Low Dose", "Medium Dose", "No Dose"}, {0.45, 0.1, 0.3, 0.15}},
  };
}

inline std::vector<Numeric> numerics() {
  return {
      {"AGE", 61.0, 9.0, 22.0, 110.0, {}},
      {"BASECRP", 0.62, 0.28, -0.72, 2.5, {}},
      {"LBEGFG1B", 80.0, 19.0, 15.0, 180.0, {60.0, 90.0}},
      {"LBLOGHDL", 0.05, 0.22, -0.89, 0.59, {}},
      {"LBLOGLDL", 0.33, 0.3, -1.7, 1.2, {}},
      {"LBLOGTRI", 0.2, 0.3, -0.62, 1.7, {}},
      {"VSBMIS", 30.0, 5.0, 11.0, 94.0, {}},
      {"VSSTDBMB", 78.0, 10.0, 32.0, 150.0, {}},
      {"VSSTSBMB", 131.0, 17.0, 63.0, 240.0, {}},
  };
}

/// Schema in the published order (alphabetical by name).
inline CovariateSchema schema() {
  std::vector<CovariateSpec> specs;
  for (const auto& c : categoricals()) specs.push_back({c.name, CovariateKind::categorical, c.levels, {}});
  for (const auto& n : numerics()) specs.push_back({n.name, CovariateKind::numeric, {}, n.cut_points});
  std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return CovariateSchema(std::move(specs));
}

/// Continuous outcome with a modest homogeneous treatment effect.
inline Dataset generate(std::uint64_t seed, double effect = 0.1) {
  const auto s = schema();
  const auto cats = categoricals();
  const auto nums = numerics();
  std::vector<Column> columns;
  std::vector<double> y(n_rows, 0.0);
  std::size_t stream = 0;
  for (const auto& spec : s.covariates()) {
    Rng rng(derive_seed(seed, streams::covariates, stream++));
    Column col{spec, {}, {}};
    if (spec.kind == CovariateKind::categorical) {
      const auto& c = *std::find_if(cats.begin(), cats.end(), [&](const auto& x) { return spec.name == x.name; });
      std::discrete_distribution<int> d(c.probs.begin(), c.probs.end());
      col.codes.resize(n_rows);
      for (auto& v : col.codes) v = d(rng);
      for (std::size_t i = 0; i < n_rows; ++i) y[i] += 0.1 * (col.codes[i] == 0 ? 1.0 : 0.0);
    } else {
      const auto& n = *std::find_if(nums.begin(), nums.end(), [&](const auto& x) { return spec.name == x.name; });
      std::normal_distribution<double> d(n.mean, n.sd);
      col.numeric.resize(n_rows);
      for (auto& v : col.numeric) v = std::clamp(d(rng), n.lo, n.hi);
      for (std::size_t i = 0; i < n_rows; ++i) y[i] += 0.2 * (col.numeric[i] - n.mean) / n.sd;
    }
    columns.push_back(std::move(col));
  }
  std::vector<int> arm(n_rows, 0);
  std::fill(arm.begin() + static_cast<std::ptrdiff_t>(n_control), arm.end(), 1);
  Rng arm_rng(derive_seed(seed, streams::arms));
  std::shuffle(arm.begin(), arm.end(), arm_rng);
  Rng noise(derive_seed(seed, streams::noise));
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < n_rows; ++i) y[i] += arm[i] * effect + z(noise);
  return Dataset(s, std::move(y), std::move(arm), std::move(columns));
}

}  // namespace hetscreen::case_study
