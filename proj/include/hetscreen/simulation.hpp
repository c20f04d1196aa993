#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetscreen/analyze.hpp"
#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/normal.hpp"
#include "hetscreen/parallel.hpp"
#include "hetscreen/rng.hpp"

namespace hetscreen::sim {

// ---------------------------------------------------------------------------
// Covariate generator
//
// 30 columns X1..X30:
//   X1, X4, X8   binary {N, Y} with P(Y) = 0.5, 0.3, 0.5
//   X11          uniform on [0, 1]
//   X14          normal, mean 0, SD 0.5
//   X17          standard normal
//   X2 X3 X5 X6 | X7 X9 X10 X12 | X13 X15 X16 X18
//                standard normals, equicorrelated 0.3 within each block of 4
//   X19..X24     uniform on [0, 1]
//   X25..X30     categorical: {A,B} 0.5/0.5, {A,B} 0.7/0.3, {A,B} 0.92/0.08,
//                {A,B,C} 0.45/0.45/0.1, {A,B,C} 0.6/0.3/0.1, {A,B,C} 0.2/0.2/0.6
// Each column (or correlated block) draws from its own derived seed.

inline constexpr std::size_t n_covariates = 30;

struct CovariateTable {
  CovariateSchema schema;
  std::vector<Column> columns;

  std::size_t size() const { return columns.empty() ? 0 : (columns[0].is_numeric() ? columns[0].numeric.size() : columns[0].codes.size()); }
  const Column& column(std::string_view name) const {
    for (const auto& c : columns)
      if (c.spec.name == name) return c;
    throw ConfigError("covariate table has no column '" + std::string(name) + "'");
  }
};

namespace detail {

enum class Gen { binary, uniform, normal_half, normal, block_normal, categorical };

struct ColumnRecipe {
  Gen gen;
  std::vector<double> probs;  // binary: {P(N), P(Y)}; categorical: level probabilities
  int block = -1;             // block_normal: block id
};

inline std::array<ColumnRecipe, n_covariates> recipes() {
  std::array<ColumnRecipe, n_covariates> r;
  for (auto& c : r) c = {Gen::uniform, {}, -1};
  auto bin = [](double py) { return ColumnRecipe{Gen::binary, {1.0 - py, py}, -1}; };
  r[0] = bin(0.5);
  r[3] = bin(0.3);
  r[7] = bin(0.5);
  r[10] = {Gen::uniform, {}, -1};
  r[13] = {Gen::normal_half, {}, -1};
  r[16] = {Gen::normal, {}, -1};
  const int blocks[12] = {2, 3, 5, 6, 7, 9, 10, 12, 13, 15, 16, 18};
  for (int b = 0; b < 12; ++b) r[static_cast<std::size_t>(blocks[b] - 1)] = {Gen::block_normal, {}, b / 4};
  for (int c = 19; c <= 24; ++c) r[static_cast<std::size_t>(c - 1)] = {Gen::uniform, {}, -1};
  const std::vector<std::vector<double>> cats = {{0.5, 0.5}, {0.7, 0.3}, {0.92, 0.08},
                                                 {0.45, 0.45, 0.1}, {0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}};
  for (std::size_t c = 0; c < cats.size(); ++c) r[24 + c] = {Gen::categorical, cats[c], -1};
  return r;
}

inline int draw_category(Rng& rng, const std::vector<double>& probs) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t l = 0; l + 1 < probs.size(); ++l) {
    acc += probs[l];
    if (u < acc) return static_cast<int>(l);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace detail

inline CovariateSchema covariate_schema() {
  const auto rec = detail::recipes();
  std::vector<CovariateSpec> specs;
  for (std::size_t c = 0; c < n_covariates; ++c) {
    CovariateSpec s;
    s.name = "X" + std::to_string(c + 1);
    if (rec[c].gen == detail::Gen::binary) {
      s.kind = CovariateKind::categorical;
      s.levels = {"N", "Y"};
    } else if (rec[c].gen == detail::Gen::categorical) {
      s.kind = CovariateKind::categorical;
      for (std::size_t l = 0; l < rec[c].probs.size(); ++l) s.levels.push_back(std::string(1, static_cast<char>('A' + l)));
    }
    specs.push_back(std::move(s));
  }
  return CovariateSchema(std::move(specs));
}

inline CovariateTable generate_covariates(std::size_t n, std::uint64_t seed) {
  const auto rec = detail::recipes();
  CovariateTable t{covariate_schema(), {}};
  // Shared factor of each correlated block.
  std::array<std::vector<double>, 3> common;
  for (std::size_t b = 0; b < 3; ++b) {
    Rng rng(derive_seed(seed, streams::covariates, 1000 + b));
    std::normal_distribution<double> z;
    common[b].resize(n);
    for (auto& v : common[b]) v = z(rng);
  }
  const double rho = 0.3;
  for (std::size_t c = 0; c < n_covariates; ++c) {
    Column col{t.schema.covariates()[c], {}, {}};
    Rng rng(derive_seed(seed, streams::covariates, c));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> z;
    switch (rec[c].gen) {
      case detail::Gen::binary:
      case detail::Gen::categorical:
        col.codes.resize(n);
        for (auto& v : col.codes) v = detail::draw_category(rng, rec[c].probs);
        break;
      case detail::Gen::uniform:
        col.numeric.resize(n);
        for (auto& v : col.numeric) v = unif(rng);
        break;
      case detail::Gen::normal_half:
        col.numeric.resize(n);
        for (auto& v : col.numeric) v = 0.5 * z(rng);
        break;
      case detail::Gen::normal:
        col.numeric.resize(n);
        for (auto& v : col.numeric) v = z(rng);
        break;
      case detail::Gen::block_normal: {
        col.numeric.resize(n);
        const auto& f = common[static_cast<std::size_t>(rec[c].block)];
        for (std::size_t i = 0; i < n; ++i) col.numeric[i] = std::sqrt(rho) * f[i] + std::sqrt(1.0 - rho) * z(rng);
        break;
      }
    }
    t.columns.push_back(std::move(col));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Scenarios

/// f(X, A) = s * f_prog(X) + A * (beta0 + beta1 * f_pred(X)).
struct ScenarioSpec {
  int id = 1;
  double scale = 1.0;  // s
  double noise_sd = 1.0;
  std::size_t n = 500;

  void validate() const {
    if (id < 1 || id > 4) throw ConfigError("scenario id must be 1..4, got " + std::to_string(id));
    if (!(noise_sd > 0.0)) throw ConfigError("noise SD must be positive");
    if (n < 4) throw ConfigError("trial size must be at least 4");
  }
};

namespace detail {

struct ScenarioColumns {
  const Column* x1 = nullptr;
  const Column* x4 = nullptr;
  const Column* x8 = nullptr;
  const Column* x11 = nullptr;
  const Column* x14 = nullptr;
  const Column* x17 = nullptr;
};

inline const Column* need(const CovariateTable& t, int id, const char* name) {
  for (const auto& c : t.columns)
    if (c.spec.name == name) return &c;
  throw ConfigError(std::string("scenario ") + std::to_string(id) + " needs covariate '" + name + "'");
}

inline bool is_level(const Column& c, std::size_t row, std::string_view level) {
  return c.spec.levels[static_cast<std::size_t>(c.codes[row])] == level;
}

inline ScenarioColumns bind(const CovariateTable& t, int id) {
  ScenarioColumns s;
  switch (id) {
    case 1: s.x1 = need(t, id, "X1"); s.x11 = need(t, id, "X11"); break;
    case 2: s.x8 = need(t, id, "X8"); s.x14 = need(t, id, "X14"); break;
    case 3: s.x1 = need(t, id, "X1"); s.x14 = need(t, id, "X14"); s.x17 = need(t, id, "X17"); break;
    case 4: s.x4 = need(t, id, "X4"); s.x11 = need(t, id, "X11"); s.x14 = need(t, id, "X14"); break;
    default: throw ConfigError("scenario id must be 1..4");
  }
  return s;
}

inline double indicator(bool b) { return b ? 1.0 : 0.0; }

inline double prognostic(int id, const ScenarioColumns& c, std::size_t i) {
  switch (id) {
    case 1: return 0.5 * indicator(is_level(*c.x1, i, "Y")) + c.x11->numeric[i];
    case 2: return c.x14->numeric[i] - indicator(is_level(*c.x8, i, "N"));
    case 3: return indicator(is_level(*c.x1, i, "N")) - 0.5 * c.x17->numeric[i];
    default: return c.x11->numeric[i] - c.x14->numeric[i];
  }
}

inline double predictive(int id, const ScenarioColumns& c, std::size_t i) {
  switch (id) {
    case 1: return normal::cdf(20.0 * (c.x11->numeric[i] - 0.5));
    case 2: return c.x14->numeric[i];
    case 3: return indicator(c.x14->numeric[i] > 0.25 && is_level(*c.x1, i, "N"));
    default: return indicator(c.x14->numeric[i] > 0.3 || is_level(*c.x4, i, "Y"));
  }
}

}  // namespace detail

/// Unscaled prognostic and predictive components for every row.
struct Components {
  std::vector<double> prognostic;
  std::vector<double> predictive;
};

inline Components scenario_components(int id, const CovariateTable& t) {
  const auto c = detail::bind(t, id);
  Components out;
  const auto n = t.size();
  out.prognostic.resize(n);
  out.predictive.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.prognostic[i] = detail::prognostic(id, c, i);
    out.predictive[i] = detail::predictive(id, c, i);
  }
  return out;
}

inline double mean_function(const ScenarioSpec& spec, const CovariateTable& t, std::size_t row, int arm, double beta0,
                            double beta1) {
  spec.validate();
  const auto c = detail::bind(t, spec.id);
  return spec.scale * detail::prognostic(spec.id, c, row) +
         arm * (beta0 + beta1 * detail::predictive(spec.id, c, row));
}

/// Moments of the unscaled components over a fixed 1e6-draw reference
/// population (10 chunks of 1e5 rows).
struct ReferenceMoments {
  double prognostic_sd = 1.0;
  double predictive_mean = 0.0;
};

inline ReferenceMoments compute_reference_moments(int id, std::size_t draws = 1'000'000) {
  const std::size_t chunk = 100'000;
  double n = 0.0, mean = 0.0, m2 = 0.0, pred_sum = 0.0;
  for (std::size_t start = 0, c = 0; start < draws; start += chunk, ++c) {
    const auto t = generate_covariates(std::min(chunk, draws - start), derive_seed(0, streams::scale, c));
    const auto comp = scenario_components(id, t);
    for (std::size_t i = 0; i < comp.prognostic.size(); ++i) {
      n += 1.0;
      const double d = comp.prognostic[i] - mean;
      mean += d / n;
      m2 += d * (comp.prognostic[i] - mean);
      pred_sum += comp.predictive[i];
    }
  }
  return {std::sqrt(m2 / (n - 1.0)), pred_sum / n};
}

inline const ReferenceMoments& reference_moments(int id) {
  static std::once_flag once[4];
  static ReferenceMoments cache[4];
  if (id < 1 || id > 4) throw ConfigError("scenario id must be 1..4");
  std::call_once(once[id - 1], [id] { cache[id - 1] = compute_reference_moments(id); });
  return cache[id - 1];
}

/// Scenario with s chosen so that SD(s * f_prog(X)) = 1 in the reference population.
inline ScenarioSpec make_scenario(int id, std::size_t n = 500) {
  ScenarioSpec s;
  s.id = id;
  s.n = n;
  s.validate();
  s.scale = 1.0 / reference_moments(id).prognostic_sd;
  return s;
}

/// Draws the building blocks of one trial; Y at any (beta0, beta1) is
/// base + A * (beta0 + beta1 * f_pred).
struct TrialDraw {
  CovariateTable covariates;
  Components components;
  std::vector<int> arm;
  std::vector<double> base;  // s * f_prog + noise
};

inline TrialDraw draw_trial(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrialDraw d;
  d.covariates = generate_covariates(spec.n, derive_seed(seed, streams::covariates));
  d.components = scenario_components(spec.id, d.covariates);
  d.arm.assign(spec.n, 0);
  std::fill(d.arm.begin() + static_cast<std::ptrdiff_t>(spec.n / 2), d.arm.end(), 1);
  Rng arm_rng(derive_seed(seed, streams::arms));
  std::shuffle(d.arm.begin(), d.arm.end(), arm_rng);
  Rng noise_rng(derive_seed(seed, streams::noise));
  std::normal_distribution<double> z(0.0, spec.noise_sd);
  d.base.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) d.base[i] = spec.scale * d.components.prognostic[i] + z(noise_rng);
  return d;
}

inline Dataset to_dataset(const TrialDraw& d, double beta0, double beta1) {
  std::vector<double> y(d.base.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.base[i] + d.arm[i] * (beta0 + beta1 * d.components.predictive[i]);
  return Dataset(d.covariates.schema, std::move(y), d.arm, d.covariates.columns);
}

/// Y_i = f(X_i, A_i) + eps_i, eps ~ N(0, noise_sd^2); the arm vector is a
/// uniform permutation of floor(N/2) controls and ceil(N/2) treated.
inline Dataset simulate_trial(const ScenarioSpec& spec, double beta0, double beta1, std::uint64_t seed) {
  return to_dataset(draw_trial(spec, seed), beta0, beta1);
}

// ---------------------------------------------------------------------------
// Tests used for calibration

inline constexpr double z_overall = 1.959963984540054;     // two-sided 0.05
inline constexpr double z_interaction = 1.6448536269514722;  // two-sided 0.1

struct ZStatistic {
  double estimate = 0.0;
  double std_error = 0.0;
  double z() const { return estimate / std_error; }
};

/// Unadjusted two-sample Z statistic for the mean difference treated - control.
inline ZStatistic overall_z(const std::vector<double>& y, const std::vector<int>& arm) {
  double s[2] = {0, 0}, ss[2] = {0, 0};
  double n[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    s[arm[i]] += y[i];
    n[arm[i]] += 1.0;
  }
  const double m0 = s[0] / n[0], m1 = s[1] / n[1];
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - (arm[i] ? m1 : m0);
    ss[arm[i]] += d * d;
  }
  return {m1 - m0, std::sqrt(ss[1] / (n[1] - 1.0) / n[1] + ss[0] / (n[0] - 1.0) / n[0])};
}

/// Wald statistic for the interaction coefficient in
/// Y ~ 1 + f_prog + A + A * f_pred (the correctly specified model).
inline ZStatistic interaction_wald(const std::vector<double>& y, const std::vector<int>& arm, const Components& c) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    x(i, 0) = 1.0;
    x(i, 1) = c.prognostic[u];
    x(i, 2) = arm[u];
    x(i, 3) = arm[u] * c.predictive[u];
    yy(i) = y[u];
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::VectorXd beta = ldlt.solve(x.transpose() * yy);
  const double rss = (yy - x * beta).squaredNorm();
  const double sigma2 = rss / static_cast<double>(n - 4);
  const Eigen::VectorXd e3 = ldlt.solve(Eigen::VectorXd::Unit(4, 3));
  return {beta(3), std::sqrt(sigma2 * e3(3))};
}

// ---------------------------------------------------------------------------
// Calibration

/// Smallest x >= lo (to tolerance) with power(x) >= target, for a power curve
/// that increases in x. The upper end doubles until the target is crossed.
inline double bisect_power(const std::function<double(double)>& power, double target, double lo, double hi,
                           double tol = 1e-7, std::size_t max_expand = 40) {
  if (!(hi > lo)) throw CalibrationError("bisection bracket needs hi > lo");
  const double p_lo = power(lo);
  if (p_lo >= target)
    throw CalibrationError("power " + std::to_string(p_lo) + " at the lower end already reaches the target " +
                           std::to_string(target));
  std::size_t expansions = 0;
  double p_hi = power(hi);
  while (p_hi < target) {
    if (++expansions > max_expand)
      throw CalibrationError("power never reached " + std::to_string(target) + " (last bracket end " +
                             std::to_string(hi) + ", power " + std::to_string(p_hi) + ")");
    lo = hi;
    hi *= 2.0;
    p_hi = power(hi);
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (power(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

struct CalibrationSetting {
  double beta1 = 0.0;
  double beta0 = 0.0;
  double overall_power = 0.0;
  double overall_se = 0.0;
};

struct CalibrationResult {
  int scenario = 1;
  double beta1_star = 0.0;
  double interaction_power = 0.0;
  double interaction_se = 0.0;
  std::size_t reps = 0;
  CalibrationSetting homogeneous;    // beta1 = 0
  CalibrationSetting heterogeneous;  // beta1 = 2 beta1*

  const CalibrationSetting& setting(bool heterogeneous_effects) const {
    return heterogeneous_effects ? heterogeneous : homogeneous;
  }
};

struct CalibrationOptions {
  double target_overall_power = 0.5;
  double target_interaction_power = 0.8;
  double alpha_interaction = 0.1;
  double alpha_overall = 0.05;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

namespace detail {

// Per-replicate sufficient statistics: the statistics are affine in the
// betas for a fixed draw, so power curves are exact step functions of the
// betas over a fixed set of draws.
struct CalibrationDraw {
  double interaction_noise = 0.0;  // interaction estimate at beta1 = 0
  double interaction_se = 0.0;     // independent of the betas
  // Treated-arm moments of base and f_pred, and the control-arm summary.
  double n1 = 0, n0 = 0;
  double sb1 = 0, sbb1 = 0, sp1 = 0, spp1 = 0, sbp1 = 0;
  double mean0 = 0, var0 = 0;

  ZStatistic overall(double beta0, double beta1) const {
    // treated y = b + beta0 + beta1 p
    const double mean_b = sb1 / n1, mean_p = sp1 / n1;
    const double var_b = (sbb1 - n1 * mean_b * mean_b) / (n1 - 1.0);
    const double var_p = (spp1 - n1 * mean_p * mean_p) / (n1 - 1.0);
    const double cov = (sbp1 - n1 * mean_b * mean_p) / (n1 - 1.0);
    const double var1 = std::max(0.0, var_b + beta1 * beta1 * var_p + 2.0 * beta1 * cov);
    return {mean_b + beta0 + beta1 * mean_p - mean0, std::sqrt(var1 / n1 + var0 / n0)};
  }
};

inline CalibrationDraw summarize_draw(const TrialDraw& d) {
  CalibrationDraw c;
  const auto w = interaction_wald(d.base, d.arm, d.components);
  c.interaction_noise = w.estimate;
  c.interaction_se = w.std_error;
  double s0 = 0, ss0 = 0;
  for (std::size_t i = 0; i < d.base.size(); ++i) {
    const double b = d.base[i];
    if (d.arm[i]) {
      const double p = d.components.predictive[i];
      c.n1 += 1;
      c.sb1 += b;
      c.sbb1 += b * b;
      c.sp1 += p;
      c.spp1 += p * p;
      c.sbp1 += b * p;
    } else {
      c.n0 += 1;
      s0 += b;
      ss0 += b * b;
    }
  }
  c.mean0 = s0 / c.n0;
  c.var0 = (ss0 - c.n0 * c.mean0 * c.mean0) / (c.n0 - 1.0);
  return c;
}

}  // namespace detail

/// beta1* gives the target interaction power; beta0 then gives the target
/// overall power for beta1 in {0, 2 beta1*}. Both are found by bisection over
/// a fixed set of simulated draws (common random numbers).
inline CalibrationResult calibrate(const ScenarioSpec& spec, const CalibrationOptions& options = {}) {
  spec.validate();
  if (options.reps < 1000) throw CalibrationError("calibration needs at least 1000 replications");
  std::vector<detail::CalibrationDraw> draws(options.reps);
  parallel_for(options.reps, options.workers, [&](std::size_t r) {
    draws[r] = detail::summarize_draw(draw_trial(spec, derive_seed(options.seed, streams::calibration, r)));
  });
  const double z_int = normal::quantile(1.0 - options.alpha_interaction / 2.0);
  const double z_all = normal::quantile(1.0 - options.alpha_overall / 2.0);
  const double reps = static_cast<double>(options.reps);

  auto interaction_power = [&](double beta1) {
    std::size_t hits = 0;
    for (const auto& d : draws) hits += std::abs(beta1 + d.interaction_noise) / d.interaction_se > z_int;
    return static_cast<double>(hits) / reps;
  };
  auto overall_power = [&](double beta0, double beta1) {
    std::size_t hits = 0;
    for (const auto& d : draws) hits += std::abs(d.overall(beta0, beta1).z()) > z_all;
    return static_cast<double>(hits) / reps;
  };
  auto se = [&](double p) { return std::sqrt(p * (1.0 - p) / reps); };

  CalibrationResult out;
  out.scenario = spec.id;
  out.reps = options.reps;
  out.beta1_star = bisect_power(interaction_power, options.target_interaction_power, 0.0, 0.5);
  out.interaction_power = interaction_power(out.beta1_star);
  out.interaction_se = se(out.interaction_power);

  // Overall power is searched along the mean treatment effect m = beta0 +
  // beta1 E[f_pred] >= 0, on which it increases.
  const double pred_mean = reference_moments(spec.id).predictive_mean;
  auto solve = [&](double beta1) {
    CalibrationSetting s;
    s.beta1 = beta1;
    const double shift = beta1 * pred_mean;
    auto power_m = [&](double m) { return overall_power(m - shift, beta1); };
    const double m = bisect_power(power_m, options.target_overall_power, 0.0, 0.1);
    s.beta0 = m - shift;
    s.overall_power = overall_power(s.beta0, beta1);
    s.overall_se = se(s.overall_power);
    return s;
  };
  out.homogeneous = solve(0.0);
  out.heterogeneous = solve(2.0 * out.beta1_star);
  return out;
}

struct PowerEstimate {
  double power = 0.0;
  double std_error = 0.0;
};

/// Re-evaluates the overall Z-test power by full simulation on the given seed.
inline PowerEstimate overall_power(const ScenarioSpec& spec, double beta0, double beta1, std::size_t reps,
                                   std::uint64_t seed, double alpha = 0.05, std::size_t workers = 1) {
  const double z = normal::quantile(1.0 - alpha / 2.0);
  std::vector<char> hit(reps, 0);
  parallel_for(reps, workers, [&](std::size_t r) {
    const auto data = simulate_trial(spec, beta0, beta1, derive_seed(seed, streams::repetition, r));
    hit[r] = std::abs(overall_z(data.outcome(), data.arm()).z()) > z;
  });
  const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

/// Re-evaluates the interaction Wald test power by full simulation.
inline PowerEstimate interaction_power(const ScenarioSpec& spec, double beta1, std::size_t reps, std::uint64_t seed,
                                       double alpha = 0.1, std::size_t workers = 1) {
  const double z = normal::quantile(1.0 - alpha / 2.0);
  std::vector<char> hit(reps, 0);
  parallel_for(reps, workers, [&](std::size_t r) {
    const auto d = draw_trial(spec, derive_seed(seed, streams::repetition, r));
    const auto data = to_dataset(d, 0.0, beta1);
    hit[r] = std::abs(interaction_wald(data.outcome(), data.arm(), d.components).z()) > z;
  });
  const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

}  // namespace hetscreen::sim
