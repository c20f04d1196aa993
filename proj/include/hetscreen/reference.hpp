#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hetscreen/correlation.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/mvn.hpp"
#include "hetscreen/normal.hpp"
#include "hetscreen/parallel.hpp"
#include "hetscreen/pseudo_outcomes.hpp"
#include "hetscreen/rng.hpp"
#include "hetscreen/stats.hpp"
#include "hetscreen/subgroups.hpp"

namespace hetscreen {

enum class Method { bonferroni, mvn_integration, permutation };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::bonferroni: return "bonferroni";
    case Method::mvn_integration: return "mvn";
    case Method::permutation: return "permutation";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Bonferroni

/// p = min(1, 2k (1 - Phi(t))).
inline double pvalue_bonferroni(double t_max, std::size_t k) {
  if (k < 1) throw InferenceError("Bonferroni p-value needs k >= 1");
  return std::min(1.0, 2.0 * static_cast<double>(k) * normal::upper_tail(t_max));
}

/// q_gamma = Phi^{-1}(1 - (1 - gamma) / (2k)).
inline double quantile_bonferroni(double gamma, std::size_t k) {
  return normal::quantile(1.0 - (1.0 - gamma) / (2.0 * static_cast<double>(k)));
}

struct BonferroniReference {
  std::size_t k = 1;
  double cdf(double t) const { return 1.0 - pvalue_bonferroni(t, k); }
  double pvalue(double t) const { return pvalue_bonferroni(t, k); }
  double quantile(double gamma) const { return quantile_bonferroni(gamma, k); }
};

// ---------------------------------------------------------------------------
// Permutation

struct PermutationOptions {
  std::size_t n_perm = 500;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t block = 64;  // permutations per matrix product; fixed so results do not depend on workers
};

/// Empirical reference built from permuted pseudo-outcomes.
/// F(t) = (1 + #{T_max,l <= t}) / (N_perm + 1); p(t) = (1 + #{T_max,l >= t}) / (N_perm + 1).
struct PermutationReference {
  std::vector<double> draws;   // T_max,l in permutation order
  std::vector<double> sorted;  // ascending
  std::uint64_t seed = 0;

  std::size_t n_perm() const noexcept { return draws.size(); }

  double cdf(double t) const {
    const auto le = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    return (1.0 + le) / (static_cast<double>(sorted.size()) + 1.0);
  }
  double pvalue(double t) const {
    const auto ge = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
    return (1.0 + ge) / (static_cast<double>(sorted.size()) + 1.0);
  }
  /// Sample gamma-quantile with linear interpolation between order statistics.
  double quantile(double gamma) const {
    if (sorted.empty()) throw InferenceError("empty permutation sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * gamma;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  }
};

/// k x N 0/1 matrix of subgroup memberships.
inline Eigen::MatrixXd membership_matrix(const std::vector<SubgroupIndex>& subgroups, std::size_t n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(subgroups.size()), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < subgroups.size(); ++j)
    subgroups[j].members.for_each_set([&](std::size_t i) { m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0; });
  return m;
}

/// Permutes phi with memberships fixed and records T_max,l = max_j |T_j,l|
/// using the fixed sigma_hat. Permutation l draws from its own seed derived
/// from (seed, l).
inline PermutationReference permutation_reference(const PseudoOutcomeVector& phi,
                                                  const std::vector<SubgroupIndex>& subgroups,
                                                  const PermutationOptions& options) {
  if (options.n_perm < 1) throw InferenceError("N_perm must be at least 1");
  if (!(phi.sigma_hat > 0.0)) throw DegenerateScaleError("sigma_hat must be positive");
  const std::size_t n = phi.size();
  const std::size_t k = subgroups.size();
  PermutationReference out;
  out.seed = options.seed;
  out.draws.assign(options.n_perm, 0.0);
  if (k == 0) {
    out.sorted = out.draws;
    return out;
  }
  const Eigen::MatrixXd members = membership_matrix(subgroups, n);
  // T_j = S_j * scale_j - offset_j, S_j the permuted subgroup sum.
  Eigen::VectorXd scale(static_cast<Eigen::Index>(k)), offset(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto nj = subgroups[j].n;
    if (nj < 1 || nj >= n) throw InferenceError("subgroup '" + subgroups[j].label() + "' must satisfy 1 <= N_j < N");
    const double sd = std::sqrt(difference_variance(phi.sigma_hat, nj, n));
    scale(static_cast<Eigen::Index>(j)) = 1.0 / (static_cast<double>(nj) * sd);
    offset(static_cast<Eigen::Index>(j)) = phi.ate_hat / sd;
  }
  const std::size_t block = std::max<std::size_t>(1, options.block);
  const std::size_t n_blocks = (options.n_perm + block - 1) / block;
  parallel_for(n_blocks, options.workers, [&](std::size_t b) {
    const std::size_t first = b * block;
    const std::size_t count = std::min(block, options.n_perm - first);
    Eigen::MatrixXd permuted(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(block));
    permuted.setZero();
    std::vector<double> work(phi.phi);
    for (std::size_t c = 0; c < count; ++c) {
      std::copy(phi.phi.begin(), phi.phi.end(), work.begin());
      Rng rng(derive_seed(options.seed, streams::permutation, first + c));
      std::shuffle(work.begin(), work.end(), rng);
      std::copy(work.begin(), work.end(), permuted.col(static_cast<Eigen::Index>(c)).data());
    }
    const Eigen::MatrixXd sums = members * permuted;
    for (std::size_t c = 0; c < count; ++c) {
      const auto t = ((sums.col(static_cast<Eigen::Index>(c)).array() * scale.array()) - offset.array()).abs();
      out.draws[first + c] = t.maxCoeff();
    }
  });
  out.sorted = out.draws;
  std::sort(out.sorted.begin(), out.sorted.end());
  return out;
}

// ---------------------------------------------------------------------------
// Multivariate normal integration

struct MvnReference {
  std::shared_ptr<const SymmetricBoxProbability> integrator;
  CorrelationModel correlation;
  double quantile_tol = 1e-4;
  double quantile_upper = 15.0;

  MvnResult evaluate(double t) const { return (*integrator)(t); }
  double cdf(double t) const { return evaluate(t).probability; }
  double pvalue(double t) const { return 1.0 - cdf(t); }
  /// Bisection for F(q) = gamma. The bracket runs from the one-dimensional
  /// quantile (F(t) <= P(|Z_1| <= t)) to the Bonferroni quantile.
  double quantile(double gamma) const {
    const auto k = integrator->dimension();
    double lo = normal::quantile(0.5 + 0.5 * gamma);
    double hi = k > 1 ? std::min(quantile_upper, quantile_bonferroni(gamma, k)) : lo;
    if (k <= 1) return lo;
    while (hi - lo > quantile_tol) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < gamma ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

struct MvnPvalue {
  double p = 1.0;
  double std_error = 0.0;
  bool converged = true;
  std::size_t points = 0;
};

/// p = 1 - P(-t <= Z <= t), Z ~ N(0, R). R must be PSD.
inline MvnPvalue pvalue_mvn(double t_max, const CorrelationModel& r, const MvnConfig& budget) {
  const SymmetricBoxProbability box(r.R, budget);
  const auto res = box(t_max);
  return {1.0 - res.probability, res.std_error, res.converged, res.points};
}

inline MvnReference make_mvn_reference(const std::vector<SubgroupIndex>& subgroups, std::size_t n,
                                       const MvnConfig& config, const NearestPdOptions& pd = {}) {
  if (subgroups.size() > config.max_dim)
    throw LimitError("k = " + std::to_string(subgroups.size()) + " subgroups exceeds the MVN integration limit of " +
                     std::to_string(config.max_dim) + "; use the permutation method");
  MvnReference ref;
  ref.correlation = nearest_pd_correlation(correlation_matrix(subgroups, n), pd);
  ref.integrator = std::make_shared<const SymmetricBoxProbability>(ref.correlation.R, config);
  return ref;
}

// ---------------------------------------------------------------------------
// Unified handle

class ReferenceDistribution {
 public:
  using Impl = std::variant<BonferroniReference, MvnReference, PermutationReference>;

  explicit ReferenceDistribution(BonferroniReference r) : impl_(std::move(r)) {}
  explicit ReferenceDistribution(MvnReference r) : impl_(std::move(r)) {}
  explicit ReferenceDistribution(PermutationReference r) : impl_(std::move(r)) {}

  Method method() const noexcept {
    switch (impl_.index()) {
      case 0: return Method::bonferroni;
      case 1: return Method::mvn_integration;
      default: return Method::permutation;
    }
  }
  double cdf(double t) const { return std::visit([t](const auto& r) { return r.cdf(t); }, impl_); }
  double pvalue(double t) const { return std::visit([t](const auto& r) { return r.pvalue(t); }, impl_); }
  double quantile(double gamma) const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InferenceError("gamma must lie in (0, 1)");
    return std::visit([gamma](const auto& r) { return r.quantile(gamma); }, impl_);
  }
  const Impl& impl() const noexcept { return impl_; }

 private:
  Impl impl_;
};

// ---------------------------------------------------------------------------
// Divergence p-values and surprise values

inline constexpr double surprise_floor = 0x1p-52;

struct Surprise {
  double value = 0.0;
  bool floored = false;
};

/// S = -log2(p), with p floored at 2^-52.
inline Surprise surprise(double p) {
  if (p < surprise_floor) return {52.0, true};
  return {p >= 1.0 ? 0.0 : -std::log2(p), false};
}

/// p_j = 1 - F(|T_j|) evaluated as the upper-tail probability of the
/// max-statistic reference.
inline std::vector<double> individual_pvalues(const std::vector<double>& t, const ReferenceDistribution& f) {
  std::vector<double> out;
  out.reserve(t.size());
  for (double v : t) out.push_back(f.pvalue(std::abs(v)));
  return out;
}

inline std::vector<double> individual_pvalues(const SubgroupStats& stats, const ReferenceDistribution& f) {
  return individual_pvalues(stats.T_j, f);
}

// ---------------------------------------------------------------------------
// Homogeneity regions

/// gamma in (0, 1), optionally expressed as a surprise level S with
/// gamma = 1 - 2^-S.
struct Threshold {
  double gamma = 0.0;
  std::optional<double> surprise;

  static Threshold from_gamma(double g) {
    if (!(g > 0.0 && g < 1.0)) throw InferenceError("gamma must lie in (0, 1)");
    return {g, std::nullopt};
  }
  static Threshold from_surprise(double s) {
    if (!(s > 0.0)) throw InferenceError("surprise threshold must be positive");
    return {1.0 - std::exp2(-s), s};
  }
};

struct RegionPoint {
  std::size_t n_j = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct HomogeneityRegion {
  Threshold threshold;
  double q_gamma = 0.0;
  double delta_hat = 0.0;
  double sigma_hat = 0.0;
  std::size_t n = 0;
  std::vector<RegionPoint> curve;  // ascending N_j

  double half_width(std::size_t n_j) const {
    const double v = 1.0 / static_cast<double>(n_j) - 1.0 / static_cast<double>(n);
    return q_gamma * sigma_hat * std::sqrt(std::max(0.0, v));
  }
  double lower(std::size_t n_j) const { return delta_hat - half_width(n_j); }
  double upper(std::size_t n_j) const { return delta_hat + half_width(n_j); }
};

/// delta_hat -/+ q_gamma sigma_hat sqrt(1/N_j - 1/N) on the given sizes
/// (sorted, deduplicated, restricted to 1..N).
inline HomogeneityRegion homogeneity_region(const Threshold& threshold, const PseudoOutcomeVector& phi,
                                            const ReferenceDistribution& f, std::vector<std::size_t> sizes) {
  HomogeneityRegion r;
  r.threshold = threshold;
  r.q_gamma = f.quantile(threshold.gamma);
  r.delta_hat = phi.ate_hat;
  r.sigma_hat = phi.sigma_hat;
  r.n = phi.size();
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (auto s : sizes)
    if (s >= 1 && s <= r.n) r.curve.push_back({s, r.lower(s), r.upper(s)});
  return r;
}

/// Evenly spaced sizes from `lo` to N (inclusive) merged with the observed sizes.
inline std::vector<std::size_t> region_size_grid(const std::vector<SubgroupIndex>& subgroups, std::size_t n,
                                                 std::size_t grid_points = 50) {
  std::vector<std::size_t> sizes;
  std::size_t lo = n;
  for (const auto& g : subgroups) {
    sizes.push_back(g.n);
    lo = std::min(lo, g.n);
  }
  lo = std::max<std::size_t>(1, lo);
  if (grid_points >= 2) {
    for (std::size_t i = 0; i < grid_points; ++i)
      sizes.push_back(lo + (n - lo) * i / (grid_points - 1));
  }
  sizes.push_back(n);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return sizes;
}

}  // namespace hetscreen
