#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hetscreen/binning.hpp"
#include "hetscreen/correlation.hpp"
#include "hetscreen/dataset.hpp"
#include "hetscreen/learners.hpp"
#include "hetscreen/mvn.hpp"
#include "hetscreen/parallel.hpp"
#include "hetscreen/pseudo_outcomes.hpp"
#include "hetscreen/reference.hpp"
#include "hetscreen/rng.hpp"
#include "hetscreen/stats.hpp"
#include "hetscreen/subgroups.hpp"

namespace hetscreen {

struct AnalysisConfig {
  EnumerationOptions enumeration;
  std::vector<Method> methods{Method::permutation};
  bool simple_means = false;  // simple-difference-in-means baseline with Bonferroni
  std::vector<double> s_levels{2.0, 5.0, 10.0};
  std::size_t n_perm = 500;
  std::size_t folds = 5;
  LearnerSpec learner;
  PropensityRule propensity;
  std::uint64_t seed = 1;
  MvnConfig mvn;
  NearestPdOptions nearest_pd;
  std::size_t top_m = 5;
  std::size_t region_grid = 50;
  bool individual_pvalues = true;
  bool regions = true;
  bool mvn_limit_is_error = true;  // false: skip mvn with a warning when k exceeds the limit
  std::size_t workers = 1;  // never affects results

  void validate() const {
    if (methods.empty() && !simple_means) throw ConfigError("at least one method is required");
    for (double s : s_levels)
      if (!(s > 0.0)) throw ConfigError("surprise levels must be positive");
    if (n_perm < 1) throw ConfigError("n_perm must be at least 1");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    std::vector<Method> sorted = methods;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("duplicate method");
  }
};

struct MethodResult {
  Method method = Method::permutation;
  double p = 1.0;
  Surprise S;
  std::optional<double> std_error;  // mvn only
  std::optional<bool> converged;    // mvn only
  std::vector<double> p_j;
  std::vector<Surprise> S_j;
  std::vector<HomogeneityRegion> regions;
};

struct BaselineResult {
  SimpleMeansStats stats;
  double p = 1.0;
  Surprise S;
  std::vector<double> p_j;  // per included subgroup
};

struct TopRow {
  std::size_t index = 0;
  std::string label;
  std::size_t n_trt = 0;
  std::size_t n_ctrl = 0;
  double effect = 0.0;
  double abs_t = 0.0;
};

struct InferenceReport {
  std::size_t n = 0, n1 = 0, n0 = 0;
  std::vector<BinnedCovariate> binned;
  std::vector<SubgroupIndex> subgroups;
  PseudoOutcomeVector phi;
  SubgroupStats stats;
  std::vector<MethodResult> methods;
  std::optional<BaselineResult> baseline;
  std::optional<PermutationReference> permutation;
  std::optional<CorrelationModel> correlation;
  std::vector<TopRow> top_table;
  std::vector<std::string> warnings;

  std::size_t k() const noexcept { return subgroups.size(); }
  const MethodResult* find(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return &r;
    return nullptr;
  }
};

inline std::vector<TopRow> top_subgroups(const SubgroupStats& stats, const std::vector<SubgroupIndex>& subgroups,
                                         std::size_t m) {
  std::vector<std::size_t> order(subgroups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(stats.T_j[a]) > std::abs(stats.T_j[b]); });
  std::vector<TopRow> rows;
  for (std::size_t r = 0; r < std::min(m, order.size()); ++r) {
    const auto j = order[r];
    rows.push_back({j, subgroups[j].label(), subgroups[j].n1, subgroups[j].n0, stats.delta_hat_j[j], std::abs(stats.T_j[j])});
  }
  return rows;
}

namespace detail {

inline MethodResult run_method(const ReferenceDistribution& ref, const InferenceReport& rep, const AnalysisConfig& cfg,
                               const std::vector<std::size_t>& sizes) {
  MethodResult r;
  r.method = ref.method();
  if (const auto* mvn = std::get_if<MvnReference>(&ref.impl())) {
    const auto res = mvn->evaluate(rep.stats.T_max);
    r.p = 1.0 - res.probability;
    r.std_error = res.std_error;
    r.converged = res.converged;
  } else {
    r.p = ref.pvalue(rep.stats.T_max);
  }
  r.S = surprise(r.p);
  if (cfg.individual_pvalues) {
    // One reference evaluation per subgroup; for mvn each is a full integration.
    r.p_j.assign(rep.stats.k(), 1.0);
    parallel_for(rep.stats.k(), cfg.workers,
                 [&](std::size_t j) { r.p_j[j] = ref.pvalue(std::abs(rep.stats.T_j[j])); });
    for (double p : r.p_j) r.S_j.push_back(surprise(p));
  }
  if (cfg.regions)
    for (double s : cfg.s_levels) r.regions.push_back(homogeneity_region(Threshold::from_surprise(s), rep.phi, ref, sizes));
  return r;
}

}  // namespace detail

/// bin -> enumerate -> cross-fit -> pseudo-outcomes -> statistics -> reference
/// distributions -> p-values, surprise values and regions.
inline InferenceReport analyze(const Dataset& data, const AnalysisConfig& config) {
  config.validate();
  InferenceReport rep;
  rep.n = data.size();
  rep.n1 = data.n_treated();
  rep.n0 = data.n_control();
  rep.binned = bin_all(data);
  rep.subgroups = enumerate_subgroups(data, rep.binned, config.enumeration);
  if (rep.subgroups.empty())
    throw InferenceError("no subgroup has at least " + std::to_string(config.enumeration.min_per_arm) +
                         " patients per arm");
  const std::size_t k = rep.subgroups.size();
  const bool wants_mvn = std::find(config.methods.begin(), config.methods.end(), Method::mvn_integration) != config.methods.end();
  const bool mvn_over_limit = wants_mvn && k > config.mvn.max_dim;
  if (mvn_over_limit && config.mvn_limit_is_error)
    throw LimitError("k = " + std::to_string(k) + " subgroups exceeds the MVN integration limit of " +
                     std::to_string(config.mvn.max_dim) + "; use the permutation method");

  const auto folds = assign_folds(data.size(), config.folds, derive_seed(config.seed, streams::folds));
  const auto nuisance = cross_fit_nuisance(data, folds, config.learner, config.propensity,
                                           derive_seed(config.seed, streams::inner_folds), config.workers);
  rep.phi = compute_pseudo_outcomes(data, nuisance);
  rep.stats = compute_stats(rep.phi, rep.subgroups);
  rep.top_table = top_subgroups(rep.stats, rep.subgroups, config.top_m);
  for (std::size_t j = 0; j < k; ++j)
    if (rep.subgroups[j].duplicate_of)
      rep.warnings.push_back("subgroup '" + rep.subgroups[j].label() + "' has the same members as '" +
                             rep.subgroups[*rep.subgroups[j].duplicate_of].label() + "'");

  const auto sizes = region_size_grid(rep.subgroups, rep.n, config.region_grid);
  for (Method m : config.methods) {
    switch (m) {
      case Method::bonferroni:
        rep.methods.push_back(detail::run_method(ReferenceDistribution(BonferroniReference{k}), rep, config, sizes));
        break;
      case Method::permutation: {
        PermutationOptions po{config.n_perm, derive_seed(config.seed, streams::permutation), config.workers, 64};
        rep.permutation = permutation_reference(rep.phi, rep.subgroups, po);
        rep.methods.push_back(detail::run_method(ReferenceDistribution(*rep.permutation), rep, config, sizes));
        break;
      }
      case Method::mvn_integration: {
        if (mvn_over_limit) {
          rep.warnings.push_back("mvn skipped: k = " + std::to_string(k) + " exceeds the limit of " +
                                 std::to_string(config.mvn.max_dim));
          break;
        }
        MvnConfig mc = config.mvn;
        mc.seed = derive_seed(config.seed, streams::mvn);
        auto ref = make_mvn_reference(rep.subgroups, rep.n, mc, config.nearest_pd);
        rep.correlation = ref.correlation;
        if (!ref.correlation.converged) rep.warnings.push_back("nearest-PD repair did not converge");
        rep.methods.push_back(detail::run_method(ReferenceDistribution(std::move(ref)), rep, config, sizes));
        break;
      }
    }
  }

  if (config.simple_means) {
    BaselineResult b;
    b.stats = simple_means_stats(data, rep.subgroups);
    for (auto j : b.stats.excluded)
      rep.warnings.push_back("simple-means baseline excludes '" + rep.subgroups[j].label() + "' (non-positive variance term)");
    if (b.stats.k() > 0) {
      b.p = pvalue_bonferroni(b.stats.T_max, b.stats.k());
      if (config.individual_pvalues)
        for (double t : b.stats.T_j) b.p_j.push_back(pvalue_bonferroni(std::abs(t), b.stats.k()));
    }
    b.S = surprise(b.p);
    rep.baseline = std::move(b);
  }
  return rep;
}

}  // namespace hetscreen
