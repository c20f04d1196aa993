#pragma once

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/learners.hpp"
#include "hetscreen/subgroups.hpp"

namespace hetscreen {

struct PseudoOutcomeVector {
  std::vector<double> phi;
  double sigma_hat = 0.0;  // sample SD of phi, denominator N-1
  double ate_hat = 0.0;    // mean of phi

  std::size_t size() const noexcept { return phi.size(); }
};

inline constexpr double positivity_epsilon = 1e-6;

/// Wraps an existing vector: computes the mean and sample SD.
inline PseudoOutcomeVector make_pseudo_outcomes(std::vector<double> phi) {
  const std::size_t n = phi.size();
  if (n < 2) throw DegenerateScaleError("at least 2 pseudo-outcomes are needed");
  PseudoOutcomeVector out;
  double sum = 0.0;
  for (double v : phi) sum += v;
  out.ate_hat = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : phi) ss += (v - out.ate_hat) * (v - out.ate_hat);
  out.sigma_hat = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(out.sigma_hat > 0.0) || !std::isfinite(out.sigma_hat))
    throw DegenerateScaleError("pseudo-outcomes have zero or non-finite spread");
  out.phi = std::move(phi);
  return out;
}

/// phi_i = mu1(X_i) - mu0(X_i) + (A_i - pi_i) / (pi_i (1 - pi_i)) * (Y_i - mu_{A_i}(X_i))
inline PseudoOutcomeVector compute_pseudo_outcomes(const Dataset& data, const NuisanceEstimates& nuisance) {
  const std::size_t n = data.size();
  if (nuisance.mu0_hat.size() != n || nuisance.mu1_hat.size() != n || nuisance.pi_hat.size() != n)
    throw PositivityError("nuisance estimates are not aligned with the dataset rows");
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = nuisance.pi_hat[i];
    if (!(p > positivity_epsilon && p < 1.0 - positivity_epsilon)) bad.push_back(i);
  }
  if (!bad.empty()) {
    std::string rows;
    for (std::size_t b = 0; b < std::min<std::size_t>(bad.size(), 10); ++b) rows += (b ? "," : "") + std::to_string(bad[b]);
    if (bad.size() > 10) rows += ",...";
    throw PositivityError("propensity outside (1e-6, 1-1e-6) at " + std::to_string(bad.size()) + " rows: " + rows);
  }
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = nuisance.pi_hat[i];
    const int a = data.arm()[i];
    const double mu_a = a == 1 ? nuisance.mu1_hat[i] : nuisance.mu0_hat[i];
    phi[i] = nuisance.mu1_hat[i] - nuisance.mu0_hat[i] + (a - p) / (p * (1.0 - p)) * (data.outcome()[i] - mu_a);
  }
  return make_pseudo_outcomes(std::move(phi));
}

/// delta_hat_j = mean of phi over the members of subgroup j.
inline std::vector<double> subgroup_means(const PseudoOutcomeVector& phi, const std::vector<SubgroupIndex>& subgroups) {
  std::vector<double> out;
  out.reserve(subgroups.size());
  for (const auto& g : subgroups) {
    if (g.members.size() != phi.size()) throw UsageError("subgroup index does not match pseudo-outcome length");
    out.push_back(g.members.masked_sum(phi.phi) / static_cast<double>(g.n));
  }
  return out;
}

inline void write_column(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (double v : values) out << detail::format_double(v) << '\n';
}

}  // namespace hetscreen
