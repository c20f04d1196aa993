#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/pseudo_outcomes.hpp"
#include "hetscreen/subgroups.hpp"

namespace hetscreen {

/// Standardized subgroup-vs-overall differences.
struct SubgroupStats {
  std::size_t n = 0;          // N
  double delta_hat = 0.0;     // overall effect
  double sigma_hat = 0.0;
  std::vector<double> delta_hat_j;
  std::vector<double> Delta_hat_j;
  std::vector<double> V_hat_j;
  std::vector<double> T_j;
  double T_max = 0.0;
  std::size_t argmax = 0;

  std::size_t k() const noexcept { return T_j.size(); }
};

/// V_j = sigma^2 (1/N_j - 1/N).
inline double difference_variance(double sigma, std::size_t nj, std::size_t n) noexcept {
  return sigma * sigma * (1.0 / static_cast<double>(nj) - 1.0 / static_cast<double>(n));
}

namespace detail {
inline void record_max(SubgroupStats& s) {
  s.T_max = 0.0;
  s.argmax = 0;
  for (std::size_t j = 0; j < s.T_j.size(); ++j) {
    if (std::abs(s.T_j[j]) > s.T_max) {
      s.T_max = std::abs(s.T_j[j]);
      s.argmax = j;
    }
  }
}
}  // namespace detail

inline SubgroupStats compute_stats(const PseudoOutcomeVector& phi, const std::vector<SubgroupIndex>& subgroups) {
  const std::size_t n = phi.size();
  if (!(phi.sigma_hat > 0.0)) throw DegenerateScaleError("sigma_hat must be positive");
  SubgroupStats s;
  s.n = n;
  s.delta_hat = phi.ate_hat;
  s.sigma_hat = phi.sigma_hat;
  s.delta_hat_j = subgroup_means(phi, subgroups);
  const std::size_t k = subgroups.size();
  s.Delta_hat_j.resize(k);
  s.V_hat_j.resize(k);
  s.T_j.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto nj = subgroups[j].n;
    if (nj < 1 || nj >= n)
      throw InferenceError("subgroup '" + subgroups[j].label() + "' has size " + std::to_string(nj) +
                           "; sizes must satisfy 1 <= N_j < N");
    s.Delta_hat_j[j] = s.delta_hat_j[j] - s.delta_hat;
    s.V_hat_j[j] = difference_variance(s.sigma_hat, nj, n);
    s.T_j[j] = s.Delta_hat_j[j] / std::sqrt(s.V_hat_j[j]);
  }
  detail::record_max(s);
  return s;
}

/// Baseline statistics from raw arm means:
/// T_j = (Ybar1_j - Ybar0_j - (Ybar1 - Ybar0)) / (tau sqrt(1/n1_j + 1/n0_j - 1/n1 - 1/n0)),
/// tau the sample SD of all outcomes.
struct SimpleMeansStats {
  double tau = 0.0;
  double overall_difference = 0.0;
  std::vector<std::size_t> included;  // positions in the subgroup list
  std::vector<std::size_t> excluded;  // non-positive variance term
  std::vector<double> difference_j;   // per included subgroup
  std::vector<double> T_j;            // per included subgroup
  double T_max = 0.0;
  std::size_t argmax = 0;             // position within `included`

  std::size_t k() const noexcept { return T_j.size(); }
};

inline SimpleMeansStats simple_means_stats(const Dataset& data, const std::vector<SubgroupIndex>& subgroups) {
  const auto& y = data.outcome();
  const auto& arm = data.arm();
  const std::size_t n = data.size();
  double sum1 = 0.0, sum0 = 0.0, sum = 0.0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += y[i];
    if (arm[i] == 1) {
      sum1 += y[i];
      ++n1;
    } else {
      sum0 += y[i];
    }
  }
  const std::size_t n0 = n - n1;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);

  SimpleMeansStats s;
  s.tau = std::sqrt(ss / static_cast<double>(n - 1));
  s.overall_difference = sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
  if (!(s.tau > 0.0)) throw DegenerateScaleError("outcomes have zero spread");
  for (std::size_t j = 0; j < subgroups.size(); ++j) {
    const auto& g = subgroups[j];
    if (g.n1 == 0 || g.n0 == 0) {
      s.excluded.push_back(j);
      continue;
    }
    const double term = 1.0 / static_cast<double>(g.n1) + 1.0 / static_cast<double>(g.n0) -
                        1.0 / static_cast<double>(n1) - 1.0 / static_cast<double>(n0);
    if (!(term > 0.0)) {
      s.excluded.push_back(j);
      continue;
    }
    double s1 = 0.0, s0 = 0.0;
    g.members.for_each_set([&](std::size_t i) { (arm[i] == 1 ? s1 : s0) += y[i]; });
    const double diff = s1 / static_cast<double>(g.n1) - s0 / static_cast<double>(g.n0);
    s.included.push_back(j);
    s.difference_j.push_back(diff);
    s.T_j.push_back((diff - s.overall_difference) / (s.tau * std::sqrt(term)));
  }
  for (std::size_t j = 0; j < s.T_j.size(); ++j) {
    if (std::abs(s.T_j[j]) > s.T_max) {
      s.T_max = std::abs(s.T_j[j]);
      s.argmax = j;
    }
  }
  return s;
}

}  // namespace hetscreen
