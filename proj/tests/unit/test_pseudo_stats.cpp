#include <gtest/gtest.h>

#include <random>

#include "hetscreen/binning.hpp"
#include "hetscreen/pseudo_outcomes.hpp"
#include "hetscreen/stats.hpp"
#include "hetscreen/subgroups.hpp"
#include "support.hpp"

using namespace hetscreen;
using namespace testing_support;

namespace {

NuisanceEstimates constant_nuisance(std::size_t n, double mu0, double mu1, double pi) {
  NuisanceEstimates e;
  e.mu0_hat.assign(n, mu0);
  e.mu1_hat.assign(n, mu1);
  e.pi_hat.assign(n, pi);
  return e;
}

}  // namespace

TEST(PseudoOutcomes, ZeroResidual) {
  const auto d = make_dataset({numeric_column("x", {0, 1, 2})}, {1.0, 5.0, 1.0}, {1, 0, 1});
  const auto phi = compute_pseudo_outcomes(d, constant_nuisance(3, 0.0, 1.0, 0.5));
  EXPECT_EQ(phi.phi[0], 1.0);
  EXPECT_EQ(phi.phi[2], 1.0);
}

TEST(PseudoOutcomes, AlgebraWithZeroRegressions) {
  const auto d = make_dataset({numeric_column("x", {0, 1, 2, 3})}, {0.7, 0.7, -1.2, 3.0}, {1, 0, 1, 0});
  const auto phi = compute_pseudo_outcomes(d, constant_nuisance(4, 0.0, 0.0, 0.5));
  EXPECT_DOUBLE_EQ(phi.phi[0], 1.4);
  EXPECT_DOUBLE_EQ(phi.phi[1], -1.4);
  EXPECT_DOUBLE_EQ(phi.phi[2], -2.4);
  EXPECT_DOUBLE_EQ(phi.phi[3], -6.0);
}

TEST(PseudoOutcomes, GeneralFormula) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const std::size_t n = 40;
  std::vector<double> y(n), x(n);
  std::vector<int> arm(n);
  NuisanceEstimates e;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = z(rng);
    x[i] = z(rng);
    arm[i] = static_cast<int>(i % 2);
    e.mu0_hat.push_back(z(rng));
    e.mu1_hat.push_back(z(rng));
    e.pi_hat.push_back(u(rng));
  }
  const auto d = make_dataset({numeric_column("x", x)}, y, arm);
  const auto phi = compute_pseudo_outcomes(d, e);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = e.pi_hat[i];
    const double expected = arm[i] ? e.mu1_hat[i] - e.mu0_hat[i] + (y[i] - e.mu1_hat[i]) / p
                                   : e.mu1_hat[i] - e.mu0_hat[i] - (y[i] - e.mu0_hat[i]) / (1.0 - p);
    EXPECT_NEAR(phi.phi[i], expected, 1e-12);
    sum += phi.phi[i];
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : phi.phi) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(phi.ate_hat, mean, 1e-15);
  EXPECT_NEAR(phi.sigma_hat, std::sqrt(ss / (n - 1)), 1e-12);
}

TEST(PseudoOutcomes, PositivityViolationNamesRows) {
  const auto d = make_dataset({numeric_column("x", {0, 1, 2})}, {1, 2, 3}, {1, 0, 1});
  auto e = constant_nuisance(3, 0, 0, 0.5);
  e.pi_hat[1] = 1.0;
  e.pi_hat[2] = 1e-7;
  try {
    compute_pseudo_outcomes(d, e);
    FAIL();
  } catch (const PositivityError& err) {
    EXPECT_NE(std::string(err.what()).find("1,2"), std::string::npos) << err.what();
  }
}

TEST(PseudoOutcomes, IdenticalValuesAreDegenerate) {
  EXPECT_THROW(make_pseudo_outcomes({2.0, 2.0, 2.0}), DegenerateScaleError);
  const auto d = make_dataset({numeric_column("x", {0, 1, 2, 3})}, {1, 1, 1, 1}, {1, 0, 1, 0});
  EXPECT_THROW(compute_pseudo_outcomes(d, constant_nuisance(4, 1.0, 1.0, 0.5)), DegenerateScaleError);
}

TEST(PseudoOutcomes, UnbiasedWithTrueNuisance) {
  // Y = x + tau A + eps, pi = 0.5, true regressions supplied.
  const double tau = 0.3;
  const std::size_t n = 400, reps = 400;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  double total = 0.0, sd_sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> x(n), y(n);
    std::vector<int> arm(n);
    NuisanceEstimates e;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = z(rng);
      arm[i] = static_cast<int>(i % 2);
      y[i] = x[i] + tau * arm[i] + z(rng);
      e.mu0_hat.push_back(x[i]);
      e.mu1_hat.push_back(x[i] + tau);
      e.pi_hat.push_back(0.5);
    }
    const auto phi = compute_pseudo_outcomes(make_dataset({numeric_column("x", x)}, y, arm), e);
    total += phi.ate_hat;
    sd_sum += phi.sigma_hat;
  }
  const double mean = total / reps;
  const double se = sd_sum / reps / std::sqrt(static_cast<double>(n * reps));
  EXPECT_NEAR(mean, tau, 3.0 * se);
}

TEST(SubgroupMeans, SingleRowAndWeightedIdentity) {
  const std::vector<int> arm{0, 1, 0, 1, 0, 1};
  const auto phi = make_pseudo_outcomes({0.7, -1.0, 2.0, 0.5, 0.1, 3.0});
  const auto one = subgroup_of({0}, 6, arm);
  const auto a = subgroup_of({0, 1, 2}, 6, arm);
  const auto b = subgroup_of({3, 4, 5}, 6, arm);
  const auto m = subgroup_means(phi, {one, a, b});
  EXPECT_EQ(m[0], 0.7);
  EXPECT_NEAR(3 * m[1] + 3 * m[2], 6 * phi.ate_hat, 1e-12);
}

TEST(SubgroupMeans, MatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.3);
  const std::size_t n = 500;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  const auto phi = make_pseudo_outcomes(v);
  const std::vector<int> arm(n, 0);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (coin(rng)) rows.push_back(i);
    double s = 0.0;
    for (auto i : rows) s += v[i];
    const double naive = s / static_cast<double>(rows.size());
    EXPECT_NEAR(subgroup_means(phi, {subgroup_of(rows, n, arm)})[0], naive, 1e-12 * std::max(1.0, std::abs(naive)));
  }
}

TEST(Stats, VarianceArithmetic) {
  EXPECT_NEAR(difference_variance(1.0, 50, 100), 0.01, 1e-15);
  EXPECT_NEAR(std::sqrt(difference_variance(1.0, 50, 100)), 0.1, 1e-15);
}

TEST(Stats, ZeroDifferenceGivesZeroT) {
  const std::vector<int> arm{0, 1, 0, 1};
  // Subgroup {0, 3} has mean 1.5, equal to the overall mean.
  const auto phi = make_pseudo_outcomes({1.0, 2.0, 1.0, 2.0});
  const auto s = compute_stats(phi, {subgroup_of({0, 3}, 4, arm)});
  EXPECT_EQ(s.T_j[0], 0.0);
}

TEST(Stats, FullPopulationRejected) {
  const std::vector<int> arm{0, 1, 0, 1};
  const auto phi = make_pseudo_outcomes({1.0, 2.0, 3.0, 4.0});
  EXPECT_THROW(compute_stats(phi, {subgroup_of({0, 1, 2, 3}, 4, arm)}), InferenceError);
}

TEST(Stats, LocationScaleInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  const std::size_t n = 300;
  std::vector<double> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = z(rng);
    w[i] = 3.7 * v[i] - 11.0;
  }
  const std::vector<int> arm(n, 0);
  std::vector<SubgroupIndex> groups;
  for (std::size_t s : {10, 50, 150, 299}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < s; ++i) rows.push_back((i * 7) % n);
    groups.push_back(subgroup_of(rows, n, arm));
  }
  const auto a = compute_stats(make_pseudo_outcomes(v), groups);
  const auto b = compute_stats(make_pseudo_outcomes(w), groups);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    EXPECT_NEAR(a.T_j[j], b.T_j[j], 1e-12);
    EXPECT_NEAR(a.Delta_hat_j[j] * 3.7, b.Delta_hat_j[j], 1e-12);
  }
  EXPECT_NEAR(a.T_max, b.T_max, 1e-12);
  EXPECT_EQ(a.argmax, b.argmax);
  // Shift alone leaves Delta unchanged.
  for (auto& x : v) x += 5.0;
  const auto c = compute_stats(make_pseudo_outcomes(v), groups);
  for (std::size_t j = 0; j < groups.size(); ++j) EXPECT_NEAR(c.Delta_hat_j[j], a.Delta_hat_j[j], 1e-12);
}

TEST(Stats, MonteCarloVarianceOracle) {
  // Homogeneous phi ~ N(0, 2^2): Var(delta_j - delta) = sigma^2 (1/N_j - 1/N).
  const std::size_t n = 500, draws = 20000;
  const double sigma = 2.0;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, sigma);
  for (std::size_t nj : {25u, 100u, 400u}) {
    double s = 0.0, ss = 0.0;
    std::vector<double> v(n);
    for (std::size_t r = 0; r < draws; ++r) {
      double tot = 0.0, sub = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = z(rng);
        tot += v[i];
        if (i < nj) sub += v[i];
      }
      const double d = sub / nj - tot / n;
      s += d;
      ss += d * d;
    }
    const double var = (ss - s * s / draws) / (draws - 1);
    const double expected = difference_variance(sigma, nj, n);
    EXPECT_NEAR(var / expected, 1.0, 0.05) << "N_j = " << nj;
  }
}

TEST(SimpleMeans, MatchesTwoLoopComputation) {
  const auto d = random_dataset(80, 2, 1, 6);
  EnumerationOptions o;
  o.min_per_arm = 3;
  const auto groups = enumerate_subgroups(d, bin_all(d), o);
  const auto s = simple_means_stats(d, groups);
  const auto& y = d.outcome();
  const auto& arm = d.arm();
  double m = 0.0;
  for (double v : y) m += v;
  m /= 80.0;
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  const double tau = std::sqrt(ss / 79.0);
  double y1 = 0, y0 = 0;
  int n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < 80; ++i) (arm[i] ? (y1 += y[i], ++n1) : (y0 += y[i], ++n0));
  const double overall = y1 / n1 - y0 / n0;
  ASSERT_EQ(s.k(), groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    double a1 = 0, a0 = 0;
    int c1 = 0, c0 = 0;
    for (std::size_t i = 0; i < 80; ++i) {
      if (!groups[j].members.test(i)) continue;
      if (arm[i]) {
        a1 += y[i];
        ++c1;
      } else {
        a0 += y[i];
        ++c0;
      }
    }
    const double t = (a1 / c1 - a0 / c0 - overall) / (tau * std::sqrt(1.0 / c1 + 1.0 / c0 - 1.0 / n1 - 1.0 / n0));
    EXPECT_NEAR(s.T_j[j], t, 1e-12);
  }
}

TEST(SimpleMeans, ScaleInvarianceAndZeroCase) {
  const auto d = random_dataset(60, 1, 1, 7);
  EnumerationOptions o;
  o.min_per_arm = 3;
  const auto groups = enumerate_subgroups(d, bin_all(d), o);
  auto y = d.outcome();
  for (auto& v : y) v *= 2.5;
  const Dataset scaled(d.schema(), y, d.arm(), d.columns());
  const auto a = simple_means_stats(d, groups);
  const auto b = simple_means_stats(scaled, groups);
  for (std::size_t j = 0; j < a.k(); ++j) EXPECT_NEAR(a.T_j[j], b.T_j[j], 1e-12);

  // Arm means inside the subgroup equal the overall arm means.
  const auto e = make_dataset({numeric_column("x", {0, 1, 2, 3, 4, 5, 6, 7})}, {1, 2, 1, 2, 1, 2, 1, 2}, {0, 1, 0, 1, 0, 1, 0, 1});
  const auto g = subgroup_of({0, 1, 2, 3}, 8, e.arm());
  EXPECT_EQ(simple_means_stats(e, {g}).T_j[0], 0.0);
}

TEST(SimpleMeans, NonPositiveVarianceTermExcluded) {
  const auto e = make_dataset({numeric_column("x", {0, 1, 2, 3})}, {1, 2, 3, 5}, {0, 1, 0, 1});
  // Whole treated arm plus one control.
  SubgroupIndex g;
  g.members = Bitset(4);
  g.members.set(1);
  g.members.set(3);
  g.members.set(0);
  g.n = 3;
  g.n1 = 2;
  g.n0 = 1;
  const auto s = simple_means_stats(e, {g});
  // 1/2 + 1/1 - 1/2 - 1/2 > 0, so it stays; a subgroup with both full arms drops.
  EXPECT_EQ(s.k(), 1u);
  SubgroupIndex all = g;
  all.members.set(2);
  all.n = 4;
  all.n0 = 2;
  const auto t = simple_means_stats(e, {all});
  EXPECT_EQ(t.k(), 0u);
  EXPECT_EQ(t.excluded, (std::vector<std::size_t>{0}));
}
