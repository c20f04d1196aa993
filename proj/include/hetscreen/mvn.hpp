#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hetscreen/error.hpp"
#include "hetscreen/normal.hpp"
#include "hetscreen/rng.hpp"

namespace hetscreen {

struct MvnConfig {
  double target_se = 1e-3;          // stop once the standard error is at most this
  std::size_t shifts = 12;          // independent random shifts of the lattice
  std::size_t initial_points = 256; // points per shift in the first pass
  std::size_t max_points = 1 << 15; // points per shift, upper limit
  std::size_t max_dim = 512;
  double singular_tol = 1e-10;      // conditional SDs below this are treated as zero
  std::uint64_t seed = 0;
};

struct MvnResult {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;  // integrand evaluations per shift
  bool converged = false;  // std_error <= target_se
};

namespace detail {

inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

}  // namespace detail

/// P(-t <= Z_i <= t for all i), Z ~ N(0, R), by randomized quasi-Monte Carlo
/// over the separation-of-variables transform. The Cholesky factor uses
/// Genz-Bretz variable prioritization; PSD (singular) R is supported.
class SymmetricBoxProbability {
 public:
  SymmetricBoxProbability(Eigen::MatrixXd r, MvnConfig config) : r_(std::move(r)), config_(config) {
    if (r_.rows() != r_.cols()) throw InferenceError("MVN covariance is not square");
    if (static_cast<std::size_t>(r_.rows()) > config_.max_dim)
      throw LimitError("MVN integration dimension " + std::to_string(r_.rows()) + " exceeds the limit of " +
                       std::to_string(config_.max_dim) + "; use the permutation method");
    const auto k = static_cast<std::size_t>(r_.rows());
    const auto primes = detail::first_primes(std::max<std::size_t>(k, 1));
    alpha_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double s = std::sqrt(static_cast<double>(primes[i]));
      alpha_[i] = s - std::floor(s);
    }
    Rng rng(derive_seed(config_.seed, streams::mvn));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    shifts_.resize(config_.shifts * k);
    for (auto& v : shifts_) v = unif(rng);
  }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(r_.rows()); }
  const MvnConfig& config() const noexcept { return config_; }

  MvnResult operator()(double t) const {
    const std::size_t k = dimension();
    if (k == 0 || !(t > 0.0)) return {k == 0 ? 1.0 : 0.0, 0.0, 0, true};
    if (std::isinf(t)) return {1.0, 0.0, 0, true};
    const Factor f = factorize(t);
    if (k == 1) {
      const double p = f.diag[0] > 0.0 ? normal::cdf(t / f.diag[0]) - normal::cdf(-t / f.diag[0]) : 1.0;
      return {p, 0.0, 0, true};
    }

    const std::size_t m = config_.shifts;
    std::vector<double> sums(m, 0.0);
    std::vector<double> y(k), w(k);
    std::size_t done = 0;
    std::size_t target = config_.initial_points;
    MvnResult res;
    for (;;) {
      for (std::size_t s = 0; s < m; ++s) {
        const double* shift = &shifts_[s * k];
        for (std::size_t j = done; j < target; ++j) {
          const double jj = static_cast<double>(j + 1);
          for (std::size_t i = 0; i + 1 < k; ++i) {
            double u = jj * alpha_[i] + shift[i];
            u -= std::floor(u);
            w[i] = std::abs(2.0 * u - 1.0);  // tent transform
          }
          double v = integrand(f, t, w, y);
          for (std::size_t i = 0; i + 1 < k; ++i) w[i] = 1.0 - w[i];
          v += integrand(f, t, w, y);
          sums[s] += 0.5 * v;
        }
      }
      done = target;
      double mean = 0.0;
      for (double s : sums) mean += s / static_cast<double>(done);
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (double s : sums) {
        const double d = s / static_cast<double>(done) - mean;
        var += d * d;
      }
      var /= static_cast<double>(m * (m - 1));
      res = {std::clamp(mean, 0.0, 1.0), std::sqrt(var), done, std::sqrt(var) <= config_.target_se};
      if (res.converged || done >= config_.max_points) return res;
      target = std::min(config_.max_points, 2 * done);
    }
  }

 private:
  struct Factor {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> lower;  // rows in integration order
    std::vector<double> diag;
  };

  // Cholesky with prioritization: at each step the remaining variable with
  // the smallest conditional interval probability (given the conditional
  // means of the variables already placed) goes next.
  Factor factorize(double t) const {
    const auto k = r_.rows();
    Eigen::MatrixXd c = r_;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd ey = Eigen::VectorXd::Zero(k);
    std::vector<double> diag(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < k; ++i) {
      Eigen::Index best = i;
      double best_prob = std::numeric_limits<double>::infinity();
      double best_sd = 0.0;
      for (Eigen::Index j = i; j < k; ++j) {
        const double var = c(j, j) - l.row(j).head(i).squaredNorm();
        const double sd = var > config_.singular_tol * config_.singular_tol ? std::sqrt(var) : 0.0;
        const double mu = l.row(j).head(i).dot(ey.head(i));
        double prob;
        if (sd > 0.0) prob = normal::cdf((t - mu) / sd) - normal::cdf((-t - mu) / sd);
        else prob = (std::abs(mu) <= t) ? 1.0 + 1.0 : 0.0;  // degenerate rows go last unless violated
        if (prob < best_prob) {
          best_prob = prob;
          best = j;
          best_sd = sd;
        }
      }
      if (best != i) {
        c.row(i).swap(c.row(best));
        c.col(i).swap(c.col(best));
        l.row(i).swap(l.row(best));
      }
      diag[static_cast<std::size_t>(i)] = best_sd;
      l(i, i) = best_sd;
      if (best_sd > 0.0) {
        for (Eigen::Index j = i + 1; j < k; ++j)
          l(j, i) = (c(j, i) - l.row(j).head(i).dot(l.row(i).head(i))) / best_sd;
        const double mu = l.row(i).head(i).dot(ey.head(i));
        const double a = (-t - mu) / best_sd, b = (t - mu) / best_sd;
        const double mass = normal::cdf(b) - normal::cdf(a);
        ey(i) = mass > 1e-300 ? (normal::pdf(a) - normal::pdf(b)) / mass : (std::abs(a) < std::abs(b) ? a : b);
      } else {
        ey(i) = 0.0;
      }
    }
    return {l, std::move(diag)};
  }

  static double integrand(const Factor& f, double t, const std::vector<double>& w, std::vector<double>& y) {
    const auto k = static_cast<std::size_t>(f.lower.rows());
    double prod = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = i == 0 ? 0.0
                              : Eigen::Map<const Eigen::VectorXd>(f.lower.data() + i * k, static_cast<Eigen::Index>(i))
                                    .dot(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(i)));
      const double sd = f.diag[i];
      if (sd > 0.0) {
        const double d = normal::cdf((-t - s) / sd);
        const double e = normal::cdf((t - s) / sd);
        prod *= e - d;
        if (prod <= 0.0) return 0.0;
        if (i + 1 < k) {
          const double u = std::clamp(d + w[i] * (e - d), 1e-300, 1.0 - 1e-16);
          y[i] = normal::quantile(u);
        }
      } else {
        if (std::abs(s) > t) return 0.0;
        y[i] = 0.0;
      }
    }
    return prod;
  }

  Eigen::MatrixXd r_;
  MvnConfig config_;
  std::vector<double> alpha_;
  std::vector<double> shifts_;
};

}  // namespace hetscreen
