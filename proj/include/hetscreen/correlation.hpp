#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hetscreen/error.hpp"
#include "hetscreen/subgroups.hpp"

namespace hetscreen {

struct CorrelationModel {
  Eigen::MatrixXd R;
  bool repaired = false;
  double repair_distance = 0.0;  // Frobenius distance to the unrepaired matrix
  bool converged = true;
  std::size_t iterations = 0;

  Eigen::Index size() const noexcept { return R.rows(); }
};

/// rho_ij = (N_ij/(N_i N_j) - 1/N) / sqrt((1/N_i - 1/N)(1/N_j - 1/N)).
inline double subgroup_correlation(std::size_t ni, std::size_t nj, std::size_t nij, std::size_t n) noexcept {
  const double inv_n = 1.0 / static_cast<double>(n);
  const double a = 1.0 / static_cast<double>(ni) - inv_n;
  const double b = 1.0 / static_cast<double>(nj) - inv_n;
  const double num = static_cast<double>(nij) / (static_cast<double>(ni) * static_cast<double>(nj)) - inv_n;
  return std::clamp(num / std::sqrt(a * b), -1.0, 1.0);
}

inline CorrelationModel correlation_matrix(const std::vector<SubgroupIndex>& subgroups, std::size_t n) {
  const auto k = static_cast<Eigen::Index>(subgroups.size());
  for (const auto& g : subgroups)
    if (g.n < 1 || g.n >= n) throw InferenceError("correlation model needs 1 <= N_j < N for '" + g.label() + "'");
  CorrelationModel out;
  out.R.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& gi = subgroups[static_cast<std::size_t>(i)];
    out.R(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const auto& gj = subgroups[static_cast<std::size_t>(j)];
      const double rho = subgroup_correlation(gi.n, gj.n, overlap_count(gi, gj), n);
      out.R(i, j) = rho;
      out.R(j, i) = rho;
    }
  }
  return out;
}

struct NearestPdOptions {
  double eigen_tol = 1e-6;   // eigenvalues are clipped to at least this
  double conv_tol = 1e-7;    // max-norm change between successive iterates
  std::size_t max_iterations = 200;
};

namespace detail {

inline Eigen::MatrixXd clip_eigen(const Eigen::MatrixXd& a, double floor_value) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(floor_value);
  Eigen::MatrixXd out = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline double min_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Nearest correlation matrix by alternating projections onto the
/// eigenvalue-clipped PSD cone and the unit-diagonal set, with Dykstra's
/// correction on the cone step.
inline CorrelationModel nearest_pd_correlation(const CorrelationModel& input, const NearestPdOptions& options = {}) {
  const Eigen::MatrixXd& a = input.R;
  const Eigen::Index k = a.rows();
  if (a.cols() != k) throw InferenceError("correlation matrix is not square");
  if (k > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InferenceError("correlation matrix is not symmetric");
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(a(i, i) - 1.0) > 1e-12) throw InferenceError("correlation matrix diagonal is not 1");

  CorrelationModel out = input;
  out.converged = true;
  out.iterations = 0;
  if (k == 0 || detail::min_eigenvalue(a) >= options.eigen_tol) return out;

  Eigen::MatrixXd x = a;
  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(k, k);
  out.converged = false;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd r = x - correction;
    const Eigen::MatrixXd y = detail::clip_eigen(r, options.eigen_tol);
    correction = y - r;
    Eigen::MatrixXd next = y;
    next.diagonal().setOnes();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    out.iterations = it;
    if (change < options.conv_tol) {
      out.converged = true;
      break;
    }
  }
  // Final clean-up so that the returned matrix is PSD with unit diagonal.
  if (detail::min_eigenvalue(x) < 0.0) {
    x = detail::clip_eigen(x, options.eigen_tol);
    const Eigen::VectorXd d = x.diagonal().cwiseSqrt().cwiseInverse();
    x = d.asDiagonal() * x * d.asDiagonal();
    x.diagonal().setOnes();
  }
  out.R = x;
  out.repaired = true;
  out.repair_distance = (x - a).norm();
  return out;
}

}  // namespace hetscreen
