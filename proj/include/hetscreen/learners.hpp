#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetscreen/dataset.hpp"
#include "hetscreen/error.hpp"
#include "hetscreen/parallel.hpp"
#include "hetscreen/rng.hpp"

namespace hetscreen {

// ---------------------------------------------------------------------------
// Folds

struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold;  // fold id per row

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(k, 0);
    for (int f : fold) ++s[static_cast<std::size_t>(f)];
    return s;
  }
};

/// Uniformly random balanced partition of 0..n-1 into k folds.
inline FoldAssignment assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("fold count must be at least 2");
  if (k > n) throw UsageError("fold count " + std::to_string(k) + " exceeds row count " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldAssignment out{k, seed, std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) out.fold[order[i]] = static_cast<int>(i % k);
  return out;
}

// ---------------------------------------------------------------------------
// Design encoding

/// Numeric covariates pass through; a categorical covariate with L declared
/// levels becomes L-1 indicator columns (first declared level is the
/// reference). Standardization happens inside each fit on its training rows.
inline Eigen::MatrixXd encode_design(const Dataset& data) {
  std::size_t p = 0;
  for (const auto& c : data.columns()) p += c.is_numeric() ? 1 : c.spec.levels.size() - 1;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(p));
  Eigen::Index col = 0;
  for (const auto& c : data.columns()) {
    if (c.is_numeric()) {
      for (std::size_t i = 0; i < data.size(); ++i) x(static_cast<Eigen::Index>(i), col) = c.numeric[i];
      ++col;
      continue;
    }
    for (std::size_t l = 1; l < c.spec.levels.size(); ++l, ++col)
      for (std::size_t i = 0; i < data.size(); ++i)
        x(static_cast<Eigen::Index>(i), col) = c.codes[i] == static_cast<int>(l) ? 1.0 : 0.0;
  }
  return x;
}

inline std::vector<std::string> design_column_names(const Dataset& data) {
  std::vector<std::string> names;
  for (const auto& c : data.columns()) {
    if (c.is_numeric()) names.push_back(c.spec.name);
    else
      for (std::size_t l = 1; l < c.spec.levels.size(); ++l) names.push_back(c.spec.name + "=" + c.spec.levels[l]);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Linear learners

enum class LearnerKind { ols, lasso };

inline std::string to_string(LearnerKind k) { return k == LearnerKind::ols ? "ols" : "lasso"; }

struct LearnerSpec {
  LearnerKind kind = LearnerKind::lasso;
  std::vector<double> lambdas;         // strictly decreasing, positive; empty = automatic grid
  std::size_t n_lambda = 30;           // automatic grid size
  double lambda_min_ratio = 1e-3;       // automatic grid spans [ratio, 1] * lambda_max
  std::size_t inner_folds = 5;
  std::size_t max_sweeps = 10000;
  double tolerance = 1e-10;

  void validate() const {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (!(lambdas[i] > 0.0)) throw LearnerError("lambda grid must be strictly positive");
      if (i && !(lambdas[i] < lambdas[i - 1])) throw LearnerError("lambda grid must be strictly decreasing");
    }
    if (kind == LearnerKind::lasso && inner_folds < 2) throw LearnerError("inner fold count must be at least 2");
    if (n_lambda < 1 || !(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
      throw LearnerError("automatic lambda grid needs n_lambda >= 1 and 0 < ratio < 1");
  }
};

/// y ≈ intercept + x·coef on the original covariate scale. The standardized
/// coefficients and the training centering/scaling are kept for objective
/// evaluation.
struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coef;      // original scale
  Eigen::VectorXd coef_std;  // standardized scale
  Eigen::VectorXd center;
  Eigen::VectorXd scale;     // 0 marks a constant training column
  double y_mean = 0.0;
  double lambda = 0.0;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return intercept + x.dot(coef); }
  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    return (x * coef).array() + intercept;
  }
};

namespace detail {

struct Standardized {
  Eigen::MatrixXd x;  // centered and scaled; constant columns are all zero
  Eigen::VectorXd y;  // centered
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  double y_mean = 0.0;
};

inline Standardized standardize(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  Standardized s;
  const double n = static_cast<double>(x.rows());
  s.center = x.colwise().mean().transpose();
  s.x = x.rowwise() - s.center.transpose();
  s.scale = (s.x.colwise().squaredNorm() / n).array().sqrt().transpose();
  for (Eigen::Index j = 0; j < s.x.cols(); ++j) {
    if (s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.center(j)))) {
      s.x.col(j) /= s.scale(j);
    } else {
      s.scale(j) = 0.0;
      s.x.col(j).setZero();
    }
  }
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  return s;
}

inline LinearModel finish_model(const Standardized& s, Eigen::VectorXd beta_std, double lambda) {
  LinearModel m;
  m.coef_std = std::move(beta_std);
  m.center = s.center;
  m.scale = s.scale;
  m.y_mean = s.y_mean;
  m.lambda = lambda;
  m.coef = Eigen::VectorXd::Zero(m.coef_std.size());
  for (Eigen::Index j = 0; j < m.coef.size(); ++j)
    if (s.scale(j) > 0.0) m.coef(j) = m.coef_std(j) / s.scale(j);
  m.intercept = s.y_mean - s.center.dot(m.coef);
  return m;
}

inline double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Cyclic coordinate descent on the covariance form: gram = X'X/n,
/// xty = X'y/n. Warm-starts from beta.
inline void lasso_cd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double lambda, Eigen::VectorXd& beta,
                     Eigen::VectorXd& gbeta, std::size_t max_sweeps, double tol) {
  const Eigen::Index p = gram.rows();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double old = beta(j);
      const double r = xty(j) - gbeta(j) + gjj * old;
      const double nb = soft_threshold(r, lambda) / gjj;
      if (nb != old) {
        const double d = nb - old;
        beta(j) = nb;
        gbeta.noalias() += d * gram.col(j);
        max_change = std::max(max_change, std::abs(d) * std::sqrt(gjj));
      }
    }
    if (max_change < tol) return;
  }
}

inline std::vector<double> lambda_grid(double lambda_max, const LearnerSpec& spec) {
  if (!spec.lambdas.empty()) return spec.lambdas;
  std::vector<double> grid(spec.n_lambda);
  if (spec.n_lambda == 1) return {lambda_max};
  const double step = std::log(spec.lambda_min_ratio) / static_cast<double>(spec.n_lambda - 1);
  for (std::size_t i = 0; i < spec.n_lambda; ++i) grid[i] = lambda_max * std::exp(step * static_cast<double>(i));
  return grid;
}

template <typename Index>
inline Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

template <typename Index>
inline Eigen::VectorXd take(const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = y(static_cast<Eigen::Index>(rows[r]));
  return out;
}

inline bool zero_variance(const Eigen::Ref<const Eigen::VectorXd>& y) {
  return y.size() == 0 || (y.array() == y(0)).all();
}

inline LinearModel intercept_only(const Standardized& s) {
  return finish_model(s, Eigen::VectorXd::Zero(s.x.cols()), 0.0);
}

}  // namespace detail

/// Least squares with unpenalized intercept. Falls back to a ridge term
/// eps = 1e-8 * trace(G) / p when the standardized normal equations are
/// singular.
inline LinearModel fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.rows() != y.size()) throw LearnerError("design rows differ from response length");
  if (x.rows() < 2) throw LearnerError("at least 2 rows are needed to fit a regression");
  const auto s = detail::standardize(x, y);
  if (detail::zero_variance(y) || x.cols() == 0) return detail::intercept_only(s);
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd gram = s.x.transpose() * s.x / n;
  const Eigen::VectorXd xty = s.x.transpose() * s.y / n;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) {
    const double eps = 1e-8 * gram.trace() / static_cast<double>(gram.rows());
    gram.diagonal().array() += eps;
    ldlt.compute(gram);
  }
  return detail::finish_model(s, ldlt.solve(xty), 0.0);
}

/// (1/2n)·RSS + λ·‖coef_std‖₁ evaluated on the standardized training design.
inline double lasso_objective(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                              const LinearModel& model, double lambda) {
  const Eigen::VectorXd resid = y - model.predict(x);
  return resid.squaredNorm() / (2.0 * static_cast<double>(x.rows())) + lambda * model.coef_std.lpNorm<1>();
}

/// Largest λ with a non-zero solution: max_j |<x̃_j, y - ȳ>| / n.
inline double lasso_lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto s = detail::standardize(x, y);
  if (s.x.cols() == 0) return 0.0;
  return (s.x.transpose() * s.y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

/// Lasso solutions along a decreasing λ path with warm starts.
inline std::vector<LinearModel> fit_lasso_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                               const Eigen::Ref<const Eigen::VectorXd>& y,
                                               const std::vector<double>& lambdas, const LearnerSpec& spec = {}) {
  if (x.rows() != y.size()) throw LearnerError("design rows differ from response length");
  if (x.rows() < 2) throw LearnerError("at least 2 rows are needed to fit a regression");
  const auto s = detail::standardize(x, y);
  std::vector<LinearModel> path;
  path.reserve(lambdas.size());
  if (detail::zero_variance(y)) {
    for (double l : lambdas) path.push_back(detail::finish_model(s, Eigen::VectorXd::Zero(x.cols()), l));
    return path;
  }
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = s.x.transpose() * s.x / n;
  const Eigen::VectorXd xty = s.x.transpose() * s.y / n;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd gbeta = Eigen::VectorXd::Zero(x.cols());
  for (double l : lambdas) {
    detail::lasso_cd(gram, xty, l, beta, gbeta, spec.max_sweeps, spec.tolerance);
    path.push_back(detail::finish_model(s, beta, l));
  }
  return path;
}

inline LinearModel fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             double lambda, const LearnerSpec& spec = {}) {
  return fit_lasso_path(x, y, {lambda}, spec).front();
}

/// OLS, or lasso with λ chosen by inner cross-validation (minimum mean
/// squared prediction error over the grid).
inline LinearModel fit_regressor(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                                 const LearnerSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == LearnerKind::ols) return fit_ols(x, y);
  if (x.rows() < 2) throw LearnerError("at least 2 rows are needed to fit a regression");
  if (detail::zero_variance(y)) return detail::intercept_only(detail::standardize(x, y));

  const double lmax = lasso_lambda_max(x, y);
  if (!(lmax > 0.0)) return detail::intercept_only(detail::standardize(x, y));
  const auto grid = detail::lambda_grid(lmax, spec);
  const auto n = static_cast<std::size_t>(x.rows());
  const std::size_t k = std::min(spec.inner_folds, n);
  std::vector<double> cv_error(grid.size(), 0.0);
  if (k >= 2 && grid.size() > 1) {
    const auto folds = assign_folds(n, k, seed);
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < n; ++i) (folds.fold[i] == static_cast<int>(f) ? test : train).push_back(i);
      if (train.size() < 2 || test.empty()) continue;
      const auto xt = detail::take_rows(x, train);
      const auto yt = detail::take(y, train);
      const auto xv = detail::take_rows(x, test);
      const auto yv = detail::take(y, test);
      const auto path = fit_lasso_path(xt, yt, grid, spec);
      for (std::size_t l = 0; l < grid.size(); ++l) cv_error[l] += (yv - path[l].predict(xv)).squaredNorm();
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(cv_error.begin(), cv_error.end()) - cv_error.begin());
  const std::vector<double> sub(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  return fit_lasso_path(x, y, sub, spec).back();
}

// ---------------------------------------------------------------------------
// Cross-fitted nuisance functions

struct PropensityRule {
  enum class Kind { known, empirical };
  Kind kind = Kind::known;
  std::optional<double> probability;  // known(p); unset means n1/N

  static PropensityRule known(double p) { return {Kind::known, p}; }
  static PropensityRule empirical() { return {Kind::empirical, std::nullopt}; }

  std::string describe() const {
    if (kind == Kind::empirical) return "empirical";
    return probability ? "known(" + detail::format_double(*probability) + ")" : "known(n1/N)";
  }
};

struct NuisanceEstimates {
  std::vector<double> mu0_hat;
  std::vector<double> mu1_hat;
  std::vector<double> pi_hat;
  FoldAssignment folds;
  LearnerSpec learner;
};

/// For each fold, fits the control and treated outcome regressions on the
/// other folds and predicts both for the fold's rows.
inline NuisanceEstimates cross_fit_nuisance(const Dataset& data, const FoldAssignment& folds, const LearnerSpec& spec,
                                            const PropensityRule& propensity = {}, std::uint64_t seed = 0,
                                            std::size_t workers = 1) {
  spec.validate();
  const std::size_t n = data.size();
  if (folds.fold.size() != n) throw FoldError("fold assignment length differs from dataset size");
  const Eigen::MatrixXd x = encode_design(data);
  const Eigen::Map<const Eigen::VectorXd> y(data.outcome().data(), static_cast<Eigen::Index>(n));

  std::vector<std::vector<std::size_t>> train0(folds.k), train1(folds.k), test(folds.k);
  for (std::size_t f = 0; f < folds.k; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      if (folds.fold[i] == static_cast<int>(f)) test[f].push_back(i);
      else (data.arm()[i] == 1 ? train1[f] : train0[f]).push_back(i);
    }
    if (train0[f].size() < 2 || train1[f].size() < 2)
      throw FoldError("complement of fold " + std::to_string(f) + " has " + std::to_string(train0[f].size()) +
                      " control and " + std::to_string(train1[f].size()) + " treated rows; need at least 2 of each");
  }

  NuisanceEstimates out;
  out.mu0_hat.assign(n, 0.0);
  out.mu1_hat.assign(n, 0.0);
  out.folds = folds;
  out.learner = spec;
  // Two fits per fold: index 2f is control, 2f+1 treated.
  parallel_for(2 * folds.k, workers, [&](std::size_t job) {
    const std::size_t f = job / 2;
    const bool treated = job % 2 == 1;
    const auto& rows = treated ? train1[f] : train0[f];
    const auto model = fit_regressor(detail::take_rows(x, rows), detail::take(y, rows), spec,
                                     derive_seed(seed, streams::inner_folds, job));
    auto& target = treated ? out.mu1_hat : out.mu0_hat;
    for (std::size_t i : test[f]) target[i] = model.predict_row(x.row(static_cast<Eigen::Index>(i)));
  });

  const double share = static_cast<double>(data.n_treated()) / static_cast<double>(n);
  const double p = propensity.kind == PropensityRule::Kind::known && propensity.probability ? *propensity.probability : share;
  out.pi_hat.assign(n, p);
  return out;
}

}  // namespace hetscreen
