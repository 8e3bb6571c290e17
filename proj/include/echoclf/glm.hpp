#pragma once

// Logistic regression: IRLS maximum likelihood, probability prediction and
// Wald inference.

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "echoclf/csv.hpp"
#include "echoclf/dataio.hpp"
#include "echoclf/error.hpp"
#include "echoclf/numkit.hpp"
#include "echoclf/serialize.hpp"

namespace echoclf {

struct LogisticOptions {
  std::size_t max_iters = 100;
  double tol = 1e-10;
  // Separation is declared once the largest |parameter| exceeds this value
  // while the likelihood keeps improving for `separation_patience` steps.
  double separation_bound = 15.0;
  std::size_t separation_patience = 3;
};

struct LogisticFit {
  double intercept = 0.0;
  Vector coefficients;
  std::vector<std::string> predictor_names;
  Matrix covariance; // (p+1) x (p+1), intercept first
  bool converged = false;
  std::size_t iterations = 0;
  double final_log_likelihood = 0.0;
  std::vector<double> log_likelihood_path; // value at the start and after every step
};

struct WaldRow {
  std::string predictor;
  double coefficient = 0.0;
  double std_error = 0.0;
  double odds_ratio = 1.0;
  double z_value = 0.0;
  double p_value = 1.0;
};

inline constexpr const char* intercept_name = "(Intercept)";

// Perfect or quasi-complete separation. `direction` is the normalized
// parameter vector (intercept first) along which the likelihood keeps rising.
class SeparationError : public NumericError {
public:
  SeparationError(const std::string& what, Vector direction)
      : NumericError(what), direction_(std::move(direction)) {}
  const Vector& direction() const noexcept { return direction_; }

private:
  Vector direction_;
};

namespace detail {

// log(1 + exp(t)) without overflow.
inline double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

inline void check_dims(const Vector& beta, const Dataset& d) {
  if (beta.size() != d.features.cols()) {
    throw DimensionError("logistic: " + std::to_string(beta.size()) + " coefficients for " +
                         std::to_string(d.features.cols()) + " features");
  }
}

} // namespace detail

inline double sigmoid(double t) { return logistic(t); }

/// Bernoulli log-likelihood sum_i y_i log p_i + (1 - y_i) log(1 - p_i) with
/// p_i = logistic(alpha + beta'x_i), evaluated as y*eta - log(1 + e^eta).
inline double log_likelihood(double alpha, const Vector& beta, const Dataset& d) {
  detail::check_dims(beta, d);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    const double eta = alpha + d.features.row(i).dot(beta);
    ll += d.labels(i) * eta - detail::log1pexp(eta);
  }
  return ll;
}

inline double log_likelihood(const LogisticFit& fit, const Dataset& d) {
  return log_likelihood(fit.intercept, fit.coefficients, d);
}

// Score vector (gradient of the log-likelihood), intercept first.
inline Vector log_likelihood_gradient(double alpha, const Vector& beta, const Dataset& d) {
  detail::check_dims(beta, d);
  Vector g = Vector::Zero(beta.size() + 1);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    const double r = d.labels(i) - sigmoid(alpha + d.features.row(i).dot(beta));
    g(0) += r;
    g.tail(beta.size()) += r * d.features.row(i).transpose();
  }
  return g;
}

// Constant columns are collinear with the intercept and duplicated columns
// with each other; both make the information matrix singular.
inline void check_design(const Dataset& d) {
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
    const auto col = d.features.col(j);
    if ((col.array() == col(0)).all()) {
      throw DataError("logistic: column '" + d.feature_names[static_cast<std::size_t>(j)] +
                      "' is constant (collinear with the intercept)");
    }
    for (Eigen::Index k = 0; k < j; ++k) {
      if (col == d.features.col(k)) {
        throw DataError("logistic: columns '" + d.feature_names[static_cast<std::size_t>(k)] + "' and '" +
                        d.feature_names[static_cast<std::size_t>(j)] + "' are identical");
      }
    }
  }
}

/// Maximum-likelihood fit by iteratively reweighted least squares (Newton on
/// the log-likelihood) with step halving whenever a full step lowers the
/// likelihood.
///
/// Converged when max |score| < tol. Once the relative likelihood change drops
/// below tol, up to three further Newton steps polish the estimate; if the
/// score is still above tol after them, rounding dominates and the fit is
/// accepted. The covariance is the inverse observed
/// information X'WX at the final estimate.
inline LogisticFit fit_logistic(const Dataset& d, const LogisticOptions& opt = {}) {
  validate_dataset(d);
  if (d.rows() == 0) {
    throw DataError("logistic: empty dataset");
  }
  if (opt.max_iters < 1 || !(opt.tol > 0.0)) {
    throw InvalidArgument("logistic: max_iters must be >= 1 and tol > 0");
  }
  check_design(d);

  const Matrix x = detail::with_intercept(d.features);
  const Eigen::Index k = x.cols();
  const Vector& y = d.labels;

  const auto loglik = [&](const Vector& theta) {
    const Vector eta = x * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      ll += y(i) * eta(i) - detail::log1pexp(eta(i));
    }
    return ll;
  };

  Vector theta = Vector::Zero(k);
  double ll = loglik(theta);
  Matrix info(k, k);
  Vector grad(k);
  Vector w(x.rows());

  const auto evaluate = [&](const Vector& th) {
    const Vector eta = x * th;
    Vector resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      resid(i) = y(i) - p;
      w(i) = p * (1.0 - p);
    }
    grad.noalias() = x.transpose() * resid;
    info.noalias() = x.transpose() * w.asDiagonal() * x;
  };

  LogisticFit fit;
  fit.predictor_names = d.feature_names;
  fit.log_likelihood_path.push_back(ll);
  std::size_t diverging_steps = 0;
  std::size_t polish_steps = 0;

  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    evaluate(theta);
    if (grad.cwiseAbs().maxCoeff() < opt.tol) {
      fit.converged = true;
      fit.iterations = it;
      break;
    }
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14) {
      // Weights collapse toward 0 as fitted probabilities saturate.
      if (theta.cwiseAbs().maxCoeff() > opt.separation_bound) {
        throw SeparationError("logistic: perfect separation (information matrix vanished)", theta.normalized());
      }
      throw SingularMatrixError("logistic: information matrix is singular");
    }
    const Vector step = ldlt.solve(grad);

    // While polishing, likelihood differences are at rounding level, so a
    // Newton step that loses no more than that is still taken.
    const double slack = polish_steps > 0 ? 1e-12 * (1.0 + std::abs(ll)) : 0.0;
    double t = 1.0;
    Vector candidate = theta + step;
    double ll_new = loglik(candidate);
    for (int halvings = 0; !(ll_new >= ll - slack) && halvings < 40; ++halvings) {
      t *= 0.5;
      candidate = theta + t * step;
      ll_new = loglik(candidate);
    }
    if (!(ll_new >= ll - slack)) {
      candidate = theta;
      ll_new = ll;
    }
    const double change = ll_new - ll;
    theta = candidate;
    ll = ll_new;
    fit.log_likelihood_path.push_back(ll);
    fit.iterations = it + 1;

    if (polish_steps >= 3) {
      fit.converged = true;
      break;
    }
    if (theta.cwiseAbs().maxCoeff() > opt.separation_bound && change > opt.tol * (1.0 + std::abs(ll))) {
      if (++diverging_steps >= opt.separation_patience) {
        throw SeparationError("logistic: perfect separation (|coefficient| > " + format_short(opt.separation_bound) +
                                  " and likelihood still improving)",
                              theta.normalized());
      }
    } else {
      diverging_steps = 0;
    }
    if (change <= opt.tol * (1.0 + std::abs(ll))) {
      ++polish_steps;
    }
  }
  if (!fit.converged) {
    throw ConvergenceError("logistic: IRLS did not converge in " + std::to_string(opt.max_iters) + " iterations");
  }
  evaluate(theta);

  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14) {
    throw SingularMatrixError("logistic: information matrix is singular at the estimate");
  }
  Matrix cov = ldlt.solve(Matrix::Identity(k, k));
  fit.covariance = 0.5 * (cov + cov.transpose());
  fit.intercept = theta(0);
  fit.coefficients = theta.tail(k - 1);
  fit.final_log_likelihood = ll;
  return fit;
}

inline double predict_proba(const LogisticFit& fit, const Vector& features) {
  if (features.size() != fit.coefficients.size()) {
    throw DimensionError("predict_proba: expected " + std::to_string(fit.coefficients.size()) + " features, got " +
                         std::to_string(features.size()));
  }
  return sigmoid(fit.intercept + fit.coefficients.dot(features));
}

inline Vector predict_proba(const LogisticFit& fit, const Matrix& features) {
  if (features.cols() != fit.coefficients.size()) {
    throw DimensionError("predict_proba: feature matrix has the wrong column count");
  }
  Vector out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out(i) = sigmoid(fit.intercept + features.row(i).dot(fit.coefficients));
  }
  return out;
}

// Two-sided p-value of a standard-normal statistic.
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

inline WaldRow wald_row(std::string predictor, double coefficient, double std_error) {
  if (!(std_error > 0.0)) {
    throw InvalidArgument("wald_row: standard error must be positive");
  }
  WaldRow row;
  row.predictor = std::move(predictor);
  row.coefficient = coefficient;
  row.std_error = std_error;
  row.odds_ratio = std::exp(coefficient);
  row.z_value = coefficient / std_error;
  row.p_value = normal_two_sided_p(row.z_value);
  return row;
}

/// One row per parameter, intercept first, then predictors in fit order.
inline std::vector<WaldRow> wald_stats(const LogisticFit& fit) {
  if (!fit.converged) {
    throw InvalidArgument("wald_stats: fit did not converge");
  }
  std::vector<WaldRow> rows;
  rows.reserve(fit.predictor_names.size() + 1);
  rows.push_back(wald_row(intercept_name, fit.intercept, std::sqrt(fit.covariance(0, 0))));
  for (std::size_t j = 0; j < fit.predictor_names.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(j + 1);
    rows.push_back(wald_row(fit.predictor_names[j], fit.coefficients(i - 1), std::sqrt(fit.covariance(i, i))));
  }
  return rows;
}

inline void write_wald_csv(const std::vector<WaldRow>& rows, std::ostream& out) {
  out << "Predictor,Co-eff.,S.Error,O. Ratio,z-value,p-value\n";
  for (const auto& r : rows) {
    out << r.predictor << ',' << format_double(r.coefficient) << ',' << format_double(r.std_error) << ','
        << format_double(r.odds_ratio) << ',' << format_double(r.z_value) << ',' << format_double(r.p_value) << '\n';
  }
}

// Body of a logistic model file; predictor names are stored by the caller.
inline void save_logistic(const LogisticFit& fit, std::ostream& out) {
  out << "echoclf-logit 1\n"
      << "converged " << (fit.converged ? 1 : 0) << '\n'
      << "iterations " << fit.iterations << '\n'
      << "log_likelihood " << format_double(fit.final_log_likelihood) << '\n'
      << "intercept " << format_double(fit.intercept) << '\n';
  textio::write_matrix(out, "coefficients", fit.coefficients.transpose());
  textio::write_matrix(out, "covariance", fit.covariance);
  out << "end\n";
}

inline LogisticFit load_logistic(std::istream& in, std::vector<std::string> predictor_names) {
  textio::Reader r(in);
  if (r.expect("echoclf-logit", 1)[1] != "1") {
    r.fail("unsupported logistic format version");
  }
  LogisticFit fit;
  fit.converged = r.count("converged") == 1;
  fit.iterations = r.count("iterations");
  fit.final_log_likelihood = r.number("log_likelihood");
  fit.intercept = r.number("intercept");
  const Matrix coef = r.matrix("coefficients");
  fit.covariance = r.matrix("covariance");
  r.expect("end", 0);
  if (coef.rows() != 1 || static_cast<std::size_t>(coef.cols()) != predictor_names.size() ||
      fit.covariance.rows() != coef.cols() + 1 || fit.covariance.cols() != coef.cols() + 1) {
    r.fail("logistic model dimensions disagree with the predictor list");
  }
  fit.coefficients = coef.row(0).transpose();
  fit.predictor_names = std::move(predictor_names);
  return fit;
}

} // namespace echoclf
