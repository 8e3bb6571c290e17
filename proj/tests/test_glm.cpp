#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "echoclf/dataio.hpp"
#include "echoclf/glm.hpp"
#include "oracles.hpp"

using namespace echoclf;

namespace {

Dataset intercept_only(std::initializer_list<double> labels) {
  Dataset d;
  d.features = Matrix(static_cast<Eigen::Index>(labels.size()), 0);
  d.labels = Vector(static_cast<Eigen::Index>(labels.size()));
  Eigen::Index i = 0;
  for (double v : labels) {
    d.labels(i++) = v;
  }
  return d;
}

SynthData planted(std::size_t n, std::size_t noise, std::uint64_t seed) {
  SynthSpec s;
  s.n = n;
  s.p_informative = 3;
  s.p_noise = noise;
  s.planted_alpha = -0.4;
  s.planted_beta = {0.8, -1.1, 0.5};
  s.seed = seed;
  return synth_generate(s);
}

Vector planted_beta(const SynthData& sd) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(sd.data.cols()));
  for (std::size_t j = 0; j < sd.truth.spec.planted_beta.size(); ++j) {
    b(static_cast<Eigen::Index>(j)) = sd.truth.spec.planted_beta[j];
  }
  return b;
}

} // namespace

TEST(FitLogistic, InterceptOnlyBalanced) {
  const auto fit = fit_logistic(intercept_only({0, 1}));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-10);
  EXPECT_EQ(fit.coefficients.size(), 0);
}

TEST(FitLogistic, InterceptOnlyLogOdds) {
  const auto fit = fit_logistic(intercept_only({0, 0, 1, 1, 1, 1}));
  EXPECT_NEAR(fit.intercept, std::log(2.0), 1e-10);
  // Var of the log-odds MLE is 1 / (n p (1 - p)).
  EXPECT_NEAR(fit.covariance(0, 0), 1.0 / (6.0 * (2.0 / 3.0) * (1.0 / 3.0)), 1e-10);
}

TEST(FitLogistic, PlantedFortySamples) {
  const auto sd = planted(40, 0, 5);
  const auto fit = fit_logistic(sd.data);
  const double at_truth = log_likelihood(sd.truth.spec.planted_alpha, planted_beta(sd), sd.data);
  EXPECT_GE(fit.final_log_likelihood, at_truth);
  const Vector g = log_likelihood_gradient(fit.intercept, fit.coefficients, sd.data);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(fit.final_log_likelihood, log_likelihood(fit, sd.data), 1e-10);
}

TEST(FitLogistic, GradientVanishesAcrossSeeds) {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto sd = planted(300, 4, s);
    const auto fit = fit_logistic(sd.data);
    const Vector g = log_likelihood_gradient(fit.intercept, fit.coefficients, sd.data);
    // Gradient is a sum over rows, so the tolerance scales with n.
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-9 * 300) << "seed " << s;
  }
}

TEST(FitLogistic, LikelihoodPathNonDecreasing) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto fit = fit_logistic(planted(200, 6, s).data);
    for (std::size_t i = 1; i < fit.log_likelihood_path.size(); ++i) {
      const double prev = fit.log_likelihood_path[i - 1];
      EXPECT_GE(fit.log_likelihood_path[i], prev - 1e-12 * (1.0 + std::abs(prev)));
    }
  }
}

TEST(FitLogistic, CovarianceSymmetricPsd) {
  const auto fit = fit_logistic(planted(500, 5, 3).data);
  const Matrix& c = fit.covariance;
  EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(fit.coefficients.size(), static_cast<Eigen::Index>(fit.predictor_names.size()));
}

TEST(FitLogistic, PerfectSeparationIsReported) {
  Dataset d;
  d.feature_names = {"x"};
  d.features = Matrix(6, 1);
  d.features << -3, -2, -1, 1, 2, 3;
  d.labels = Vector(6);
  d.labels << 0, 0, 0, 1, 1, 1;
  try {
    fit_logistic(d);
    FAIL() << "expected SeparationError";
  } catch (const SeparationError& e) {
    EXPECT_EQ(e.direction().size(), 2);
    EXPECT_GT(e.direction()(1), 0.0);
  }
}

TEST(FitLogistic, RejectsConstantAndDuplicateColumns) {
  auto sd = planted(100, 1, 2);
  Dataset d = sd.data;
  d.features.col(3).setConstant(2.0);
  EXPECT_THROW(fit_logistic(d), DataError);
  d = sd.data;
  d.features.col(3) = d.features.col(0);
  EXPECT_THROW(fit_logistic(d), DataError);
}

TEST(FitLogistic, NonConvergenceIsReported) {
  LogisticOptions opt;
  opt.max_iters = 1;
  EXPECT_THROW(fit_logistic(planted(200, 2, 1).data, opt), ConvergenceError);
}

TEST(FitLogistic, PlantedCoverageAtN5000) {
  std::size_t inside = 0;
  std::size_t total = 0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const auto sd = planted(5000, 2, 100 + s);
    const auto fit = fit_logistic(sd.data);
    const Vector truth = planted_beta(sd);
    const auto check = [&](double est, double want, double se) {
      ++total;
      if (std::abs(est - want) <= 3.0 * se) {
        ++inside;
      }
    };
    check(fit.intercept, sd.truth.spec.planted_alpha, std::sqrt(fit.covariance(0, 0)));
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
      check(fit.coefficients(j), truth(j), std::sqrt(fit.covariance(j + 1, j + 1)));
    }
  }
  EXPECT_GE(static_cast<double>(inside) / static_cast<double>(total), 0.95) << inside << "/" << total;
}

TEST(PredictProba, Basics) {
  LogisticFit fit;
  fit.coefficients = Vector::Zero(2);
  fit.predictor_names = {"a", "b"};
  EXPECT_DOUBLE_EQ(predict_proba(fit, Vector(Vector::Constant(2, 7.0))), 0.5);
  fit.coefficients = Vector::Zero(1);
  fit.coefficients(0) = 1.0;
  fit.predictor_names = {"a"};
  EXPECT_NEAR(predict_proba(fit, Vector(Vector::Constant(1, std::log(3.0)))), 0.75, 1e-15);
  EXPECT_THROW(predict_proba(fit, Vector(Vector::Zero(2))), DimensionError);
}

TEST(PredictProba, MonotoneInPositiveCoefficient) {
  LogisticFit fit;
  fit.intercept = -0.3;
  fit.coefficients = Vector(2);
  fit.coefficients << 0.7, -0.2;
  fit.predictor_names = {"a", "b"};
  Vector x(2);
  x << -5.0, 1.0;
  double prev = predict_proba(fit, x);
  for (int i = 0; i < 50; ++i) {
    x(0) += 0.2;
    const double p = predict_proba(fit, x);
    EXPECT_GT(p, prev);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    prev = p;
  }
}

TEST(LogLikelihood, ZeroParameters) {
  const auto sd = planted(17, 0, 1);
  EXPECT_NEAR(log_likelihood(0.0, Vector::Zero(3), sd.data), 17.0 * std::log(0.5), 1e-12);
}

TEST(LogLikelihood, ConfidentLimitApproachesZero) {
  Dataset d;
  d.feature_names = {"x"};
  d.features = Matrix(2, 1);
  d.features << -1, 1;
  d.labels = Vector(2);
  d.labels << 0, 1;
  double prev = -1e300;
  for (double b : {1.0, 5.0, 20.0, 50.0}) {
    const double ll = log_likelihood(0.0, Vector::Constant(1, b), d);
    EXPECT_LT(ll, 0.0);
    EXPECT_GT(ll, prev);
    prev = ll;
  }
  EXPECT_GT(prev, -1e-20);
}

TEST(LogLikelihood, MatchesExtendedPrecisionOracle) {
  SeededRng rng(31);
  const auto sd = planted(10, 2, 9);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(-2, 2);
    Vector b(5);
    for (int j = 0; j < 5; ++j) {
      b(j) = rng.uniform(-2, 2);
    }
    const double want = oracle::log_likelihood(a, b, sd.data.features, sd.data.labels);
    EXPECT_NEAR(log_likelihood(a, b, sd.data), want, 1e-12);
  }
}

TEST(LogLikelihood, GradientMatchesCentralDifferences) {
  SeededRng rng(47);
  const auto sd = planted(60, 2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    Vector theta(6);
    for (int j = 0; j < 6; ++j) {
      theta(j) = rng.uniform(-1.5, 1.5);
    }
    const Vector g = log_likelihood_gradient(theta(0), theta.tail(5), sd.data);
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-5;
      Vector up = theta;
      Vector dn = theta;
      up(j) += h;
      dn(j) -= h;
      const double fd =
          (log_likelihood(up(0), up.tail(5), sd.data) - log_likelihood(dn(0), dn.tail(5), sd.data)) / (2 * h);
      EXPECT_LE(std::abs(g(j) - fd), 1e-6 * std::max(1.0, std::abs(fd))) << "trial " << trial << " j " << j;
    }
  }
}

TEST(Wald, TableOneFixtures) {
  struct Row {
    const char* name;
    double coef, se, printed_or, printed_z;
  };
  const Row rows[] = {
      {"Sex", 1.15, 0.3065, 3.168, 3.719},
      {"MouthUlcer", 2.01, 0.0389, 7.404, 51.46},
      {"AvgComp", 1.38, 0.2978, 4.009, 4.662},
  };
  for (const auto& r : rows) {
    const auto w = wald_row(r.name, r.coef, r.se);
    EXPECT_NEAR(w.odds_ratio / r.printed_or, 1.0, 0.02) << r.name;
    EXPECT_NEAR(w.z_value / r.printed_z, 1.0, 0.02) << r.name;
  }
  EXPECT_NEAR(wald_row("MouthUlcer", 2.01, 0.0389).z_value / 51.46, 1.0, 0.005);
}

TEST(Wald, ZeroCoefficient) {
  const auto w = wald_row("x", 0.0, 0.37);
  EXPECT_EQ(w.odds_ratio, 1.0);
  EXPECT_EQ(w.z_value, 0.0);
  EXPECT_EQ(w.p_value, 1.0);
}

TEST(Wald, KnownNormalTail) {
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_NEAR(normal_two_sided_p(-2.5758293035489004), 0.01, 1e-12);
}

TEST(Wald, IdentitiesHoldForFits) {
  const auto fit = fit_logistic(planted(400, 5, 8).data);
  const auto rows = wald_stats(fit);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0].predictor, intercept_name);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.odds_ratio, std::exp(r.coefficient), 1e-12 * r.odds_ratio);
    EXPECT_NEAR(r.z_value, r.coefficient / r.std_error, 1e-12 * std::max(1.0, std::abs(r.z_value)));
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_GT(r.std_error, 0.0);
  }
}

TEST(Wald, RejectsUnconvergedFit) {
  LogisticFit fit;
  EXPECT_THROW(wald_stats(fit), InvalidArgument);
}

TEST(Wald, CsvHeader) {
  std::ostringstream os;
  write_wald_csv({wald_row("x", 0.5, 0.1)}, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "Predictor,Co-eff.,S.Error,O. Ratio,z-value,p-value");
}

TEST(Serialization, LogisticRoundTrip) {
  const auto sd = planted(300, 2, 6);
  const auto fit = fit_logistic(sd.data);
  std::stringstream ss;
  save_logistic(fit, ss);
  const auto back = load_logistic(ss, fit.predictor_names);
  EXPECT_EQ(back.intercept, fit.intercept);
  EXPECT_TRUE(back.coefficients == fit.coefficients);
  EXPECT_TRUE(back.covariance == fit.covariance);
  EXPECT_EQ(back.iterations, fit.iterations);
  EXPECT_TRUE(back.converged);
}
