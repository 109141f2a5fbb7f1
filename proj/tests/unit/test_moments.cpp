#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "hawkes/kernels.hpp"
#include "hawkes/moments.hpp"

using namespace hawkes;

namespace {

std::size_t node_at(const OdePath& path, double t) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (std::abs(path.grid[i] - t) < 1e-12) return i;
  }
  ADD_FAILURE() << "no grid node at " << t;
  return 0;
}

}  // namespace

TEST(MeanOde, NonCriticalExponential) {
  const OdePath p = mean_ode(exponential_kernel(2.0), 1.0, 1.0);
  EXPECT_NEAR(p.final()[0], 1.0 + std::exp(-1.0), 1e-8);
  EXPECT_NEAR(p.final()[0], 1.367879, 1e-6);
}

TEST(MeanOde, CriticalExponential) {
  const OdePath p = mean_ode(exponential_kernel(1.0), 1.0, 2.0);
  EXPECT_NEAR(p.final()[0], 4.0, 1e-8);
}

TEST(MeanOde, ZeroBaseline) {
  const OdePath p = mean_ode(delayed_kernel(1.0, 1.0), 0.0, 3.0);
  for (const auto& v : p.values) EXPECT_TRUE(v.isZero(0.0));
}

TEST(MeanOde, IntensityMeanIsDerivativeOfCountMean) {
  // E[N_t]' = mu + E[lambda_t - mu].
  const OdePath p = mean_ode(delayed_kernel(1.0, 2.0), 1.0, 2.0);
  const std::size_t i = node_at(p, 1.0);
  EXPECT_NEAR(p.slopes[i][0], 1.0 + p.values[i][1], 1e-12);
}

TEST(SecondMoment, CriticalCountVariance) {
  const OdePath p = second_moment_ode(exponential_kernel(1.0), 1.0, 1.0);
  const SecondMoment m = second_moment_at(p, p.size() - 1);
  EXPECT_NEAR(m.covariance()(0, 0), 3.25, 1e-6);
  EXPECT_NEAR(m.mean[0], 1.5, 1e-8);
}

TEST(SecondMoment, CriticalIntensityVariance) {
  const OdePath p = second_moment_ode(delayed_kernel(1.0, 1.0), 1.0, 2.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const SecondMoment m = second_moment_at(p, node_at(p, t));
    EXPECT_NEAR(m.covariance()(1, 1),
                closed_form_var_intensity_critical(1.0, 1.0, t), 1e-6);
  }
}

TEST(SecondMoment, StartsAtZero) {
  const OdePath p = second_moment_ode(delayed_kernel(1.0, 1.0), 1.0, 1.0);
  const SecondMoment m = second_moment_at(p, 0);
  EXPECT_TRUE(m.raw.isZero(0.0));
  EXPECT_EQ(m.covariance()(1, 1), 0.0);
  EXPECT_EQ(closed_form_var_intensity_critical(1.0, 1.0, 0.0), 0.0);
}

TEST(SecondMoment, SymmetricPositiveSemidefinite) {
  const OdePath p = second_moment_ode(power_law_kernel({1.0, 2.0, 0.5, 2}),
                                      1.5, 3.0);
  for (std::size_t i : {p.size() / 3, p.size() - 1}) {
    const Matrix cov = second_moment_at(p, i).covariance();
    EXPECT_LT((cov - cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * cov.norm());
  }
}

TEST(SecondMoment, MeanBlockMatchesMeanOde) {
  const OdeKernel k = delayed_kernel(1.0, 2.0);
  const OdePath a = mean_ode(k, 1.0, 2.0);
  const OdePath b = second_moment_ode(k, 1.0, 2.0);
  EXPECT_LT((a.final() - second_moment_at(b, b.size() - 1).mean)
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(ClosedForms, DelayedCritical) {
  const double expected = (1.0 - std::exp(-2.0)) / 8.0 + 0.75 + 0.25;
  EXPECT_NEAR(closed_form_mean_delayed(1.0, 1.0, 1.0, 1.0), expected, 1e-14);
  EXPECT_NEAR(closed_form_mean_delayed(1.0, 1.0, 1.0, 1.0), 1.108083, 1e-6);
}

TEST(ClosedForms, DelayedNonCriticalMatchesOde) {
  const OdePath p = mean_ode(delayed_kernel(1.0, 2.0), 1.0, 1.0);
  EXPECT_NEAR(closed_form_mean_delayed(1.0, 2.0, 1.0, 1.0), p.final()[0], 1e-8);
  const OdePath q = mean_ode(delayed_kernel(1.5, 1.0), 0.7, 2.0);
  EXPECT_NEAR(closed_form_mean_delayed(1.5, 1.0, 0.7, 2.0), q.final()[0], 1e-8);
}

TEST(ClosedForms, ExponentialMeanMatchesOde) {
  for (double c : {0.5, 1.0, 2.0, 3.0}) {
    const OdePath p = mean_ode(exponential_kernel(c), 1.3, 1.5);
    EXPECT_NEAR(closed_form_mean_exp(c, 1.3, 1.5), p.final()[0], 1e-8);
  }
}

TEST(ClosedForms, ExponentialVarianceMatchesOde) {
  for (double c : {0.5, 1.0, 2.0}) {
    const OdePath p = second_moment_ode(exponential_kernel(c), 1.0, 1.0);
    const double ode = second_moment_at(p, p.size() - 1).covariance()(0, 0);
    EXPECT_NEAR(closed_form_var_exp(c, 1.0, 1.0), ode, 1e-6);
  }
}

TEST(ClosedForms, ContinuousAcrossCriticality) {
  const double mean1 = closed_form_mean_exp(1.0, 1.0, 2.0);
  const double var1 = closed_form_var_exp(1.0, 1.0, 2.0);
  for (double eps : {1e-6, 1e-9, 1e-12, 0x1p-52}) {
    for (double c : {1.0 - eps, 1.0 + eps}) {
      EXPECT_LE(std::abs(closed_form_mean_exp(c, 1.0, 2.0) - mean1) / mean1,
                1e-4);
      EXPECT_LE(std::abs(closed_form_var_exp(c, 1.0, 2.0) - var1) / var1,
                1e-4);
    }
    EXPECT_LE(std::abs(closed_form_mean_delayed(1.0, 1.0 + eps, 1.0, 2.0) -
                       closed_form_mean_delayed(1.0, 1.0, 1.0, 2.0)),
              1e-4);
  }
}

TEST(ClosedForms, NearCriticalStaysAccurate) {
  // Plain double evaluation of the non-critical branch loses most digits at
  // c = 1 + 1e-9; the result must still track the ODE.
  const double c = 1.0 + 1e-9;
  const OdePath p = second_moment_ode(exponential_kernel(c), 1.0, 1.0);
  const double ode = second_moment_at(p, p.size() - 1).covariance()(0, 0);
  EXPECT_NEAR(closed_form_var_exp(c, 1.0, 1.0), ode, 1e-6);
}
