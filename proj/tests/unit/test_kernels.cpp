#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hawkes/errors.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/numerics.hpp"

using namespace hawkes;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double power_law_direct(double tau0, double ratio, double eps, int terms,
                        double a) {
  double sum = 0.0;
  double s = 0.0;
  for (int i = 0; i < terms; ++i) {
    const double scale = tau0 * std::pow(ratio, i);
    sum += std::exp(-a / scale) / std::pow(scale, 1.0 + eps);
    s += 1.0 / std::pow(scale, 1.0 + eps);
  }
  return sum - s * std::exp(-a / (tau0 / ratio));
}

template <class Draw>
void expect_sample_mean(const Draw& draw, double mean, double sd) {
  std::mt19937_64 rng(7);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += draw(rng);
  EXPECT_NEAR(sum / n, mean, 4.0 * sd / std::sqrt(n));
}

}  // namespace

TEST(OdeKernel, Exponential) {
  const OdeKernel k = build_ode_kernel(vec({0.0, -2.0}), vec({1.0}));
  EXPECT_NEAR(k(1.0), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(k(1.0), 0.135335, 1e-6);
}

TEST(OdeKernel, DelayedMatchesClosedForm) {
  const double alpha = 1.3, beta = 0.7;
  const OdeKernel k = delayed_kernel(alpha, beta);
  for (double a : {0.0, 0.4, 1.0, 3.0, 8.0}) {
    const double phi = alpha * alpha * a * std::exp(-beta * a);
    const double dphi = alpha * alpha * (1.0 - beta * a) * std::exp(-beta * a);
    const Vector s = k.stack(a);
    EXPECT_NEAR(s[1], phi, 1e-12);
    EXPECT_NEAR(s[2], dphi, 1e-12);
  }
  const OdeKernel unit = build_ode_kernel(vec({0.0, -1.0, -2.0}),
                                          vec({0.0, 1.0}));
  EXPECT_NEAR(unit(1.0), 0.367879, 1e-6);
}

TEST(OdeKernel, DelayedSatisfiesSecondOrderEquation) {
  const double beta = 1.0;
  const OdeKernel k = delayed_kernel(1.0, beta);
  auto phi = [&](double a) { return k(a); };
  for (double a : {0.3, 1.0, 2.5}) {
    const double d2 = fd_derivative(phi, a, 1e-4, 2);
    const double d1 = fd_derivative(phi, a, 1e-4, 1);
    EXPECT_NEAR(d2, -beta * beta * phi(a) - 2.0 * beta * d1, 1e-6);
  }
}

TEST(OdeKernel, NegativeInitialValueRejected) {
  EXPECT_THROW(build_ode_kernel(vec({0.0, -1.0}), vec({-1.0})),
               NonPositiveKernel);
}

TEST(OdeKernel, NegativeExcursionRejected) {
  // phi(a) = e^{-3a} - e^{-a} starts at 0 and goes negative.
  EXPECT_THROW(kernel_from_exponential_modes(vec({-1.0, 1.0}), vec({1.0, 3.0})),
               NonPositiveKernel);
}

TEST(OdeKernel, DimensionMismatch) {
  EXPECT_THROW(build_ode_kernel(vec({0.0, -1.0}), vec({1.0, 0.0})),
               DimensionMismatch);
}

TEST(OdeKernel, Stack) {
  const OdeKernel e = exponential_kernel(2.0);
  EXPECT_EQ(e.stack(0.0), vec({1.0, 1.0}));
  EXPECT_NEAR(e.stack(0.5)[1], std::exp(-1.0), 1e-12);
  EXPECT_EQ(e.stack(0.5)[0], 1.0);
  const OdeKernel d = delayed_kernel(1.0, 1.0);
  EXPECT_EQ(d.stack(0.0), vec({1.0, 0.0, 1.0}));
}

TEST(OdeKernel, StackSolvesCompanionSystem) {
  for (const OdeKernel& k :
       {exponential_kernel(2.0), delayed_kernel(1.0, 1.0),
        power_law_kernel({1.0, 2.0, 0.5, 3})}) {
    for (double a : {0.2, 1.0, 4.0}) {
      const double h = 1e-5;
      const Vector fd = (k.stack(a + h) - k.stack(a - h)) / (2.0 * h);
      const Vector rhs = k.companion() * k.stack(a);
      EXPECT_LT((fd - rhs).cwiseAbs().maxCoeff(), 1e-7);
    }
  }
}

TEST(OdeKernel, CompanionLayout) {
  const Matrix C = companion_matrix(vec({0.5, -1.0, -2.0}));
  Matrix expected(3, 3);
  expected << 0, 0, 0, 0, 0, 1, 0.5, -1, -2;
  EXPECT_EQ(C, expected);
}

TEST(PowerLaw, VanishesAtZero) {
  for (int terms : {1, 2, 5}) {
    const OdeKernel k = power_law_kernel({1.0, 2.0, 0.5, terms});
    EXPECT_EQ(k(0.0), 0.0);
  }
}

TEST(PowerLaw, MatchesDirectSum) {
  const OdeKernel k = power_law_kernel({1.0, 2.0, 0.5, 2});
  for (double a : {0.1, 1.0, 3.0}) {
    EXPECT_NEAR(k(a), power_law_direct(1.0, 2.0, 0.5, 2, a), 1e-10);
  }
}

TEST(PowerLaw, SingleTermIsDifferenceOfExponentials) {
  const OdeKernel k = power_law_kernel({1.0, 2.0, 0.5, 1});
  EXPECT_EQ(k.order(), 2);
  for (double a : {0.0, 0.5, 2.0}) {
    EXPECT_NEAR(k(a), std::exp(-a) - std::exp(-2.0 * a), 1e-12);
  }
}

TEST(ExponentialModes, SingleModeEqualsDirectConstruction) {
  const OdeKernel a = kernel_from_exponential_modes(vec({1.0}), vec({2.0}));
  const OdeKernel b = build_ode_kernel(vec({0.0, -2.0}), vec({1.0}));
  EXPECT_LT((a.coefficients() - b.coefficients()).norm(), 1e-14);
  EXPECT_LT((a.initial_stack() - b.initial_stack()).norm(), 1e-14);
}

TEST(ExponentialModes, MatchesDirectSum) {
  const OdeKernel k = kernel_from_exponential_modes(
      vec({1.0, -1.0}), vec({1.0, 3.0}), KernelCheck{.enabled = false});
  for (double a : {0.1, 1.0, 3.0}) {
    EXPECT_NEAR(k(a), std::exp(-a) - std::exp(-3.0 * a), 1e-10);
  }
}

TEST(ExponentialModes, DuplicateRate) {
  EXPECT_THROW(kernel_from_exponential_modes(vec({1.0, 1.0}), vec({1.0, 1.0})),
               DuplicateRate);
}

TEST(BranchingRatio, Exponential) {
  const BranchingRatio r = branching_ratio(exponential_kernel(2.0), 50.0);
  EXPECT_NEAR(r.value, 0.5, 1e-8);
  EXPECT_FALSE(r.possibly_divergent);
}

TEST(BranchingRatio, CriticalDelayed) {
  const BranchingRatio r = branching_ratio(delayed_kernel(1.0, 1.0), 50.0);
  EXPECT_NEAR(r.value, 1.0, 1e-8);
}

TEST(BranchingRatio, ConstantForcingFlagged) {
  const OdeKernel k = build_ode_kernel(vec({0.1, -1.0}), vec({1.0}));
  EXPECT_TRUE(branching_ratio(k, 50.0).possibly_divergent);
}

TEST(TimeFactor, CosSquaredValues) {
  const double alpha = 1.7;
  const TimeFactor f = TimeFactor::cos_squared(alpha, 2.0);
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    const double c = std::cos(alpha * t);
    EXPECT_NEAR(f.value(t), 2.0 * c * c, 1e-10);
    EXPECT_NEAR(f.stack_at(t)[2], -2.0 * alpha * std::sin(2.0 * alpha * t),
                1e-9);
  }
}

TEST(TimeFactor, CosSquaredSecondOrderEquation) {
  const double alpha = 1.0;
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.01 * i;
    const double v = std::pow(std::cos(alpha * t), 2);
    const double v2 = -2.0 * alpha * alpha * std::cos(2.0 * alpha * t);
    worst = std::max(worst,
                     std::abs(v2 - 2.0 * alpha * alpha * (1.0 - 2.0 * v)));
  }
  EXPECT_LT(worst, 1e-10);

  const TimeFactor f = TimeFactor::cos_squared(alpha);
  for (double t : {0.3, 2.0, 7.5}) {
    const Vector s = f.stack_at(t);
    const Vector ds = f.companion(t) * s;
    EXPECT_NEAR(ds[2], 2.0 * alpha * alpha * (1.0 - 2.0 * s[1]), 1e-12);
  }
}

TEST(TimeFactor, TransitionComposes) {
  const TimeFactor f = TimeFactor::cos_squared(0.8);
  const Vector v = f.transition(0.5, 2.0) * f.stack_at(0.5);
  EXPECT_LT((v - f.stack_at(2.0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TimeFactor, PolynomialCoefficientLinearGrowth) {
  // v' = 1 with v(0) = 2, i.e. d_{-1} = 1, d_0 = 0.
  const TimeFactor f =
      TimeFactor::polynomial_coefficient({{1.0}, {0.0}}, vec({2.0}), 5.0);
  EXPECT_NEAR(f.value(3.0), 5.0, 1e-10);
  EXPECT_GE(f.sup_bounds(5.0)[0], 7.0);
}

TEST(TimeFactor, PolynomialCoefficientTimeDependent) {
  // v' = t v, v(0) = 1: v = exp(t^2 / 2).
  const TimeFactor f =
      TimeFactor::polynomial_coefficient({{0.0}, {0.0, 1.0}}, vec({1.0}), 2.0);
  EXPECT_NEAR(f.value(1.5), std::exp(1.125), 1e-9);
  const Vector v = f.transition(0.5, 1.5) * f.stack_at(0.5);
  EXPECT_NEAR(v[1], std::exp(1.125), 1e-9);
}

TEST(MarkDistribution, SampleMeans) {
  const auto e = MarkDistribution::exponential(2.0);
  expect_sample_mean([&](auto& r) { return e.sample(r); }, 0.5, 0.5);
  const auto u = MarkDistribution::uniform(1.0, 3.0);
  expect_sample_mean([&](auto& r) { return u.sample(r); }, 2.0,
                     std::sqrt(u.variance()));
  const auto d = MarkDistribution::discrete({0.0, 1.0, 5.0}, {0.5, 0.3, 0.2});
  EXPECT_NEAR(d.mean(), 1.3, 1e-15);
  expect_sample_mean([&](auto& r) { return d.sample(r); }, 1.3,
                     std::sqrt(d.variance()));
}

TEST(MarkDistribution, Mgf) {
  const auto e = MarkDistribution::exponential(2.0);
  EXPECT_NEAR(*e.mgf(-0.3), 2.0 / 2.3, 1e-15);
  EXPECT_FALSE(e.mgf(2.0).has_value());
  const auto u = MarkDistribution::uniform(0.0, 1.0);
  EXPECT_NEAR(*u.mgf(1.0), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_EQ(*u.mgf(0.0), 1.0);
}

TEST(MarkDistribution, InvalidParameters) {
  EXPECT_THROW(MarkDistribution::uniform(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(MarkDistribution::exponential(0.0), InvalidArgument);
  EXPECT_THROW(MarkDistribution::discrete({1.0}, {0.5}), InvalidArgument);
}

TEST(MarkKernel, LinearJumpScalesWithMark) {
  MarkKernel k{exponential_kernel(1.0), MarkKernel::InitFamily::Linear,
               TimeFactor::cos_squared(1.0), MarkDistribution::exponential(2.0)};
  EXPECT_EQ(k.jump(0.7), vec({1.0, 0.7}));
  EXPECT_NEAR(k(0.5, 2.0, 0.7),
              std::pow(std::cos(0.5), 2) * 0.7 * std::exp(-2.0), 1e-12);
}

TEST(MarkKernel, MomentCondition) {
  MarkKernel k{exponential_kernel(1.0), MarkKernel::InitFamily::Linear,
               TimeFactor::constant(1.0), MarkDistribution::exponential(2.0)};
  EXPECT_NO_THROW(k.check_moment_condition(1.0));
  EXPECT_THROW(k.check_moment_condition(3.0), MomentConditionViolated);
}

TEST(MarkKernel, NegativeMarksRejectedForLinearFamily) {
  MarkKernel k{exponential_kernel(1.0), MarkKernel::InitFamily::Linear,
               TimeFactor::constant(1.0),
               MarkDistribution::uniform(-1.0, 1.0)};
  EXPECT_THROW(validate_mark_kernel(k, 1.0), NonPositiveKernel);
}
