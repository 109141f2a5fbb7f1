#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hawkes/errors.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/laplace.hpp"
#include "hawkes/mc_harness.hpp"
#include "hawkes/moments.hpp"

using namespace hawkes;

namespace {

OdeKernel zero_kernel() {
  Vector c(2), m(1);
  c << 0.0, -1.0;
  m << 0.0;
  return build_ode_kernel(c, m);
}

Vector exponent(double theta1, double theta2) {
  Vector v(2);
  v << theta1, theta2;
  return v;
}

McInputs inputs(double mean, double se) {
  return {"x", mean, se * se * 100.0, se, 100, 0};
}

}  // namespace

TEST(Estimate, PoissonCount) {
  const std::size_t n = 20000;
  const auto r = estimate(zero_kernel(), 1.0, {{StatisticKind::Count, "N"}},
                          1.0, n, 61);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].n_paths, n);
  EXPECT_EQ(r[0].failures, 0u);
  EXPECT_NEAR(r[0].mean, 1.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(r[0].std_error * std::sqrt(n), 1.0, 0.05);
}

TEST(Estimate, ExpThetaMatchesLaplace) {
  const OdeKernel k = exponential_kernel(2.0);
  Statistic s{StatisticKind::ExpTheta, "", exponent(-0.5, 0.0)};
  const auto r = estimate(k, 1.0, {s}, 1.0, 20000, 62);
  EXPECT_TRUE(compare(laplace_X(k, 1.0, s.theta, 1.0), r[0]).pass);
}

TEST(Estimate, CountAndIntensityMoments) {
  const OdeKernel k = exponential_kernel(2.0);
  const OdePath p = second_moment_ode(k, 1.0, 1.0);
  const SecondMoment m = second_moment_at(p, p.size() - 1);
  const auto r = estimate(k, 1.0,
                          {{StatisticKind::Count},
                           {StatisticKind::Intensity},
                           {StatisticKind::CountSquared},
                           {StatisticKind::IntensitySquared}},
                          1.0, 20000, 63);
  EXPECT_TRUE(compare(m.mean[0], r[0]).pass);
  EXPECT_TRUE(compare(1.0 + m.mean[1], r[1]).pass);
  EXPECT_TRUE(compare(m.raw(0, 0), r[2]).pass);
  EXPECT_TRUE(compare(1.0 + 2.0 * m.mean[1] + m.raw(1, 1), r[3]).pass);
}

TEST(Estimate, MartingaleHasUnitMean) {
  const OdeKernel k = delayed_kernel(1.0, 1.0);
  const RiccatiPath A = solve_A_ode(k, Vector::Constant(3, -0.3), 2.0);
  Statistic end{StatisticKind::Martingale15, "M_T"};
  end.path = &A;
  Statistic mid = end;
  mid.at = 1.0;
  const auto r = estimate(k, 1.0, {end, mid}, 2.0, 10000, 64);
  EXPECT_TRUE(compare(1.0, r[0]).pass) << r[0].mean << " +- " << r[0].std_error;
  EXPECT_TRUE(compare(1.0, r[1]).pass) << r[1].mean << " +- " << r[1].std_error;
}

TEST(Estimate, GeneralMartingaleHasUnitMean) {
  GeneralModel gm;
  gm.external_rate = RateFunction::constant(1.0);
  gm.self = {exponential_kernel(1.0), MarkKernel::InitFamily::Linear,
             TimeFactor::cos_squared(1.0), MarkDistribution::exponential(2.0)};
  gm.external = gm.self;
  const Matrix U = Matrix::Constant(2, 3, -0.2);
  const Matrix V = Matrix::Constant(2, 3, -0.1);
  const RiccatiPath B = solve_matrix_riccati(gm, U, V, 1.5);
  Statistic s{StatisticKind::Martingale39, "M_T"};
  s.path = &B;
  const auto r = estimate_general(gm, {s}, 1.5, 10000, 65);
  EXPECT_TRUE(compare(1.0, r[0]).pass) << r[0].mean << " +- " << r[0].std_error;
}

TEST(Estimate, TooFewPaths) {
  EXPECT_THROW(estimate(zero_kernel(), 1.0, {{StatisticKind::Count}}, 1.0, 99, 1),
               InvalidArgument);
}

TEST(RunPaths, IndependentOfThreadCount) {
  const OdeKernel k = exponential_kernel(2.0);
  const auto one = estimate(k, 1.0, {{StatisticKind::Count}}, 1.0, 500, 66, 1);
  const auto three = estimate(k, 1.0, {{StatisticKind::Count}}, 1.0, 500, 66, 3);
  EXPECT_EQ(one[0].mean, three[0].mean);
  EXPECT_EQ(one[0].variance, three[0].variance);
}

TEST(RunPaths, FailedPathsAreCounted) {
  const auto rows = run_paths(10, 1, 1, [](std::size_t i, std::uint64_t) {
    if (i % 5 == 0) throw Error("boom");
    return Vector::Constant(1, static_cast<double>(i));
  });
  const auto s = summarize(rows, {"x"});
  EXPECT_EQ(s[0].failures, 2u);
  EXPECT_EQ(s[0].n_paths, 8u);
  EXPECT_DOUBLE_EQ(s[0].mean, (1 + 2 + 3 + 4 + 6 + 7 + 8 + 9) / 8.0);
}

TEST(Compare, ExactAgreementPasses) {
  const McReport r = compare(2.0, inputs(2.0, 0.1));
  EXPECT_EQ(r.z, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Compare, TenStandardErrorsFails) {
  const McReport r = compare(1.0, inputs(2.0, 0.1));
  EXPECT_NEAR(r.z, 10.0, 1e-12);
  EXPECT_FALSE(r.pass);
}

TEST(Compare, ZeroVariance) {
  EXPECT_THROW(compare(1.0, inputs(1.0, 0.0)), ZeroVariance);
}

TEST(Compare, Coverage) {
  // 50 independent replications at the 4 SE threshold; a miss is a ~6e-5
  // event each, so at most 0.5 misses are allowed by a 0.99 coverage floor.
  const OdeKernel k = exponential_kernel(2.0);
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto r = estimate(k, 1.0, {{StatisticKind::Count}}, 1.0, 2000,
                            1000 + rep);
    covered += compare(1.0 + std::exp(-1.0), r[0]).pass;
  }
  EXPECT_GE(covered / 50.0, 0.99);
}

TEST(Kolmogorov, KnownQuantiles) {
  const std::size_t n = 1000000;
  const double rn = std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(kolmogorov_pvalue(1.3581 / rn, n), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_pvalue(1.6276 / rn, n), 0.01, 2e-4);
  EXPECT_EQ(kolmogorov_pvalue(0.0, n), 1.0);
}

TEST(Kolmogorov, Statistic) {
  auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_NEAR(ks_statistic({0.25, 0.75}, cdf), 0.25, 1e-15);
  EXPECT_NEAR(ks_statistic({0.9}, cdf), 0.9, 1e-15);
  EXPECT_THROW(ks_statistic({}, cdf), InvalidArgument);
}

TEST(Report, JsonAndCsv) {
  const std::vector<McReport> reports = {compare(2.0, inputs(2.1, 0.1))};
  std::ostringstream json;
  write_report_json(json, reports);
  const auto parsed = nlohmann::json::parse(json.str());
  EXPECT_EQ(parsed[0]["n_paths"], 100);
  EXPECT_EQ(parsed[0]["pass"], true);
  std::ostringstream csv;
  write_report_csv(csv, reports);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "quantity,analytic,empirical,std_error,n_paths,z,pass");
}
