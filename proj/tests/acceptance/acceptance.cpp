// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/laplace.hpp"
#include "hawkes/mc_harness.hpp"
#include "hawkes/moments.hpp"
#include "hawkes/pyramid.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = HAWKES_SOURCE_DIR;
constexpr std::size_t kPaths = 100000;
constexpr std::size_t kMartingalePaths = 10000;

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  bool expect(bool ok, const std::string& what) {
    detail_ << (detail_.tellp() > 0 ? "; " : "") << what
            << (ok ? "" : " [failed]");
    pass_ &= ok;
    return ok;
  }

  bool near(double value, double reference, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(10);
    s << what << " " << value << " vs " << reference << " (tol " << tol << ")";
    return expect(std::abs(value - reference) <= tol, s.str());
  }

  bool relative(double value, double reference, double tol,
                const std::string& what) {
    std::ostringstream s;
    s.precision(10);
    const double rel = std::abs(value - reference) / std::abs(reference);
    s << what << " rel err " << rel << " (tol " << tol << ")";
    return expect(rel <= tol, s.str());
  }

  bool mc(double analytic, const McInputs& in, const std::string& what) {
    const McReport r = compare(analytic, in);
    std::ostringstream s;
    s.precision(8);
    s << what << " MC " << r.empirical << " +- " << r.std_error << " vs "
      << analytic << " (z " << r.z << ")";
    return expect(r.pass && in.failures == 0, s.str());
  }

  bool finish() const {
    std::cout << (pass_ ? "PASS" : "FAIL") << " criterion " << id_ << " ("
              << title_ << "): " << detail_.str() << std::endl;
    return pass_;
  }

 private:
  int id_;
  std::string title_;
  std::ostringstream detail_;
  bool pass_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Vector exponent(const OdeKernel& k, double theta1, double theta2) {
  Vector v = Vector::Zero(k.order() + 1);
  v[0] = theta1;
  v[1] = theta2;
  return v;
}

McInputs mc_count(const OdeKernel& k, double mu, double T, std::uint64_t seed,
                  std::size_t n = kPaths) {
  return estimate(k, mu, {{StatisticKind::Count, "N_T"}}, T, n, seed)[0];
}

template <class F>
McInputs mc_path(std::size_t n, std::uint64_t seed, const F& f) {
  const auto rows = run_paths(n, seed, 0, [&](std::size_t, std::uint64_t s) {
    return Vector::Constant(1, f(s));
  });
  return summarize(rows, {"x"})[0];
}

std::size_t node_at(const OdePath& p, double t) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p.grid[i] - t) < 1e-12) return i;
  }
  return p.size() - 1;
}

GeneralModel marked_model() {
  GeneralModel gm;
  gm.baseline = RateFunction::constant(1.0);
  gm.external_rate = RateFunction::constant(1.0);
  gm.self = {exponential_kernel(1.0), MarkKernel::InitFamily::Linear,
             TimeFactor::constant(1.0), MarkDistribution::exponential(2.0)};
  gm.external = gm.self;
  return gm;
}

Matrix count_exponent(Eigen::Index rows, Eigen::Index cols, double theta) {
  Matrix V = Matrix::Zero(rows, cols);
  V(0, 0) = theta;
  return V;
}

bool criterion1() {
  Criterion c(1, "mean, exponential kernel");
  const auto start = std::chrono::steady_clock::now();
  const OdeKernel k2 = exponential_kernel(2.0);
  c.near(mean_ode(k2, 1.0, 1.0).final()[0], 1.0 + std::exp(-1.0), 1e-8,
         "ODE c=2");
  c.mc(1.0 + std::exp(-1.0), mc_count(k2, 1.0, 1.0, 101), "c=2");
  const OdeKernel k1 = exponential_kernel(1.0);
  c.near(mean_ode(k1, 1.0, 2.0).final()[0], 4.0, 1e-8, "ODE c=1");
  c.mc(4.0, mc_count(k1, 1.0, 2.0, 102), "c=1");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s");
  return c.finish();
}

bool criterion2() {
  Criterion c(2, "mean, delayed kernel");
  const double closed = closed_form_mean_delayed(1.0, 1.0, 1.0, 1.0);
  c.near(closed, 1.108083, 5e-7, "closed form alpha=beta");
  const OdeKernel crit = delayed_kernel(1.0, 1.0);
  c.near(mean_ode(crit, 1.0, 1.0).final()[0], closed, 1e-8, "ODE alpha=beta");
  c.near(closed_form_mean_delayed(1.0, 2.0, 1.0, 1.0),
         mean_ode(delayed_kernel(1.0, 2.0), 1.0, 1.0).final()[0], 1e-8,
         "alpha != beta vs ODE");
  c.mc(closed, mc_count(crit, 1.0, 1.0, 201), "alpha=beta");
  return c.finish();
}

bool criterion3() {
  Criterion c(3, "count variance, critical exponential kernel");
  const OdeKernel k = exponential_kernel(1.0);
  const OdePath p = second_moment_ode(k, 1.0, 1.0);
  const SecondMoment m = second_moment_at(p, p.size() - 1);
  const double var = m.covariance()(0, 0);
  c.near(var, 3.25, 1e-6, "ODE Var(N_1)");
  // (N - E N)^2 has mean Var(N) when E N is known exactly.
  const double mean = 1.5;
  const McInputs in = mc_path(200000, 301, [&](std::uint64_t s) {
    const double n = static_cast<double>(simulate_standard(k, 1.0, 1.0, s).size());
    return (n - mean) * (n - mean);
  });
  c.mc(3.25, in, "Var(N_1), 2e5 paths");
  return c.finish();
}

bool criterion4() {
  Criterion c(4, "intensity variance, critical delayed kernel");
  const OdePath p = second_moment_ode(delayed_kernel(1.0, 1.0), 1.0, 2.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const double ode = second_moment_at(p, node_at(p, t)).covariance()(1, 1);
    c.near(ode, closed_form_var_intensity_critical(1.0, 1.0, t), 1e-6,
           "t=" + std::to_string(t).substr(0, 3));
  }
  const double at0 = closed_form_var_intensity_critical(1.0, 1.0, 0.0);
  const double ode0 = second_moment_at(p, 0).covariance()(1, 1);
  c.expect(at0 == 0.0 && ode0 == 0.0, "t=0 closed form " +
                                          std::to_string(at0) + ", ODE " +
                                          std::to_string(ode0));
  return c.finish();
}

bool criterion5() {
  Criterion c(5, "Laplace transform of (N_T, lambda_T)");
  const OdeKernel k = exponential_kernel(2.0);
  const double mu = 1.0, T = 1.0, t1 = -0.5, t2 = -0.2;
  const double vec = std::exp(t2 * mu) * laplace_X(k, mu, exponent(k, t1, t2), T);
  const double scalar = joint_laplace_N_lambda(k, mu, t1, t2, T);
  c.near(scalar, vec, 1e-7, "scalar vs vector");
  const McInputs in = mc_path(kPaths, 501, [&](std::uint64_t s) {
    const EventLog log = simulate_standard(k, mu, T, s);
    const Vector X = markov_state_at(log, k, T).X;
    return std::exp(t1 * X[0] + t2 * (mu + X[1]));
  });
  c.mc(scalar, in, "E[exp(-0.5 N_T - 0.2 lambda_T)]");
  c.expect(joint_laplace_N_lambda(k, mu, 0.0, 0.0, T) == 1.0 &&
               laplace_X(k, mu, exponent(k, 0.0, 0.0), T) == 1.0,
           "theta = 0 gives exactly 1");
  return c.finish();
}

bool criterion6() {
  Criterion c(6, "moments from the log-Laplace transform");
  for (const OdeKernel& k : {exponential_kernel(2.0), delayed_kernel(1.0, 1.0)}) {
    const double mu = 1.0, T = 1.0;
    auto logL = [&](double t1) {
      return std::log(laplace_X(k, mu, exponent(k, t1, 0.0), T));
    };
    const OdePath p = second_moment_ode(k, mu, T);
    const SecondMoment m = second_moment_at(p, p.size() - 1);
    const std::string tag = k.order() == 1 ? "exp" : "delayed";
    c.relative(fd_derivative(logL, 0.0, 1e-4, 1), m.mean[0], 1e-4,
               tag + " E[N_T]");
    c.relative(fd_derivative(logL, 0.0, 1e-3, 2), m.covariance()(0, 0), 1e-3,
               tag + " Var(N_T)");
  }
  return c.finish();
}

bool criterion7() {
  Criterion c(7, "exponential martingales");
  const OdeKernel k = exponential_kernel(2.0);
  const RiccatiPath A = solve_A_ode(k, exponent(k, -0.5, -0.2), 1.0);
  Statistic m15{StatisticKind::Martingale15, "martingale_15"};
  m15.path = &A;
  c.mc(1.0, estimate(k, 1.0, {m15}, 1.0, kMartingalePaths, 701)[0],
       "standard, exponential kernel");
  const OdeKernel d = delayed_kernel(1.0, 1.0);
  const RiccatiPath Ad = solve_A_ode(d, exponent(d, -0.3, -0.3), 2.0);
  m15.path = &Ad;
  c.mc(1.0, estimate(d, 1.0, {m15}, 2.0, kMartingalePaths, 702)[0],
       "standard, delayed kernel");

  GeneralModel gm = marked_model();
  gm.self.time_factor = TimeFactor::cos_squared(1.0);
  const Matrix U = Matrix::Constant(2, 2, -0.2);
  const Matrix V = Matrix::Constant(2, 3, -0.2);
  const RiccatiPath B = solve_matrix_riccati(gm, U, V, 1.0);
  Statistic m39{StatisticKind::Martingale39, "martingale_39"};
  m39.path = &B;
  c.mc(1.0, estimate_general(gm, {m39}, 1.0, kMartingalePaths, 703)[0],
       "general immigrants");
  return c.finish();
}

bool criterion8() {
  Criterion c(8, "general immigrants");
  const GeneralModel dz = marked_model();
  Statistic s{StatisticKind::ExpTheta, "exp(-0.3 N2_T)"};
  s.V = count_exponent(2, 2, -0.3);
  c.mc(laplace_general(dz, Matrix::Zero(2, 2), s.V, 1.0),
       estimate_general(dz, {s}, 1.0, kPaths, 801)[0], "mark-driven model");

  for (const OdeKernel& k : {exponential_kernel(2.0), delayed_kernel(1.0, 1.0)}) {
    const GeneralModel gm = standard_as_general(k, 1.0);
    const Vector v = exponent(k, -0.5, -0.2);
    Matrix V = Matrix::Zero(k.order() + 1, 2);
    V.col(0) = v;
    const Matrix U = Matrix::Zero(2, 2);
    const RiccatiPath B = solve_matrix_riccati(gm, U, V, 1.0);
    const RiccatiPath A = solve_A_ode(k, v, 1.0);
    double gap = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = 0.1 * i;
      gap = std::max(gap, (B.block(1, t).rowwise().sum() - A.block(0, t))
                              .cwiseAbs()
                              .maxCoeff());
    }
    c.near(gap, 0.0, 1e-8, "degeneration order " + std::to_string(k.order()));
  }

  const cli::ExperimentConfig cfg =
      cli::load_config((kSource / "configs" / "cos_squared.yaml").string());
  const GeneralModel cs = cli::build_general_model(cfg);
  const double T = cfg.run.T;
  s.V = count_exponent(2, 3, -0.3);
  c.mc(laplace_general(cs, Matrix::Zero(2, 3), s.V, T),
       estimate_general(cs, {s}, T, kPaths, 802)[0], "cos^2 time factor");
  return c.finish();
}

bool criterion9() {
  Criterion c(9, "structural exactness");
  const OdeKernel k = delayed_kernel(1.0, 1.0);
  bool counts = true, partition = true;
  double markov_gap = 0.0;
  std::vector<double> pooled;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::uint64_t seed = derive_seed(901, i);
    const EventLog log = simulate_standard(k, 1.0, 10.0, seed);
    for (double t : {2.5, 5.0, 10.0}) {
      const MarkovState st = markov_state_at(log, k, t);
      counts &= pyramid_at(log, t).size() == log.count_until(t) &&
                st.X[0] == static_cast<double>(log.count_until(t));
      markov_gap = std::max(markov_gap,
                            relative_gap(Matrix(st.X),
                                         Matrix(markov_state_direct(log, k, t))));
    }
    const EventLog gen = simulate_generations(k, 1.0, 10.0, seed, 1000);
    std::size_t total = 0;
    for (int g = 0; g <= 1001; ++g) {
      for (const auto& e : gen.events) total += e.gen == g;
    }
    partition &= total == gen.size() && gen.times() == log.times();
    if (i < 100) {
      const auto u = rescaled_uniforms(log, k, 1.0);
      pooled.insert(pooled.end(), u.begin(), u.end());
    }
  }
  c.expect(counts, "N_t = <Z_t, 1>");
  c.expect(partition, "generations partition N_t");
  c.near(markov_gap, 0.0, 1e-8, "Markov state direct vs propagated");

  GeneralModel gm = marked_model();
  gm.self.time_factor = TimeFactor::cos_squared(1.0);
  double matrix_gap = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const GeneralLogs logs = simulate_general(gm, 5.0, derive_seed(902, i));
    const MatrixState a = matrix_state_direct(logs.external, logs.hawkes, gm, 5.0);
    const MatrixState b =
        matrix_state_propagated(logs.external, logs.hawkes, gm, 5.0);
    matrix_gap = std::max({matrix_gap, relative_gap(a.M1, b.M1),
                           relative_gap(a.M2, b.M2)});
  }
  c.near(matrix_gap, 0.0, 1e-8, "matrix state direct vs propagated");

  const double d = ks_statistic(pooled, [](double x) {
    return std::clamp(x, 0.0, 1.0);
  });
  const double p = kolmogorov_pvalue(d, pooled.size());
  c.expect(p >= 0.01, "time-rescaling KS p = " + std::to_string(p) + " on " +
                          std::to_string(pooled.size()) + " points");
  return c.finish();
}

int run_validate(const fs::path& out) {
  const std::string cmd = std::string("\"") + HAWKES_CLI + "\" validate \"" +
                          (kSource / "configs" / "default.yaml").string() +
                          "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion10() {
  Criterion c(10, "determinism of validate");
  const fs::path dir = fs::temp_directory_path() / "hawkes_acceptance";
  fs::remove_all(dir);
  const int a = run_validate(dir / "a");
  const int b = run_validate(dir / "b");
  c.expect(a == 0 && b == 0,
           "exit codes " + std::to_string(a) + ", " + std::to_string(b));
  const std::string ma = slurp(dir / "a" / "manifest.json");
  c.expect(!ma.empty() && ma == slurp(dir / "b" / "manifest.json"),
           "identical manifest checksums");
  return c.finish();
}

}  // namespace

int main() {
  bool ok = true;
  for (auto* criterion :
       {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
        criterion7, criterion8, criterion9, criterion10}) {
    try {
      ok &= criterion();
    } catch (const std::exception& e) {
      std::cout << "FAIL criterion: exception " << e.what() << std::endl;
      ok = false;
    }
  }
  return ok ? 0 : 1;
}
