#ifndef HAWKES_KERNELS_HPP
#define HAWKES_KERNELS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hawkes/numerics.hpp"

namespace hawkes {

/// Settings for the numerical non-negativity check run at construction.
struct KernelCheck {
  double tol_neg = 1e-12;
  double grid_step = 1e-3;
  double min_horizon = 10.0;
  double max_horizon = 1000.0;
  bool enabled = true;
};

/// Fertility function phi closed under the linear ODE
///
///   phi^{(n)} = c_{-1} + sum_{k<n} c_k phi^{(k)},   phi^{(k)}(0) = m_k.
///
/// Vectors use offset indexing: c[0] holds c_{-1}, c[k+1] holds c_k. The
/// stack (1, phi, ..., phi^{(n-1)}) evolves as F' = C F with C the companion
/// matrix, so F(a) = e^{aC} m with m = (1, m_0, ..., m_{n-1}).
class OdeKernel {
 public:
  OdeKernel() = default;

  int order() const { return static_cast<int>(m_init_.size()); }
  const Vector& coefficients() const { return c_; }
  const Vector& initial_stack() const { return m_init_; }
  const Matrix& companion() const { return companion_; }
  const Vector& jump() const { return jump_; }

  /// (1, phi(a), ..., phi^{(n-1)}(a)).
  Vector stack(double a) const;
  double operator()(double a) const { return stack(a)[1]; }
  Matrix propagator(double dt) const { return expm(dt * companion_); }

  /// Eigenvalues of the age block (lower-right n x n part of C).
  Eigen::VectorXcd age_eigenvalues() const;
  /// Largest real part among the age-block eigenvalues.
  double dominant_exponent() const;

  /// Validation horizon max(min_horizon, 5/|Re lambda|), capped.
  double check_horizon(const KernelCheck& check = {}) const;

 private:
  friend OdeKernel build_ode_kernel(const Vector&, const Vector&,
                                    const KernelCheck&);
  friend OdeKernel build_unchecked(const Vector&, const Vector&);

  Vector c_;
  Vector m_init_;
  Matrix companion_;
  Vector jump_;
};

/// Companion matrix C(c) for c = (c_{-1}, ..., c_{n-1}).
Matrix companion_matrix(const Vector& c);

OdeKernel build_ode_kernel(const Vector& c, const Vector& m_init,
                           const KernelCheck& check = {});

/// Builds a kernel with an arbitrary-sign initial stack, skipping the
/// non-negativity check. Used for mark-dependent stacks where positivity is
/// checked against the scaled kernel instead.
OdeKernel build_unchecked(const Vector& c, const Vector& m_init);

inline Vector eval_kernel_stack(const OdeKernel& k, double a) {
  return k.stack(a);
}

/// phi(a) = weights . exp(-rates a), distinct positive rates.
OdeKernel kernel_from_exponential_modes(const Vector& weights,
                                        const Vector& rates,
                                        const KernelCheck& check = {});

struct PowerLawParams {
  double tau0 = 1.0;
  double ratio = 2.0;
  double exponent = 0.5;
  int terms = 1;
};

/// Sum-of-exponentials power-law approximation with cut-off, shifted so that
/// phi(0) = 0.
OdeKernel power_law_kernel(const PowerLawParams& params,
                           const KernelCheck& check = {});

/// Weights and rates of the modes used by power_law_kernel.
std::pair<Vector, Vector> power_law_modes(const PowerLawParams& params);

/// Named families used by the config front-end.
OdeKernel exponential_kernel(double rate);
/// phi(a) = alpha^2 a e^{-beta a}.
OdeKernel delayed_kernel(double alpha, double beta);

struct BranchingRatio {
  double value = 0.0;
  double tail_estimate = 0.0;
  double dominant_exponent = 0.0;
  bool possibly_divergent = false;
};

/// \int_0^A phi(a) da by composite Simpson, with a tail estimate beyond A.
BranchingRatio branching_ratio(const OdeKernel& k, double horizon,
                               double step = 1e-3);

/// Time factor v(t) solving v^{(p)} = d_{-1}(t) + sum_l d_l(t) v^{(l)}.
///
/// The stack (1, v, ..., v^{(p-1)}) evolves as V' = D_t V with D_t = C(d(t)).
class TimeFactor {
 public:
  enum class Family { Constant, CosSquared, PolynomialCoefficient };

  /// Polynomial in t, coefficients in increasing degree.
  using Polynomial = std::vector<double>;

  static TimeFactor constant(double value = 1.0);
  /// v(t) = scale * cos^2(alpha t), so v'' = 2 alpha^2 (scale - 2 v).
  static TimeFactor cos_squared(double alpha, double scale = 1.0);
  /// d_l(t) polynomial in t for l = -1..p-1 (p + 1 entries) and initial
  /// stack (v(0), ..., v^{(p-1)}(0)); tabulated by RK4 on [0, horizon].
  static TimeFactor polynomial_coefficient(std::vector<Polynomial> d,
                                           const Vector& init, double horizon);

  Family family() const { return family_; }
  int order() const { return order_; }
  double value(double t) const { return stack_at(t)[1]; }
  /// (1, v(t), ..., v^{(p-1)}(t)).
  Vector stack_at(double t) const;
  /// (v(t), ..., v^{(p-1)}(t)).
  Vector derivative_stack_at(double t) const {
    return stack_at(t).tail(order_);
  }
  /// Companion matrix D_t.
  Matrix companion(double t) const;
  bool constant_coefficients() const {
    return family_ != Family::PolynomialCoefficient;
  }
  /// Transition matrix mapping V(t0) to V(t1).
  Matrix transition(double t0, double t1) const;
  /// sup over [0, T] of |v^{(l)}|, l = 0..p-1.
  Vector sup_bounds(double T) const;
  const std::vector<double>& params() const { return params_; }
  const std::vector<Polynomial>& polynomial_coefficients() const {
    return poly_;
  }
  double horizon() const { return horizon_; }

 private:
  Family family_ = Family::Constant;
  int order_ = 1;
  std::vector<double> params_;
  std::vector<Polynomial> poly_;
  Vector init_;
  double horizon_ = 0.0;
  double table_step_ = 1e-3;
  std::vector<Vector> table_;
};

class MarkDistribution {
 public:
  enum class Family { PointMass, Uniform, Exponential, Discrete };

  static MarkDistribution point_mass(double x);
  static MarkDistribution uniform(double lo, double hi);
  static MarkDistribution exponential(double rate);
  static MarkDistribution discrete(std::vector<double> values,
                                   std::vector<double> probs);

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

  double sample(std::mt19937_64& rng) const;
  double mean() const;
  double variance() const;
  bool in_support(double x) const;
  /// E[e^{b X}], or nullopt when infinite.
  std::optional<double> mgf(double b) const;
  /// Largest b with finite E[e^{bX}] (+inf for bounded support).
  double mgf_abscissa() const;

 private:
  Family family_ = Family::PointMass;
  std::vector<double> params_{1.0};
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// Mark-dependent kernel Phi_t(a, x) = v(t) phi(a, x) with initial stack
/// phi^{(k)}(0, x) = x * alpha_k (linear) or alpha_k (constant), where
/// alpha = base.initial_stack().
struct MarkKernel {
  enum class InitFamily { Linear, Constant };

  OdeKernel base;
  InitFamily init_family = InitFamily::Constant;
  TimeFactor time_factor = TimeFactor::constant(1.0);
  MarkDistribution marks = MarkDistribution::point_mass(1.0);

  int order() const { return base.order(); }
  /// (1, phi_0^{(0)}(x), ..., phi_0^{(n-1)}(x)).
  Vector jump(double x) const;
  /// Age stack of one individual with mark x at age a.
  Vector stack(double a, double x) const;
  double operator()(double t, double a, double x) const {
    return time_factor.value(t) * stack(a, x)[1];
  }
  /// E_G[exp(j(X) . y)] for the jump vector j(x); nullopt when infinite.
  std::optional<double> jump_exponential_moment(const Vector& y) const;
  /// Finiteness of \int exp(lambda max_k phi_0^{(k)}(x)) G(dx) for all
  /// lambda <= lambda_max; throws MomentConditionViolated otherwise.
  void check_moment_condition(double lambda_max) const;
  /// A kernel contributing nothing (phi == 0).
  static MarkKernel none(const MarkDistribution& marks);
  bool is_zero() const { return base.initial_stack().isZero(0.0); }
};

/// Non-negativity check of v(t) phi(a, x) on sampled grids.
void validate_mark_kernel(const MarkKernel& k, double horizon);

}  // namespace hawkes

#endif  // HAWKES_KERNELS_HPP
