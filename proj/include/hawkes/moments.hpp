#ifndef HAWKES_MOMENTS_HPP
#define HAWKES_MOMENTS_HPP

#include <cmath>

#include <boost/math/special_functions/expm1.hpp>

#include "hawkes/kernels.hpp"
#include "hawkes/numerics.hpp"

namespace hawkes {

/// Linear structure of the moment equations: A = C + m J, J = e_1^T.
struct MomentSystem {
  Matrix A;
  RowVector J;
  double mu = 0.0;
  const OdeKernel* kernel = nullptr;

  static MomentSystem from(const OdeKernel& k, double mu);
};

inline constexpr double kMomentStep = 1e-3;
inline constexpr double kMomentBlowUp = 1e12;

/// u(t) = E[X_t]: u' = mu m + A u, u(0) = 0.
OdePath mean_ode(const OdeKernel& k, double mu, double T,
                 double h = kMomentStep);

/// v(t) = E[X_t X_t^T]: v' = v A^T + A v + mu (m m^T + u m^T + m u^T)
/// + (J u) m m^T, v(0) = 0. The mean is integrated jointly; values hold
/// (vec(v), u) with v flattened column-major (rows = cols = n + 1).
OdePath second_moment_ode(const OdeKernel& k, double mu, double T,
                          double h = kMomentStep);

struct SecondMoment {
  Vector mean;
  Matrix raw;

  Matrix covariance() const { return raw - mean * mean.transpose(); }
};

/// Splits a node of a second_moment_ode path.
SecondMoment second_moment_at(const OdePath& path, std::size_t i);

// Closed forms for phi(a) = e^{-ca} and phi(a) = alpha^2 a e^{-beta a}.
// Each template evaluates one closed-form branch; the double overloads select
// the branch by exact equality and switch to 100-digit arithmetic near
// criticality where the non-critical branch cancels.

template <class S>
S mean_exp_critical(S mu, S t) {
  return mu * (t + t * t / 2);
}

template <class S>
S mean_exp_noncritical(S c, S mu, S t) {
  const S x = 1 - c;
  return mu / x * (boost::math::expm1(x * t) / x - c * t);
}

template <class S>
S mean_delayed_critical(S beta, S mu, S t) {
  using std::exp;
  return mu / (8 * beta) * (1 - exp(-2 * beta * t)) + 3 * mu / 4 * t +
         beta * mu / 4 * t * t;
}

template <class S>
S mean_delayed_noncritical(S alpha, S beta, S mu, S t) {
  const S d = alpha - beta;
  const S s = alpha + beta;
  return mu * beta * beta / (beta * beta - alpha * alpha) * t +
         alpha * mu / 2 *
             (boost::math::expm1(d * t) / (d * d) -
              boost::math::expm1(-s * t) / (s * s));
}

template <class S>
S var_exp_critical(S mu, S t) {
  return mu * t * (1 + S(3) / 2 * t + S(2) / 3 * t * t + t * t * t / 12);
}

template <class S>
S var_exp_noncritical(S c, S mu, S t) {
  using std::exp;
  const S x = 1 - c;
  const S e = exp(x * t);
  return mu / (x * x * x) *
         ((1 - c / 2) / x * e * e + ((3 * c * c - 1) / x - 2 * c * t) * e -
          c * c * c * t + c * (S(1) / 2 - 3 * c) / x);
}

template <class S>
S var_intensity_critical(S beta, S mu, S t) {
  using std::exp;
  return beta * mu *
         (-S(7) / 128 + 3 * beta / 32 * t + beta * beta / 16 * t * t +
          (1 - beta * t) / 8 * exp(-2 * beta * t) -
          S(9) / 128 * exp(-4 * beta * t));
}

/// E[N_t] for phi(a) = e^{-ca}.
double closed_form_mean_exp(double c, double mu, double t);
/// E[N_t] for phi(a) = alpha^2 a e^{-beta a}.
double closed_form_mean_delayed(double alpha, double beta, double mu,
                                double t);
/// Var(N_t) for phi(a) = e^{-ca}.
double closed_form_var_exp(double c, double mu, double t);
/// Var(lambda_t) for phi(a) = beta^2 a e^{-beta a}.
double closed_form_var_intensity_critical(double beta, double mu, double t);

}  // namespace hawkes

#endif  // HAWKES_MOMENTS_HPP
