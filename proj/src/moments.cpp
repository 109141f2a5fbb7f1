#include "hawkes/moments.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hawkes/errors.hpp"

namespace hawkes {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_100;

// Below this distance from criticality the non-critical branches are
// evaluated in Wide.
constexpr double kNearCritical = 1e-2;

void check_inputs(double mu, double T) {
  if (!(mu >= 0.0)) throw InvalidArgument("moments: mu must be >= 0");
  if (!(T >= 0.0)) throw InvalidArgument("moments: horizon must be >= 0");
}

}  // namespace

MomentSystem MomentSystem::from(const OdeKernel& k, double mu) {
  MomentSystem s;
  const Eigen::Index d = k.order() + 1;
  s.J = RowVector::Zero(d);
  s.J[1] = 1.0;
  s.A = k.companion() + k.jump() * s.J;
  s.mu = mu;
  s.kernel = &k;
  return s;
}

OdePath mean_ode(const OdeKernel& k, double mu, double T, double h) {
  check_inputs(mu, T);
  const MomentSystem sys = MomentSystem::from(k, mu);
  const Vector drift = mu * k.jump();
  const Matrix A = sys.A;
  auto field = [drift, A](double, const Vector& u) -> Vector {
    return drift + A * u;
  };
  Rk4Options opts;
  opts.blowup_threshold = kMomentBlowUp;
  OdePath path = rk4(field, Vector::Zero(A.rows()), 0.0, T, h, opts);
  path.rows = A.rows();
  return path;
}

OdePath second_moment_ode(const OdeKernel& k, double mu, double T, double h) {
  check_inputs(mu, T);
  const MomentSystem sys = MomentSystem::from(k, mu);
  const Eigen::Index d = sys.A.rows();
  const Matrix A = sys.A;
  const Vector m = k.jump();
  const Matrix mm = m * m.transpose();
  auto field = [=](double, const Vector& y) -> Vector {
    Eigen::Map<const Matrix> v(y.data(), d, d);
    const Vector u = y.tail(d);
    Vector dy(d * d + d);
    Eigen::Map<Matrix> dv(dy.data(), d, d);
    dv = v * A.transpose() + A * v +
         mu * (mm + u * m.transpose() + m * u.transpose()) + u[1] * mm;
    dy.tail(d) = mu * m + A * u;
    return dy;
  };
  Rk4Options opts;
  opts.blowup_threshold = kMomentBlowUp;
  OdePath path = rk4(field, Vector::Zero(d * d + d), 0.0, T, h, opts);
  path.rows = d;
  path.cols = d;
  return path;
}

SecondMoment second_moment_at(const OdePath& path, std::size_t i) {
  const Eigen::Index d = path.rows;
  const Vector& y = path.values[i];
  SecondMoment s;
  s.raw = Eigen::Map<const Matrix>(y.data(), d, d);
  s.mean = y.tail(d);
  return s;
}

double closed_form_mean_exp(double c, double mu, double t) {
  if (c == 1.0) return mean_exp_critical(mu, t);
  if (std::abs(1.0 - c) < kNearCritical) {
    return static_cast<double>(
        mean_exp_noncritical<Wide>(Wide(c), Wide(mu), Wide(t)));
  }
  return mean_exp_noncritical(c, mu, t);
}

double closed_form_mean_delayed(double alpha, double beta, double mu,
                                double t) {
  if (alpha == beta) return mean_delayed_critical(beta, mu, t);
  if (std::abs(alpha - beta) < kNearCritical * beta) {
    return static_cast<double>(mean_delayed_noncritical<Wide>(
        Wide(alpha), Wide(beta), Wide(mu), Wide(t)));
  }
  return mean_delayed_noncritical(alpha, beta, mu, t);
}

double closed_form_var_exp(double c, double mu, double t) {
  if (c == 1.0) return var_exp_critical(mu, t);
  if (std::abs(1.0 - c) < kNearCritical) {
    return static_cast<double>(
        var_exp_noncritical<Wide>(Wide(c), Wide(mu), Wide(t)));
  }
  return var_exp_noncritical(c, mu, t);
}

double closed_form_var_intensity_critical(double beta, double mu, double t) {
  return var_intensity_critical(beta, mu, t);
}

}  // namespace hawkes
