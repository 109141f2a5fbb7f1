#include "hawkes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hawkes/errors.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

Matrix companion_matrix(const Vector& c) {
  const Eigen::Index n = c.size() - 1;
  if (n < 1) throw DimensionMismatch("companion_matrix: need |c| >= 2");
  Matrix C = Matrix::Zero(n + 1, n + 1);
  for (Eigen::Index i = 1; i < n; ++i) C(i, i + 1) = 1.0;
  C.row(n) = c.transpose();
  return C;
}

Vector OdeKernel::stack(double a) const {
  if (a < 0.0) throw InvalidArgument("kernel stack: negative age");
  Vector s = propagator(a) * jump_;
  s[0] = 1.0;
  return s;
}

Eigen::VectorXcd OdeKernel::age_eigenvalues() const {
  const Eigen::Index n = order();
  Eigen::EigenSolver<Matrix> solver(companion_.bottomRightCorner(n, n),
                                    /*computeEigenvectors=*/false);
  return solver.eigenvalues();
}

double OdeKernel::dominant_exponent() const {
  return age_eigenvalues().real().maxCoeff();
}

double OdeKernel::check_horizon(const KernelCheck& check) const {
  const double lambda = dominant_exponent();
  if (lambda < 0.0) {
    return std::min(check.max_horizon,
                    std::max(check.min_horizon, 5.0 / std::abs(lambda)));
  }
  return check.min_horizon;
}

OdeKernel build_unchecked(const Vector& c, const Vector& m_init) {
  if (m_init.size() < 1 || c.size() != m_init.size() + 1) {
    std::ostringstream msg;
    msg << "build_ode_kernel: |c| = " << c.size() << " must equal |m_init| + 1 = "
        << m_init.size() + 1;
    throw DimensionMismatch(msg.str());
  }
  if (!c.allFinite() || !m_init.allFinite()) {
    throw InvalidArgument("build_ode_kernel: non-finite coefficients");
  }
  OdeKernel k;
  k.c_ = c;
  k.m_init_ = m_init;
  k.companion_ = companion_matrix(c);
  k.jump_.resize(m_init.size() + 1);
  k.jump_ << 1.0, m_init;
  return k;
}

OdeKernel build_ode_kernel(const Vector& c, const Vector& m_init,
                           const KernelCheck& check) {
  OdeKernel k = build_unchecked(c, m_init);
  if (!check.enabled) return k;

  const double horizon = k.check_horizon(check);
  const double h = check.grid_step;
  const Matrix step = k.propagator(h);
  const auto n_steps = static_cast<long long>(std::ceil(horizon / h));
  Vector s = k.jump_;
  for (long long i = 0; i <= n_steps; ++i) {
    if (i % 1000 == 0 && i > 0) s = k.stack(static_cast<double>(i) * h);
    if (s[1] < -check.tol_neg) {
      std::ostringstream msg;
      msg << "kernel is negative: phi(" << static_cast<double>(i) * h
          << ") = " << s[1];
      throw NonPositiveKernel(msg.str());
    }
    s = step * s;
  }
  return k;
}

namespace {

void check_distinct_positive(const Vector& rates) {
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0)) throw InvalidArgument("rates must be positive");
    for (Eigen::Index j = 0; j < i; ++j) {
      const double scale = std::max(rates[i], rates[j]);
      if (std::abs(rates[i] - rates[j]) <= 1e-12 * scale) {
        throw DuplicateRate("exponential modes need distinct rates");
      }
    }
  }
}

}  // namespace

OdeKernel kernel_from_exponential_modes(const Vector& weights,
                                        const Vector& rates,
                                        const KernelCheck& check) {
  if (weights.size() != rates.size() || rates.size() == 0) {
    throw DimensionMismatch("weights and rates must have equal non-zero size");
  }
  check_distinct_positive(rates);
  const Eigen::Index n = rates.size();

  // prod_j (y + r_j), coefficients in increasing degree.
  Vector poly = Vector::Zero(n + 1);
  poly[0] = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector next = Vector::Zero(n + 1);
    for (Eigen::Index k = 0; k <= j; ++k) {
      next[k + 1] += poly[k];
      next[k] += rates[j] * poly[k];
    }
    poly = next;
  }
  Vector c = Vector::Zero(n + 1);
  for (Eigen::Index k = 0; k < n; ++k) c[k + 1] = -poly[k];

  Vector m(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      sum += weights[j] * std::pow(-rates[j], static_cast<double>(k));
    }
    m[k] = sum;
  }
  return build_ode_kernel(c, m, check);
}

std::pair<Vector, Vector> power_law_modes(const PowerLawParams& p) {
  if (!(p.tau0 > 0.0) || !(p.ratio > 1.0) || !(p.exponent > 0.0) ||
      p.terms < 1) {
    throw InvalidArgument(
        "power_law_kernel: need tau0 > 0, ratio > 1, exponent > 0, terms >= 1");
  }
  Vector weights(p.terms + 1);
  Vector rates(p.terms + 1);
  double total = 0.0;
  for (int i = 0; i < p.terms; ++i) {
    const double scale = p.tau0 * std::pow(p.ratio, i);
    weights[i] = std::pow(scale, -(1.0 + p.exponent));
    rates[i] = 1.0 / scale;
    total += weights[i];
  }
  // The cut-off mode goes last so that phi(0) sums to exactly zero.
  weights[p.terms] = -total;
  rates[p.terms] = p.ratio / p.tau0;
  return {weights, rates};
}

OdeKernel power_law_kernel(const PowerLawParams& params,
                           const KernelCheck& check) {
  const auto [weights, rates] = power_law_modes(params);
  return kernel_from_exponential_modes(weights, rates, check);
}

OdeKernel exponential_kernel(double rate) {
  Vector c(2);
  c << 0.0, -rate;
  Vector m(1);
  m << 1.0;
  return build_ode_kernel(c, m);
}

OdeKernel delayed_kernel(double alpha, double beta) {
  Vector c(3);
  c << 0.0, -beta * beta, -2.0 * beta;
  Vector m(2);
  m << 0.0, alpha * alpha;
  return build_ode_kernel(c, m);
}

BranchingRatio branching_ratio(const OdeKernel& k, double horizon,
                               double step) {
  if (!(horizon > 0.0)) throw InvalidArgument("branching_ratio: horizon <= 0");
  auto n = static_cast<long long>(std::ceil(horizon / step));
  if (n % 2) ++n;
  const double h = horizon / static_cast<double>(n);
  const Matrix E = k.propagator(h);

  Vector s = k.jump();
  double sum = 0.0;
  for (long long i = 0; i <= n; ++i) {
    if (i % 1024 == 0 && i > 0) s = k.stack(static_cast<double>(i) * h);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * s[1];
    s = E * s;
  }

  BranchingRatio out;
  out.value = sum * h / 3.0;
  out.dominant_exponent = k.dominant_exponent();
  const double c_minus1 = k.coefficients()[0];
  out.possibly_divergent = out.dominant_exponent >= 0.0 || c_minus1 != 0.0;
  out.tail_estimate = out.possibly_divergent
                          ? std::numeric_limits<double>::infinity()
                          : std::abs(k(horizon)) / std::abs(out.dominant_exponent);
  return out;
}

// ---------------------------------------------------------------------------
// TimeFactor

namespace {

double eval_poly(const TimeFactor::Polynomial& p, double t) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
  return acc;
}

}  // namespace

TimeFactor TimeFactor::constant(double value) {
  TimeFactor f;
  f.family_ = Family::Constant;
  f.order_ = 1;
  f.params_ = {value};
  return f;
}

TimeFactor TimeFactor::cos_squared(double alpha, double scale) {
  TimeFactor f;
  f.family_ = Family::CosSquared;
  f.order_ = 2;
  f.params_ = {alpha, scale};
  return f;
}

TimeFactor TimeFactor::polynomial_coefficient(std::vector<Polynomial> d,
                                              const Vector& init,
                                              double horizon) {
  const int p = static_cast<int>(init.size());
  if (p < 1 || static_cast<int>(d.size()) != p + 1) {
    throw DimensionMismatch(
        "polynomial_coefficient: need p + 1 coefficient maps for order p");
  }
  if (!(horizon > 0.0)) throw InvalidArgument("time factor horizon <= 0");
  TimeFactor f;
  f.family_ = Family::PolynomialCoefficient;
  f.order_ = p;
  f.poly_ = std::move(d);
  f.init_ = init;
  f.horizon_ = horizon;

  const auto n = static_cast<long long>(std::ceil(horizon / f.table_step_));
  Vector y(p + 1);
  y << 1.0, init;
  f.table_.reserve(static_cast<std::size_t>(n) + 1);
  f.table_.push_back(y);
  auto field = [&f](double t, const Vector& v) -> Vector {
    return f.companion(t) * v;
  };
  for (long long i = 0; i < n; ++i) {
    y = rk4_step(field, static_cast<double>(i) * f.table_step_, y,
                 f.table_step_);
    f.table_.push_back(y);
  }
  return f;
}

Vector TimeFactor::stack_at(double t) const {
  Vector s(order_ + 1);
  switch (family_) {
    case Family::Constant:
      s << 1.0, params_[0];
      return s;
    case Family::CosSquared: {
      const double alpha = params_[0];
      const double scale = params_[1];
      const double c = std::cos(alpha * t);
      s << 1.0, scale * c * c, -scale * alpha * std::sin(2.0 * alpha * t);
      return s;
    }
    case Family::PolynomialCoefficient: {
      if (t < 0.0 || t > horizon_ * (1.0 + 1e-12) + 1e-12) {
        throw InvalidArgument("time factor evaluated outside its horizon");
      }
      const auto i = std::min<std::size_t>(
          static_cast<std::size_t>(std::floor(t / table_step_)),
          table_.size() - 1);
      const double t0 = static_cast<double>(i) * table_step_;
      auto field = [this](double u, const Vector& v) -> Vector {
        return companion(u) * v;
      };
      if (t - t0 <= 0.0) return table_[i];
      return rk4_step(field, t0, table_[i], t - t0);
    }
  }
  return s;
}

Matrix TimeFactor::companion(double t) const {
  switch (family_) {
    case Family::Constant:
      return Matrix::Zero(2, 2);
    case Family::CosSquared: {
      const double a2 = params_[0] * params_[0];
      Vector d(3);
      d << 2.0 * a2 * params_[1], -4.0 * a2, 0.0;
      return companion_matrix(d);
    }
    case Family::PolynomialCoefficient: {
      Vector d(order_ + 1);
      for (int l = 0; l <= order_; ++l) d[l] = eval_poly(poly_[l], t);
      return companion_matrix(d);
    }
  }
  return {};
}

Matrix TimeFactor::transition(double t0, double t1) const {
  if (constant_coefficients()) return expm((t1 - t0) * companion(0.0));
  const double span = t1 - t0;
  const auto n = std::max<long long>(
      1, static_cast<long long>(std::ceil(std::abs(span) / table_step_)));
  const double h = span / static_cast<double>(n);
  Matrix phi = Matrix::Identity(order_ + 1, order_ + 1);
  auto field = [this](double u, const Matrix& m) -> Matrix {
    return companion(u) * m;
  };
  for (long long i = 0; i < n; ++i) {
    phi = rk4_step(field, t0 + static_cast<double>(i) * h, phi, h);
  }
  return phi;
}

Vector TimeFactor::sup_bounds(double T) const {
  Vector sup(order_);
  switch (family_) {
    case Family::Constant:
      sup << std::abs(params_[0]);
      return sup;
    case Family::CosSquared:
      sup << std::abs(params_[1]), std::abs(params_[1] * params_[0]);
      return sup;
    case Family::PolynomialCoefficient: {
      // Max over the table plus one step of drift from the next derivative.
      Vector top = Vector::Zero(order_ + 1);
      const auto last = std::min<std::size_t>(
          table_.size() - 1,
          static_cast<std::size_t>(std::ceil(T / table_step_)));
      for (std::size_t i = 0; i <= last; ++i) {
        const double t = static_cast<double>(i) * table_step_;
        const Vector dv = companion(t) * table_[i];
        for (int l = 0; l < order_; ++l) {
          top[l] = std::max(top[l], std::abs(table_[i][l + 1]));
        }
        top[order_] = std::max(top[order_], std::abs(dv[order_]));
      }
      for (int l = 0; l < order_; ++l) {
        sup[l] = top[l] + table_step_ * top[l + 1];
      }
      return sup;
    }
  }
  return sup;
}

// ---------------------------------------------------------------------------
// MarkDistribution

MarkDistribution MarkDistribution::point_mass(double x) {
  MarkDistribution d;
  d.family_ = Family::PointMass;
  d.params_ = {x};
  return d;
}

MarkDistribution MarkDistribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("uniform marks need hi > lo");
  MarkDistribution d;
  d.family_ = Family::Uniform;
  d.params_ = {lo, hi};
  return d;
}

MarkDistribution MarkDistribution::exponential(double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("exponential marks need rate > 0");
  MarkDistribution d;
  d.family_ = Family::Exponential;
  d.params_ = {rate};
  return d;
}

MarkDistribution MarkDistribution::discrete(std::vector<double> values,
                                            std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size()) {
    throw DimensionMismatch("discrete marks: values and probs sizes differ");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw InvalidArgument("discrete marks: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("discrete marks: probabilities must sum to 1");
  }
  MarkDistribution d;
  d.family_ = Family::Discrete;
  d.params_.clear();
  d.values_ = std::move(values);
  d.probs_ = std::move(probs);
  d.cumulative_.resize(d.probs_.size());
  std::partial_sum(d.probs_.begin(), d.probs_.end(), d.cumulative_.begin());
  d.cumulative_.back() = 1.0;
  return d;
}

double MarkDistribution::sample(std::mt19937_64& rng) const {
  switch (family_) {
    case Family::PointMass:
      return params_[0];
    case Family::Uniform:
      return params_[0] + (params_[1] - params_[0]) * uniform01(rng);
    case Family::Exponential:
      return exponential_draw(rng, params_[0]);
    case Family::Discrete: {
      const double u = uniform01(rng);
      const auto it =
          std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto i = std::min<std::size_t>(
          static_cast<std::size_t>(it - cumulative_.begin()),
          values_.size() - 1);
      return values_[i];
    }
  }
  return 0.0;
}

double MarkDistribution::mean() const {
  switch (family_) {
    case Family::PointMass:
      return params_[0];
    case Family::Uniform:
      return 0.5 * (params_[0] + params_[1]);
    case Family::Exponential:
      return 1.0 / params_[0];
    case Family::Discrete:
      return std::inner_product(values_.begin(), values_.end(),
                                probs_.begin(), 0.0);
  }
  return 0.0;
}

double MarkDistribution::variance() const {
  switch (family_) {
    case Family::PointMass:
      return 0.0;
    case Family::Uniform: {
      const double w = params_[1] - params_[0];
      return w * w / 12.0;
    }
    case Family::Exponential:
      return 1.0 / (params_[0] * params_[0]);
    case Family::Discrete: {
      const double mu = mean();
      double v = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        v += probs_[i] * (values_[i] - mu) * (values_[i] - mu);
      }
      return v;
    }
  }
  return 0.0;
}

bool MarkDistribution::in_support(double x) const {
  switch (family_) {
    case Family::PointMass:
      return x == params_[0];
    case Family::Uniform:
      return x >= params_[0] && x <= params_[1];
    case Family::Exponential:
      return x >= 0.0 && std::isfinite(x);
    case Family::Discrete:
      return std::find(values_.begin(), values_.end(), x) != values_.end();
  }
  return false;
}

std::optional<double> MarkDistribution::mgf(double b) const {
  switch (family_) {
    case Family::PointMass:
      return std::exp(b * params_[0]);
    case Family::Uniform: {
      const double w = params_[1] - params_[0];
      const double z = b * w;
      const double ratio = std::abs(z) < 1e-300 ? 1.0 : std::expm1(z) / z;
      return std::exp(b * params_[0]) * ratio;
    }
    case Family::Exponential:
      if (b >= params_[0]) return std::nullopt;
      return params_[0] / (params_[0] - b);
    case Family::Discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        s += probs_[i] * std::exp(b * values_[i]);
      }
      return s;
    }
  }
  return std::nullopt;
}

double MarkDistribution::mgf_abscissa() const {
  if (family_ == Family::Exponential) return params_[0];
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// MarkKernel

Vector MarkKernel::jump(double x) const {
  Vector j(order() + 1);
  j[0] = 1.0;
  if (init_family == InitFamily::Linear) {
    j.tail(order()) = x * base.initial_stack();
  } else {
    j.tail(order()) = base.initial_stack();
  }
  return j;
}

Vector MarkKernel::stack(double a, double x) const {
  Vector s = base.propagator(a) * jump(x);
  s[0] = 1.0;
  return s;
}

std::optional<double> MarkKernel::jump_exponential_moment(
    const Vector& y) const {
  const double alpha_dot = base.initial_stack().dot(y.tail(order()));
  if (init_family == InitFamily::Constant) return std::exp(y[0] + alpha_dot);
  const auto m = marks.mgf(alpha_dot);
  if (!m) return std::nullopt;
  return std::exp(y[0]) * *m;
}

void MarkKernel::check_moment_condition(double lambda_max) const {
  if (init_family == InitFamily::Constant) return;
  const double kappa = base.initial_stack().maxCoeff();
  if (kappa <= 0.0) return;
  if (lambda_max * kappa >= marks.mgf_abscissa()) {
    std::ostringstream msg;
    msg << "exponential moment of the initial stack is infinite for lambda = "
        << lambda_max << " (needs lambda * " << kappa << " < "
        << marks.mgf_abscissa() << ")";
    throw MomentConditionViolated(msg.str());
  }
}

MarkKernel MarkKernel::none(const MarkDistribution& marks) {
  MarkKernel k;
  Vector c(2);
  c << 0.0, -1.0;
  k.base = build_unchecked(c, Vector::Zero(1));
  k.init_family = InitFamily::Constant;
  k.time_factor = TimeFactor::constant(0.0);
  k.marks = marks;
  return k;
}

void validate_mark_kernel(const MarkKernel& k, double horizon) {
  if (k.init_family == MarkKernel::InitFamily::Linear) {
    const auto fam = k.marks.family();
    bool negative = false;
    if (fam == MarkDistribution::Family::PointMass) {
      negative = k.marks.params()[0] < 0.0;
    } else if (fam == MarkDistribution::Family::Uniform) {
      negative = k.marks.params()[0] < 0.0;
    } else if (fam == MarkDistribution::Family::Discrete) {
      negative = *std::min_element(k.marks.values().begin(),
                                   k.marks.values().end()) < 0.0;
    }
    if (negative) {
      throw NonPositiveKernel("linear-in-mark kernels need non-negative marks");
    }
  }
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double t = horizon * i / n;
    if (k.time_factor.value(t) < -1e-12) {
      std::ostringstream msg;
      msg << "time factor is negative: v(" << t << ") = "
          << k.time_factor.value(t);
      throw NonPositiveKernel(msg.str());
    }
  }
}

}  // namespace hawkes
