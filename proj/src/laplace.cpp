#include "hawkes/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hawkes/errors.hpp"

namespace hawkes {

Eigen::Index RiccatiPath::block_offset(std::size_t b) const {
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < b; ++i) off += blocks[i].first * blocks[i].second;
  return off;
}

Matrix RiccatiPath::block(std::size_t b, double t) const {
  const Vector y = path.at(t);
  const auto [r, c] = blocks.at(b);
  return Eigen::Map<const Matrix>(y.data() + block_offset(b), r, c);
}

Matrix RiccatiPath::block_derivative(std::size_t b, double t) const {
  const Vector dy = field(t, path.at(t));
  const auto [r, c] = blocks.at(b);
  return Eigen::Map<const Matrix>(dy.data() + block_offset(b), r, c);
}

double RiccatiPath::accumulated() const {
  return path.values.front()[path.values.front().size() - 1];
}

namespace {

RiccatiPath solve_backward(VectorField field, const Vector& terminal, double T,
                           const RiccatiOptions& options) {
  if (!(T >= 0.0)) throw InvalidArgument("riccati: horizon must be >= 0");
  Rk4Options rk;
  rk.blowup_threshold = options.blowup_threshold;
  RiccatiPath out;
  out.path = rk4(field, terminal, T, 0.0, options.step, rk);
  out.path.rows = terminal.size();
  out.terminal = terminal;
  out.horizon = T;
  if (options.richardson && !out.path.blew_up) {
    const OdePath fine = rk4(field, terminal, T, 0.0, 0.5 * options.step, rk);
    if (!fine.blew_up) {
      out.richardson_gap =
          (fine.values.front() - out.path.values.front()).cwiseAbs().maxCoeff();
    }
  }
  out.field = std::move(field);
  return out;
}

[[noreturn]] void throw_blowup(const RiccatiPath& p, const char* where) {
  std::ostringstream msg;
  msg << where << ": backward solution blew up near t = " << p.blowup_time();
  throw BlowUp(msg.str(), p.blowup_time());
}

}  // namespace

RiccatiPath solve_A_ode(const OdeKernel& k, const Vector& v, double T,
                        const RiccatiOptions& options) {
  const Eigen::Index d = k.order() + 1;
  if (v.size() != d) {
    throw DimensionMismatch("solve_A_ode: terminal vector has wrong length");
  }
  const Matrix Ct = k.companion().transpose();
  const Vector m = k.jump();
  VectorField field = [Ct, m, d](double, const Vector& y) -> Vector {
    const auto A = y.head(d);
    const double g = std::expm1(A.dot(m));
    Vector dy(d + 1);
    dy.head(d) = -Ct * A;
    dy[1] -= g;
    dy[d] = -g;
    return dy;
  };
  Vector terminal = Vector::Zero(d + 1);
  terminal.head(d) = v;
  RiccatiPath out = solve_backward(std::move(field), terminal, T, options);
  out.blocks = {{d, 1}};
  return out;
}

double laplace_X(const OdeKernel& k, double mu, const Vector& v, double T,
                 const RiccatiOptions& options) {
  if (!(mu >= 0.0)) throw InvalidArgument("laplace_X: mu must be >= 0");
  const RiccatiPath p = solve_A_ode(k, v, T, options);
  if (p.blew_up()) throw_blowup(p, "laplace_X");
  return std::exp(mu * p.accumulated());
}

Vector b_coefficients(const Vector& c, const Vector& m_init) {
  const Eigen::Index n = m_init.size();
  if (c.size() != n + 1) {
    throw DimensionMismatch("b_coefficients: need n + 1 coefficients");
  }
  // c(j + 1) holds c_j.
  Vector b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double s = m_init[n - 1 - k];
    for (Eigen::Index l = k + 1; l <= n - 1; ++l) {
      s -= m_init[n - 1 - l] * c[n - l + k + 1];
    }
    b[k] = (k % 2 == 0 ? 1.0 : -1.0) * s;
  }
  return b;
}

OdePath solve_G_ode(const OdeKernel& k, double theta1, double theta2,
                    double T, const RiccatiOptions& options) {
  const Eigen::Index n = k.order();
  const Vector c = k.coefficients();
  const Vector b = b_coefficients(c, k.initial_stack());
  const double lead = n % 2 == 1 ? 1.0 : -1.0;  // (-1)^{n-1}
  auto field = [=](double, const Vector& y) -> Vector {
    Vector dy(n + 1);
    dy.head(n) = y.tail(n);
    double expo = theta1 - c[0] * y[0];
    double lin = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      expo += b[j] * y[j + 1];
      lin += (j % 2 == 0 ? 1.0 : -1.0) * c[j + 1] * y[j + 1];
    }
    dy[n] = lead * (-std::expm1(expo) - lin);
    return dy;
  };
  Vector terminal = Vector::Zero(n + 1);
  terminal[n] = lead * theta2;
  Rk4Options rk;
  rk.blowup_threshold = options.blowup_threshold;
  OdePath path = rk4(field, terminal, T, 0.0, options.step, rk);
  path.rows = n + 1;
  return path;
}

double joint_laplace_N_lambda(const OdeKernel& k, double mu, double theta1,
                              double theta2, double T,
                              const RiccatiOptions& options) {
  if (!(mu >= 0.0)) {
    throw InvalidArgument("joint_laplace_N_lambda: mu must be >= 0");
  }
  const OdePath p = solve_G_ode(k, theta1, theta2, T, options);
  if (p.blew_up) {
    std::ostringstream msg;
    msg << "joint_laplace_N_lambda: G equation blew up near t = "
        << p.blowup_time;
    throw BlowUp(msg.str(), p.blowup_time);
  }
  const Eigen::Index n = k.order();
  const Vector& g0 = p.values.front();
  const Vector& c = k.coefficients();
  double s = (n % 2 == 0 ? 1.0 : -1.0) * g0[n];
  for (Eigen::Index j = 0; j < n; ++j) {
    s += (j % 2 == 0 ? -1.0 : 1.0) * c[j + 1] * g0[j];
  }
  return std::exp(-mu * s);
}

namespace {

double mark_moment(const MarkKernel& k, const Vector& y, double t) {
  const auto e = k.jump_exponential_moment(y);
  if (!e || !std::isfinite(*e)) {
    std::ostringstream msg;
    msg << "mark integral diverges at t = " << t;
    throw QuadratureFailure(msg.str());
  }
  return *e;
}

}  // namespace

RiccatiPath solve_matrix_riccati(const GeneralModel& gm, const Matrix& U,
                                 const Matrix& V, double T,
                                 const RiccatiOptions& options) {
  const Eigen::Index r1 = gm.external.order() + 1;
  const Eigen::Index c1 = gm.external.time_factor.order() + 1;
  const Eigen::Index r2 = gm.self.order() + 1;
  const Eigen::Index c2 = gm.self.time_factor.order() + 1;
  if (U.rows() != r1 || U.cols() != c1) {
    throw DimensionMismatch("solve_matrix_riccati: U does not match M1");
  }
  if (V.rows() != r2 || V.cols() != c2) {
    throw DimensionMismatch("solve_matrix_riccati: V does not match M2");
  }
  const Eigen::Index n1 = r1 * c1;
  const Eigen::Index n2 = r2 * c2;
  const Matrix C1t = gm.external.base.companion().transpose();
  const Matrix C2t = gm.self.base.companion().transpose();
  const bool external_on = !gm.external_rate.is_zero();

  VectorField field = [=](double t, const Vector& y) -> Vector {
    Eigen::Map<const Matrix> B1(y.data(), r1, c1);
    Eigen::Map<const Matrix> B2(y.data() + n1, r2, c2);
    const Vector w = gm.external.time_factor.stack_at(t);
    const Vector v = gm.self.time_factor.stack_at(t);
    const double e2 = mark_moment(gm.self, B2 * v, t);
    const double f = 1.0 - e2;
    Vector dy(n1 + n2 + 1);
    Eigen::Map<Matrix> dB1(dy.data(), r1, c1);
    Eigen::Map<Matrix> dB2(dy.data() + n1, r2, c2);
    dB1 = -C1t * B1 - B1 * gm.external.time_factor.companion(t);
    dB2 = -C2t * B2 - B2 * gm.self.time_factor.companion(t);
    dB1(1, 1) += f;
    dB2(1, 1) += f;
    double rate = gm.baseline(t) * (e2 - 1.0);
    if (external_on) {
      rate += gm.external_rate(t) * (mark_moment(gm.external, B1 * w, t) - 1.0);
    }
    dy[n1 + n2] = -rate;
    return dy;
  };
  Vector terminal(n1 + n2 + 1);
  terminal.head(n1) = Eigen::Map<const Vector>(U.data(), n1);
  terminal.segment(n1, n2) = Eigen::Map<const Vector>(V.data(), n2);
  terminal[n1 + n2] = 0.0;
  RiccatiPath out = solve_backward(std::move(field), terminal, T, options);
  out.blocks = {{r1, c1}, {r2, c2}};
  return out;
}

double laplace_general(const GeneralModel& gm, const Matrix& U,
                       const Matrix& V, double T,
                       const RiccatiOptions& options) {
  // No event can occur, so both matrix states stay at zero.
  if (gm.baseline.is_zero() && gm.external_rate.is_zero()) return 1.0;
  const RiccatiPath p = solve_matrix_riccati(gm, U, V, T, options);
  if (p.blew_up()) throw_blowup(p, "laplace_general");
  return std::exp(p.accumulated());
}

namespace {

constexpr double kMartingaleNode = 1e-2;

int simpson_nodes(double span) {
  int n = static_cast<int>(std::ceil(span / kMartingaleNode));
  n = std::max(n, 2);
  return n % 2 ? n + 1 : n;
}

double simpson_weight(int i, int n) {
  if (i == 0 || i == n) return 1.0;
  return i % 2 ? 4.0 : 2.0;
}

}  // namespace

double martingale_standard(const EventLog& log, const OdeKernel& k, double mu,
                           const RiccatiPath& A, double t) {
  if (!(t >= 0.0 && t <= A.horizon)) {
    throw InvalidArgument("martingale_standard: t outside the path horizon");
  }
  const Matrix& C = k.companion();
  const Vector m = k.jump();
  Vector X = Vector::Zero(k.order() + 1);
  double now = 0.0;
  double integral = 0.0;
  auto integrate_to = [&](double to) {
    const double span = to - now;
    if (!(span > 0.0)) return;
    const int n = simpson_nodes(span);
    const double h = span / n;
    const Matrix E = expm(h * C);
    Vector x = X;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = now + i * h;
      const Vector a = A.block(0, s);
      const Vector da = A.block_derivative(0, s);
      const double g = a.dot(C * x) + da.dot(x) +
                       std::expm1(a.dot(m)) * (mu + x[1]);
      sum += simpson_weight(i, n) * g;
      if (i < n) x = E * x;
    }
    integral += sum * h / 3.0;
    X = expm(span * C) * X;
    now = to;
  };
  for (const auto& e : log.events) {
    if (e.t > t) break;
    integrate_to(e.t);
    X += m;
  }
  integrate_to(t);
  return std::exp(A.block(0, t).col(0).dot(X) - integral);
}

double martingale_general(const EventLog& external, const EventLog& hawkes,
                          const GeneralModel& gm, const RiccatiPath& B,
                          double t) {
  if (!(t >= 0.0 && t <= B.horizon)) {
    throw InvalidArgument("martingale_general: t outside the path horizon");
  }
  const MarkKernel& k1 = gm.external;
  const MarkKernel& k2 = gm.self;
  const Matrix& C1 = k1.base.companion();
  const Matrix& C2 = k2.base.companion();
  Matrix M1 = Matrix::Zero(k1.order() + 1, k1.time_factor.order() + 1);
  Matrix M2 = Matrix::Zero(k2.order() + 1, k2.time_factor.order() + 1);
  const bool external_on = !gm.external_rate.is_zero();

  auto integrand = [&](double s, const Matrix& m1, const Matrix& m2) {
    const Matrix b1 = B.block(0, s);
    const Matrix b2 = B.block(1, s);
    const Matrix db1 = B.block_derivative(0, s);
    const Matrix db2 = B.block_derivative(1, s);
    const Matrix g1 = db1 + C1.transpose() * b1 +
                      b1 * k1.time_factor.companion(s);
    const Matrix g2 = db2 + C2.transpose() * b2 +
                      b2 * k2.time_factor.companion(s);
    const double e2 = mark_moment(k2, b2 * k2.time_factor.stack_at(s), s);
    double g = g1.cwiseProduct(m1).sum() + g2.cwiseProduct(m2).sum() +
               (e2 - 1.0) * (gm.baseline(s) + m1(1, 1) + m2(1, 1));
    if (external_on) {
      const double e1 = mark_moment(k1, b1 * k1.time_factor.stack_at(s), s);
      g += gm.external_rate(s) * (e1 - 1.0);
    }
    return g;
  };

  double now = 0.0;
  double integral = 0.0;
  auto integrate_to = [&](double to) {
    const double span = to - now;
    if (!(span > 0.0)) return;
    const int n = simpson_nodes(span);
    const double h = span / n;
    const Matrix E1 = expm(h * C1);
    const Matrix E2 = expm(h * C2);
    Matrix m1 = M1;
    Matrix m2 = M2;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = now + i * h;
      sum += simpson_weight(i, n) * integrand(s, m1, m2);
      if (i < n) {
        m1 = E1 * m1 * k1.time_factor.transition(s, s + h).transpose();
        m2 = E2 * m2 * k2.time_factor.transition(s, s + h).transpose();
      }
    }
    integral += sum * h / 3.0;
    M1 = m1;
    M2 = m2;
    now = to;
  };

  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    const bool has_ext = i < external.size() && external.events[i].t <= t;
    const bool has_hawkes = j < hawkes.size() && hawkes.events[j].t <= t;
    if (!has_ext && !has_hawkes) break;
    const bool take_ext =
        has_ext && (!has_hawkes || external.events[i].t <= hawkes.events[j].t);
    const EventRecord& e = take_ext ? external.events[i++] : hawkes.events[j++];
    integrate_to(e.t);
    if (take_ext) {
      M1 += k1.jump(e.mark) * k1.time_factor.stack_at(e.t).transpose();
    } else {
      M2 += k2.jump(e.mark) * k2.time_factor.stack_at(e.t).transpose();
    }
  }
  integrate_to(t);
  const double state = B.block(0, t).cwiseProduct(M1).sum() +
                       B.block(1, t).cwiseProduct(M2).sum();
  return std::exp(state - integral);
}

void write_laplace_json(std::ostream& out,
                        const std::vector<LaplaceResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json meta = {{"solver", r.solver},
                           {"step", r.step},
                           {"direction", "backward"},
                           {"nodes", r.nodes},
                           {"richardson_gap", r.richardson_gap}};
    meta["blowup_time"] =
        r.blowup_flag ? nlohmann::json(r.blowup_time) : nlohmann::json();
    arr.push_back({{"query", r.query},
                   {"value", r.blowup_flag ? nlohmann::json()
                                           : nlohmann::json(r.value)},
                   {"blowup_flag", r.blowup_flag},
                   {"path_meta", meta}});
  }
  out << arr.dump(2) << '\n';
}

void write_riccati_csv(std::ostream& out, const RiccatiPath& p) {
  out << "t";
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto [r, c] = p.blocks[b];
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        out << ",B" << b + 1 << '_' << i << '_' << j;
      }
    }
  }
  out << ",Q\n";
  out.precision(17);
  for (std::size_t n = 0; n < p.path.size(); ++n) {
    const Vector& y = p.path.values[n];
    out << p.path.grid[n];
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const auto [r, c] = p.blocks[b];
      Eigen::Map<const Matrix> blk(y.data() + p.block_offset(b), r, c);
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) out << ',' << blk(i, j);
      }
    }
    out << ',' << y[y.size() - 1] << '\n';
  }
}

}  // namespace hawkes
