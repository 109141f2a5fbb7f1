#ifndef HAWKES_NUMERICS_HPP
#define HAWKES_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hawkes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Right-hand side of y' = f(t, y). Must be deterministic and side-effect free.
using VectorField = std::function<Vector(double, const Vector&)>;

enum class Direction { Forward, Backward };

/// Solution of an ODE on a time grid.
///
/// The grid is stored in increasing order regardless of the integration
/// direction. `slopes` holds f(t_i, y_i) at each node, which `at` uses for
/// cubic Hermite interpolation between nodes. Matrix-valued solutions are
/// stored flattened column-major with `rows` x `cols` recorded.
struct OdePath {
  std::vector<double> grid;
  std::vector<Vector> values;
  std::vector<Vector> slopes;
  Direction direction = Direction::Forward;
  double step = 0.0;
  std::string solver = "rk4";
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return grid.size(); }
  double t_begin() const { return grid.front(); }
  double t_end() const { return grid.back(); }

  // Value where integration started (t0 for forward, t0 for backward too).
  const Vector& initial() const {
    return direction == Direction::Forward ? values.front() : values.back();
  }
  // Value where integration stopped.
  const Vector& final() const {
    return direction == Direction::Forward ? values.back() : values.front();
  }

  Vector at(double t) const;
  Matrix matrix_at(std::size_t i) const;
};

struct Rk4Options {
  /// Truncate and flag when any |component| exceeds this.
  double blowup_threshold = std::numeric_limits<double>::infinity();
};

/// Classical fixed-step RK4 from t0 to t1 (t1 < t0 integrates backward).
/// The last step is shortened so the path lands exactly on t1.
OdePath rk4(const VectorField& field, const Vector& y0, double t0, double t1,
            double h, const Rk4Options& options = {});

/// Single classical RK4 step, usable with any Eigen-expression state.
template <class State, class Field>
State rk4_step(const Field& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Matrix exponential by scaling and squaring with Pade approximation.
Matrix expm(const Matrix& m);

/// Returns (e^{tM}, \int_0^t e^{sM} ds) from one exponential of the block
/// matrix [[M, I], [0, 0]].
std::pair<Matrix, Matrix> expm_with_integral(const Matrix& m, double t);

/// Induced 1-norm (max column sum).
inline double norm1(const Matrix& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

/// Composite Simpson rule with n subintervals (rounded up to even).
template <class F>
double quad_simpson(const F& f, double a, double b, int n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

/// Central finite difference of the given derivative order (1 or 2).
template <class F>
double fd_derivative(const F& f, double x, double h, int order) {
  if (order == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace hawkes

#endif  // HAWKES_NUMERICS_HPP
