#include "hawkes/numerics.hpp"

#include <algorithm>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "hawkes/errors.hpp"

namespace hawkes {

namespace {

bool finite_and_bounded(const Vector& y, double threshold) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || std::abs(y[i]) > threshold) return false;
  }
  return true;
}

}  // namespace

Vector OdePath::at(double t) const {
  if (grid.empty()) throw InvalidArgument("OdePath::at on empty path");
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double t0 = grid[i];
  const double t1 = grid[i + 1];
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  if (slopes.size() != values.size()) {
    return (1.0 - s) * values[i] + s * values[i + 1];
  }
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] +
         h11 * h * slopes[i + 1];
}

Matrix OdePath::matrix_at(std::size_t i) const {
  const Eigen::Index r = rows > 0 ? rows : values[i].size();
  return Eigen::Map<const Matrix>(values[i].data(), r, values[i].size() / r);
}

OdePath rk4(const VectorField& field, const Vector& y0, double t0, double t1,
            double h, const Rk4Options& options) {
  if (!(h > 0.0)) throw InvalidArgument("rk4: step must be positive");
  OdePath path;
  path.step = h;
  path.direction = t1 >= t0 ? Direction::Forward : Direction::Backward;
  path.rows = y0.size();

  const double span = std::abs(t1 - t0);
  const double sign = t1 >= t0 ? 1.0 : -1.0;
  // Steps of exactly h, with the final one shortened to land on t1.
  const auto full_steps =
      static_cast<long long>(std::floor(span / h * (1.0 + 1e-12)));
  const double remainder = span - static_cast<double>(full_steps) * h;
  const long long n_steps = full_steps + (remainder > 1e-12 * h ? 1 : 0);

  path.grid.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.values.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.slopes.reserve(static_cast<std::size_t>(n_steps) + 1);

  Vector y = y0;
  double t = t0;
  path.grid.push_back(t);
  path.values.push_back(y);
  path.slopes.push_back(field(t, y));
  for (long long i = 0; i < n_steps; ++i) {
    const double t_next = (i + 1 == n_steps) ? t1 : t0 + sign * h * (i + 1);
    const double dt = t_next - t;
    Vector y_next = rk4_step(field, t, y, dt);
    if (!finite_and_bounded(y_next, options.blowup_threshold)) {
      path.blew_up = true;
      path.blowup_time = t_next;
      break;
    }
    Vector slope = field(t_next, y_next);
    if (!finite_and_bounded(slope, std::numeric_limits<double>::max())) {
      path.blew_up = true;
      path.blowup_time = t_next;
      break;
    }
    y = std::move(y_next);
    t = t_next;
    path.grid.push_back(t);
    path.values.push_back(y);
    path.slopes.push_back(std::move(slope));
  }
  if (path.direction == Direction::Backward) {
    std::reverse(path.grid.begin(), path.grid.end());
    std::reverse(path.values.begin(), path.values.end());
    std::reverse(path.slopes.begin(), path.slopes.end());
  }
  return path;
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("expm: matrix not square");
  Matrix result = m.exp();
  if (!result.allFinite()) throw Error("expm: overflow");
  return result;
}

std::pair<Matrix, Matrix> expm_with_integral(const Matrix& m, double t) {
  const Eigen::Index n = m.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = t * m;
  block.topRightCorner(n, n) = t * Matrix::Identity(n, n);
  const Matrix e = expm(block);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

}  // namespace hawkes
