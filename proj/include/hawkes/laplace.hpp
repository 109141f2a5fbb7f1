#ifndef HAWKES_LAPLACE_HPP
#define HAWKES_LAPLACE_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hawkes/event_log.hpp"
#include "hawkes/general_model.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/numerics.hpp"

namespace hawkes {

struct RiccatiOptions {
  double step = 1e-3;
  /// Re-solve at step / 2 and record the gap at t = 0.
  bool richardson = true;
  double blowup_threshold = 1e8;
};

/// Backward solution of a Riccati-type system.
///
/// The state is a stack of column-major blocks followed by one accumulator
/// Q with Q(T) = 0, whose value at 0 is the log of the transform (for the
/// vector equation, divided by mu). `field` is the right-hand side, so a
/// path can be differentiated at any node.
struct RiccatiPath {
  OdePath path;
  VectorField field;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  Vector terminal;
  double horizon = 0.0;
  double richardson_gap = 0.0;

  bool blew_up() const { return path.blew_up; }
  double blowup_time() const { return path.blowup_time; }
  Eigen::Index block_offset(std::size_t b) const;
  Matrix block(std::size_t b, double t) const;
  Matrix block_derivative(std::size_t b, double t) const;
  /// Q(0).
  double accumulated() const;
};

/// A' = -C^T A - (e^{A.m} - 1) J^T backward from A_T = v; accumulator
/// Q' = -(e^{A.m} - 1).
RiccatiPath solve_A_ode(const OdeKernel& k, const Vector& v, double T,
                        const RiccatiOptions& options = {});

/// E[exp(v . X_T)] = exp(mu \int_0^T (e^{A_s.m} - 1) ds).
double laplace_X(const OdeKernel& k, double mu, const Vector& v, double T,
                 const RiccatiOptions& options = {});

/// b_k = (-1)^k (m_{n-1-k} - sum_{l=k+1}^{n-1} m_{n-1-l} c_{n-l+k}).
Vector b_coefficients(const Vector& c, const Vector& m_init);

/// Scalar equation for G with state (G, G', ..., G^(n)), backward from
/// G^(k)(T) = 0 (k < n), G^(n)(T) = (-1)^{n-1} theta2.
OdePath solve_G_ode(const OdeKernel& k, double theta1, double theta2,
                    double T, const RiccatiOptions& options = {});

/// E[exp(theta1 N_T + theta2 lambda_T)] from the G equation.
double joint_laplace_N_lambda(const OdeKernel& k, double mu, double theta1,
                              double theta2, double T,
                              const RiccatiOptions& options = {});

/// Matrix system for the general model, exponents paired with the matrix
/// states by the Frobenius product <U, M1> + <V, M2>. Blocks are
/// (B1, B2), with B_T = (U, V) and
///   B_i' = -C_i^T B_i - B_i D_i(t) + f(t) K,
///   f(t) = 1 - \int e^{j_2(x) . B_2 V(t)} G(dx),
/// K = e_1 e_1^T. Throws QuadratureFailure when a mark integral diverges.
RiccatiPath solve_matrix_riccati(const GeneralModel& gm, const Matrix& U,
                                 const Matrix& V, double T,
                                 const RiccatiOptions& options = {});

/// E[exp(<U, M1_T> + <V, M2_T>)].
double laplace_general(const GeneralModel& gm, const Matrix& U,
                       const Matrix& V, double T,
                       const RiccatiOptions& options = {});

/// exp{A_t.X_t - \int A.CX - \int A'.X - \int (e^{A.m} - 1) lambda} at t
/// along one path, for the deterministic exponent carried by `A`.
double martingale_standard(const EventLog& log, const OdeKernel& k, double mu,
                           const RiccatiPath& A, double t);

/// Matrix analogue for the general model with exponents from `B`.
double martingale_general(const EventLog& external, const EventLog& hawkes,
                          const GeneralModel& gm, const RiccatiPath& B,
                          double t);

struct LaplaceResult {
  std::string query;
  double value = 0.0;
  bool blowup_flag = false;
  std::string solver = "rk4";
  double step = 0.0;
  std::size_t nodes = 0;
  double richardson_gap = 0.0;
  double blowup_time = 0.0;
};

void write_laplace_json(std::ostream& out,
                        const std::vector<LaplaceResult>& results);

/// t, then the components of every block (row-major), then Q.
void write_riccati_csv(std::ostream& out, const RiccatiPath& path);

}  // namespace hawkes

#endif  // HAWKES_LAPLACE_HPP
