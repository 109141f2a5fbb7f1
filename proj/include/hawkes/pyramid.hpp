#ifndef HAWKES_PYRAMID_HPP
#define HAWKES_PYRAMID_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "hawkes/event_log.hpp"
#include "hawkes/general_model.hpp"
#include "hawkes/kernels.hpp"

namespace hawkes {

struct AgeAtom {
  double age = 0.0;
  double mark = 0.0;
};

/// Age pyramid Z_t: one unit atom at (t - T_n, X_n) per event T_n <= t.
struct AgePyramid {
  double time = 0.0;
  Population pop = Population::Hawkes;
  std::vector<AgeAtom> atoms;

  std::size_t size() const { return atoms.size(); }
};

AgePyramid pyramid_at(const EventLog& log, double t);

/// <Z_t, f> = sum over atoms of f(age, mark).
template <class F>
double integrate(const AgePyramid& pyramid, const F& f) {
  double sum = 0.0;
  for (const auto& atom : pyramid.atoms) sum += f(atom.age, atom.mark);
  return sum;
}

/// Binned export: `age_bin_left,count`, or `age_bin_left,mark_bin_left,count`
/// when a mark bin width is given. Empty bins are omitted.
void write_pyramid_csv(std::ostream& out, const AgePyramid& pyramid,
                       double age_bin = 0.1,
                       std::optional<double> mark_bin = std::nullopt);

/// X_t = (N_t, <Z_t, phi>, ..., <Z_t, phi^{(n-1)}>).
struct MarkovState {
  double t = 0.0;
  Vector X;

  double count() const { return X[0]; }
  double intensity(double mu) const { return mu + X[1]; }
};

MarkovState empty_state(const OdeKernel& k);
/// X(t + dt) = e^{dt C} X(t); requires no event in (t, t + dt).
MarkovState propagate_state(const MarkovState& s, double dt,
                            const OdeKernel& k);
/// X + m at the current time.
MarkovState apply_jump(const MarkovState& s, const OdeKernel& k);

/// State after all events with time <= t, by event-to-event propagation.
MarkovState markov_state_at(const EventLog& log, const OdeKernel& k, double t);
/// Same quantity by direct summation of individual stacks.
Vector markov_state_direct(const EventLog& log, const OdeKernel& k, double t);

/// M2(k, l) = <Z^(2), d_a^k d_t^l Phi_t>, M1 likewise for Psi, offset
/// indexing as in OdeKernel (row/col 0 stand for the constant 1).
struct MatrixState {
  double t = 0.0;
  Matrix M1;
  Matrix M2;

  double external_count() const { return M1(0, 0); }
  double hawkes_count() const { return M2(0, 0); }
  /// mu(t) + M2[phi, v] + M1[psi, w].
  double intensity(double baseline) const {
    return baseline + M2(1, 1) + M1(1, 1);
  }
};

MatrixState matrix_state_direct(const EventLog& external,
                                const EventLog& hawkes,
                                const GeneralModel& gm, double t);
/// dM = W dN + (C M + M D_t^T) dt, integrated event to event.
MatrixState matrix_state_propagated(const EventLog& external,
                                    const EventLog& hawkes,
                                    const GeneralModel& gm, double t);
/// Direct summation, checked against propagation to `tolerance` relative.
MatrixState matrix_state_at(const EventLog& external, const EventLog& hawkes,
                            const GeneralModel& gm, double t,
                            double tolerance = 1e-8);

/// max |a - b| / max(1, max |a|).
double relative_gap(const Matrix& a, const Matrix& b);

}  // namespace hawkes

#endif  // HAWKES_PYRAMID_HPP
