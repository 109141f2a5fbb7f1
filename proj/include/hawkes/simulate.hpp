#ifndef HAWKES_SIMULATE_HPP
#define HAWKES_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "hawkes/event_log.hpp"
#include "hawkes/general_model.hpp"
#include "hawkes/kernels.hpp"

namespace hawkes {

struct SimulationOptions {
  std::size_t max_events = 10'000'000;
  /// Attribute a parent to every accepted event (O(N) per event).
  bool tag_generations = false;
  int max_generation = 1000;
  /// The look-ahead window is halved when fewer than this fraction of the
  /// last `acceptance_window` candidates were accepted.
  double min_acceptance = 0.05;
  std::size_t acceptance_window = 32;
};

struct ThinningStats {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t window_expiries = 0;
  std::size_t halvings = 0;
  /// Largest observed lambda / lambda_bar over accepted-or-rejected candidates.
  double max_ratio = 0.0;

  ThinningStats& operator+=(const ThinningStats& o);
};

/// Growth bound for one population's excitation over a look-ahead window.
struct ExcitationBound {
  /// Induced 1-norm of the companion block driving the excitation.
  double growth = 0.0;
  /// sup of the time factor magnitude over the horizon.
  double factor_sup = 1.0;
  /// True when c_{-1} != 0, so the count feeds the age derivatives.
  bool count_coupled = false;

  static ExcitationBound from(const MarkKernel& k, double T);
};

struct ThinningState {
  double t = 0.0;
  /// Aggregate age stack of the Hawkes population: (N, <Z, phi>, ...).
  Vector X;
  /// Aggregate age stack of the external population (empty if none).
  Vector X_ext;
  double baseline_sup = 0.0;
  ExcitationBound self_bound;
  ExcitationBound ext_bound;
};

/// Majorant of the intensity on [t, t + delta]:
///   sup mu + sum over populations of
///   sup|v| * (|X[1]| + (e^{|C|_1 delta} - 1) |X|_1).
double dominating_bound(const ThinningState& state, double delta);

EventLog simulate_standard(const OdeKernel& k, double mu, double T,
                           std::uint64_t seed,
                           const SimulationOptions& options = {},
                           ThinningStats* stats = nullptr);

/// Generation-tagged simulation. Event times coincide with simulate_standard
/// for the same seed; parents are drawn from a separate stream.
EventLog simulate_generations(const OdeKernel& k, double mu, double T,
                              std::uint64_t seed, int max_gen,
                              ThinningStats* stats = nullptr);

struct GeneralLogs {
  EventLog external;
  EventLog hawkes;
};

GeneralLogs simulate_general(const GeneralModel& gm, double T,
                             std::uint64_t seed,
                             const SimulationOptions& options = {},
                             ThinningStats* stats = nullptr);

/// Left-limit intensity on a grid, computed by direct kernel summation and by
/// Markov propagation; throws if the two disagree beyond 1e-9 relative.
std::vector<double> intensity_path(const EventLog& log, const OdeKernel& k,
                                   double mu, const std::vector<double>& grid);
std::vector<double> intensity_path(const EventLog& external,
                                   const EventLog& hawkes,
                                   const GeneralModel& gm,
                                   const std::vector<double>& grid);

/// Compensator increments Lambda(T_n) - Lambda(T_{n-1}) (T_0 = 0); iid Exp(1)
/// under the model.
std::vector<double> rescaled_interarrivals(const EventLog& log,
                                           const OdeKernel& k, double mu);
std::vector<double> rescaled_interarrivals(const EventLog& external,
                                           const EventLog& hawkes,
                                           const GeneralModel& gm);

/// Rescaled times Lambda(T_n) / L of the events with Lambda(T_n) <= L, where
/// L = \int_0^T mu(s) ds over the log horizon. Since lambda >= mu every path
/// covers [0, L], so given their number these are iid uniform on [0, 1].
/// Pooled completed gaps are not iid Exp(1): the horizon cuts off long gaps.
std::vector<double> rescaled_uniforms(const EventLog& log, const OdeKernel& k,
                                      double mu);
std::vector<double> rescaled_uniforms(const EventLog& external,
                                      const EventLog& hawkes,
                                      const GeneralModel& gm);

}  // namespace hawkes

#endif  // HAWKES_SIMULATE_HPP
