#include "hawkes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hawkes/errors.hpp"
#include "hawkes/pyramid.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

ThinningStats& ThinningStats::operator+=(const ThinningStats& o) {
  candidates += o.candidates;
  accepted += o.accepted;
  window_expiries += o.window_expiries;
  halvings += o.halvings;
  max_ratio = std::max(max_ratio, o.max_ratio);
  return *this;
}

ExcitationBound ExcitationBound::from(const MarkKernel& k, double T) {
  ExcitationBound b;
  const Matrix& C = k.base.companion();
  const Eigen::Index n = k.order();
  b.count_coupled = k.base.coefficients()[0] != 0.0;
  b.growth = b.count_coupled ? norm1(C) : norm1(C.bottomRightCorner(n, n));
  b.factor_sup = k.is_zero() ? 0.0 : k.time_factor.sup_bounds(T)[0];
  return b;
}

namespace {

double excitation_bound(const Vector& X, const ExcitationBound& b,
                        double delta) {
  if (X.size() == 0 || b.factor_sup == 0.0) return 0.0;
  const double spread = b.count_coupled ? X.lpNorm<1>()
                                        : X.tail(X.size() - 1).lpNorm<1>();
  return b.factor_sup *
         (std::abs(X[1]) + std::expm1(b.growth * delta) * spread);
}

// Stream indices inside one simulation.
constexpr std::uint64_t kHawkesStream = 0;
constexpr std::uint64_t kExternalStream = 1;
constexpr std::uint64_t kParentStream = 2;

EventLog simulate_external(const GeneralModel& gm, double T,
                           std::uint64_t seed, bool tag) {
  EventLog log;
  log.horizon = T;
  log.seed = seed;
  log.model_id = gm.id;
  if (gm.external_rate.is_zero()) return log;
  std::mt19937_64 rng(derive_seed(seed, kExternalStream));
  const double bar = gm.external_rate.sup(T);
  if (!(bar > 0.0)) return log;
  double t = 0.0;
  while (true) {
    t += exponential_draw(rng, bar);
    if (t > T) break;
    const double rate = gm.external_rate(t);
    if (rate > bar * (1.0 + 1e-12)) {
      throw MajorantViolation("external rate exceeds its supremum");
    }
    if (uniform01(rng) * bar <= rate) {
      const double y = gm.external.marks.sample(rng);
      log.events.push_back({t, y, tag ? 0 : kUntagged, Population::External});
    }
  }
  return log;
}

class ThinningEngine {
 public:
  ThinningEngine(const GeneralModel& gm, double T, std::uint64_t seed,
                 const SimulationOptions& options)
      : gm_(gm),
        T_(T),
        options_(options),
        rng_(derive_seed(seed, kHawkesStream)),
        parent_rng_(derive_seed(seed, kParentStream)) {
    state_.X = Vector::Zero(gm.self.order() + 1);
    state_.X_ext = Vector::Zero(gm.external.order() + 1);
    state_.baseline_sup = gm.baseline.sup(T);
    state_.self_bound = ExcitationBound::from(gm.self, T);
    state_.ext_bound = ExcitationBound::from(gm.external, T);
    external_active_ = !gm.external.is_zero();
  }

  EventLog run(const EventLog& external) {
    EventLog log;
    log.horizon = T_;
    log.model_id = gm_.id;

    const double g = std::max(state_.self_bound.growth,
                              external_active_ ? state_.ext_bound.growth : 0.0);
    const double delta0 = g > 0.0 ? std::min(T_, 1.0 / g) : T_;
    const double delta_min = 1e-12 * std::max(1.0, T_);
    double delta = delta0;
    std::size_t next_ext = 0;
    std::size_t window_candidates = 0;
    std::size_t window_accepted = 0;

    while (state_.t < T_) {
      double window_end = std::min(state_.t + delta, T_);
      const bool ext_pending = next_ext < external.events.size();
      if (ext_pending) {
        window_end = std::min(window_end, external.events[next_ext].t);
      }
      const double bar = dominating_bound(state_, window_end - state_.t);
      const double gap = bar > 0.0 ? exponential_draw(rng_, bar)
                                   : std::numeric_limits<double>::infinity();

      if (state_.t + gap >= window_end) {
        advance_to(window_end);
        if (ext_pending && window_end == external.events[next_ext].t) {
          const auto& e = external.events[next_ext];
          state_.X_ext += gm_.external.jump(e.mark);
          external_events_.push_back(e);
          ++next_ext;
        } else {
          ++stats_.window_expiries;
        }
        continue;
      }

      const double s = state_.t + gap;
      advance_to(s);
      const double lambda = intensity();
      ++stats_.candidates;
      ++window_candidates;
      stats_.max_ratio = std::max(stats_.max_ratio, lambda / bar);
      if (lambda > bar * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "intensity " << lambda << " above majorant " << bar
            << " at t = " << s;
        throw MajorantViolation(msg.str());
      }
      if (uniform01(rng_) * bar <= lambda) {
        const double x = gm_.self.marks.sample(rng_);
        int gen = kUntagged;
        if (options_.tag_generations) gen = draw_generation(s, lambda, log);
        log.events.push_back({s, x, gen, Population::Hawkes});
        state_.X += gm_.self.jump(x);
        ++stats_.accepted;
        ++window_accepted;
        if (log.events.size() > options_.max_events) {
          std::ostringstream msg;
          msg << "more than " << options_.max_events << " events before t = "
              << s;
          throw ExplosionGuard(msg.str());
        }
      }
      if (window_candidates >= options_.acceptance_window) {
        if (static_cast<double>(window_accepted) <
                options_.min_acceptance * static_cast<double>(window_candidates) &&
            delta > delta_min) {
          delta = std::max(0.5 * delta, delta_min);
          ++stats_.halvings;
        }
        window_candidates = 0;
        window_accepted = 0;
      }
    }
    log.generation_overflow = overflow_;
    return log;
  }

  const ThinningStats& stats() const { return stats_; }

 private:
  void advance_to(double s) {
    const double dt = s - state_.t;
    if (dt > 0.0) {
      const double count = state_.X[0];
      state_.X = gm_.self.base.propagator(dt) * state_.X;
      state_.X[0] = count;
      if (external_active_) {
        const double ext_count = state_.X_ext[0];
        state_.X_ext = gm_.external.base.propagator(dt) * state_.X_ext;
        state_.X_ext[0] = ext_count;
      }
    }
    state_.t = s;
  }

  double intensity() const {
    double lambda = gm_.baseline(state_.t) +
                    gm_.self.time_factor.value(state_.t) * state_.X[1];
    if (external_active_) {
      lambda += gm_.external.time_factor.value(state_.t) * state_.X_ext[1];
    }
    return lambda;
  }

  // Parent drawn proportionally to its contribution to the intensity at s.
  int draw_generation(double s, double lambda, const EventLog& log) {
    const double u = uniform01(parent_rng_) * lambda;
    double acc = gm_.baseline(s);
    int gen = 0;
    bool found = u < acc;
    if (!found && external_active_) {
      const double w = gm_.external.time_factor.value(s);
      for (const auto& e : external_events_) {
        acc += w * gm_.external.stack(s - e.t, e.mark)[1];
        if (u < acc) {
          gen = 1;
          found = true;
          break;
        }
      }
    }
    if (!found) {
      const double v = gm_.self.time_factor.value(s);
      const EventRecord* last = nullptr;
      for (const auto& e : log.events) {
        const double contribution = v * gm_.self.stack(s - e.t, e.mark)[1];
        if (contribution > 0.0) last = &e;
        acc += contribution;
        if (u < acc) {
          gen = e.gen + 1;
          found = true;
          break;
        }
      }
      // Rounding can leave u marginally above the accumulated total.
      if (!found) gen = last ? last->gen + 1 : 0;
    }
    if (gen > options_.max_generation) {
      overflow_ = true;
      gen = options_.max_generation + 1;
    }
    return gen;
  }

  const GeneralModel& gm_;
  double T_;
  SimulationOptions options_;
  std::mt19937_64 rng_;
  std::mt19937_64 parent_rng_;
  ThinningState state_;
  ThinningStats stats_;
  bool external_active_ = false;
  bool overflow_ = false;
  std::vector<EventRecord> external_events_;
};

GeneralLogs run_engine(const GeneralModel& gm, double T, std::uint64_t seed,
                       const SimulationOptions& options, ThinningStats* stats) {
  if (!(T > 0.0)) throw InvalidArgument("simulate: horizon must be positive");
  GeneralLogs logs;
  logs.external = simulate_external(gm, T, seed, options.tag_generations);
  ThinningEngine engine(gm, T, seed, options);
  logs.hawkes = engine.run(logs.external);
  logs.hawkes.seed = seed;
  if (stats) *stats += engine.stats();
  return logs;
}

}  // namespace

double dominating_bound(const ThinningState& state, double delta) {
  if (!(delta > 0.0)) delta = 0.0;
  return state.baseline_sup +
         excitation_bound(state.X, state.self_bound, delta) +
         excitation_bound(state.X_ext, state.ext_bound, delta);
}

EventLog simulate_standard(const OdeKernel& k, double mu, double T,
                           std::uint64_t seed, const SimulationOptions& options,
                           ThinningStats* stats) {
  if (!(mu > 0.0)) throw InvalidArgument("simulate_standard: mu must be > 0");
  SimulationOptions opts = options;
  opts.tag_generations = false;
  return run_engine(standard_as_general(k, mu), T, seed, opts, stats).hawkes;
}

EventLog simulate_generations(const OdeKernel& k, double mu, double T,
                              std::uint64_t seed, int max_gen,
                              ThinningStats* stats) {
  if (max_gen < 1) throw InvalidArgument("simulate_generations: max_gen < 1");
  if (!(mu > 0.0)) throw InvalidArgument("simulate_generations: mu must be > 0");
  SimulationOptions opts;
  opts.tag_generations = true;
  opts.max_generation = max_gen;
  return run_engine(standard_as_general(k, mu), T, seed, opts, stats).hawkes;
}

GeneralLogs simulate_general(const GeneralModel& gm, double T,
                             std::uint64_t seed,
                             const SimulationOptions& options,
                             ThinningStats* stats) {
  return run_engine(gm, T, seed, options, stats);
}

// ---------------------------------------------------------------------------

namespace {

void check_agree(double direct, double markov, double t) {
  if (std::abs(direct - markov) > 1e-9 * std::max(1.0, std::abs(direct))) {
    std::ostringstream msg;
    msg << "intensity mismatch at t = " << t << ": direct " << direct
        << " vs propagated " << markov;
    throw Error(msg.str());
  }
}

}  // namespace

std::vector<double> intensity_path(const EventLog& log, const OdeKernel& k,
                                   double mu, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    double direct = mu;
    for (const auto& e : log.events) {
      if (!(e.t < t)) break;
      direct += k(t - e.t);
    }
    MarkovState s = empty_state(k);
    for (const auto& e : log.events) {
      if (!(e.t < t)) break;
      s = apply_jump(propagate_state(s, e.t - s.t, k), k);
    }
    s = propagate_state(s, t - s.t, k);
    const double markov = s.intensity(mu);
    check_agree(direct, markov, t);
    out.push_back(markov);
  }
  return out;
}

namespace {

// State of one population just before t (events strictly earlier).
Vector left_stack(const EventLog& log, const MarkKernel& k, double t) {
  Vector s = Vector::Zero(k.order() + 1);
  double now = 0.0;
  for (const auto& e : log.events) {
    if (!(e.t < t)) break;
    s = k.base.propagator(e.t - now) * s;
    s += k.jump(e.mark);
    now = e.t;
  }
  return k.base.propagator(t - now) * s;
}

double direct_excitation(const EventLog& log, const MarkKernel& k, double t) {
  double sum = 0.0;
  for (const auto& e : log.events) {
    if (!(e.t < t)) break;
    sum += k.stack(t - e.t, e.mark)[1];
  }
  return k.time_factor.value(t) * sum;
}

}  // namespace

std::vector<double> intensity_path(const EventLog& external,
                                   const EventLog& hawkes,
                                   const GeneralModel& gm,
                                   const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const double direct = gm.baseline(t) +
                          direct_excitation(hawkes, gm.self, t) +
                          direct_excitation(external, gm.external, t);
    const double markov =
        gm.baseline(t) +
        gm.self.time_factor.value(t) * left_stack(hawkes, gm.self, t)[1] +
        gm.external.time_factor.value(t) *
            left_stack(external, gm.external, t)[1];
    check_agree(direct, markov, t);
    out.push_back(markov);
  }
  return out;
}

std::vector<double> rescaled_interarrivals(const EventLog& log,
                                           const OdeKernel& k, double mu) {
  std::vector<double> out;
  out.reserve(log.size());
  Vector X = Vector::Zero(k.order() + 1);
  double now = 0.0;
  for (const auto& e : log.events) {
    const double dt = e.t - now;
    const auto [E, I] = expm_with_integral(k.companion(), dt);
    out.push_back(mu * dt + (I * X)[1]);
    X = E * X + k.jump();
    now = e.t;
  }
  return out;
}

std::vector<double> rescaled_interarrivals(const EventLog& external,
                                           const EventLog& hawkes,
                                           const GeneralModel& gm) {
  // Merge both streams; integrate the intensity by Simpson on each
  // event-free segment.
  std::vector<std::pair<double, int>> marks;
  for (std::size_t i = 0; i < external.size(); ++i) {
    marks.push_back({external.events[i].t, -static_cast<int>(i) - 1});
  }
  for (std::size_t i = 0; i < hawkes.size(); ++i) {
    marks.push_back({hawkes.events[i].t, static_cast<int>(i)});
  }
  std::sort(marks.begin(), marks.end());

  Vector S = Vector::Zero(gm.self.order() + 1);
  Vector R = Vector::Zero(gm.external.order() + 1);
  double now = 0.0;
  double acc = 0.0;
  std::vector<double> out;
  for (const auto& [t, idx] : marks) {
    const double dt = t - now;
    if (dt > 0.0) {
      const double t0 = now;
      auto lambda = [&](double u) {
        return gm.baseline(t0 + u) +
               gm.self.time_factor.value(t0 + u) *
                   (gm.self.base.propagator(u) * S)[1] +
               gm.external.time_factor.value(t0 + u) *
                   (gm.external.base.propagator(u) * R)[1];
      };
      const int n = std::max(8, static_cast<int>(std::ceil(dt / 0.01)));
      acc += quad_simpson(lambda, 0.0, dt, n);
      S = gm.self.base.propagator(dt) * S;
      R = gm.external.base.propagator(dt) * R;
      now = t;
    }
    if (idx >= 0) {
      out.push_back(acc);
      acc = 0.0;
      S += gm.self.jump(hawkes.events[static_cast<std::size_t>(idx)].mark);
    } else {
      R += gm.external.jump(
          external.events[static_cast<std::size_t>(-idx - 1)].mark);
    }
  }
  return out;
}

namespace {

std::vector<double> uniforms_below(const std::vector<double>& gaps, double L) {
  std::vector<double> out;
  if (!(L > 0.0)) return out;
  double tau = 0.0;
  for (double g : gaps) {
    tau += g;
    if (tau > L) break;
    out.push_back(tau / L);
  }
  return out;
}

}  // namespace

std::vector<double> rescaled_uniforms(const EventLog& log, const OdeKernel& k,
                                      double mu) {
  return uniforms_below(rescaled_interarrivals(log, k, mu), mu * log.horizon);
}

std::vector<double> rescaled_uniforms(const EventLog& external,
                                      const EventLog& hawkes,
                                      const GeneralModel& gm) {
  const double T = hawkes.horizon;
  const int n = std::max(8, static_cast<int>(std::ceil(T / 1e-3)));
  const double L = quad_simpson([&](double t) { return gm.baseline(t); }, 0.0,
                                T, n);
  return uniforms_below(rescaled_interarrivals(external, hawkes, gm), L);
}

}  // namespace hawkes
