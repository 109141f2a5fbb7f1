#include "hawkes/pyramid.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "hawkes/errors.hpp"

namespace hawkes {

AgePyramid pyramid_at(const EventLog& log, double t) {
  if (t < 0.0) throw InvalidArgument("pyramid_at: negative time");
  AgePyramid p;
  p.time = t;
  if (!log.events.empty()) p.pop = log.events.front().pop;
  for (const auto& e : log.events) {
    if (e.t > t) break;
    p.atoms.push_back({t - e.t, e.mark});
  }
  return p;
}

void write_pyramid_csv(std::ostream& out, const AgePyramid& pyramid,
                       double age_bin, std::optional<double> mark_bin) {
  if (!(age_bin > 0.0) || (mark_bin && !(*mark_bin > 0.0))) {
    throw InvalidArgument("pyramid export: bin widths must be positive");
  }
  std::map<std::pair<long long, long long>, std::size_t> bins;
  for (const auto& atom : pyramid.atoms) {
    const auto a = static_cast<long long>(std::floor(atom.age / age_bin));
    const auto x =
        mark_bin ? static_cast<long long>(std::floor(atom.mark / *mark_bin)) : 0;
    ++bins[{a, x}];
  }
  std::ostringstream buf;
  buf.precision(17);
  buf << (mark_bin ? "age_bin_left,mark_bin_left,count\n"
                   : "age_bin_left,count\n");
  for (const auto& [key, count] : bins) {
    buf << static_cast<double>(key.first) * age_bin << ',';
    if (mark_bin) buf << static_cast<double>(key.second) * *mark_bin << ',';
    buf << count << '\n';
  }
  out << buf.str();
}

MarkovState empty_state(const OdeKernel& k) {
  return {0.0, Vector::Zero(k.order() + 1)};
}

MarkovState propagate_state(const MarkovState& s, double dt,
                            const OdeKernel& k) {
  if (dt < 0.0) throw InvalidArgument("propagate_state: negative dt");
  MarkovState out{s.t + dt, k.propagator(dt) * s.X};
  // The first companion row is zero, so the count never drifts.
  out.X[0] = s.X[0];
  return out;
}

MarkovState apply_jump(const MarkovState& s, const OdeKernel& k) {
  return {s.t, s.X + k.jump()};
}

MarkovState markov_state_at(const EventLog& log, const OdeKernel& k,
                            double t) {
  MarkovState s = empty_state(k);
  for (const auto& e : log.events) {
    if (e.t > t) break;
    s = apply_jump(propagate_state(s, e.t - s.t, k), k);
  }
  return propagate_state(s, t - s.t, k);
}

Vector markov_state_direct(const EventLog& log, const OdeKernel& k, double t) {
  Vector x = Vector::Zero(k.order() + 1);
  for (const auto& e : log.events) {
    if (e.t > t) break;
    x += k.stack(t - e.t);
  }
  return x;
}

namespace {

Matrix direct_population(const EventLog& log, const MarkKernel& k, double t) {
  Vector s = Vector::Zero(k.order() + 1);
  for (const auto& e : log.events) {
    if (e.t > t) break;
    s += k.stack(t - e.t, e.mark);
  }
  return s * k.time_factor.stack_at(t).transpose();
}

Matrix propagated_population(const EventLog& log, const MarkKernel& k,
                             double t) {
  const Matrix& C = k.base.companion();
  Matrix M = Matrix::Zero(k.order() + 1, k.time_factor.order() + 1);
  double now = 0.0;
  auto advance = [&](double to) {
    if (to > now) {
      M = expm((to - now) * C) * M *
          k.time_factor.transition(now, to).transpose();
      now = to;
    }
  };
  for (const auto& e : log.events) {
    if (e.t > t) break;
    advance(e.t);
    M += k.jump(e.mark) * k.time_factor.stack_at(e.t).transpose();
  }
  advance(t);
  return M;
}

}  // namespace

MatrixState matrix_state_direct(const EventLog& external,
                                const EventLog& hawkes, const GeneralModel& gm,
                                double t) {
  return {t, direct_population(external, gm.external, t),
          direct_population(hawkes, gm.self, t)};
}

MatrixState matrix_state_propagated(const EventLog& external,
                                    const EventLog& hawkes,
                                    const GeneralModel& gm, double t) {
  return {t, propagated_population(external, gm.external, t),
          propagated_population(hawkes, gm.self, t)};
}

double relative_gap(const Matrix& a, const Matrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() /
         std::max(1.0, a.cwiseAbs().maxCoeff());
}

MatrixState matrix_state_at(const EventLog& external, const EventLog& hawkes,
                            const GeneralModel& gm, double t,
                            double tolerance) {
  MatrixState direct = matrix_state_direct(external, hawkes, gm, t);
  const MatrixState prop = matrix_state_propagated(external, hawkes, gm, t);
  const double gap = std::max(relative_gap(direct.M1, prop.M1),
                              relative_gap(direct.M2, prop.M2));
  if (!(gap <= tolerance)) {
    std::ostringstream msg;
    msg << "matrix state: direct and propagated states differ by " << gap;
    throw Error(msg.str());
  }
  return direct;
}

}  // namespace hawkes
