#include "hawkes/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hawkes/errors.hpp"
#include "hawkes/pyramid.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

std::vector<Vector> run_paths(std::size_t n_paths, std::uint64_t seed,
                              unsigned threads, const PathFunction& f) {
  std::vector<Vector> rows(n_paths);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(n_paths, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_paths; i = next++) {
      try {
        rows[i] = f(i, derive_seed(seed, i));
      } catch (const Error&) {
        rows[i] = Vector();
      }
    }
  };
  if (threads <= 1) {
    worker();
    return rows;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return rows;
}

std::vector<McInputs> summarize(const std::vector<Vector>& rows,
                                const std::vector<std::string>& names) {
  const std::size_t k = names.size();
  std::vector<McInputs> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j].name = names[j];
  // Welford in path order.
  std::vector<double> mean(k, 0.0), m2(k, 0.0);
  std::size_t n = 0;
  std::size_t failures = 0;
  for (const auto& r : rows) {
    if (r.size() != static_cast<Eigen::Index>(k)) {
      ++failures;
      continue;
    }
    ++n;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = r[static_cast<Eigen::Index>(j)] - mean[j];
      mean[j] += d / static_cast<double>(n);
      m2[j] += d * (r[static_cast<Eigen::Index>(j)] - mean[j]);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    out[j].n_paths = n;
    out[j].failures = failures;
    out[j].mean = mean[j];
    out[j].variance = n > 1 ? m2[j] / static_cast<double>(n - 1) : 0.0;
    out[j].std_error =
        n > 0 ? std::sqrt(out[j].variance / static_cast<double>(n)) : 0.0;
  }
  return out;
}

std::string statistic_name(const Statistic& s) {
  if (!s.name.empty()) return s.name;
  switch (s.kind) {
    case StatisticKind::Count: return "N_T";
    case StatisticKind::Intensity: return "lambda_T";
    case StatisticKind::CountSquared: return "N_T^2";
    case StatisticKind::IntensitySquared: return "lambda_T^2";
    case StatisticKind::ExpTheta: return "exp(theta.X_T)";
    case StatisticKind::Martingale15: return "martingale_15";
    case StatisticKind::Martingale39: return "martingale_39";
  }
  return "statistic";
}

namespace {

void check_paths(std::size_t n_paths) {
  if (n_paths < 100) throw InvalidArgument("estimate: need at least 100 paths");
}

std::vector<std::string> names_of(const std::vector<Statistic>& stats) {
  std::vector<std::string> names;
  for (const auto& s : stats) names.push_back(statistic_name(s));
  return names;
}

double time_of(const Statistic& s, double T) {
  return std::isnan(s.at) ? T : s.at;
}

}  // namespace

std::vector<McInputs> estimate(const OdeKernel& k, double mu,
                               const std::vector<Statistic>& stats, double T,
                               std::size_t n_paths, std::uint64_t seed,
                               unsigned threads) {
  check_paths(n_paths);
  for (const auto& s : stats) {
    if (s.kind == StatisticKind::Martingale39) {
      throw InvalidArgument("estimate: martingale_39 needs a general model");
    }
    if (s.kind == StatisticKind::Martingale15 && !s.path) {
      throw InvalidArgument("estimate: martingale_15 needs an exponent path");
    }
  }
  auto f = [&](std::size_t, std::uint64_t path_seed) -> Vector {
    const EventLog log = simulate_standard(k, mu, T, path_seed);
    Vector row(static_cast<Eigen::Index>(stats.size()));
    for (std::size_t j = 0; j < stats.size(); ++j) {
      const Statistic& s = stats[j];
      const double t = time_of(s, T);
      double value = 0.0;
      switch (s.kind) {
        case StatisticKind::Count:
        case StatisticKind::CountSquared: {
          const double n = static_cast<double>(log.count_until(t));
          value = s.kind == StatisticKind::Count ? n : n * n;
          break;
        }
        case StatisticKind::Intensity:
        case StatisticKind::IntensitySquared: {
          const double lam = markov_state_at(log, k, t).intensity(mu);
          value = s.kind == StatisticKind::Intensity ? lam : lam * lam;
          break;
        }
        case StatisticKind::ExpTheta:
          value = std::exp(s.theta.dot(markov_state_at(log, k, t).X));
          break;
        case StatisticKind::Martingale15:
          value = martingale_standard(log, k, mu, *s.path, t);
          break;
        case StatisticKind::Martingale39:
          break;
      }
      row[static_cast<Eigen::Index>(j)] = value;
    }
    return row;
  };
  return summarize(run_paths(n_paths, seed, threads, f), names_of(stats));
}

std::vector<McInputs> estimate_general(const GeneralModel& gm,
                                       const std::vector<Statistic>& stats,
                                       double T, std::size_t n_paths,
                                       std::uint64_t seed, unsigned threads) {
  check_paths(n_paths);
  for (const auto& s : stats) {
    if (s.kind == StatisticKind::Martingale15) {
      throw InvalidArgument("estimate_general: use martingale_39");
    }
    if (s.kind == StatisticKind::Martingale39 && !s.path) {
      throw InvalidArgument("estimate_general: martingale_39 needs a path");
    }
  }
  auto f = [&](std::size_t, std::uint64_t path_seed) -> Vector {
    const GeneralLogs logs = simulate_general(gm, T, path_seed);
    Vector row(static_cast<Eigen::Index>(stats.size()));
    for (std::size_t j = 0; j < stats.size(); ++j) {
      const Statistic& s = stats[j];
      const double t = time_of(s, T);
      double value = 0.0;
      switch (s.kind) {
        case StatisticKind::Count:
        case StatisticKind::CountSquared: {
          const double n = static_cast<double>(logs.hawkes.count_until(t));
          value = s.kind == StatisticKind::Count ? n : n * n;
          break;
        }
        case StatisticKind::Intensity:
        case StatisticKind::IntensitySquared: {
          const double lam =
              matrix_state_direct(logs.external, logs.hawkes, gm, t)
                  .intensity(gm.baseline(t));
          value = s.kind == StatisticKind::Intensity ? lam : lam * lam;
          break;
        }
        case StatisticKind::ExpTheta: {
          const MatrixState ms =
              matrix_state_direct(logs.external, logs.hawkes, gm, t);
          double e = 0.0;
          if (s.U.size() > 0) e += s.U.cwiseProduct(ms.M1).sum();
          if (s.V.size() > 0) e += s.V.cwiseProduct(ms.M2).sum();
          value = std::exp(e);
          break;
        }
        case StatisticKind::Martingale39:
          value = martingale_general(logs.external, logs.hawkes, gm, *s.path, t);
          break;
        case StatisticKind::Martingale15:
          break;
      }
      row[static_cast<Eigen::Index>(j)] = value;
    }
    return row;
  };
  return summarize(run_paths(n_paths, seed, threads, f), names_of(stats));
}

McReport compare(double analytic, const McInputs& inputs, double z_max) {
  if (!(inputs.std_error > 0.0)) {
    throw ZeroVariance("compare: zero standard error for " + inputs.name);
  }
  McReport r;
  r.quantity = inputs.name;
  r.analytic = analytic;
  r.empirical = inputs.mean;
  r.std_error = inputs.std_error;
  r.n_paths = inputs.n_paths;
  r.z = (inputs.mean - analytic) / inputs.std_error;
  r.pass = std::abs(r.z) <= z_max;
  return r;
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double x = (rn + 0.12 + 0.11 / rn) * d;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

void write_report_json(std::ostream& out,
                       const std::vector<McReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"quantity", r.quantity},
                   {"analytic", r.analytic},
                   {"empirical", r.empirical},
                   {"std_error", r.std_error},
                   {"n_paths", r.n_paths},
                   {"z", r.z},
                   {"pass", r.pass}});
  }
  out << arr.dump(2) << '\n';
}

void write_report_csv(std::ostream& out,
                      const std::vector<McReport>& reports) {
  out << "quantity,analytic,empirical,std_error,n_paths,z,pass\n";
  std::ostringstream line;
  for (const auto& r : reports) {
    line.str("");
    line.precision(17);
    line << r.quantity << ',' << r.analytic << ',' << r.empirical << ','
         << r.std_error << ',' << r.n_paths << ',' << r.z << ','
         << (r.pass ? "true" : "false") << '\n';
    out << line.str();
  }
}

}  // namespace hawkes
