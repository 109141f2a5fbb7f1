#ifndef HAWKES_MC_HARNESS_HPP
#define HAWKES_MC_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hawkes/general_model.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/laplace.hpp"

namespace hawkes {

/// Sample summary of one per-path statistic.
struct McInputs {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t failures = 0;
};

struct McReport {
  std::string quantity;
  double analytic = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double z = 0.0;
  bool pass = false;
};

/// Evaluates `f(index, seed)` for every path with seed derive_seed(seed,
/// index) on up to `threads` workers (0 = hardware concurrency). Rows are
/// stored by path index, so the result does not depend on scheduling. A
/// path whose evaluation throws hawkes::Error yields an empty row.
using PathFunction = std::function<Vector(std::size_t, std::uint64_t)>;
std::vector<Vector> run_paths(std::size_t n_paths, std::uint64_t seed,
                              unsigned threads, const PathFunction& f);

/// Column summaries in index order; empty rows count as failures.
std::vector<McInputs> summarize(const std::vector<Vector>& rows,
                                const std::vector<std::string>& names);

enum class StatisticKind {
  Count,
  Intensity,
  CountSquared,
  IntensitySquared,
  ExpTheta,
  Martingale15,
  Martingale39,
};

struct Statistic {
  StatisticKind kind = StatisticKind::Count;
  std::string name;
  /// Standard model: exp(theta . X_T).
  Vector theta;
  /// General model: exp(<U, M1_T> + <V, M2_T>).
  Matrix U;
  Matrix V;
  /// Exponent path for the martingale statistics.
  const RiccatiPath* path = nullptr;
  /// Evaluation time; NaN means the horizon.
  double at = std::numeric_limits<double>::quiet_NaN();
};

std::string statistic_name(const Statistic& s);

std::vector<McInputs> estimate(const OdeKernel& k, double mu,
                               const std::vector<Statistic>& stats, double T,
                               std::size_t n_paths, std::uint64_t seed,
                               unsigned threads = 0);

/// Count and Intensity refer to the Hawkes population N^(2).
std::vector<McInputs> estimate_general(const GeneralModel& gm,
                                       const std::vector<Statistic>& stats,
                                       double T, std::size_t n_paths,
                                       std::uint64_t seed,
                                       unsigned threads = 0);

inline constexpr double kDefaultZMax = 4.0;

/// z = (empirical - analytic) / SE. Throws ZeroVariance when SE = 0.
McReport compare(double analytic, const McInputs& inputs,
                 double z_max = kDefaultZMax);

/// sup |F_n - F| of the sample against `cdf`.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);
/// P(D_n >= d) from the Kolmogorov limit law with Stephens' small-sample
/// correction.
double kolmogorov_pvalue(double d, std::size_t n);

void write_report_json(std::ostream& out, const std::vector<McReport>& reports);
void write_report_csv(std::ostream& out, const std::vector<McReport>& reports);

}  // namespace hawkes

#endif  // HAWKES_MC_HARNESS_HPP
