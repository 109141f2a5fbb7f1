#ifndef HAWKES_TOOLS_CONFIG_HPP
#define HAWKES_TOOLS_CONFIG_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes/general_model.hpp"
#include "hawkes/kernels.hpp"

namespace hawkes::cli {

/// Config error; the message starts with "line N:" when a location is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string family;
  std::vector<double> params;
  std::vector<double> c;
  std::vector<double> m;
  double scale = 1.0;
  bool operator==(const KernelSpec&) const = default;
};

struct FactorSpec {
  std::string family = "constant";
  std::vector<double> params{1.0};
  std::vector<std::vector<double>> d;
  std::vector<double> init;
  bool operator==(const FactorSpec&) const = default;
};

struct MarkSpec {
  std::string family = "point_mass";
  std::vector<double> params{1.0};
  std::vector<double> values;
  std::vector<double> probs;
  bool operator==(const MarkSpec&) const = default;
};

struct RateSpec {
  double scale = 0.0;
  FactorSpec factor;
  bool operator==(const RateSpec&) const = default;
};

struct PopulationSpec {
  std::optional<KernelSpec> kernel;
  std::string init = "constant";
  FactorSpec factor;
  MarkSpec marks;
  bool operator==(const PopulationSpec&) const = default;
};

struct GeneralSpec {
  RateSpec baseline{1.0, {}};
  RateSpec external_rate;
  PopulationSpec self;
  std::optional<PopulationSpec> external;
  bool operator==(const GeneralSpec&) const = default;
};

struct ModelSpec {
  KernelSpec kernel;
  double mu = 1.0;
  std::optional<GeneralSpec> general;
  bool operator==(const ModelSpec&) const = default;
};

struct RunSpec {
  double T = 1.0;
  std::uint64_t n_paths = 100000;
  std::uint64_t martingale_paths = 10000;
  std::uint64_t seed = 42;
  double grid_step = 0.01;
  std::uint64_t sample_paths = 1;
  bool operator==(const RunSpec&) const = default;
};

struct GeneralQuery {
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
  double count = 0.0;
  bool operator==(const GeneralQuery&) const = default;
};

struct QuerySpec {
  std::vector<double> moments_grid;
  std::vector<std::array<double, 2>> laplace;
  std::vector<GeneralQuery> general_laplace;
  bool operator==(const QuerySpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  ModelSpec model;
  RunSpec run;
  QuerySpec query;
  OutputSpec output;
  bool operator==(const ExperimentConfig&) const = default;

  bool is_general() const { return model.general.has_value(); }
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Normalized YAML; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

OdeKernel build_kernel(const KernelSpec& spec);
TimeFactor build_factor(const FactorSpec& spec, double horizon);
MarkDistribution build_marks(const MarkSpec& spec);
GeneralModel build_general_model(const ExperimentConfig& config);

}  // namespace hawkes::cli

#endif  // HAWKES_TOOLS_CONFIG_HPP
