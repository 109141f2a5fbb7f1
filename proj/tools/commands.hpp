#ifndef HAWKES_TOOLS_COMMANDS_HPP
#define HAWKES_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace hawkes::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kBlowUp = 2,
  kValidationFailure = 3,
};

struct RunOptions {
  unsigned threads = 0;
  std::filesystem::path output_dir;
  std::ostream* log = nullptr;
};

/// Files written by one subcommand; `finish` adds manifest.json with the
/// sha-256 of every file.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir);

  /// Opens `name` under the output directory and records it.
  std::ofstream open(const std::string& name);
  void finish();

  const std::filesystem::path& directory() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string sha256_file(const std::filesystem::path& path);

int run_simulate(const ExperimentConfig& config, const RunOptions& options);
int run_moments(const ExperimentConfig& config, const RunOptions& options);
int run_laplace(const ExperimentConfig& config, const RunOptions& options);
int run_validate(const ExperimentConfig& config, const RunOptions& options);
int run_powerlaw(const ExperimentConfig& config, const RunOptions& options);

/// Dispatches a subcommand by name and maps exceptions to exit codes.
int run(const std::string& subcommand, const ExperimentConfig& config,
        const RunOptions& options);

}  // namespace hawkes::cli

#endif  // HAWKES_TOOLS_COMMANDS_HPP
