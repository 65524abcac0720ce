#pragma once

// Configuration-driven commands behind the `gclab` executable. Each command
// reads a JSON document of the form {"<command>": {...}}, writes its
// artifacts into an output directory and returns a process exit code.

#include "gclab/eigensys.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gclab {

enum class ExitCode : int {
  success = 0,
  check_failed = 1,   ///< tolerance breach, non-convergence, failed instance
  config_error = 2,   ///< unreadable or invalid configuration, unwritable output
  range_error = 3,    ///< floating-point range exceeded (weight overflow)
  empty_sigma = 4,    ///< localization set has no grid nodes
  rim_adjacent = 5,   ///< maximum of phi sits next to the rim of the set
};

struct CommandRequest {
  std::string command;
  std::string config_text;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
};

std::vector<std::string> command_names();

/// Runs one command. Progress and errors go to `log`; artifacts are written
/// even when the exit code is non-zero.
int run_command(const CommandRequest& request, std::ostream& log);

/// Random symmetric matrix Q diag(lambda) Q^T with Q Haar-orthogonal and
/// eigenvalues in [-2, 2] whose smallest spacing is exactly `gap_min`.
SymMatrix random_symmetric(int n, double gap_min, std::mt19937_64& rng);

struct EigenCheckConfig {
  std::vector<int> dimensions{2, 3, 4, 5};
  int matrices = 100;
  double gap_min = 0.5;
  double h = 1e-5;
  double first_tolerance = 1e-6;
  double second_tolerance = 1e-4;
  std::uint64_t seed = 0;
};

struct EigenCheckCase {
  int n = 0;
  int sample = 0;
  int k = 0;
  double first = 0.0;
  double second = 0.0;
  bool degenerate = false;
  std::string error;
  Eigen::MatrixXd w;
};

struct EigenCheckDimension {
  int n = 0;
  int cases = 0;
  int degenerate = 0;
  double max_first = 0.0;
  double max_second = 0.0;
};

struct EigenCheckSummary {
  std::vector<EigenCheckDimension> dimensions;
  double max_first = 0.0;
  double max_second = 0.0;
  int cases = 0;
  int degenerate_cases = 0;
  bool passed = false;
  /// The first degenerate case, else the case closest to (or furthest past)
  /// its tolerance.
  std::optional<EigenCheckCase> worst;
};

/// Formula-versus-oracle comparison for every eigenvalue index of every
/// generated matrix.
EigenCheckSummary eigen_check(const EigenCheckConfig& config);

}  // namespace gclab
