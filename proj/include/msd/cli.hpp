#ifndef MSD_CLI_HPP
#define MSD_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msd/deployment.hpp"
#include "msd/instance.hpp"

namespace msd {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitLimit = 4,
  kExitInternal = 5,
};

struct RunConfig {
  std::string command;  // validate, gen, select, fleet, solve-seq, solve-joint, sweep, report
  std::filesystem::path instance;
  std::filesystem::path output;        // stdout when empty
  std::filesystem::path coverage_csv;  // per-grid coverage of the deployment
  std::filesystem::path lines_csv;     // sweep: per-line reward by sensor count
  std::filesystem::path selection;     // fleet: restrict to these lines
  std::filesystem::path deployment;    // report input
  std::filesystem::path compare;       // report: second deployment
  std::filesystem::path dump_models;   // directory for .lp files

  std::optional<int> sensors;  // defaults to the instance's budget
  int sweep_from = 1;
  int sweep_to = 1;
  std::string approach = "both";  // sweep: seq, joint or both
  std::optional<double> gamma;
  std::optional<Minutes> interval;  // re-discretize the horizon

  AllocationMode mode = AllocationMode::kAuto;
  DeltaPolicy delta_policy = DeltaPolicy::kSearch;
  std::optional<Minutes> fixed_delta;
  bool saturation_exhaustive = false;
  bool timings = false;
  int jobs = 1;
  SolveLimits limits;

  SyntheticParams generator;
};

// Runs one subcommand; diagnostics go to `err`, and to `out` whatever has
// no output path.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses arguments (without the program name) and executes them.
int run_command_line(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Replaces the sensing intervals by equal slots of `minutes` with uniform
// weights. Throws ArgumentError unless the length divides the horizon.
Instance with_interval_length(const Instance& inst, Minutes minutes);

}  // namespace msd

#endif  // MSD_CLI_HPP
