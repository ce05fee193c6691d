#ifndef MSD_DEPLOYMENT_HPP
#define MSD_DEPLOYMENT_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msd/coverage.hpp"
#include "msd/fleet.hpp"
#include "msd/instance.hpp"
#include "msd/select.hpp"
#include "msd/solver.hpp"

namespace msd {

enum class AllocationMode { kAuto, kExact, kGreedy };

// Idle-time cap for the joint lower level: the bisection result, the
// bisection's starting value, or no cap at all.
enum class DeltaPolicy { kSearch, kStart, kNone };

struct PipelineOptions {
  int jobs = 1;
  SolveLimits limits;
  AllocationMode mode = AllocationMode::kAuto;
  // Auto mode runs the exact allocation up to these sizes, greedy beyond.
  std::size_t exact_max_chains = 500;
  std::size_t exact_max_pairs = 50'000;
  // Joint approach idle-time cap. A fixed value overrides the policy.
  DeltaPolicy delta_policy = DeltaPolicy::kSearch;
  std::optional<Minutes> fixed_delta;
  int delta_iterations = 10;
  // Probe every sensor count up to the fleet size instead of stopping at
  // the first non-improving one.
  bool saturation_exhaustive = false;
  // Receives every 0-1 program before it is solved. Must be thread-safe
  // when jobs > 1.
  std::function<void(const BipModel&)> model_sink;
};

struct SolveRecord {
  std::string stage;
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
  long nodes = 0;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Per-line outcome of either approach.
struct LinePlan {
  int line_id = 0;
  int min_fleet = 0;
  std::optional<Minutes> delta;     // idle-time cap used (joint)
  std::size_t feasible_pairs = 0;   // |Omega_FTP| of the graph used
  std::vector<TripChain> chains;
  int sensors = 0;                  // m_l
  int saturation = -1;              // K_l, joint only
  double phi_line = 0.0;            // Phi_l of the instrumented chains
  std::vector<double> phi_by_sensors;  // Phi_l(m), m = 0.. (joint)
};

struct Deployment {
  std::string approach;  // "sequential" or "joint"
  int sensor_budget = 0;
  std::string allocation = "exact";
  LineSelection selection;
  std::vector<LinePlan> lines;
  double phi = 0.0;
  int covered_pairs = 0;
  int total_pairs = 0;
  int completely_covered = 0;
  std::vector<SolveRecord> solves;
  std::vector<StageTiming> timings;
  std::string fingerprint;

  std::vector<int> instrumented_trips() const;
  int instrumented_chains() const;
  // Worst solver outcome across all recorded solves.
  bool all_optimal() const;
  double max_gap() const;
};

// Fills phi and the coverage summary from the instrumented chains.
void finalize_coverage(Deployment& deployment, const Instance& inst);

// Deterministic JSON; timings are emitted only when requested, so equal
// inputs produce byte-identical files by default.
std::string deployment_to_json(const Deployment& deployment, bool include_timings = false);
Deployment deployment_from_json(const std::string& text);

// 64-bit FNV-1a over the canonical instance text and a config string.
std::string fingerprint(const Instance& inst, const std::string& config);

}  // namespace msd

#endif  // MSD_DEPLOYMENT_HPP
