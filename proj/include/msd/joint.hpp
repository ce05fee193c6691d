#ifndef MSD_JOINT_HPP
#define MSD_JOINT_HPP

#include <span>
#include <string>
#include <vector>

#include "msd/coverage.hpp"
#include "msd/deployment.hpp"
#include "msd/fleet.hpp"
#include "msd/instance.hpp"
#include "msd/solver.hpp"

namespace msd {

// One line's chains re-formed together with the choice of which buses
// carry sensors.
struct LowerResult {
  int line_id = 0;
  int sensors = 0;                 // m_l
  std::vector<TripChain> chains;   // exactly min_fleet, instrumented first
  double phi = 0.0;                // Phi_l
  PairSet covered;                 // support of q for this m_l
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
  long nodes = 0;
};

// Chain slots c < sensors carry a sensor; each slot starts with a depot
// pull-out and ends with a pull-in, and connections use only graph arcs.
// Throws ArgumentError if sensors is outside [0, min_fleet] and
// InternalError if the arcs cannot realize min_fleet chains.
LowerResult solve_lower(const Line& line, int sensors, const TripPairGraph& graph, int min_fleet,
                        const Instance& inst, const CoverageTensor& tensor, const PipelineOptions& options = {});

// Empty when the chains partition the line's trips into min_fleet
// time-ordered chains along graph arcs with at most `sensors` instrumented.
std::string check_lower(const LowerResult& result, const Line& line, const TripPairGraph& graph, int min_fleet);

struct SaturationProfile {
  int line_id = 0;
  int saturation = 0;                // K_l
  std::vector<LowerResult> results;  // m = 0..K_l
  std::vector<double> phi;           // every probed m, starting at 0
  bool exhaustive = false;
};

// Raises m from 1 while Phi_l keeps improving; K_l is the last improving m,
// at most min_fleet. With options.saturation_exhaustive every m up to
// min_fleet is probed and K_l is the first m reaching the best value.
SaturationProfile compute_saturation(const Line& line, const Instance& inst, const TripPairGraph& graph,
                                     int min_fleet, const CoverageTensor& tensor,
                                     const PipelineOptions& options = {});

struct UpperResult {
  std::vector<int> sensors;  // m_l in profile order
  double phi = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
  long nodes = 0;
};

// Splits the budget across lines, choosing one saturation level per line.
UpperResult solve_upper(std::span<const SaturationProfile> profiles, const Instance& inst, int sensors,
                        const PipelineOptions& options = {});

// Line selection, then per line (in parallel) fleet size, idle-time cap,
// feasible pairs and saturation profile, then the budget split.
Deployment run_joint(const Instance& inst, int sensors, const PipelineOptions& options = {});

}  // namespace msd

#endif  // MSD_JOINT_HPP
