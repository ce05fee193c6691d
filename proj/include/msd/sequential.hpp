#ifndef MSD_SEQUENTIAL_HPP
#define MSD_SEQUENTIAL_HPP

#include <span>
#include <vector>

#include "msd/coverage.hpp"
#include "msd/deployment.hpp"
#include "msd/fleet.hpp"
#include "msd/instance.hpp"
#include "msd/solver.hpp"

namespace msd {

struct AllocationResult {
  std::vector<int> instrumented;     // indices into the chain list, ascending
  double phi = 0.0;
  std::vector<PairSet> contributions;  // coverage of each chain
  bool exact = true;
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
  long nodes = 0;
};

// Coverage of every chain, computed on `jobs` threads.
std::vector<PairSet> chain_coverage(std::span<const TripChain> chains, const CoverageTensor& tensor, int jobs = 1);

// Maximum weighted coverage with at most `sensors` chains, solved as a 0-1
// program over the chain indicators and the (g, t) pairs some chain covers.
AllocationResult allocate_exact(std::span<const TripChain> chains, const Instance& inst, int sensors,
                                const PipelineOptions& options = {});
AllocationResult allocate_exact(std::span<const PairSet> coverage, const Instance& inst, int sensors,
                                const PipelineOptions& options = {});

// Largest marginal gain first, ties to the lowest index; stops early once
// no chain adds anything.
AllocationResult allocate_greedy(std::span<const TripChain> chains, const Instance& inst, int sensors);
AllocationResult allocate_greedy(std::span<const PairSet> coverage, const Instance& inst, int sensors);

// Line selection, per-line minimum fleet, then allocation over the pooled
// chains of all selected lines.
Deployment run_sequential(const Instance& inst, int sensors, const PipelineOptions& options = {});

}  // namespace msd

#endif  // MSD_SEQUENTIAL_HPP
