#ifndef MSD_SELECT_HPP
#define MSD_SELECT_HPP

#include <vector>

#include "msd/instance.hpp"
#include "msd/solver.hpp"

namespace msd {

struct LineSelection {
  std::vector<int> chosen;         // line ids, ascending
  std::vector<int> covered_grids;  // grid ids touched by a chosen line
  int coverable_total = 0;         // N_G
  int required = 0;                // grids that had to be covered
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
};

// Minimum-cardinality set cover of every coverable grid (gamma = 1).
LineSelection select_lines_full(const Instance& inst, const SolveLimits& limits = {});

// Minimum line set covering at least ceil(gamma * N_G) grids, gamma in (0, 1].
LineSelection select_lines_partial(const Instance& inst, double gamma, const SolveLimits& limits = {});

// Dispatches on inst.gamma.
LineSelection select_lines(const Instance& inst, const SolveLimits& limits = {});

// Lines sorted ascending by id keep a tiny preference over later lines so
// that equal-cardinality covers resolve deterministically. The total bonus
// of any set stays below 1/2, so cardinality always dominates.
double line_preference(int position, int num_lines);

}  // namespace msd

#endif  // MSD_SELECT_HPP
