#ifndef MSD_SRC_SIMPLEX_HPP
#define MSD_SRC_SIMPLEX_HPP

#include <vector>

namespace msd::detail {

enum class RowSense { kLe, kEq, kGe };

// Dense LP  min c.y  s.t.  A y (<=,=,>=) b,  0 <= y <= u.
struct DenseLp {
  int num_vars = 0;
  std::vector<double> cost;
  std::vector<double> upper;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
};

enum class LpStatus { kOptimal, kInfeasible };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> values;
  long pivots = 0;
};

// Two-phase bounded-variable primal simplex on a dense tableau. Nonbasic
// variables at their upper bound are handled by complementing the column,
// so the tableau only ever sees nonbasics at zero. Dantzig pricing with a
// fallback to Bland's rule after a run of degenerate pivots.
LpResult solve_lp(const DenseLp& lp);

}  // namespace msd::detail

#endif  // MSD_SRC_SIMPLEX_HPP
