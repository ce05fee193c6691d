#ifndef MSD_SOLVER_HPP
#define MSD_SOLVER_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace msd {

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

struct BinaryVariable {
  std::string name;
  double objective = 0.0;
  // Branching considers the highest priority class with a fractional value
  // first; within a class the most fractional variable wins.
  int branch_priority = 0;
  std::uint8_t lower = 0;
  std::uint8_t upper = 1;
};

// A pure 0-1 linear program.
class BipModel {
 public:
  explicit BipModel(Sense sense = Sense::kMaximize, std::string name = {})
      : sense_(sense), name_(std::move(name)) {}

  int add_variable(std::string name, double objective = 0.0, int branch_priority = 0);
  void set_objective(int var, double coef);
  void fix(int var, bool value);
  int add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name = {});

  // Optional starting incumbent; ignored if it violates the model.
  void set_hint(std::vector<std::uint8_t> assignment) { hint_ = std::move(assignment); }

  Sense sense() const { return sense_; }
  const std::string& name() const { return name_; }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const std::vector<BinaryVariable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<std::uint8_t>& hint() const { return hint_; }

  double objective_value(std::span<const std::uint8_t> assignment) const;

 private:
  Sense sense_;
  std::string name_;
  std::vector<BinaryVariable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<std::uint8_t> hint_;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kLimitReached };

const char* to_string(SolveStatus status);

struct SolveLimits {
  double time_seconds = std::numeric_limits<double>::infinity();
  long max_nodes = 2'000'000;
  // Stop early once the relative gap drops to this value (status kFeasible).
  double relative_gap = 0.0;
};

struct BipSolution {
  std::vector<std::uint8_t> assignment;
  bool found = false;  // an incumbent exists
  double objective_value = 0.0;
  double bound = 0.0;  // dual bound in the model's own sense
  double gap = 0.0;    // |bound - objective| / |objective|, 0 when optimal
  SolveStatus status = SolveStatus::kInfeasible;
  long nodes = 0;
  long lp_pivots = 0;

  bool has_incumbent() const { return found; }
  bool value(int var) const { return assignment[var] != 0; }
};

// Best-first branch and bound with LP relaxation bounds. Deterministic for
// a given model and node limit. Throws InternalError if the incumbent ever
// fails the independent constraint check.
BipSolution solve_bip(const BipModel& model, const SolveLimits& limits = {});

// Independent feasibility check of a 0-1 assignment against every row and
// variable bound. Returns an empty string when feasible, else a reason.
std::string check_assignment(const BipModel& model, std::span<const std::uint8_t> assignment,
                             double tolerance = 1e-6);

// CPLEX-LP-style text dump for cross-checking with external solvers.
void write_lp(const BipModel& model, std::ostream& out);

}  // namespace msd

#endif  // MSD_SOLVER_HPP
