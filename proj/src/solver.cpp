#include "msd/solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include "msd/error.hpp"
#include "simplex.hpp"

namespace msd {

int BipModel::add_variable(std::string name, double objective, int branch_priority) {
  variables_.push_back({std::move(name), objective, branch_priority, 0, 1});
  return static_cast<int>(variables_.size()) - 1;
}

void BipModel::set_objective(int var, double coef) {
  variables_.at(var).objective = coef;
}

void BipModel::fix(int var, bool value) {
  auto& v = variables_.at(var);
  v.lower = v.upper = value ? 1 : 0;
}

int BipModel::add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) throw ArgumentError("constraint references unknown variable");
    if (!std::isfinite(t.coef)) throw ArgumentError("non-finite constraint coefficient");
  }
  if (!std::isfinite(rhs)) throw ArgumentError("non-finite right-hand side");
  constraints_.push_back({std::move(terms), relation, rhs, std::move(name)});
  return static_cast<int>(constraints_.size()) - 1;
}

double BipModel::objective_value(std::span<const std::uint8_t> assignment) const {
  double value = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    if (assignment[j]) value += variables_[j].objective;
  }
  return value;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kLimitReached: return "limit-reached";
  }
  return "unknown";
}

std::string check_assignment(const BipModel& model, std::span<const std::uint8_t> assignment, double tolerance) {
  if (static_cast<int>(assignment.size()) != model.num_variables()) return "assignment size mismatch";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (assignment[j] > 1) return "non-binary value for " + v.name;
    if (assignment[j] < v.lower || assignment[j] > v.upper) return "bound violated for " + v.name;
  }
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& row = model.constraints()[i];
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += assignment[t.var] ? t.coef : 0.0;
    bool ok = true;
    switch (row.relation) {
      case Relation::kLessEqual: ok = lhs <= row.rhs + tolerance; break;
      case Relation::kGreaterEqual: ok = lhs >= row.rhs - tolerance; break;
      case Relation::kEqual: ok = std::abs(lhs - row.rhs) <= tolerance; break;
    }
    if (!ok) return "constraint " + (row.name.empty() ? std::to_string(i) : row.name) + " violated";
  }
  return {};
}

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kRowTol = 1e-9;

struct CanonicalRow {
  std::vector<Term> terms;
  Relation relation;
  double rhs;
};

// Merges repeated variables, drops zero coefficients and removes exact
// duplicate rows.
std::vector<CanonicalRow> canonical_rows(const BipModel& model) {
  std::vector<CanonicalRow> rows;
  std::set<std::tuple<std::vector<std::pair<int, double>>, int, double>> seen;
  for (const auto& c : model.constraints()) {
    std::map<int, double> merged;
    for (const auto& t : c.terms) merged[t.var] += t.coef;
    std::vector<std::pair<int, double>> key;
    CanonicalRow row{{}, c.relation, c.rhs};
    for (const auto& [var, coef] : merged) {
      if (coef == 0.0) continue;
      row.terms.push_back({var, coef});
      key.emplace_back(var, coef);
    }
    if (!seen.insert({key, static_cast<int>(c.relation), c.rhs}).second) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

bool row_satisfied(Relation rel, double lhs, double rhs) {
  switch (rel) {
    case Relation::kLessEqual: return lhs <= rhs + kRowTol;
    case Relation::kGreaterEqual: return lhs >= rhs - kRowTol;
    case Relation::kEqual: return std::abs(lhs - rhs) <= kRowTol;
  }
  return false;
}

struct Node {
  double bound;  // minimization sense
  long id;
  std::vector<std::int8_t> fixed;  // -1 free, else 0/1
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct NodeLp {
  bool infeasible = false;
  double objective = 0.0;           // minimization sense, includes fixed part
  std::vector<double> values;       // full-length
};

class BranchAndBound {
 public:
  BranchAndBound(const BipModel& model, const SolveLimits& limits)
      : model_(model), limits_(limits), rows_(canonical_rows(model)), n_(model.num_variables()) {
    const double flip = model.sense() == Sense::kMaximize ? -1.0 : 1.0;
    cost_.resize(n_);
    integral_objective_ = true;
    for (int j = 0; j < n_; ++j) {
      cost_[j] = flip * model.variables()[j].objective;
      integral_objective_ = integral_objective_ && cost_[j] == std::floor(cost_[j]);
    }
  }

  BipSolution run() {
    const auto started = std::chrono::steady_clock::now();
    BipSolution out;

    if (!model_.hint().empty() && check_assignment(model_, model_.hint()).empty()) {
      incumbent_ = model_.hint();
      incumbent_value_ = min_objective(incumbent_);
      found_ = true;
    }

    Node root{-std::numeric_limits<double>::infinity(), next_id_++, std::vector<std::int8_t>(n_, -1)};
    for (int j = 0; j < n_; ++j) {
      const auto& v = model_.variables()[j];
      if (v.lower > v.upper) return finish(out, true);
      if (v.lower == v.upper) root.fixed[j] = static_cast<std::int8_t>(v.lower);
    }
    open_.push(std::move(root));

    bool limit_hit = false;
    bool gap_stop = false;
    while (!open_.empty()) {
      if (nodes_ >= limits_.max_nodes ||
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() > limits_.time_seconds) {
        limit_hit = true;
        break;
      }
      if (limits_.relative_gap > 0.0 && has_incumbent() &&
          relative_gap(incumbent_value_, open_.top().bound) <= limits_.relative_gap) {
        gap_stop = true;
        break;
      }
      Node node = open_.top();
      open_.pop();
      if (prunable(node.bound)) continue;
      ++nodes_;
      process(std::move(node));
    }

    out.nodes = nodes_;
    out.lp_pivots = pivots_;
    if (!limit_hit && !gap_stop) return finish(out, !has_incumbent());

    double bound = has_incumbent() ? incumbent_value_ : std::numeric_limits<double>::infinity();
    if (!open_.empty()) bound = std::min(bound, open_.top().bound);
    out.status = gap_stop ? SolveStatus::kFeasible : SolveStatus::kLimitReached;
    fill_values(out, bound);
    return out;
  }

 private:
  bool has_incumbent() const { return found_; }

  static double relative_gap(double incumbent, double bound) {
    const double diff = std::abs(incumbent - bound);
    if (diff <= 1e-12) return 0.0;
    return diff / std::max(std::abs(incumbent), 1e-10);
  }

  double min_objective(std::span<const std::uint8_t> a) const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += a[j] ? cost_[j] : 0.0;
    return v;
  }

  bool prunable(double bound) const {
    if (!has_incumbent()) return false;
    if (integral_objective_) return std::ceil(bound - kIntegralityTol) >= incumbent_value_ - 0.5;
    return bound >= incumbent_value_ - 1e-9 * std::max(1.0, std::abs(incumbent_value_));
  }

  BipSolution& finish(BipSolution& out, bool infeasible) {
    out.nodes = nodes_;
    out.lp_pivots = pivots_;
    if (infeasible) {
      out.status = SolveStatus::kInfeasible;
      out.assignment.clear();
      out.gap = 0.0;
      return out;
    }
    out.status = SolveStatus::kOptimal;
    fill_values(out, incumbent_value_);
    out.gap = 0.0;
    return out;
  }

  void fill_values(BipSolution& out, double min_bound) const {
    const double flip = model_.sense() == Sense::kMaximize ? -1.0 : 1.0;
    out.assignment = incumbent_;
    out.found = found_;
    if (has_incumbent()) {
      const std::string why = check_assignment(model_, incumbent_);
      if (!why.empty()) throw InternalError("solver incumbent failed verification: " + why);
      out.objective_value = model_.objective_value(incumbent_);
      out.bound = flip * min_bound;
      out.gap = relative_gap(incumbent_value_, min_bound);
    } else {
      out.objective_value = 0.0;
      out.bound = flip * min_bound;
      out.gap = std::numeric_limits<double>::infinity();
    }
  }

  NodeLp solve_node(const std::vector<std::int8_t>& fixed) {
    NodeLp result;
    std::vector<int> column(n_, -1);
    std::vector<int> free_vars;
    double constant = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (fixed[j] < 0) {
        column[j] = static_cast<int>(free_vars.size());
        free_vars.push_back(j);
      } else if (fixed[j] == 1) {
        constant += cost_[j];
      }
    }
    detail::DenseLp lp;
    lp.num_vars = static_cast<int>(free_vars.size());
    lp.cost.resize(lp.num_vars);
    lp.upper.assign(lp.num_vars, 1.0);
    for (int k = 0; k < lp.num_vars; ++k) lp.cost[k] = cost_[free_vars[k]];
    for (const auto& row : rows_) {
      double fixed_part = 0.0;
      bool any_free = false;
      for (const auto& t : row.terms) {
        if (column[t.var] >= 0) {
          any_free = true;
        } else if (fixed[t.var] == 1) {
          fixed_part += t.coef;
        }
      }
      if (!any_free) {
        if (!row_satisfied(row.relation, fixed_part, row.rhs)) {
          result.infeasible = true;
          return result;
        }
        continue;
      }
      std::vector<double> dense(lp.num_vars, 0.0);
      for (const auto& t : row.terms) {
        if (column[t.var] >= 0) dense[column[t.var]] = t.coef;
      }
      lp.rows.push_back(std::move(dense));
      lp.senses.push_back(row.relation == Relation::kLessEqual   ? detail::RowSense::kLe
                          : row.relation == Relation::kEqual     ? detail::RowSense::kEq
                                                                 : detail::RowSense::kGe);
      lp.rhs.push_back(row.rhs - fixed_part);
    }
    result.values.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (fixed[j] >= 0) result.values[j] = fixed[j];
    }
    if (lp.num_vars == 0) {
      result.objective = constant;
      return result;
    }
    const auto lp_result = detail::solve_lp(lp);
    pivots_ += lp_result.pivots;
    if (lp_result.status == detail::LpStatus::kInfeasible) {
      result.infeasible = true;
      return result;
    }
    for (int k = 0; k < lp.num_vars; ++k) result.values[free_vars[k]] = lp_result.values[k];
    result.objective = lp_result.objective + constant;
    return result;
  }

  void process(Node node) {
    NodeLp lp = solve_node(node.fixed);
    if (lp.infeasible) return;
    if (prunable(lp.objective)) return;

    int branch_var = -1;
    int best_priority = std::numeric_limits<int>::min();
    double best_distance = 1.0;
    for (int j = 0; j < n_; ++j) {
      if (node.fixed[j] >= 0) continue;
      const double v = lp.values[j];
      const double frac = v - std::floor(v);
      if (frac <= kIntegralityTol || frac >= 1.0 - kIntegralityTol) continue;
      const int priority = model_.variables()[j].branch_priority;
      const double distance = std::abs(frac - 0.5);
      if (priority > best_priority || (priority == best_priority && distance < best_distance)) {
        best_priority = priority;
        best_distance = distance;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      std::vector<std::uint8_t> candidate(n_);
      for (int j = 0; j < n_; ++j) candidate[j] = lp.values[j] > 0.5 ? 1 : 0;
      const std::string why = check_assignment(model_, candidate);
      if (!why.empty()) throw InternalError("integral LP point failed verification: " + why);
      const double value = min_objective(candidate);
      if (!has_incumbent() || value < incumbent_value_ - 1e-12) {
        incumbent_ = std::move(candidate);
        incumbent_value_ = value;
        found_ = true;
      }
      return;
    }

    for (std::int8_t side : {std::int8_t{1}, std::int8_t{0}}) {
      Node child{lp.objective, next_id_++, node.fixed};
      child.fixed[branch_var] = side;
      open_.push(std::move(child));
    }
  }

  const BipModel& model_;
  SolveLimits limits_;
  std::vector<CanonicalRow> rows_;
  int n_;
  std::vector<double> cost_;
  bool integral_objective_ = false;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
  std::vector<std::uint8_t> incumbent_;
  double incumbent_value_ = std::numeric_limits<double>::infinity();
  bool found_ = false;
  long next_id_ = 0;
  long nodes_ = 0;
  long pivots_ = 0;
};

std::string lp_name(const std::string& raw, char prefix, int index) {
  if (raw.empty()) return prefix + std::to_string(index);
  std::string out;
  for (char ch : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), prefix);
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<double, std::string>>& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  bool first = true;
  for (const auto& [coef, name] : terms) {
    if (coef < 0) {
      out << " - ";
    } else if (!first) {
      out << " + ";
    } else {
      out << ' ';
    }
    out << std::abs(coef) << ' ' << name;
    first = false;
  }
}

}  // namespace

BipSolution solve_bip(const BipModel& model, const SolveLimits& limits) {
  BranchAndBound bnb(model, limits);
  return bnb.run();
}

void write_lp(const BipModel& model, std::ostream& out) {
  const auto precision = out.precision(17);
  std::vector<std::string> names;
  for (int j = 0; j < model.num_variables(); ++j) names.push_back(lp_name(model.variables()[j].name, 'x', j));
  out << "\\ " << (model.name().empty() ? "model" : model.name()) << '\n';
  out << (model.sense() == Sense::kMaximize ? "Maximize" : "Minimize") << "\n obj:";
  std::vector<std::pair<double, std::string>> terms;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].objective != 0.0) terms.emplace_back(model.variables()[j].objective, names[j]);
  }
  write_terms(out, terms);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& row = model.constraints()[i];
    terms.clear();
    for (const auto& t : row.terms) terms.emplace_back(t.coef, names[t.var]);
    out << ' ' << lp_name(row.name, 'c', i) << ':';
    write_terms(out, terms);
    out << (row.relation == Relation::kLessEqual ? " <= " : row.relation == Relation::kEqual ? " = " : " >= ")
        << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (v.lower == v.upper) out << ' ' << names[j] << " = " << int{v.lower} << '\n';
  }
  out << "Binary\n";
  for (int j = 0; j < model.num_variables(); ++j) out << ' ' << names[j] << '\n';
  out << "End\n";
  out.precision(precision);
}

}  // namespace msd
