#include "msd/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msd/error.hpp"

namespace msd {

double line_preference(int position, int num_lines) {
  const double n = num_lines;
  return (n - position) / (n * (n + 1.0));
}

namespace {

// Line positions ordered by id, so the preference is a function of the id.
std::vector<int> positions_by_id(const Instance& inst) {
  std::vector<int> order(inst.lines.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return inst.lines[a].id < inst.lines[b].id; });
  return order;
}

LineSelection finish(const Instance& inst, const IncidenceMatrix& delta, const BipSolution& sol,
                     const std::vector<int>& line_var, int required) {
  if (!sol.has_incumbent()) throw InternalError("line selection produced no cover");
  LineSelection out;
  out.coverable_total = delta.coverable_count();
  out.required = required;
  out.status = sol.status;
  out.gap = sol.gap;
  std::vector<bool> chosen(inst.lines.size(), false);
  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    if (sol.value(line_var[l])) {
      chosen[l] = true;
      out.chosen.push_back(inst.lines[l].id);
    }
  }
  std::sort(out.chosen.begin(), out.chosen.end());
  for (int g = 0; g < delta.num_grids(); ++g) {
    for (std::size_t l = 0; l < inst.lines.size(); ++l) {
      if (chosen[l] && delta.at(g, static_cast<int>(l))) {
        out.covered_grids.push_back(inst.mesh[g].id);
        break;
      }
    }
  }
  return out;
}

std::vector<int> add_line_variables(const Instance& inst, BipModel& model) {
  const int n = static_cast<int>(inst.lines.size());
  std::vector<int> line_var(n);
  const auto order = positions_by_id(inst);
  for (int rank = 0; rank < n; ++rank) {
    const int l = order[rank];
    line_var[l] = model.add_variable("x_line_" + std::to_string(inst.lines[l].id),
                                     1.0 - line_preference(rank, n), 1);
  }
  return line_var;
}

}  // namespace

LineSelection select_lines_full(const Instance& inst, const SolveLimits& limits) {
  const auto delta = incidence_matrix(inst);
  BipModel model(Sense::kMinimize, "line_set_cover");
  const auto line_var = add_line_variables(inst, model);
  for (int g = 0; g < delta.num_grids(); ++g) {
    std::vector<Term> row;
    for (int l = 0; l < delta.num_lines(); ++l) {
      if (delta.at(g, l)) row.push_back({line_var[l], 1.0});
    }
    if (row.empty()) continue;
    model.add_constraint(std::move(row), Relation::kGreaterEqual, 1.0, "cover_g" + std::to_string(inst.mesh[g].id));
  }
  const auto sol = solve_bip(model, limits);
  return finish(inst, delta, sol, line_var, delta.coverable_count());
}

LineSelection select_lines_partial(const Instance& inst, double gamma, const SolveLimits& limits) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must lie in (0, 1]");
  const auto delta = incidence_matrix(inst);
  const int coverable = delta.coverable_count();
  const int required = static_cast<int>(std::ceil(gamma * coverable - 1e-9));

  BipModel model(Sense::kMinimize, "line_partial_cover");
  const auto line_var = add_line_variables(inst, model);
  std::vector<Term> count_row;
  for (int g = 0; g < delta.num_grids(); ++g) {
    if (!delta.row_any(g)) continue;
    const int xg = model.add_variable("x_grid_" + std::to_string(inst.mesh[g].id), 0.0, 0);
    // x_g may only be 1 when a selected line reaches g.
    std::vector<Term> link{{xg, 1.0}};
    for (int l = 0; l < delta.num_lines(); ++l) {
      if (delta.at(g, l)) link.push_back({line_var[l], -1.0});
    }
    model.add_constraint(std::move(link), Relation::kLessEqual, 0.0, "link_g" + std::to_string(inst.mesh[g].id));
    count_row.push_back({xg, 1.0});
  }
  model.add_constraint(std::move(count_row), Relation::kGreaterEqual, required, "gamma_share");
  const auto sol = solve_bip(model, limits);
  return finish(inst, delta, sol, line_var, required);
}

LineSelection select_lines(const Instance& inst, const SolveLimits& limits) {
  if (inst.gamma >= 1.0) return select_lines_full(inst, limits);
  return select_lines_partial(inst, inst.gamma, limits);
}

}  // namespace msd
