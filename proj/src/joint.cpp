#include "msd/joint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "msd/error.hpp"
#include "msd/log.hpp"
#include "msd/parallel.hpp"
#include "msd/select.hpp"
#include "msd/sequential.hpp"

namespace msd {

namespace {

constexpr double kImprovement = 1e-12;

struct LowerModel {
  BipModel model{Sense::kMaximize};
  int slots = 0;
  int trips = 0;
  std::vector<std::vector<int>> start;    // [slot][trip] pull-out -> trip
  std::vector<std::vector<int>> finish;   // [slot][trip] trip -> pull-in
  std::vector<std::vector<int>> arc;      // [slot][arc]
  std::vector<std::vector<int>> out_arcs;  // arcs leaving each trip position
  std::vector<std::vector<int>> in_arcs;
  std::vector<int> arc_from;  // positions
  std::vector<int> arc_to;
  PairSet pairs;
  std::vector<int> pair_var;
};

std::string line_tag(const Line& line, int sensors) {
  return "lower_line" + std::to_string(line.id) + "_m" + std::to_string(sensors);
}

LowerModel build_lower(const Line& line, int sensors, const TripPairGraph& graph, int slots,
                       const std::vector<PairSet>& trip_cover, const Instance& inst) {
  LowerModel lm;
  lm.model = BipModel(Sense::kMaximize, line_tag(line, sensors));
  lm.slots = slots;
  lm.trips = static_cast<int>(graph.trips.size());
  std::unordered_map<int, int> pos;
  for (int k = 0; k < lm.trips; ++k) pos.emplace(graph.trips[k], k);
  lm.out_arcs.resize(lm.trips);
  lm.in_arcs.resize(lm.trips);
  for (int a = 0; a < static_cast<int>(graph.arcs.size()); ++a) {
    lm.arc_from.push_back(pos.at(graph.arcs[a].from));
    lm.arc_to.push_back(pos.at(graph.arcs[a].to));
    lm.out_arcs[lm.arc_from[a]].push_back(a);
    lm.in_arcs[lm.arc_to[a]].push_back(a);
  }

  auto& model = lm.model;
  const int n = lm.trips;
  const int num_arcs = static_cast<int>(graph.arcs.size());
  lm.start.assign(slots, std::vector<int>(n));
  lm.finish.assign(slots, std::vector<int>(n));
  lm.arc.assign(slots, std::vector<int>(num_arcs));
  for (int c = 0; c < slots; ++c) {
    const std::string sc = std::to_string(c);
    for (int k = 0; k < n; ++k) {
      lm.start[c][k] = model.add_variable("s_" + sc + "_" + std::to_string(graph.trips[k]), 0.0, 1);
      lm.finish[c][k] = model.add_variable("e_" + sc + "_" + std::to_string(graph.trips[k]), 0.0, 1);
    }
    for (int a = 0; a < num_arcs; ++a) {
      lm.arc[c][a] = model.add_variable(
          "x_" + sc + "_" + std::to_string(graph.arcs[a].from) + "_" + std::to_string(graph.arcs[a].to), 0.0, 1);
    }
  }

  // Every trip has one predecessor and one successor over all slots.
  for (int k = 0; k < n; ++k) {
    std::vector<Term> pred, succ;
    for (int c = 0; c < slots; ++c) {
      pred.push_back({lm.start[c][k], 1.0});
      for (int a : lm.in_arcs[k]) pred.push_back({lm.arc[c][a], 1.0});
      succ.push_back({lm.finish[c][k], 1.0});
      for (int a : lm.out_arcs[k]) succ.push_back({lm.arc[c][a], 1.0});
    }
    model.add_constraint(std::move(pred), Relation::kEqual, 1.0, "pred_" + std::to_string(graph.trips[k]));
    model.add_constraint(std::move(succ), Relation::kEqual, 1.0, "succ_" + std::to_string(graph.trips[k]));
  }
  for (int c = 0; c < slots; ++c) {
    std::vector<Term> pull_out, pull_in;
    for (int k = 0; k < n; ++k) {
      pull_out.push_back({lm.start[c][k], 1.0});
      pull_in.push_back({lm.finish[c][k], 1.0});
    }
    model.add_constraint(std::move(pull_out), Relation::kEqual, 1.0, "pull_out_" + std::to_string(c));
    model.add_constraint(std::move(pull_in), Relation::kEqual, 1.0, "pull_in_" + std::to_string(c));
    for (int k = 0; k < n; ++k) {
      std::vector<Term> balance{{lm.start[c][k], 1.0}, {lm.finish[c][k], -1.0}};
      for (int a : lm.in_arcs[k]) balance.push_back({lm.arc[c][a], 1.0});
      for (int a : lm.out_arcs[k]) balance.push_back({lm.arc[c][a], -1.0});
      model.add_constraint(std::move(balance), Relation::kEqual, 0.0,
                           "flow_" + std::to_string(c) + "_" + std::to_string(graph.trips[k]));
    }
  }
  std::vector<Term> connections;
  for (int c = 0; c < slots; ++c) {
    for (int a = 0; a < num_arcs; ++a) connections.push_back({lm.arc[c][a], 1.0});
  }
  model.add_constraint(std::move(connections), Relation::kEqual, n - slots, "fleet");

  // First trips strictly ordered within the instrumented slots and within
  // the rest.
  for (int c = 0; c + 1 < slots; ++c) {
    if (c + 1 == sensors) continue;
    std::vector<Term> order;
    for (int k = 0; k < n; ++k) {
      order.push_back({lm.start[c + 1][k], static_cast<double>(k)});
      order.push_back({lm.start[c][k], -static_cast<double>(k)});
    }
    model.add_constraint(std::move(order), Relation::kGreaterEqual, 1.0, "order_" + std::to_string(c));
  }

  if (sensors == 0) return lm;
  for (const auto& cov : trip_cover) merge_into(lm.pairs, cov);
  std::vector<std::vector<Term>> cover(lm.pairs.size());
  for (std::size_t p = 0; p < lm.pairs.size(); ++p) {
    lm.pair_var.push_back(model.add_variable("n_" + std::to_string(lm.pairs[p]), pair_weight(lm.pairs[p], inst), 0));
    cover[p].push_back({lm.pair_var[p], 1.0});
  }
  for (int k = 0; k < n; ++k) {
    for (PairKey key : trip_cover[k]) {
      auto& row = cover[std::lower_bound(lm.pairs.begin(), lm.pairs.end(), key) - lm.pairs.begin()];
      // Trip k rides in slot c iff it leaves slot c by an arc or a pull-in.
      for (int c = 0; c < sensors; ++c) {
        row.push_back({lm.finish[c][k], -1.0});
        for (int a : lm.out_arcs[k]) row.push_back({lm.arc[c][a], -1.0});
      }
    }
  }
  for (std::size_t p = 0; p < lm.pairs.size(); ++p) {
    model.add_constraint(std::move(cover[p]), Relation::kLessEqual, 0.0, "cover_" + std::to_string(lm.pairs[p]));
  }
  return lm;
}

// Chain positions per slot, instrumented slots first, each group ordered
// by first trip position.
std::vector<std::uint8_t> lower_hint(const LowerModel& lm, const std::vector<std::vector<int>>& slot_chains,
                                     const std::vector<PairSet>& trip_cover, int sensors) {
  std::vector<std::uint8_t> hint(lm.model.num_variables(), 0);
  std::unordered_map<long long, int> arc_of;
  for (int a = 0; a < static_cast<int>(lm.arc_from.size()); ++a) {
    arc_of.emplace(static_cast<long long>(lm.arc_from[a]) * lm.trips + lm.arc_to[a], a);
  }
  PairSet covered;
  for (int c = 0; c < lm.slots; ++c) {
    const auto& chain = slot_chains[c];
    hint[lm.start[c][chain.front()]] = 1;
    hint[lm.finish[c][chain.back()]] = 1;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      hint[lm.arc[c][arc_of.at(static_cast<long long>(chain[i]) * lm.trips + chain[i + 1])]] = 1;
    }
    if (c < sensors) {
      for (int k : chain) merge_into(covered, trip_cover[k]);
    }
  }
  for (std::size_t p = 0; p < lm.pairs.size(); ++p) {
    hint[lm.pair_var[p]] = std::binary_search(covered.begin(), covered.end(), lm.pairs[p]) ? 1 : 0;
  }
  return hint;
}

}  // namespace

std::string check_lower(const LowerResult& result, const Line& line, const TripPairGraph& graph, int min_fleet) {
  if (static_cast<int>(result.chains.size()) != min_fleet) {
    return "expected " + std::to_string(min_fleet) + " chains, got " + std::to_string(result.chains.size());
  }
  std::vector<std::pair<int, int>> arcs;
  for (const auto& a : graph.arcs) arcs.emplace_back(a.from, a.to);
  std::sort(arcs.begin(), arcs.end());
  std::vector<int> seen;
  int instrumented = 0;
  for (const auto& chain : result.chains) {
    if (chain.trips.empty()) return "empty chain " + std::to_string(chain.id);
    if (chain.line_id != line.id) return "chain on the wrong line";
    instrumented += chain.instrumented ? 1 : 0;
    for (std::size_t i = 0; i + 1 < chain.trips.size(); ++i) {
      if (!std::binary_search(arcs.begin(), arcs.end(), std::make_pair(chain.trips[i], chain.trips[i + 1]))) {
        return "trips " + std::to_string(chain.trips[i]) + " -> " + std::to_string(chain.trips[i + 1]) +
               " are not a feasible pair";
      }
    }
    seen.insert(seen.end(), chain.trips.begin(), chain.trips.end());
  }
  if (instrumented > result.sensors) return "more instrumented chains than sensors";
  std::sort(seen.begin(), seen.end());
  std::vector<int> all;
  for (const auto& trip : line.trips) all.push_back(trip.id);
  std::sort(all.begin(), all.end());
  if (seen != all) return "chains do not partition the line's trips";
  return {};
}

LowerResult solve_lower(const Line& line, int sensors, const TripPairGraph& graph, int min_fleet,
                        const Instance& inst, const CoverageTensor& tensor, const PipelineOptions& options) {
  if (sensors < 0 || sensors > min_fleet) {
    throw ArgumentError("line " + std::to_string(line.id) + ": sensor count " + std::to_string(sensors) +
                        " outside [0, " + std::to_string(min_fleet) + "]");
  }
  const auto matched = msd::min_fleet(graph);
  if (matched.min_fleet != min_fleet) {
    throw InternalError("line " + std::to_string(line.id) + ": the feasible pairs need " +
                        std::to_string(matched.min_fleet) + " buses, not " + std::to_string(min_fleet));
  }
  std::unordered_map<int, int> pos;
  for (int k = 0; k < static_cast<int>(graph.trips.size()); ++k) pos.emplace(graph.trips[k], k);
  std::vector<PairSet> trip_cover;
  for (int id : graph.trips) trip_cover.push_back(tensor.of(id));

  auto lm = build_lower(line, sensors, graph, min_fleet, trip_cover, inst);

  // Warm start from the matching chains with the greedy choice of sensors.
  std::vector<std::vector<int>> chains;
  std::vector<PairSet> chain_cover;
  for (const auto& chain : matched.chains) {
    std::vector<int> p;
    PairSet cov;
    for (int id : chain.trips) {
      p.push_back(pos.at(id));
      merge_into(cov, trip_cover[p.back()]);
    }
    chains.push_back(std::move(p));
    chain_cover.push_back(std::move(cov));
  }
  std::vector<bool> chosen(chains.size(), false);
  for (int c : allocate_greedy(chain_cover, inst, sensors).instrumented) chosen[c] = true;
  for (int c = 0, picked = static_cast<int>(std::count(chosen.begin(), chosen.end(), true));
       picked < sensors && c < static_cast<int>(chains.size()); ++c) {
    if (!chosen[c]) {
      chosen[c] = true;
      ++picked;
    }
  }
  std::vector<std::vector<int>> slot_chains;
  for (bool group : {true, false}) {
    std::vector<std::vector<int>> part;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (chosen[c] == group) part.push_back(chains[c]);
    }
    std::sort(part.begin(), part.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    slot_chains.insert(slot_chains.end(), part.begin(), part.end());
  }
  lm.model.set_hint(lower_hint(lm, slot_chains, trip_cover, sensors));
  if (options.model_sink) options.model_sink(lm.model);

  const auto sol = solve_bip(lm.model, options.limits);
  if (!sol.has_incumbent()) {
    throw InternalError("line " + std::to_string(line.id) + ": lower-level model with m = " + std::to_string(sensors) +
                        " has no solution (" + to_string(sol.status) + ")");
  }

  LowerResult out;
  out.line_id = line.id;
  out.sensors = sensors;
  out.status = sol.status;
  out.gap = sol.gap;
  out.nodes = sol.nodes;
  for (int c = 0; c < min_fleet; ++c) {
    TripChain chain;
    chain.id = c;
    chain.line_id = line.id;
    chain.instrumented = c < sensors;
    int at = -1;
    for (int k = 0; k < lm.trips; ++k) {
      if (sol.value(lm.start[c][k])) at = k;
    }
    while (at >= 0) {
      chain.trips.push_back(graph.trips[at]);
      if (chain.trips.size() > graph.trips.size()) throw InternalError("cycle in lower-level solution");
      int next = -1;
      for (int a : lm.out_arcs[at]) {
        if (sol.value(lm.arc[c][a])) next = lm.arc_to[a];
      }
      at = next;
    }
    if (chain.instrumented) {
      for (int id : chain.trips) merge_into(out.covered, tensor.of(id));
    }
    out.chains.push_back(std::move(chain));
  }
  out.phi = sensing_reward(out.covered, inst);
  if (const auto why = check_lower(out, line, graph, min_fleet); !why.empty()) {
    throw InternalError("line " + std::to_string(line.id) + ": " + why);
  }
  if (std::abs(out.phi - sol.objective_value) > 1e-9) {
    throw InternalError("line " + std::to_string(line.id) + ": lower-level objective disagrees with its chains");
  }
  return out;
}

SaturationProfile compute_saturation(const Line& line, const Instance& inst, const TripPairGraph& graph,
                                     int min_fleet, const CoverageTensor& tensor, const PipelineOptions& options) {
  SaturationProfile profile;
  profile.line_id = line.id;
  profile.exhaustive = options.saturation_exhaustive;
  std::vector<LowerResult> probes;
  probes.push_back(solve_lower(line, 0, graph, min_fleet, inst, tensor, options));
  profile.phi.push_back(0.0);

  if (options.saturation_exhaustive) {
    for (int m = 1; m <= min_fleet; ++m) {
      probes.push_back(solve_lower(line, m, graph, min_fleet, inst, tensor, options));
      profile.phi.push_back(probes.back().phi);
    }
    const double best = *std::max_element(profile.phi.begin(), profile.phi.end());
    int k = 0;
    while (profile.phi[k] < best - kImprovement) ++k;
    profile.saturation = k;
  } else {
    double previous = -1.0;
    double current = 0.0;
    int m = 0;
    while (current > previous + kImprovement) {
      if (m == min_fleet) {
        ++m;
        break;
      }
      ++m;
      probes.push_back(solve_lower(line, m, graph, min_fleet, inst, tensor, options));
      profile.phi.push_back(probes.back().phi);
      previous = current;
      current = probes.back().phi;
    }
    profile.saturation = m - 1;
  }
  probes.resize(profile.saturation + 1);
  profile.results = std::move(probes);
  return profile;
}

UpperResult solve_upper(std::span<const SaturationProfile> profiles, const Instance& inst, int sensors,
                        const PipelineOptions& options) {
  if (sensors < 0) throw ArgumentError("sensor count must be non-negative");
  const int lines = static_cast<int>(profiles.size());
  BipModel model(Sense::kMaximize, "upper");
  std::vector<std::vector<int>> u(lines);
  std::vector<Term> budget;
  PairSet pairs;
  for (int l = 0; l < lines; ++l) {
    std::vector<Term> one;
    for (int m = 0; m <= profiles[l].saturation; ++m) {
      u[l].push_back(model.add_variable("u_" + std::to_string(profiles[l].line_id) + "_" + std::to_string(m), 0.0, 1));
      one.push_back({u[l][m], 1.0});
      if (m > 0) budget.push_back({u[l][m], static_cast<double>(m)});
      merge_into(pairs, profiles[l].results[m].covered);
    }
    model.add_constraint(std::move(one), Relation::kEqual, 1.0, "level_" + std::to_string(profiles[l].line_id));
  }
  if (!budget.empty()) model.add_constraint(std::move(budget), Relation::kLessEqual, sensors, "budget");
  std::vector<std::vector<Term>> cover(pairs.size());
  std::vector<int> pair_var(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    pair_var[p] = model.add_variable("n_" + std::to_string(pairs[p]), pair_weight(pairs[p], inst), 0);
    cover[p].push_back({pair_var[p], 1.0});
  }
  for (int l = 0; l < lines; ++l) {
    for (int m = 1; m <= profiles[l].saturation; ++m) {
      for (PairKey key : profiles[l].results[m].covered) {
        cover[std::lower_bound(pairs.begin(), pairs.end(), key) - pairs.begin()].push_back({u[l][m], -1.0});
      }
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    model.add_constraint(std::move(cover[p]), Relation::kLessEqual, 0.0, "cover_" + std::to_string(pairs[p]));
  }

  auto union_for = [&](const std::vector<int>& level) {
    PairSet covered;
    for (int l = 0; l < lines; ++l) merge_into(covered, profiles[l].results[level[l]].covered);
    return covered;
  };

  // Warm start: add one sensor at a time where it helps most.
  std::vector<int> level(lines, 0);
  for (int spent = 0; spent < sensors; ++spent) {
    const double base = sensing_reward(union_for(level), inst);
    int best = -1;
    double best_value = base + kImprovement;
    for (int l = 0; l < lines; ++l) {
      if (level[l] == profiles[l].saturation) continue;
      ++level[l];
      const double value = sensing_reward(union_for(level), inst);
      --level[l];
      if (value > best_value) {
        best_value = value;
        best = l;
      }
    }
    if (best < 0) break;
    ++level[best];
  }
  std::vector<std::uint8_t> hint(model.num_variables(), 0);
  for (int l = 0; l < lines; ++l) hint[u[l][level[l]]] = 1;
  const auto hinted = union_for(level);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    hint[pair_var[p]] = std::binary_search(hinted.begin(), hinted.end(), pairs[p]) ? 1 : 0;
  }
  model.set_hint(hint);
  if (options.model_sink) options.model_sink(model);

  const auto sol = solve_bip(model, options.limits);
  if (!sol.has_incumbent()) throw InternalError("upper-level model has no solution");
  UpperResult out;
  out.status = sol.status;
  out.gap = sol.gap;
  out.nodes = sol.nodes;
  out.sensors.assign(lines, 0);
  for (int l = 0; l < lines; ++l) {
    for (int m = 0; m <= profiles[l].saturation; ++m) {
      if (sol.value(u[l][m])) out.sensors[l] = m;
    }
  }
  out.phi = sensing_reward(union_for(out.sensors), inst);
  if (std::abs(out.phi - sol.objective_value) > 1e-9) {
    throw InternalError("upper-level objective disagrees with the chosen saturation levels");
  }
  return out;
}

Deployment run_joint(const Instance& inst, int sensors, const PipelineOptions& options) {
  if (sensors < 0) throw ArgumentError("sensor count must be non-negative");
  auto clock = std::chrono::steady_clock::now();
  auto lap = [&] {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - clock).count();
    clock = now;
    return s;
  };

  Deployment out;
  out.approach = "joint";
  out.sensor_budget = sensors;
  out.allocation = "exact";
  out.selection = select_lines(inst, options.limits);
  out.solves.push_back({"select", out.selection.status, out.selection.gap, 0});
  out.timings.push_back({"select", lap()});

  struct LineWork {
    int fleet = 0;
    std::optional<Minutes> delta;
    std::size_t pairs = 0;
    SaturationProfile profile;
  };
  const CoverageTensor tensor(inst);
  const auto& chosen = out.selection.chosen;
  PipelineOptions inner = options;
  inner.jobs = 1;
  auto work = parallel_map<LineWork>(static_cast<int>(chosen.size()), options.jobs, [&](int i) {
    const Line& line = inst.line(chosen[i]);
    LineWork w;
    w.fleet = min_fleet(line).min_fleet;
    if (options.fixed_delta) {
      w.delta = *options.fixed_delta;
      const int capped = min_fleet(line, w.delta).min_fleet;
      if (capped != w.fleet) {
        throw InfeasibleParams("line " + std::to_string(line.id) + ": idle-time cap " + std::to_string(*w.delta) +
                               " min raises the fleet from " + std::to_string(w.fleet) + " to " +
                               std::to_string(capped));
      }
    } else if (options.delta_policy != DeltaPolicy::kNone) {
      const auto search = find_delta(line, std::nullopt, options.delta_iterations);
      w.delta = options.delta_policy == DeltaPolicy::kSearch ? search.delta : search.delta0;
    }
    const auto graph = feasible_pairs(line, w.delta);
    w.pairs = graph.size();
    w.profile = compute_saturation(line, inst, graph, w.fleet, tensor, inner);
    return w;
  });
  out.timings.push_back({"lower", lap()});

  std::vector<SaturationProfile> profiles;
  for (const auto& w : work) profiles.push_back(w.profile);
  const auto upper = solve_upper(profiles, inst, sensors, options);
  out.timings.push_back({"upper", lap()});

  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto& w = work[i];
    for (const auto& r : w.profile.results) {
      out.solves.push_back({"lower:" + std::to_string(chosen[i]) + ":" + std::to_string(r.sensors), r.status, r.gap,
                            r.nodes});
    }
    // The lower level at the chosen m_l is deterministic, so the profile's
    // solve is the final one.
    const auto& picked = w.profile.results[upper.sensors[i]];
    LinePlan plan;
    plan.line_id = chosen[i];
    plan.min_fleet = w.fleet;
    plan.delta = w.delta;
    plan.feasible_pairs = w.pairs;
    plan.chains = picked.chains;
    plan.sensors = upper.sensors[i];
    plan.saturation = w.profile.saturation;
    plan.phi_line = picked.phi;
    plan.phi_by_sensors = w.profile.phi;
    out.lines.push_back(std::move(plan));
  }
  out.solves.push_back({"upper", upper.status, upper.gap, upper.nodes});
  finalize_coverage(out, inst);
  if (out.phi != upper.phi) {
    throw InternalError("joint coverage " + std::to_string(out.phi) + " disagrees with the upper level " +
                        std::to_string(upper.phi));
  }
  return out;
}

}  // namespace msd
