#include "msd/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "msd/error.hpp"
#include "msd/log.hpp"

namespace msd {

std::optional<Minutes> idle_time(const Line& line, const Trip& from, const Trip& to) {
  const auto deadhead = line.deadhead_between(from.arrive_terminal, to.depart_terminal);
  if (!deadhead) return std::nullopt;
  return to.start - (from.start + from.duration + *deadhead);
}

bool is_connectable(const Line& line, const Trip& from, const Trip& to, std::optional<Minutes> cap) {
  const auto slack = idle_time(line, from, to);
  if (!slack || *slack < 0) return false;
  return !cap || *slack <= *cap;
}

TripPairGraph feasible_pairs(const Line& line, std::optional<Minutes> cap) {
  if (cap && *cap < 0) throw ArgumentError("idle-time cap must be non-negative");
  TripPairGraph graph;
  graph.line_id = line.id;
  graph.cap = cap;
  std::vector<int> order(line.trips.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ta = line.trips[a];
    const auto& tb = line.trips[b];
    return ta.start != tb.start ? ta.start < tb.start : ta.id < tb.id;
  });
  for (int k : order) graph.trips.push_back(line.trips[k].id);
  for (int a : order) {
    for (int b : order) {
      if (a == b) continue;
      const auto& from = line.trips[a];
      const auto& to = line.trips[b];
      const auto slack = idle_time(line, from, to);
      if (!slack || *slack < 0 || (cap && *slack > *cap)) continue;
      graph.arcs.push_back({from.id, to.id, *slack});
    }
  }
  return graph;
}

namespace {

class HopcroftKarp {
 public:
  explicit HopcroftKarp(std::vector<std::vector<int>> adjacency)
      : adj_(std::move(adjacency)), n_(static_cast<int>(adj_.size())),
        match_left_(n_, -1), match_right_(n_, -1), dist_(n_) {}

  int run() {
    int matched = 0;
    while (bfs()) {
      for (int u = 0; u < n_; ++u) {
        if (match_left_[u] < 0 && dfs(u)) ++matched;
      }
    }
    return matched;
  }

  const std::vector<int>& match_left() const { return match_left_; }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  bool bfs() {
    std::queue<int> queue;
    for (int u = 0; u < n_; ++u) {
      if (match_left_[u] < 0) {
        dist_[u] = 0;
        queue.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    bool reachable_free = false;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int v : adj_[u]) {
        const int w = match_right_[v];
        if (w < 0) {
          reachable_free = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue.push(w);
        }
      }
    }
    return reachable_free;
  }

  bool dfs(int u) {
    for (int v : adj_[u]) {
      const int w = match_right_[v];
      if (w < 0 || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  std::vector<std::vector<int>> adj_;
  int n_;
  std::vector<int> match_left_;
  std::vector<int> match_right_;
  std::vector<int> dist_;
};

std::unordered_map<int, int> position_map(const TripPairGraph& graph) {
  std::unordered_map<int, int> pos;
  for (int k = 0; k < static_cast<int>(graph.trips.size()); ++k) pos.emplace(graph.trips[k], k);
  return pos;
}

}  // namespace

std::vector<TripChain> extract_chains(const TripPairGraph& graph, const std::vector<int>& successor) {
  const int n = static_cast<int>(graph.trips.size());
  std::vector<bool> has_pred(n, false);
  for (int s : successor) {
    if (s >= 0) has_pred[s] = true;
  }
  std::vector<TripChain> chains;
  for (int k = 0; k < n; ++k) {
    if (has_pred[k]) continue;
    TripChain chain;
    chain.id = static_cast<int>(chains.size());
    chain.line_id = graph.line_id;
    for (int at = k; at >= 0; at = successor[at]) chain.trips.push_back(graph.trips[at]);
    chains.push_back(std::move(chain));
  }
  return chains;
}

FleetResult min_fleet(const TripPairGraph& graph) {
  const auto pos = position_map(graph);
  const int n = static_cast<int>(graph.trips.size());
  std::vector<std::vector<int>> adjacency(n);
  for (const auto& arc : graph.arcs) adjacency[pos.at(arc.from)].push_back(pos.at(arc.to));

  HopcroftKarp matcher(std::move(adjacency));
  const int matched = matcher.run();

  FleetResult result;
  result.line_id = graph.line_id;
  result.min_fleet = n - matched;
  const auto& successor = matcher.match_left();
  for (const auto& arc : graph.arcs) {
    if (successor[pos.at(arc.from)] == pos.at(arc.to)) result.matching.push_back(arc);
  }
  result.chains = extract_chains(graph, successor);
  if (static_cast<int>(result.chains.size()) != result.min_fleet) {
    throw InternalError("chain count disagrees with matching size");
  }
  return result;
}

FleetResult min_fleet(const Line& line, std::optional<Minutes> cap) {
  return min_fleet(feasible_pairs(line, cap));
}

int min_fleet_ilp(const Line& line, std::optional<Minutes> cap) {
  const auto graph = feasible_pairs(line, cap);
  const auto pos = position_map(graph);
  const int n = static_cast<int>(graph.trips.size());
  BipModel model(Sense::kMaximize, "min_fleet_line_" + std::to_string(line.id));
  std::vector<std::vector<Term>> out_rows(n), in_rows(n);
  for (const auto& arc : graph.arcs) {
    const int y = model.add_variable("y_" + std::to_string(arc.from) + "_" + std::to_string(arc.to), 1.0);
    out_rows[pos.at(arc.from)].push_back({y, 1.0});
    in_rows[pos.at(arc.to)].push_back({y, 1.0});
  }
  for (int k = 0; k < n; ++k) {
    if (!out_rows[k].empty()) model.add_constraint(std::move(out_rows[k]), Relation::kLessEqual, 1.0);
    if (!in_rows[k].empty()) model.add_constraint(std::move(in_rows[k]), Relation::kLessEqual, 1.0);
  }
  const auto sol = solve_bip(model);
  if (sol.status != SolveStatus::kOptimal) throw InternalError("fleet-size program not solved to optimality");
  return n - static_cast<int>(std::lround(sol.objective_value));
}

Minutes default_delta0(const Line& line) {
  Minutes longest_trip = 0;
  for (const auto& trip : line.trips) longest_trip = std::max(longest_trip, trip.duration);
  Minutes longest_deadhead = 0;
  for (const auto& [pair, minutes] : line.deadhead) longest_deadhead = std::max(longest_deadhead, minutes);
  return 2 * longest_trip + longest_deadhead;
}

DeltaSearch find_delta(const Line& line, std::optional<Minutes> delta0, int iterations) {
  if (iterations < 1) throw ArgumentError("find_delta needs at least one iteration");
  DeltaSearch out;
  out.min_fleet = min_fleet(line).min_fleet;
  out.delta0 = delta0.value_or(default_delta0(line));
  if (out.delta0 < 0) throw ArgumentError("delta0 must be non-negative");
  while (min_fleet(line, out.delta0).min_fleet != out.min_fleet) {
    const Minutes widened = std::max<Minutes>(1, 2 * out.delta0);
    logger()->warn("line {}: delta0 = {} min changes the fleet size, widening to {}", line.id, out.delta0, widened);
    out.delta0 = widened;
    out.widened = true;
  }
  double lo = 0.0;
  double hi = out.delta0;
  for (int k = 0; k < iterations; ++k) {
    const double probe = 0.5 * (lo + hi);
    // Idle times are whole minutes, so a real cap acts as its floor.
    const auto cap = static_cast<Minutes>(std::floor(probe));
    if (min_fleet(line, cap).min_fleet > out.min_fleet) {
      lo = probe;
    } else {
      hi = probe;
    }
  }
  out.delta = std::min(out.delta0, static_cast<Minutes>(std::ceil(hi)));
  return out;
}

}  // namespace msd
