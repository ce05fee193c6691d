#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "msd/coverage.hpp"

namespace oracle {

std::vector<int> simulate_trip_coverage(const msd::Trip& trip, const msd::Instance& inst) {
  std::set<int> hits;
  const long start = trip.start * 60L;
  const long span = trip.duration * 60L;
  const int num_t = inst.num_intervals();
  for (long s = 0; s < span; ++s) {
    // Grid occupied during second [start + s, start + s + 1).
    const double progress = static_cast<double>(s) / static_cast<double>(span);
    int k = 0;
    for (int j = 0; j < static_cast<int>(trip.route.size()); ++j) {
      if (trip.route[j].entry_fraction <= progress + 1e-12) k = j;
    }
    const long tick = start + s;
    for (const auto& iv : inst.intervals) {
      if (tick >= iv.start * 60L && tick < iv.end * 60L) {
        hits.insert(inst.grid_position(trip.route[k].grid) * num_t + iv.index);
      }
    }
  }
  return {hits.begin(), hits.end()};
}

std::optional<double> enumerate_bip(const msd::BipModel& model) {
  const int n = model.num_variables();
  std::optional<double> best;
  std::vector<std::uint8_t> a(n, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (int j = 0; j < n; ++j) a[j] = (mask >> j) & 1U;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      ok = a[j] >= model.variables()[j].lower && a[j] <= model.variables()[j].upper;
    }
    for (const auto& row : model.constraints()) {
      if (!ok) break;
      double lhs = 0.0;
      for (const auto& t : row.terms) lhs += a[t.var] * t.coef;
      switch (row.relation) {
        case msd::Relation::kLessEqual: ok = lhs <= row.rhs + 1e-9; break;
        case msd::Relation::kGreaterEqual: ok = lhs >= row.rhs - 1e-9; break;
        case msd::Relation::kEqual: ok = std::abs(lhs - row.rhs) <= 1e-9; break;
      }
    }
    if (!ok) continue;
    double value = 0.0;
    for (int j = 0; j < n; ++j) value += a[j] * model.variables()[j].objective;
    const bool better = !best || (model.sense() == msd::Sense::kMaximize ? value > *best : value < *best);
    if (better) best = value;
  }
  return best;
}

int min_line_cover(const msd::Instance& inst, int required) {
  const int num_lines = static_cast<int>(inst.lines.size());
  std::vector<std::set<int>> grids(num_lines);
  for (int l = 0; l < num_lines; ++l) {
    for (const auto& trip : inst.lines[l].trips) {
      for (const auto& step : trip.route) grids[l].insert(step.grid);
    }
  }
  int best = std::numeric_limits<int>::max();
  for (std::uint32_t mask = 0; mask < (1U << num_lines); ++mask) {
    const int size = std::popcount(mask);
    if (size >= best) continue;
    std::set<int> covered;
    for (int l = 0; l < num_lines; ++l) {
      if (mask & (1U << l)) covered.insert(grids[l].begin(), grids[l].end());
    }
    if (static_cast<int>(covered.size()) >= required) best = size;
  }
  return best;
}

bool connects(const msd::Line& line, const msd::Trip& a, const msd::Trip& b, std::optional<int> max_idle) {
  int deadhead = 0;
  if (a.arrive_terminal != b.depart_terminal) {
    auto it = line.deadhead.find({a.arrive_terminal, b.depart_terminal});
    if (it == line.deadhead.end()) return false;
    deadhead = it->second;
  } else {
    auto it = line.deadhead.find({a.arrive_terminal, b.depart_terminal});
    if (it != line.deadhead.end()) deadhead = it->second;
  }
  const int idle = b.start - (a.start + a.duration + deadhead);
  if (idle < 0) return false;
  return !max_idle || idle <= *max_idle;
}

namespace {

std::vector<int> time_order(const msd::Line& line) {
  std::vector<int> order(line.trips.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return line.trips[x].start < line.trips[y].start; });
  return order;
}

void extend(const msd::Line& line, const std::vector<int>& order, std::size_t next, int chains,
            std::optional<int> max_idle, Partition& current, const std::function<void(const Partition&)>& visit) {
  if (next == order.size()) {
    if (static_cast<int>(current.size()) == chains) visit(current);
    return;
  }
  const int trip = order[next];
  for (std::size_t c = 0; c < current.size(); ++c) {
    if (connects(line, line.trips[current[c].back()], line.trips[trip], max_idle)) {
      current[c].push_back(trip);
      extend(line, order, next + 1, chains, max_idle, current, visit);
      current[c].pop_back();
    }
  }
  if (static_cast<int>(current.size()) < chains) {
    current.push_back({trip});
    extend(line, order, next + 1, chains, max_idle, current, visit);
    current.pop_back();
  }
}

}  // namespace

void for_each_partition(const msd::Line& line, int chains, std::optional<int> max_idle,
                        const std::function<void(const Partition&)>& visit) {
  Partition current;
  extend(line, time_order(line), 0, chains, max_idle, current, visit);
}

int min_chain_partition(const msd::Line& line, std::optional<int> max_idle) {
  for (int k = 1; k <= static_cast<int>(line.trips.size()); ++k) {
    bool found = false;
    for_each_partition(line, k, max_idle, [&](const Partition&) { found = true; });
    if (found) return k;
  }
  return static_cast<int>(line.trips.size());
}

std::vector<int> trip_pairs(const msd::Trip& trip, const msd::Instance& inst) {
  const auto keys = msd::trip_coverage(trip, inst);
  return {keys.begin(), keys.end()};
}

double reward_of(const std::vector<int>& pairs, const msd::Instance& inst) {
  std::vector<int> sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const int num_t = inst.num_intervals();
  double total = 0.0;
  for (int key : sorted) total += inst.mesh[key / num_t].weight * inst.intervals[key % num_t].weight;
  return total;
}

double best_subset_reward(const std::vector<std::vector<int>>& chain_pairs, int budget, const msd::Instance& inst) {
  const int n = static_cast<int>(chain_pairs.size());
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (std::popcount(mask) > budget) continue;
    std::vector<int> pairs;
    for (int c = 0; c < n; ++c) {
      if (mask & (std::uint64_t{1} << c)) pairs.insert(pairs.end(), chain_pairs[c].begin(), chain_pairs[c].end());
    }
    best = std::max(best, reward_of(pairs, inst));
  }
  return best;
}

double brute_force_lower(const msd::Line& line, const msd::Instance& inst, int sensors, std::optional<int> max_idle) {
  const int fleet = min_chain_partition(line, max_idle);
  std::vector<std::vector<int>> per_trip;
  for (const auto& trip : line.trips) per_trip.push_back(trip_pairs(trip, inst));
  double best = 0.0;
  for_each_partition(line, fleet, max_idle, [&](const Partition& partition) {
    std::vector<std::vector<int>> chain_pairs;
    for (const auto& chain : partition) {
      std::vector<int> pairs;
      for (int t : chain) pairs.insert(pairs.end(), per_trip[t].begin(), per_trip[t].end());
      chain_pairs.push_back(std::move(pairs));
    }
    best = std::max(best, best_subset_reward(chain_pairs, sensors, inst));
  });
  return best;
}

}  // namespace oracle
