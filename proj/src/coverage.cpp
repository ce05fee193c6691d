#include "msd/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ostream>

#include "msd/error.hpp"

namespace msd {

std::vector<Occupancy> trip_occupancy(const Trip& trip) {
  std::vector<Occupancy> windows;
  windows.reserve(trip.route.size());
  const std::int64_t start = static_cast<std::int64_t>(trip.start) * kTicksPerMinute;
  const std::int64_t span = static_cast<std::int64_t>(trip.duration) * kTicksPerMinute;
  for (std::size_t k = 0; k < trip.route.size(); ++k) {
    const std::int64_t begin = start + std::llround(static_cast<double>(span) * trip.route[k].entry_fraction);
    const std::int64_t end = k + 1 < trip.route.size()
                                 ? start + std::llround(static_cast<double>(span) * trip.route[k + 1].entry_fraction)
                                 : start + span;
    windows.push_back({trip.route[k].grid, begin, end});
  }
  return windows;
}

PairSet trip_coverage(const Trip& trip, const Instance& inst) {
  PairSet keys;
  for (const auto& window : trip_occupancy(trip)) {
    if (window.end_tick <= window.begin_tick) continue;
    const int grid_pos = inst.grid_position(window.grid);
    for (const auto& iv : inst.intervals) {
      const std::int64_t lo = std::max<std::int64_t>(window.begin_tick, iv.start * kTicksPerMinute);
      const std::int64_t hi = std::min<std::int64_t>(window.end_tick, iv.end * kTicksPerMinute);
      if (hi > lo) keys.push_back(make_pair_key(inst, grid_pos, iv.index));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

double pair_weight(PairKey key, const Instance& inst) {
  const int num_t = inst.num_intervals();
  return inst.mesh[key / num_t].weight * inst.intervals[key % num_t].weight;
}

double sensing_reward(std::span<const PairKey> covered, const Instance& inst) {
  double phi = 0.0;
  for (PairKey key : covered) phi += pair_weight(key, inst);
  return phi;
}

PairSet set_union(std::span<const PairKey> a, std::span<const PairKey> b) {
  PairSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void merge_into(PairSet& acc, std::span<const PairKey> add) {
  acc = set_union(acc, add);
}

CoverageTensor::CoverageTensor(const Instance& inst) {
  for (const auto& line : inst.lines) {
    for (const auto& trip : line.trips) by_trip_.emplace(trip.id, trip_coverage(trip, inst));
  }
}

const PairSet& CoverageTensor::of(int trip_id) const {
  auto it = by_trip_.find(trip_id);
  if (it == by_trip_.end()) throw ReferenceError("no coverage for trip " + std::to_string(trip_id));
  return it->second;
}

PairSet CoverageTensor::union_of(std::span<const int> trip_ids) const {
  PairSet acc;
  for (int id : trip_ids) merge_into(acc, of(id));
  return acc;
}

PairSet CoverageReport::covered_set() const {
  PairSet keys;
  for (std::size_t k = 0; k < covered.size(); ++k) {
    if (covered[k]) keys.push_back(static_cast<PairKey>(k));
  }
  return keys;
}

CoverageReport coverage_report(std::span<const int> instrumented_trip_ids, const Instance& inst) {
  const int num_g = inst.num_grids();
  const int num_t = inst.num_intervals();
  CoverageReport report;
  report.total_pairs = num_g * num_t;
  report.raw_counts.assign(report.total_pairs, 0);
  report.covered.assign(report.total_pairs, 0);
  for (int id : instrumented_trip_ids) {
    for (PairKey key : trip_coverage(inst.trip(id), inst)) ++report.raw_counts[key];
  }
  for (int k = 0; k < report.total_pairs; ++k) {
    report.covered[k] = report.raw_counts[k] >= 1 ? 1 : 0;
    report.covered_pairs += report.covered[k];
  }
  report.grid_time_average.assign(num_g, 0.0);
  report.grid_complete.assign(num_g, false);
  for (int g = 0; g < num_g; ++g) {
    int hits = 0;
    for (int t = 0; t < num_t; ++t) hits += report.covered[g * num_t + t];
    report.grid_time_average[g] = num_t == 0 ? 0.0 : static_cast<double>(hits) / num_t;
    report.grid_complete[g] = num_t > 0 && hits == num_t;
    report.completely_covered += report.grid_complete[g] ? 1 : 0;
  }
  report.phi = sensing_reward(report.covered_set(), inst);
  return report;
}

void write_coverage_csv(const CoverageReport& report, const Instance& inst, std::ostream& out) {
  out << "grid_id,row,col,weight,time_avg_coverage,completely_covered\n";
  const auto precision = out.precision(17);
  for (int g = 0; g < inst.num_grids(); ++g) {
    const auto& cell = inst.mesh[g];
    out << cell.id << ',' << cell.row << ',' << cell.col << ',' << cell.weight << ','
        << report.grid_time_average[g] << ',' << (report.grid_complete[g] ? 1 : 0) << '\n';
  }
  out.precision(precision);
}

}  // namespace msd
