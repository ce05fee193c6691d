#ifndef MSD_COVERAGE_HPP
#define MSD_COVERAGE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "msd/instance.hpp"

namespace msd {

// A (grid, interval) pair packed as grid_position * T + interval_index.
using PairKey = std::int32_t;
// Sorted, duplicate-free set of pair keys.
using PairSet = std::vector<PairKey>;

inline PairKey make_pair_key(const Instance& inst, int grid_pos, int interval) {
  return static_cast<PairKey>(grid_pos * inst.num_intervals() + interval);
}

// Occupancy resolution: one tick is one second.
inline constexpr std::int64_t kTicksPerMinute = 60;

struct Occupancy {
  int grid = 0;
  std::int64_t begin_tick = 0;  // inclusive
  std::int64_t end_tick = 0;    // exclusive
};

// Grid occupancy windows of a trip under constant speed, in route order.
// The windows partition [start, start + duration) exactly.
std::vector<Occupancy> trip_occupancy(const Trip& trip);

// n_igt support: (g, t) is covered iff the trip occupies g for a positive
// duration inside interval t. Trips outside the horizon cover nothing.
PairSet trip_coverage(const Trip& trip, const Instance& inst);

// Phi = sum over covered pairs of w_g * mu_t, accumulated in key order.
double sensing_reward(std::span<const PairKey> covered, const Instance& inst);
double pair_weight(PairKey key, const Instance& inst);

PairSet set_union(std::span<const PairKey> a, std::span<const PairKey> b);
void merge_into(PairSet& acc, std::span<const PairKey> add);

// Coverage support of every trip in the instance, keyed by trip id.
class CoverageTensor {
 public:
  CoverageTensor() = default;
  explicit CoverageTensor(const Instance& inst);

  const PairSet& of(int trip_id) const;
  // Union over a collection of trips.
  PairSet union_of(std::span<const int> trip_ids) const;
  std::size_t size() const { return by_trip_.size(); }

 private:
  std::unordered_map<int, PairSet> by_trip_;
};

struct CoverageReport {
  std::vector<int> raw_counts;    // N_gt, indexed by pair key
  std::vector<std::uint8_t> covered;  // n_gt = min(1, N_gt)
  std::vector<double> grid_time_average;  // (1/|T|) sum_t n_gt, mesh order
  std::vector<bool> grid_complete;        // covered in every interval
  int completely_covered = 0;
  int covered_pairs = 0;
  int total_pairs = 0;
  double phi = 0.0;

  double pair_coverage_percent() const {
    return total_pairs == 0 ? 0.0 : 100.0 * covered_pairs / total_pairs;
  }
  PairSet covered_set() const;
};

CoverageReport coverage_report(std::span<const int> instrumented_trip_ids, const Instance& inst);

// grid_id,row,col,weight,time_avg_coverage,completely_covered
void write_coverage_csv(const CoverageReport& report, const Instance& inst, std::ostream& out);

}  // namespace msd

#endif  // MSD_COVERAGE_HPP
