#ifndef MSD_FLEET_HPP
#define MSD_FLEET_HPP

#include <optional>
#include <vector>

#include "msd/instance.hpp"
#include "msd/solver.hpp"

namespace msd {

// Ordered pair of trips that one bus can serve back to back.
struct TripArc {
  int from = 0;  // trip id
  int to = 0;    // trip id
  Minutes slack = 0;  // terminal idle time

  bool operator==(const TripArc&) const = default;
  auto operator<=>(const TripArc&) const = default;
};

// Feasible trip pairs of one line (Omega_FTP when capped).
struct TripPairGraph {
  int line_id = 0;
  std::vector<int> trips;      // trip ids in (start, id) order
  std::vector<TripArc> arcs;   // sorted by (from position, to position)
  std::optional<Minutes> cap;  // idle-time cap delta, if any

  std::size_t size() const { return arcs.size(); }
};

struct TripChain {
  int id = 0;  // position within its line
  int line_id = 0;
  std::vector<int> trips;
  bool instrumented = false;
};

struct FleetResult {
  int line_id = 0;
  int min_fleet = 0;
  std::vector<TripArc> matching;
  std::vector<TripChain> chains;
};

// Terminal idle time t_j - (t_i + tau_i + deadhead); nullopt when the
// terminal move is not allowed.
std::optional<Minutes> idle_time(const Line& line, const Trip& from, const Trip& to);

bool is_connectable(const Line& line, const Trip& from, const Trip& to,
                    std::optional<Minutes> cap = std::nullopt);

// All pairs with idle time in [0, cap] (or [0, inf) without a cap).
TripPairGraph feasible_pairs(const Line& line, std::optional<Minutes> cap = std::nullopt);

// Minimum fleet by maximum bipartite matching (Hopcroft-Karp) over the
// connection graph; chains follow the matched successor links.
FleetResult min_fleet(const TripPairGraph& graph);
FleetResult min_fleet(const Line& line, std::optional<Minutes> cap = std::nullopt);

// The same quantity from the 0-1 program: maximize matched connections
// subject to one successor and one predecessor per trip.
int min_fleet_ilp(const Line& line, std::optional<Minutes> cap = std::nullopt);

// 2 * longest trip + longest deadhead of the line.
Minutes default_delta0(const Line& line);

struct DeltaSearch {
  Minutes delta = 0;
  Minutes delta0 = 0;
  int min_fleet = 0;
  bool widened = false;  // delta0 had to be doubled to keep the fleet size
};

// Bisection on [0, delta0] for an idle-time cap that keeps the uncapped
// minimum fleet size. Returns the smallest accepted probe, rounded up.
DeltaSearch find_delta(const Line& line, std::optional<Minutes> delta0 = std::nullopt, int iterations = 10);

// Chains start at trips without a predecessor and follow `successor`
// (indexed by position in graph.trips, -1 for none).
std::vector<TripChain> extract_chains(const TripPairGraph& graph, const std::vector<int>& successor);

}  // namespace msd

#endif  // MSD_FLEET_HPP
