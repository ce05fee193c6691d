#ifndef MSD_INSTANCE_HPP
#define MSD_INSTANCE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace msd {

// All times are integer minutes since midnight.
using Minutes = int;

inline constexpr int kSchemaVersion = 1;

struct GridCell {
  int id = 0;
  int row = 0;
  int col = 0;
  double weight = 0.0;  // spatial sensing weight w_g

  bool operator==(const GridCell&) const = default;
};

// Half-open [start, end) slice of the horizon with temporal weight mu_t.
struct SensingInterval {
  int index = 0;
  Minutes start = 0;
  Minutes end = 0;
  double weight = 0.0;

  Minutes length() const { return end - start; }
  bool operator==(const SensingInterval&) const = default;
};

// A grid visited by a trip together with the fraction of the trip length
// at which the bus enters it. The bus leaves at the next entry fraction
// (or at 1 for the last grid).
struct RouteStep {
  int grid = 0;
  double entry_fraction = 0.0;

  bool operator==(const RouteStep&) const = default;
};

struct Trip {
  int id = 0;
  int line_id = 0;
  int depart_terminal = 0;
  int arrive_terminal = 0;
  Minutes start = 0;
  Minutes duration = 0;
  std::vector<RouteStep> route;

  Minutes end() const { return start + duration; }
  bool operator==(const Trip&) const = default;
};

using TerminalPair = std::pair<int, int>;

struct Line {
  int id = 0;
  std::vector<int> terminals;
  // Deadhead minutes from the arrival terminal of one trip to the departure
  // terminal of the next. Same-terminal connections are implicitly zero; a
  // missing pair means the connection is not allowed.
  std::map<TerminalPair, Minutes> deadhead;
  std::vector<Trip> trips;

  // Deadhead time between terminals, nullopt when the move is forbidden.
  std::optional<Minutes> deadhead_between(int from, int to) const;
  bool operator==(const Line&) const = default;
};

struct Instance {
  std::vector<GridCell> mesh;
  std::vector<SensingInterval> intervals;
  std::vector<Line> lines;
  int sensor_budget = 0;
  double gamma = 1.0;

  int num_grids() const { return static_cast<int>(mesh.size()); }
  int num_intervals() const { return static_cast<int>(intervals.size()); }
  Minutes horizon_start() const;
  Minutes horizon_end() const;

  // Rebuilds the id lookup tables. Must be called after mutating lines or
  // mesh; loaders and the generator call it before returning.
  void reindex();

  const Trip& trip(int trip_id) const;
  const Line& line(int line_id) const;
  int line_position(int line_id) const;
  int grid_position(int grid_id) const;
  bool has_grid(int grid_id) const;
  int total_trips() const;

  bool operator==(const Instance& other) const;

 private:
  std::unordered_map<int, std::pair<int, int>> trip_index_;
  std::unordered_map<int, int> line_index_;
  std::unordered_map<int, int> grid_index_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Lists every violated data invariant; never throws.
ValidationReport validate_instance(const Instance& inst);

// Instance file IO. Throws ParseError, ReferenceError or SchemaVersionError.
Instance load_instance(const std::filesystem::path& path);
Instance parse_instance(const std::string& text);
std::string serialize_instance(const Instance& inst);
void save_instance(const Instance& inst, const std::filesystem::path& path);

struct SyntheticParams {
  int n_lines = 4;
  int trips_per_line = 12;
  int mesh_rows = 6;
  int mesh_cols = 6;
  Minutes horizon_start = 7 * 60;
  Minutes horizon_end = 22 * 60;
  Minutes delta = 60;
  Minutes min_duration = 20;
  Minutes max_duration = 45;
  // Percentage of lines whose cross-terminal deadhead moves are allowed.
  int deadhead_percent = 50;
  int sensor_budget = 2;
  double gamma = 1.0;
  std::uint64_t seed = 4;
  // Unnormalized per-grid weights in id order; empty means uniform.
  std::vector<double> weight_profile;
};

// Deterministic synthetic instance. Throws InfeasibleParams.
Instance generate_synthetic(const SyntheticParams& params);

// delta_gl: entry (g, l) is 1 iff some trip of line l visits grid g. Rows
// follow mesh order, columns follow line order.
class IncidenceMatrix {
 public:
  IncidenceMatrix(int num_grids, int num_lines)
      : num_grids_(num_grids), num_lines_(num_lines),
        cells_(static_cast<std::size_t>(num_grids) * num_lines, 0) {}

  int num_grids() const { return num_grids_; }
  int num_lines() const { return num_lines_; }
  bool at(int grid_pos, int line_pos) const {
    return cells_[static_cast<std::size_t>(grid_pos) * num_lines_ + line_pos] != 0;
  }
  void set(int grid_pos, int line_pos) {
    cells_[static_cast<std::size_t>(grid_pos) * num_lines_ + line_pos] = 1;
  }
  int column_sum(int line_pos) const;
  bool row_any(int grid_pos) const;
  // N_G: grids intersected by at least one line.
  int coverable_count() const;

  bool operator==(const IncidenceMatrix&) const = default;

 private:
  int num_grids_;
  int num_lines_;
  std::vector<std::uint8_t> cells_;
};

IncidenceMatrix incidence_matrix(const Instance& inst);

}  // namespace msd

#endif  // MSD_INSTANCE_HPP
