#include "msd/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "msd/error.hpp"

namespace msd {

namespace {

constexpr double kWeightTolerance = 1e-9;

using ojson = nlohmann::ordered_json;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::optional<Minutes> Line::deadhead_between(int from, int to) const {
  auto it = deadhead.find({from, to});
  if (it != deadhead.end()) return it->second;
  if (from == to) return 0;
  return std::nullopt;
}

Minutes Instance::horizon_start() const {
  return intervals.empty() ? 0 : intervals.front().start;
}

Minutes Instance::horizon_end() const {
  return intervals.empty() ? 0 : intervals.back().end;
}

void Instance::reindex() {
  trip_index_.clear();
  line_index_.clear();
  grid_index_.clear();
  for (int g = 0; g < num_grids(); ++g) grid_index_.emplace(mesh[g].id, g);
  for (int l = 0; l < static_cast<int>(lines.size()); ++l) {
    line_index_.emplace(lines[l].id, l);
    for (int k = 0; k < static_cast<int>(lines[l].trips.size()); ++k) {
      trip_index_.emplace(lines[l].trips[k].id, std::make_pair(l, k));
    }
  }
}

const Trip& Instance::trip(int trip_id) const {
  auto it = trip_index_.find(trip_id);
  if (it == trip_index_.end()) {
    throw ReferenceError("unknown trip id " + std::to_string(trip_id));
  }
  return lines[it->second.first].trips[it->second.second];
}

const Line& Instance::line(int line_id) const {
  return lines[line_position(line_id)];
}

int Instance::line_position(int line_id) const {
  auto it = line_index_.find(line_id);
  if (it == line_index_.end()) {
    throw ReferenceError("unknown line id " + std::to_string(line_id));
  }
  return it->second;
}

int Instance::grid_position(int grid_id) const {
  auto it = grid_index_.find(grid_id);
  if (it == grid_index_.end()) {
    throw ReferenceError("unknown grid id " + std::to_string(grid_id));
  }
  return it->second;
}

bool Instance::has_grid(int grid_id) const {
  return grid_index_.count(grid_id) != 0;
}

int Instance::total_trips() const {
  int n = 0;
  for (const auto& line : lines) n += static_cast<int>(line.trips.size());
  return n;
}

bool Instance::operator==(const Instance& other) const {
  return mesh == other.mesh && intervals == other.intervals &&
         lines == other.lines && sensor_budget == other.sensor_budget &&
         gamma == other.gamma;
}

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport report;
  auto& out = report.violations;

  if (inst.mesh.empty()) out.emplace_back("mesh is empty");
  {
    std::set<int> ids;
    double sum = 0.0;
    bool negative = false;
    for (const auto& cell : inst.mesh) {
      ids.insert(cell.id);
      sum += cell.weight;
      negative = negative || cell.weight < 0.0;
    }
    if (ids.size() != inst.mesh.size()) out.emplace_back("duplicate grid ids");
    if (!ids.empty() && (*ids.begin() != 0 || *ids.rbegin() != static_cast<int>(ids.size()) - 1)) {
      out.emplace_back("grid ids are not dense 0..N-1");
    }
    if (negative) out.emplace_back("negative grid weight");
    if (!inst.mesh.empty() && std::abs(sum - 1.0) > kWeightTolerance) {
      out.emplace_back("grid weights sum != 1 (got " + format_double(sum) + ")");
    }
  }

  if (inst.intervals.empty()) out.emplace_back("no sensing intervals");
  {
    double sum = 0.0;
    bool negative = false;
    bool contiguous = true;
    bool equal_length = true;
    bool indexed = true;
    bool positive = true;
    for (std::size_t k = 0; k < inst.intervals.size(); ++k) {
      const auto& iv = inst.intervals[k];
      sum += iv.weight;
      negative = negative || iv.weight < 0.0;
      positive = positive && iv.end > iv.start;
      indexed = indexed && iv.index == static_cast<int>(k);
      if (k > 0) {
        contiguous = contiguous && inst.intervals[k - 1].end == iv.start;
        equal_length = equal_length && inst.intervals[k - 1].length() == iv.length();
      }
    }
    if (!positive) out.emplace_back("interval with non-positive length");
    if (!indexed) out.emplace_back("interval indices are not 0..T-1 in order");
    if (!contiguous) out.emplace_back("intervals not contiguous");
    if (!equal_length) out.emplace_back("intervals have unequal lengths");
    if (negative) out.emplace_back("negative interval weight");
    if (!inst.intervals.empty() && std::abs(sum - 1.0) > kWeightTolerance) {
      out.emplace_back("interval weights sum != 1 (got " + format_double(sum) + ")");
    }
  }

  if (!(inst.gamma > 0.0 && inst.gamma <= 1.0)) out.emplace_back("gamma outside (0, 1]");
  if (inst.sensor_budget < 0) out.emplace_back("negative sensor budget");

  std::set<int> grid_ids;
  for (const auto& cell : inst.mesh) grid_ids.insert(cell.id);
  std::set<int> line_ids;
  std::set<int> trip_ids;
  for (const auto& line : inst.lines) {
    const std::string where = "line " + std::to_string(line.id);
    if (!line_ids.insert(line.id).second) out.emplace_back("duplicate line id " + std::to_string(line.id));
    if (line.trips.empty()) out.emplace_back(where + ": no trips");
    std::set<int> terminals(line.terminals.begin(), line.terminals.end());
    for (const auto& [pair, minutes] : line.deadhead) {
      if (minutes < 0) out.emplace_back(where + ": negative deadhead");
      if (!terminals.count(pair.first) || !terminals.count(pair.second)) {
        out.emplace_back(where + ": deadhead references unknown terminal");
      }
    }
    for (const auto& trip : line.trips) {
      const std::string twhere = where + " trip " + std::to_string(trip.id);
      if (!trip_ids.insert(trip.id).second) out.emplace_back("duplicate trip id " + std::to_string(trip.id));
      if (trip.line_id != line.id) out.emplace_back(twhere + ": line_id mismatch");
      if (trip.duration <= 0) out.emplace_back(twhere + ": duration must be positive");
      if (!terminals.count(trip.depart_terminal) || !terminals.count(trip.arrive_terminal)) {
        out.emplace_back(twhere + ": terminal not listed on line");
      }
      if (trip.route.empty()) {
        out.emplace_back(twhere + ": empty route");
        continue;
      }
      if (trip.route.front().entry_fraction != 0.0) out.emplace_back(twhere + ": first entry fraction must be 0");
      bool increasing = true;
      bool in_range = true;
      for (std::size_t k = 0; k < trip.route.size(); ++k) {
        const auto& step = trip.route[k];
        in_range = in_range && step.entry_fraction >= 0.0 && step.entry_fraction < 1.0;
        if (k > 0) increasing = increasing && trip.route[k - 1].entry_fraction < step.entry_fraction;
        if (!grid_ids.count(step.grid)) {
          out.emplace_back(twhere + ": unknown grid " + std::to_string(step.grid));
        }
      }
      if (!increasing) out.emplace_back(twhere + ": entry fractions not strictly increasing");
      if (!in_range) out.emplace_back(twhere + ": entry fraction outside [0, 1)");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON IO

namespace {

ojson to_json(const Instance& inst) {
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  doc["gamma"] = inst.gamma;
  doc["sensor_budget"] = inst.sensor_budget;
  ojson mesh = ojson::array();
  for (const auto& cell : inst.mesh) {
    mesh.push_back({{"id", cell.id}, {"row", cell.row}, {"col", cell.col}, {"weight", cell.weight}});
  }
  doc["mesh"] = std::move(mesh);
  ojson intervals = ojson::array();
  for (const auto& iv : inst.intervals) {
    intervals.push_back({{"index", iv.index}, {"start", iv.start}, {"end", iv.end}, {"weight", iv.weight}});
  }
  doc["intervals"] = std::move(intervals);
  ojson lines = ojson::array();
  for (const auto& line : inst.lines) {
    ojson jl;
    jl["id"] = line.id;
    jl["terminals"] = line.terminals;
    ojson dh = ojson::array();
    for (const auto& [pair, minutes] : line.deadhead) dh.push_back({pair.first, pair.second, minutes});
    jl["deadhead"] = std::move(dh);
    ojson trips = ojson::array();
    for (const auto& trip : line.trips) {
      ojson jt;
      jt["id"] = trip.id;
      jt["depart_terminal"] = trip.depart_terminal;
      jt["arrive_terminal"] = trip.arrive_terminal;
      jt["start"] = trip.start;
      jt["duration"] = trip.duration;
      ojson route = ojson::array();
      for (const auto& step : trip.route) route.push_back({step.grid, step.entry_fraction});
      jt["route"] = std::move(route);
      trips.push_back(std::move(jt));
    }
    jl["trips"] = std::move(trips);
    lines.push_back(std::move(jl));
  }
  doc["lines"] = std::move(lines);
  return doc;
}

Instance from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
  if (!doc.contains("schema_version")) throw SchemaVersionError("missing schema_version");
  const int version = doc.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw SchemaVersionError("unsupported schema_version " + std::to_string(version) +
                             " (expected " + std::to_string(kSchemaVersion) + ")");
  }

  Instance inst;
  inst.gamma = doc.value("gamma", 1.0);
  inst.sensor_budget = doc.value("sensor_budget", 0);
  for (const auto& jc : doc.at("mesh")) {
    inst.mesh.push_back({jc.at("id").get<int>(), jc.at("row").get<int>(), jc.at("col").get<int>(),
                         jc.at("weight").get<double>()});
  }
  for (const auto& ji : doc.at("intervals")) {
    inst.intervals.push_back({ji.at("index").get<int>(), ji.at("start").get<int>(),
                              ji.at("end").get<int>(), ji.at("weight").get<double>()});
  }
  std::set<int> grid_ids;
  for (const auto& cell : inst.mesh) grid_ids.insert(cell.id);

  for (const auto& jl : doc.at("lines")) {
    Line line;
    line.id = jl.at("id").get<int>();
    line.terminals = jl.at("terminals").get<std::vector<int>>();
    std::set<int> terminals(line.terminals.begin(), line.terminals.end());
    for (const auto& jd : jl.value("deadhead", nlohmann::json::array())) {
      if (!jd.is_array() || jd.size() != 3) throw ParseError("deadhead entries must be [from, to, minutes]");
      const int from = jd[0].get<int>();
      const int to = jd[1].get<int>();
      if (!terminals.count(from) || !terminals.count(to)) {
        throw ReferenceError("line " + std::to_string(line.id) + ": deadhead references unknown terminal");
      }
      line.deadhead[{from, to}] = jd[2].get<int>();
    }
    for (const auto& jt : jl.at("trips")) {
      Trip trip;
      trip.id = jt.at("id").get<int>();
      trip.line_id = line.id;
      trip.depart_terminal = jt.at("depart_terminal").get<int>();
      trip.arrive_terminal = jt.at("arrive_terminal").get<int>();
      trip.start = jt.at("start").get<int>();
      trip.duration = jt.at("duration").get<int>();
      if (!terminals.count(trip.depart_terminal) || !terminals.count(trip.arrive_terminal)) {
        throw ReferenceError("trip " + std::to_string(trip.id) + " references a terminal not on line " +
                             std::to_string(line.id));
      }
      for (const auto& js : jt.at("route")) {
        if (!js.is_array() || js.size() != 2) throw ParseError("route entries must be [grid_id, fraction]");
        RouteStep step{js[0].get<int>(), js[1].get<double>()};
        if (!grid_ids.count(step.grid)) {
          throw ReferenceError("trip " + std::to_string(trip.id) + " references unknown grid " +
                               std::to_string(step.grid));
        }
        trip.route.push_back(step);
      }
      line.trips.push_back(std::move(trip));
    }
    inst.lines.push_back(std::move(line));
  }
  inst.reindex();
  return inst;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance JSON: ") + e.what());
  }
  try {
    return from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance does not match schema: ") + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string serialize_instance(const Instance& inst) {
  return to_json(inst).dump(1) + "\n";
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_instance(inst);
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

// Portable draws on top of mt19937_64; the std distributions are not
// guaranteed to produce identical streams across standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : engine_(seed) {}
  int uniform(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  bool percent(int p) { return uniform(0, 99) < p; }

 private:
  std::mt19937_64 engine_;
};

// Monotone lattice path between two cells, visiting each cell once.
std::vector<int> lattice_path(Draw& draw, int rows, int cols, int r0, int c0, int r1, int c1) {
  std::vector<int> cells{r0 * cols + c0};
  int r = r0;
  int c = c0;
  const int dr = r1 > r0 ? 1 : -1;
  const int dc = c1 > c0 ? 1 : -1;
  while (r != r1 || c != c1) {
    const int vertical_left = std::abs(r1 - r);
    const int horizontal_left = std::abs(c1 - c);
    if (horizontal_left == 0 || (vertical_left > 0 && draw.uniform(1, vertical_left + horizontal_left) <= vertical_left)) {
      r += dr;
    } else {
      c += dc;
    }
    cells.push_back(r * cols + c);
  }
  (void)rows;
  return cells;
}

std::vector<RouteStep> route_from_cells(const std::vector<int>& cells) {
  std::vector<RouteStep> route;
  const double n = static_cast<double>(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    route.push_back({cells[k], static_cast<double>(k) / n});
  }
  return route;
}

}  // namespace

Instance generate_synthetic(const SyntheticParams& p) {
  if (p.n_lines <= 0 || p.trips_per_line <= 0 || p.mesh_rows <= 0 || p.mesh_cols <= 0 || p.delta <= 0 ||
      p.min_duration <= 0 || p.max_duration < p.min_duration) {
    throw InfeasibleParams("generator parameters must be positive");
  }
  const Minutes horizon = p.horizon_end - p.horizon_start;
  if (horizon <= 0) throw InfeasibleParams("empty horizon");
  if (horizon % p.delta != 0) throw InfeasibleParams("delta must divide the horizon length");
  if (p.mesh_rows * p.mesh_cols < 2) throw InfeasibleParams("mesh needs at least two cells");
  if (!p.weight_profile.empty() && static_cast<int>(p.weight_profile.size()) != p.mesh_rows * p.mesh_cols) {
    throw InfeasibleParams("weight profile size must match mesh size");
  }
  // Each direction must fit its trips at distinct departure minutes.
  const int per_direction = (p.trips_per_line + 1) / 2;
  const Minutes max_duration_both = p.max_duration + 3;
  if (horizon - max_duration_both < per_direction) {
    throw InfeasibleParams("trips cannot fit in the horizon: " + std::to_string(per_direction) +
                           " departures per direction need more than " + std::to_string(horizon) + " minutes");
  }

  Draw draw(p.seed);
  Instance inst;
  inst.sensor_budget = p.sensor_budget;
  inst.gamma = p.gamma;

  const int num_cells = p.mesh_rows * p.mesh_cols;
  double weight_total = 0.0;
  if (!p.weight_profile.empty()) {
    for (double w : p.weight_profile) {
      if (w < 0.0) throw InfeasibleParams("negative weight in profile");
      weight_total += w;
    }
    if (weight_total <= 0.0) throw InfeasibleParams("weight profile sums to zero");
  }
  for (int g = 0; g < num_cells; ++g) {
    const double w = p.weight_profile.empty() ? 1.0 / num_cells : p.weight_profile[g] / weight_total;
    inst.mesh.push_back({g, g / p.mesh_cols, g % p.mesh_cols, w});
  }
  const int num_intervals = horizon / p.delta;
  for (int t = 0; t < num_intervals; ++t) {
    inst.intervals.push_back({t, p.horizon_start + t * p.delta, p.horizon_start + (t + 1) * p.delta,
                              1.0 / num_intervals});
  }

  int next_trip_id = 0;
  for (int l = 0; l < p.n_lines; ++l) {
    Line line;
    line.id = l;
    const int term_a = 2 * l;
    const int term_b = 2 * l + 1;
    line.terminals = {term_a, term_b};

    int ca = draw.uniform(0, num_cells - 1);
    int cb = draw.uniform(0, num_cells - 2);
    if (cb >= ca) ++cb;
    const auto cells = lattice_path(draw, p.mesh_rows, p.mesh_cols, ca / p.mesh_cols, ca % p.mesh_cols,
                                    cb / p.mesh_cols, cb % p.mesh_cols);
    std::vector<int> reversed(cells.rbegin(), cells.rend());

    const Minutes base = draw.uniform(p.min_duration, p.max_duration);
    const Minutes durations[2] = {base, std::max(1, base + draw.uniform(-3, 3))};
    if (draw.percent(p.deadhead_percent)) {
      const Minutes dh = std::max(1, (base * 7) / 10);
      line.deadhead[{term_a, term_b}] = dh;
      line.deadhead[{term_b, term_a}] = dh;
    }

    struct Departure {
      Minutes start;
      int direction;
    };
    std::vector<Departure> departures;
    for (int dir = 0; dir < 2; ++dir) {
      const int count = dir == 0 ? per_direction : p.trips_per_line - per_direction;
      if (count == 0) continue;
      const Minutes headway = (horizon - durations[dir]) / count;
      for (int k = 0; k < count; ++k) {
        departures.push_back({p.horizon_start + k * headway + draw.uniform(0, headway - 1), dir});
      }
    }
    std::stable_sort(departures.begin(), departures.end(),
                     [](const Departure& a, const Departure& b) { return a.start < b.start; });
    for (const auto& dep : departures) {
      Trip trip;
      trip.id = next_trip_id++;
      trip.line_id = line.id;
      trip.depart_terminal = dep.direction == 0 ? term_a : term_b;
      trip.arrive_terminal = dep.direction == 0 ? term_b : term_a;
      trip.start = dep.start;
      trip.duration = durations[dep.direction];
      trip.route = route_from_cells(dep.direction == 0 ? cells : reversed);
      line.trips.push_back(std::move(trip));
    }
    inst.lines.push_back(std::move(line));
  }
  inst.reindex();
  return inst;
}

// ---------------------------------------------------------------------------

int IncidenceMatrix::column_sum(int line_pos) const {
  int sum = 0;
  for (int g = 0; g < num_grids_; ++g) sum += at(g, line_pos) ? 1 : 0;
  return sum;
}

bool IncidenceMatrix::row_any(int grid_pos) const {
  for (int l = 0; l < num_lines_; ++l) {
    if (at(grid_pos, l)) return true;
  }
  return false;
}

int IncidenceMatrix::coverable_count() const {
  int n = 0;
  for (int g = 0; g < num_grids_; ++g) n += row_any(g) ? 1 : 0;
  return n;
}

IncidenceMatrix incidence_matrix(const Instance& inst) {
  IncidenceMatrix delta(inst.num_grids(), static_cast<int>(inst.lines.size()));
  for (int l = 0; l < static_cast<int>(inst.lines.size()); ++l) {
    for (const auto& trip : inst.lines[l].trips) {
      for (const auto& step : trip.route) delta.set(inst.grid_position(step.grid), l);
    }
  }
  return delta;
}

}  // namespace msd
