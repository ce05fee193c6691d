#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "msd/error.hpp"
#include "msd/instance.hpp"

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "gamma": 1.0,
  "sensor_budget": 1,
  "mesh": [{"id": 0, "row": 0, "col": 0, "weight": 1.0}],
  "intervals": [{"index": 0, "start": 420, "end": 480, "weight": 1.0}],
  "lines": [{"id": 7, "terminals": [1, 2], "deadhead": [],
             "trips": [{"id": 3, "depart_terminal": 1, "arrive_terminal": 2,
                        "start": 420, "duration": 60, "route": [[0, 0.0]]}]}]
})";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

msd::Instance two_line_instance() {
  msd::Instance inst;
  for (int g = 0; g < 6; ++g) inst.mesh.push_back({g, 0, g, 1.0 / 6});
  inst.intervals = {{0, 420, 480, 0.5}, {1, 480, 540, 0.5}};
  msd::Line a;
  a.id = 0;
  a.terminals = {0, 1};
  a.trips.push_back({0, 0, 0, 1, 420, 30, {{2, 0.0}, {5, 0.5}}});
  msd::Line b;
  b.id = 1;
  b.terminals = {2, 3};
  b.trips.push_back({1, 1, 2, 3, 420, 30, {{0, 0.0}, {1, 0.5}}});
  b.trips.push_back({2, 1, 3, 2, 460, 30, {{1, 0.0}, {0, 0.5}}});
  inst.lines = {a, b};
  inst.reindex();
  return inst;
}

}  // namespace

TEST_CASE("minimal instance loads") {
  const auto inst = msd::parse_instance(kMinimal);
  CHECK(inst.lines.size() == 1);
  CHECK(inst.total_trips() == 1);
  CHECK(msd::incidence_matrix(inst).coverable_count() == 1);
  CHECK(msd::validate_instance(inst).ok());
  CHECK(inst.trip(3).line_id == 7);
}

TEST_CASE("loader errors") {
  SUBCASE("unknown grid reference") {
    std::string text = kMinimal;
    text.replace(text.find("[[0, 0.0]]"), 10, "[[999, 0.0]]");
    CHECK_THROWS_AS(msd::parse_instance(text), msd::ReferenceError);
  }
  SUBCASE("unknown terminal") {
    std::string text = kMinimal;
    text.replace(text.find("\"arrive_terminal\": 2"), 20, "\"arrive_terminal\": 9");
    CHECK_THROWS_AS(msd::parse_instance(text), msd::ReferenceError);
  }
  SUBCASE("schema version") {
    std::string text = kMinimal;
    text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    CHECK_THROWS_AS(msd::parse_instance(text), msd::SchemaVersionError);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(msd::parse_instance("{\"mesh\": ["), msd::ParseError);
  }
  SUBCASE("wrong field type") {
    std::string text = kMinimal;
    text.replace(text.find("\"start\": 420, \"duration\""), 13, "\"start\": \"x\"");
    CHECK_THROWS_AS(msd::parse_instance(text), msd::ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(msd::load_instance("/nonexistent/instance.json"), msd::ParseError);
  }
}

TEST_CASE("bundled small4 fixture") {
  const auto inst = msd::load_instance(std::string(MSD_FIXTURE_DIR) + "/small4.json");
  CHECK(inst.lines.size() == 4);
  CHECK(inst.total_trips() == 48);
  CHECK(msd::validate_instance(inst).ok());

  msd::SyntheticParams params;
  params.seed = 4;
  params.n_lines = 4;
  params.trips_per_line = 12;
  params.delta = 60;
  CHECK(msd::serialize_instance(msd::generate_synthetic(params)) ==
        read_file(std::string(MSD_FIXTURE_DIR) + "/small4.json"));
}

TEST_CASE("validation reports violations instead of throwing") {
  auto inst = msd::parse_instance(kMinimal);
  CHECK(msd::validate_instance(inst).ok());

  SUBCASE("grid weights") {
    inst.mesh[0].weight = 0.9;
    const auto report = msd::validate_instance(inst);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].find("grid weights sum != 1") != std::string::npos);
  }
  SUBCASE("gap between intervals") {
    inst.intervals = {{0, 420, 480, 0.5}, {1, 500, 560, 0.5}};
    const auto report = msd::validate_instance(inst);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0] == "intervals not contiguous");
  }
  SUBCASE("route fractions") {
    inst.lines[0].trips[0].route = {{0, 0.0}, {0, 0.0}};
    const auto report = msd::validate_instance(inst);
    CHECK(std::any_of(report.violations.begin(), report.violations.end(),
                      [](const std::string& v) { return v.find("not strictly increasing") != std::string::npos; }));
  }
  SUBCASE("duration") {
    inst.lines[0].trips[0].duration = 0;
    CHECK_FALSE(msd::validate_instance(inst).ok());
  }
}

TEST_CASE("deadhead defaults") {
  msd::Line line;
  line.terminals = {1, 2};
  line.deadhead[{1, 2}] = 12;
  CHECK(line.deadhead_between(1, 2) == 12);
  CHECK(line.deadhead_between(2, 2) == 0);
  CHECK_FALSE(line.deadhead_between(2, 1).has_value());
}

TEST_CASE("synthetic generation") {
  msd::SyntheticParams params;
  params.seed = 4;

  SUBCASE("deterministic") {
    CHECK(msd::serialize_instance(msd::generate_synthetic(params)) ==
          msd::serialize_instance(msd::generate_synthetic(params)));
    params.seed = 5;
    const auto other = msd::serialize_instance(msd::generate_synthetic(params));
    params.seed = 4;
    CHECK(other != msd::serialize_instance(msd::generate_synthetic(params)));
  }
  SUBCASE("valid across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      params.seed = seed;
      const auto inst = msd::generate_synthetic(params);
      const auto report = msd::validate_instance(inst);
      CHECK_MESSAGE(report.ok(), "seed ", seed);
      CHECK(inst.total_trips() == params.n_lines * params.trips_per_line);
      for (const auto& line : inst.lines) {
        for (const auto& trip : line.trips) {
          CHECK(trip.start >= params.horizon_start);
          CHECK(trip.end() <= params.horizon_end);
        }
      }
    }
  }
  SUBCASE("trips cannot fit") {
    params.trips_per_line = 200;
    params.horizon_end = params.horizon_start + 60;
    params.min_duration = params.max_duration = 30;
    CHECK_THROWS_AS(msd::generate_synthetic(params), msd::InfeasibleParams);
  }
  SUBCASE("non-positive parameters") {
    params.n_lines = 0;
    CHECK_THROWS_AS(msd::generate_synthetic(params), msd::InfeasibleParams);
  }
  SUBCASE("weight profile is normalized") {
    params.mesh_rows = params.mesh_cols = 2;
    params.weight_profile = {1, 1, 2, 4};
    const auto inst = msd::generate_synthetic(params);
    CHECK(inst.mesh[3].weight == doctest::Approx(0.5));
    CHECK(msd::validate_instance(inst).ok());
  }
}

TEST_CASE("serialization round-trip") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    msd::SyntheticParams params;
    params.seed = seed;
    params.n_lines = 3;
    const auto inst = msd::generate_synthetic(params);
    const auto text = msd::serialize_instance(inst);
    const auto back = msd::parse_instance(text);
    CHECK(back == inst);
    CHECK(msd::serialize_instance(back) == text);
  }
}

TEST_CASE("incidence matrix") {
  const auto inst = two_line_instance();
  const auto delta = msd::incidence_matrix(inst);

  SUBCASE("single trip column") {
    for (int g = 0; g < 6; ++g) CHECK(delta.at(g, 0) == (g == 2 || g == 5));
  }
  SUBCASE("two directions union without double counting") {
    CHECK(delta.column_sum(1) == 2);
    CHECK(delta.at(0, 1));
    CHECK(delta.at(1, 1));
    CHECK(delta.coverable_count() == 4);
  }
  SUBCASE("independent of trip order and idempotent") {
    auto shuffled = inst;
    std::reverse(shuffled.lines[1].trips.begin(), shuffled.lines[1].trips.end());
    shuffled.reindex();
    CHECK(msd::incidence_matrix(shuffled) == delta);
    CHECK(msd::incidence_matrix(inst) == delta);
  }
}

TEST_CASE("incidence column sums match a recount of the routes") {
  const auto inst = msd::load_instance(std::string(MSD_FIXTURE_DIR) + "/small4.json");
  const auto delta = msd::incidence_matrix(inst);
  for (int l = 0; l < static_cast<int>(inst.lines.size()); ++l) {
    std::set<int> grids;
    for (const auto& trip : inst.lines[l].trips) {
      for (const auto& step : trip.route) grids.insert(step.grid);
    }
    CHECK(delta.column_sum(l) == static_cast<int>(grids.size()));
  }
}
