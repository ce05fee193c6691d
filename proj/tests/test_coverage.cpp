#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "msd/coverage.hpp"
#include "oracles.hpp"

namespace {

// 15 hourly intervals 7:00-22:00 over a 1x4 strip with uniform weights.
msd::Instance strip_instance() {
  msd::Instance inst;
  for (int g = 0; g < 4; ++g) inst.mesh.push_back({g, 0, g, 0.25});
  for (int t = 0; t < 15; ++t) inst.intervals.push_back({t, 420 + 60 * t, 480 + 60 * t, 1.0 / 15});
  msd::Line line;
  line.id = 0;
  line.terminals = {0, 1};
  line.trips.push_back({0, 0, 0, 1, 420, 60, {{1, 0.0}}});
  line.trips.push_back({1, 0, 0, 1, 450, 60, {{2, 0.0}, {3, 0.5}}});
  line.trips.push_back({2, 0, 1, 0, 1400, 30, {{0, 0.0}}});
  line.trips.push_back({3, 0, 1, 0, 430, 20, {{1, 0.0}}});
  inst.lines.push_back(line);
  inst.reindex();
  return inst;
}

msd::Instance small4() { return msd::load_instance(std::string(MSD_FIXTURE_DIR) + "/small4.json"); }

std::vector<int> all_trip_ids(const msd::Instance& inst) {
  std::vector<int> ids;
  for (const auto& line : inst.lines) {
    for (const auto& trip : line.trips) ids.push_back(trip.id);
  }
  return ids;
}

}  // namespace

TEST_CASE("trip coverage") {
  const auto inst = strip_instance();
  const int T = inst.num_intervals();

  SUBCASE("one hour on one grid") {
    CHECK(msd::trip_coverage(inst.trip(0), inst) == msd::PairSet{1 * T + 0});
  }
  SUBCASE("second grid entered exactly on the hour") {
    // 7:30-8:30: grid 2 during [7:30, 8:00), grid 3 during [8:00, 8:30).
    const auto got = msd::trip_coverage(inst.trip(1), inst);
    CHECK(got == msd::PairSet{2 * T + 0, 3 * T + 1});
    CHECK(std::vector<int>(got.begin(), got.end()) == oracle::simulate_trip_coverage(inst.trip(1), inst));
  }
  SUBCASE("trip after the horizon covers nothing") {
    CHECK(msd::trip_coverage(inst.trip(2), inst).empty());
  }
}

TEST_CASE("occupancy windows partition the trip duration") {
  const auto inst = small4();
  for (const auto& line : inst.lines) {
    for (const auto& trip : line.trips) {
      const auto windows = msd::trip_occupancy(trip);
      std::int64_t total = 0;
      for (std::size_t k = 0; k < windows.size(); ++k) {
        total += windows[k].end_tick - windows[k].begin_tick;
        if (k > 0) CHECK(windows[k].begin_tick == windows[k - 1].end_tick);
      }
      CHECK(total == trip.duration * msd::kTicksPerMinute);
    }
  }
}

TEST_CASE("trip coverage agrees with a second-by-second simulation") {
  const auto inst = small4();
  for (const auto& line : inst.lines) {
    for (const auto& trip : line.trips) {
      const auto got = msd::trip_coverage(trip, inst);
      CHECK(std::vector<int>(got.begin(), got.end()) == oracle::simulate_trip_coverage(trip, inst));
    }
  }
}

TEST_CASE("sensing reward") {
  msd::Instance inst;
  for (int g = 0; g < 3; ++g) inst.mesh.push_back({g, 0, g, 1.0 / 3});
  for (int t = 0; t < 4; ++t) inst.intervals.push_back({t, 60 * t, 60 * t + 60, 0.25});
  inst.reindex();
  msd::PairSet all;
  for (int k = 0; k < 12; ++k) all.push_back(k);
  CHECK(msd::sensing_reward(all, inst) == doctest::Approx(1.0));
  CHECK(msd::sensing_reward(msd::PairSet{}, inst) == 0.0);
  CHECK(msd::sensing_reward(msd::PairSet{0, 5, 11}, inst) == doctest::Approx(0.25));
}

TEST_CASE("coverage report") {
  const auto inst = strip_instance();
  const int T = inst.num_intervals();

  SUBCASE("single trip composes") {
    const std::vector<int> ids{1};
    const auto report = msd::coverage_report(ids, inst);
    CHECK(report.phi == msd::sensing_reward(msd::trip_coverage(inst.trip(1), inst), inst));
    CHECK(report.covered_pairs == 2);
  }
  SUBCASE("overlapping trips cap at one") {
    const std::vector<int> ids{0, 3};
    const auto report = msd::coverage_report(ids, inst);
    CHECK(report.raw_counts[1 * T + 0] == 2);
    CHECK(report.covered[1 * T + 0] == 1);
    CHECK(report.phi == doctest::Approx(0.25 / 15));
    for (std::size_t k = 0; k < report.raw_counts.size(); ++k) {
      CHECK(report.covered[k] == std::min(1, report.raw_counts[k]));
    }
  }
  SUBCASE("csv export") {
    const std::vector<int> ids{0};
    std::ostringstream out;
    msd::write_coverage_csv(msd::coverage_report(ids, inst), inst, out);
    const std::string text = out.str();
    CHECK(text.rfind("grid_id,row,col,weight,time_avg_coverage,completely_covered\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  }
}

TEST_CASE("completely covered grids match a per-grid scan") {
  const auto inst = small4();
  const auto ids = all_trip_ids(inst);
  const auto report = msd::coverage_report(ids, inst);

  const int T = inst.num_intervals();
  std::set<int> hit;
  for (const auto& line : inst.lines) {
    for (const auto& trip : line.trips) {
      for (int key : oracle::simulate_trip_coverage(trip, inst)) hit.insert(key);
    }
  }
  int complete = 0;
  for (int g = 0; g < inst.num_grids(); ++g) {
    bool every = true;
    for (int t = 0; t < T; ++t) every = every && hit.count(g * T + t);
    complete += every ? 1 : 0;
  }
  CHECK(report.completely_covered == complete);
  CHECK(report.covered_pairs == static_cast<int>(hit.size()));
  CHECK(report.phi >= 0.0);
  CHECK(report.phi <= 1.0);
}

TEST_CASE("reward is monotone and submodular over trip sets") {
  const auto inst = small4();
  const msd::CoverageTensor tensor(inst);
  const auto ids = all_trip_ids(inst);
  std::mt19937_64 rng(11);
  auto phi = [&](const std::vector<int>& set) { return msd::sensing_reward(tensor.union_of(set), inst); };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> a, b;
    for (int id : ids) {
      const auto r = rng() % 4;
      if (r == 0) a.push_back(id);
      if (r <= 1) b.push_back(id);  // a is a subset of b
    }
    const int x = ids[rng() % ids.size()];
    auto ax = a;
    ax.push_back(x);
    auto bx = b;
    bx.push_back(x);
    CHECK(phi(ax) >= phi(a) - 1e-15);
    CHECK(phi(ax) - phi(a) >= phi(bx) - phi(b) - 1e-12);
  }
}
