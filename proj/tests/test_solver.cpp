#include <random>
#include <sstream>

#include "doctest.h"
#include "msd/solver.hpp"
#include "oracles.hpp"

using msd::BipModel;
using msd::Relation;
using msd::Sense;
using msd::SolveStatus;

TEST_CASE("two-variable packing row") {
  BipModel model(Sense::kMaximize);
  const int x1 = model.add_variable("x1", 1.0);
  const int x2 = model.add_variable("x2", 1.0);
  model.add_constraint({{x1, 1.0}, {x2, 1.0}}, Relation::kLessEqual, 1.0);
  const auto sol = msd::solve_bip(model);
  CHECK(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective_value == doctest::Approx(1.0));
  CHECK(sol.gap == 0.0);
  CHECK(msd::check_assignment(model, sol.assignment).empty());
}

TEST_CASE("contradictory bounds are infeasible") {
  BipModel model(Sense::kMaximize);
  const int x1 = model.add_variable("x1", 1.0);
  model.add_constraint({{x1, 1.0}}, Relation::kGreaterEqual, 1.0);
  model.add_constraint({{x1, 1.0}}, Relation::kLessEqual, 0.0);
  const auto sol = msd::solve_bip(model);
  CHECK(sol.status == SolveStatus::kInfeasible);
  CHECK_FALSE(sol.has_incumbent());
}

TEST_CASE("fixed variables and equality rows") {
  BipModel model(Sense::kMinimize);
  std::vector<int> x;
  for (int j = 0; j < 4; ++j) x.push_back(model.add_variable("x" + std::to_string(j), j + 1.0));
  model.add_constraint({{x[0], 1}, {x[1], 1}, {x[2], 1}, {x[3], 1}}, Relation::kEqual, 2.0);
  model.fix(x[0], false);
  const auto sol = msd::solve_bip(model);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective_value == doctest::Approx(5.0));
  CHECK_FALSE(sol.value(x[0]));
}

TEST_CASE("duplicate rows do not change the answer") {
  BipModel model(Sense::kMaximize);
  const int a = model.add_variable("a", 2.0);
  const int b = model.add_variable("b", 3.0);
  for (int k = 0; k < 3; ++k) model.add_constraint({{a, 1.0}, {b, 1.0}}, Relation::kLessEqual, 1.0);
  const auto sol = msd::solve_bip(model);
  CHECK(sol.objective_value == doctest::Approx(3.0));
}

namespace {

BipModel random_set_cover(std::mt19937_64& rng, int num_sets, int num_elements) {
  BipModel model(Sense::kMinimize, "set_cover");
  for (int s = 0; s < num_sets; ++s) model.add_variable("s" + std::to_string(s), 1.0 + rng() % 4);
  for (int e = 0; e < num_elements; ++e) {
    std::vector<msd::Term> row;
    for (int s = 0; s < num_sets; ++s) {
      if (rng() % 4 == 0) row.push_back({s, 1.0});
    }
    if (row.empty()) row.push_back({static_cast<int>(rng() % num_sets), 1.0});
    model.add_constraint(std::move(row), Relation::kGreaterEqual, 1.0);
  }
  return model;
}

BipModel random_coverage(std::mt19937_64& rng, int num_sets, int num_elements, int budget) {
  BipModel model(Sense::kMaximize, "max_cover");
  std::vector<int> z;
  for (int s = 0; s < num_sets; ++s) z.push_back(model.add_variable("z" + std::to_string(s), 0.0, 1));
  std::vector<msd::Term> budget_row;
  for (int s : z) budget_row.push_back({s, 1.0});
  model.add_constraint(budget_row, Relation::kLessEqual, budget);
  for (int e = 0; e < num_elements; ++e) {
    const int n = model.add_variable("n" + std::to_string(e), 0.05 + (rng() % 100) / 100.0);
    std::vector<msd::Term> row{{n, 1.0}};
    for (int s : z) {
      if (rng() % 3 == 0) row.push_back({s, -1.0});
    }
    model.add_constraint(std::move(row), Relation::kLessEqual, 0.0);
  }
  return model;
}

}  // namespace

TEST_CASE("set cover models match exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = random_set_cover(rng, 15, 12);
    const auto expected = oracle::enumerate_bip(model);
    const auto sol = msd::solve_bip(model);
    REQUIRE(expected.has_value());
    REQUIRE(sol.status == SolveStatus::kOptimal);
    CHECK(sol.objective_value == doctest::Approx(*expected).epsilon(1e-12));
    CHECK(sol.bound == doctest::Approx(sol.objective_value));
  }
}

TEST_CASE("maximum coverage models match exhaustive enumeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = random_coverage(rng, 6, 9, 1 + trial % 3);
    const auto expected = oracle::enumerate_bip(model);
    const auto sol = msd::solve_bip(model);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    CHECK(sol.objective_value == doctest::Approx(*expected).epsilon(1e-12));
  }
}

TEST_CASE("solutions are deterministic") {
  std::mt19937_64 rng(99);
  const auto model = random_coverage(rng, 10, 14, 3);
  const auto a = msd::solve_bip(model);
  const auto b = msd::solve_bip(model);
  CHECK(a.assignment == b.assignment);
  CHECK(a.nodes == b.nodes);
}

TEST_CASE("node limit reports a valid bound") {
  std::mt19937_64 rng(5);
  const auto model = random_set_cover(rng, 15, 14);
  msd::SolveLimits limits;
  limits.max_nodes = 1;
  const auto sol = msd::solve_bip(model, limits);
  const auto exact = msd::solve_bip(model);
  if (sol.status == SolveStatus::kLimitReached) {
    CHECK(sol.bound <= exact.objective_value + 1e-9);
    if (sol.has_incumbent()) {
      CHECK(sol.objective_value >= exact.objective_value - 1e-9);
      CHECK(msd::check_assignment(model, sol.assignment).empty());
    }
  } else {
    CHECK(sol.status == SolveStatus::kOptimal);
  }
}

TEST_CASE("hint seeds the incumbent") {
  BipModel model(Sense::kMaximize);
  const int a = model.add_variable("a", 1.0);
  const int b = model.add_variable("b", 1.0);
  model.add_constraint({{a, 1.0}, {b, 1.0}}, Relation::kLessEqual, 1.0);
  model.set_hint({1, 1});  // infeasible, must be ignored
  CHECK(msd::solve_bip(model).objective_value == doctest::Approx(1.0));
  model.set_hint({0, 1});
  CHECK(msd::solve_bip(model).objective_value == doctest::Approx(1.0));
}

TEST_CASE("check_assignment reports violated rows") {
  BipModel model(Sense::kMaximize);
  const int a = model.add_variable("a", 1.0);
  model.add_constraint({{a, 1.0}}, Relation::kLessEqual, 0.0, "cap");
  CHECK(msd::check_assignment(model, std::vector<std::uint8_t>{1}).find("cap") != std::string::npos);
  CHECK(msd::check_assignment(model, std::vector<std::uint8_t>{0}).empty());
}

TEST_CASE("LP text dump") {
  BipModel model(Sense::kMinimize, "demo");
  const int a = model.add_variable("a", 1.0);
  const int b = model.add_variable("b[2]", 2.0);
  model.add_constraint({{a, 1.0}, {b, -1.0}}, Relation::kGreaterEqual, 0.0, "link");
  std::ostringstream out;
  msd::write_lp(model, out);
  const std::string text = out.str();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("link: 1 a - 1 b_2_ >= 0") != std::string::npos);
  CHECK(text.find("Binary") != std::string::npos);
}
