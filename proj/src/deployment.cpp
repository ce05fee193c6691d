#include "msd/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#include "json.hpp"

#include "msd/error.hpp"

namespace msd {

namespace {

using ojson = nlohmann::ordered_json;

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

double number_or_inf(const ojson& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

SolveStatus status_from(const std::string& s) {
  for (auto status : {SolveStatus::kOptimal, SolveStatus::kFeasible, SolveStatus::kInfeasible,
                      SolveStatus::kLimitReached}) {
    if (s == to_string(status)) return status;
  }
  throw ParseError("unknown solve status '" + s + "'");
}

}  // namespace

std::vector<int> Deployment::instrumented_trips() const {
  std::vector<int> trips;
  for (const auto& plan : lines) {
    for (const auto& chain : plan.chains) {
      if (chain.instrumented) trips.insert(trips.end(), chain.trips.begin(), chain.trips.end());
    }
  }
  std::sort(trips.begin(), trips.end());
  return trips;
}

int Deployment::instrumented_chains() const {
  int count = 0;
  for (const auto& plan : lines) {
    for (const auto& chain : plan.chains) count += chain.instrumented ? 1 : 0;
  }
  return count;
}

bool Deployment::all_optimal() const {
  return std::all_of(solves.begin(), solves.end(),
                     [](const SolveRecord& r) { return r.status == SolveStatus::kOptimal; });
}

double Deployment::max_gap() const {
  double gap = 0.0;
  for (const auto& r : solves) gap = std::max(gap, r.gap);
  return gap;
}

void finalize_coverage(Deployment& deployment, const Instance& inst) {
  const auto trips = deployment.instrumented_trips();
  const auto report = coverage_report(trips, inst);
  deployment.phi = report.phi;
  deployment.covered_pairs = report.covered_pairs;
  deployment.total_pairs = report.total_pairs;
  deployment.completely_covered = report.completely_covered;
}

std::string deployment_to_json(const Deployment& d, bool include_timings) {
  ojson root;
  root["approach"] = d.approach;
  root["fingerprint"] = d.fingerprint;
  root["sensor_budget"] = d.sensor_budget;
  root["allocation"] = d.allocation;
  root["phi"] = d.phi;
  root["covered_pairs"] = d.covered_pairs;
  root["total_pairs"] = d.total_pairs;
  root["completely_covered_grids"] = d.completely_covered;
  root["instrumented_chains"] = d.instrumented_chains();

  ojson sel;
  sel["chosen"] = d.selection.chosen;
  sel["covered_grids"] = d.selection.covered_grids;
  sel["coverable_total"] = d.selection.coverable_total;
  sel["required"] = d.selection.required;
  sel["status"] = to_string(d.selection.status);
  sel["gap"] = finite_or_null(d.selection.gap);
  root["selection"] = sel;

  ojson lines = ojson::array();
  for (const auto& plan : d.lines) {
    ojson l;
    l["line_id"] = plan.line_id;
    l["min_fleet"] = plan.min_fleet;
    l["delta"] = plan.delta ? ojson(*plan.delta) : ojson(nullptr);
    l["feasible_pairs"] = plan.feasible_pairs;
    l["sensors"] = plan.sensors;
    if (plan.saturation >= 0) l["saturation"] = plan.saturation;
    l["phi_line"] = plan.phi_line;
    if (!plan.phi_by_sensors.empty()) l["phi_by_sensors"] = plan.phi_by_sensors;
    ojson chains = ojson::array();
    for (const auto& chain : plan.chains) {
      ojson c;
      c["id"] = chain.id;
      c["instrumented"] = chain.instrumented;
      c["trips"] = chain.trips;
      chains.push_back(std::move(c));
    }
    l["chains"] = std::move(chains);
    lines.push_back(std::move(l));
  }
  root["lines"] = std::move(lines);

  ojson solves = ojson::array();
  for (const auto& r : d.solves) {
    solves.push_back({{"stage", r.stage}, {"status", to_string(r.status)}, {"gap", finite_or_null(r.gap)},
                      {"nodes", r.nodes}});
  }
  root["solves"] = std::move(solves);

  if (include_timings) {
    ojson timings = ojson::array();
    for (const auto& t : d.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    root["timings"] = std::move(timings);
  }
  return root.dump(1) + "\n";
}

Deployment deployment_from_json(const std::string& text) {
  ojson root;
  try {
    root = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("deployment: ") + e.what());
  }
  try {
    Deployment d;
    d.approach = root.at("approach").get<std::string>();
    d.fingerprint = root.value("fingerprint", "");
    d.sensor_budget = root.at("sensor_budget").get<int>();
    d.allocation = root.value("allocation", "exact");
    d.phi = root.at("phi").get<double>();
    d.covered_pairs = root.value("covered_pairs", 0);
    d.total_pairs = root.value("total_pairs", 0);
    d.completely_covered = root.value("completely_covered_grids", 0);
    const auto& sel = root.at("selection");
    d.selection.chosen = sel.at("chosen").get<std::vector<int>>();
    d.selection.covered_grids = sel.value("covered_grids", std::vector<int>{});
    d.selection.coverable_total = sel.value("coverable_total", 0);
    d.selection.required = sel.value("required", 0);
    d.selection.status = status_from(sel.value("status", "optimal"));
    d.selection.gap = number_or_inf(sel.value("gap", ojson(0.0)));
    for (const auto& l : root.at("lines")) {
      LinePlan plan;
      plan.line_id = l.at("line_id").get<int>();
      plan.min_fleet = l.value("min_fleet", 0);
      if (l.contains("delta") && !l["delta"].is_null()) plan.delta = l["delta"].get<Minutes>();
      plan.feasible_pairs = l.value("feasible_pairs", std::size_t{0});
      plan.sensors = l.value("sensors", 0);
      plan.saturation = l.value("saturation", -1);
      plan.phi_line = l.value("phi_line", 0.0);
      plan.phi_by_sensors = l.value("phi_by_sensors", std::vector<double>{});
      for (const auto& c : l.at("chains")) {
        TripChain chain;
        chain.id = c.at("id").get<int>();
        chain.line_id = plan.line_id;
        chain.instrumented = c.at("instrumented").get<bool>();
        chain.trips = c.at("trips").get<std::vector<int>>();
        plan.chains.push_back(std::move(chain));
      }
      d.lines.push_back(std::move(plan));
    }
    for (const auto& r : root.value("solves", ojson::array())) {
      d.solves.push_back({r.at("stage").get<std::string>(), status_from(r.at("status").get<std::string>()),
                          number_or_inf(r.at("gap")), r.value("nodes", 0L)});
    }
    for (const auto& t : root.value("timings", ojson::array())) {
      d.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("deployment: ") + e.what());
  }
}

std::string fingerprint(const Instance& inst, const std::string& config) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      hash ^= ch;
      hash *= 0x100000001b3ULL;
    }
  };
  feed(serialize_instance(inst));
  feed(std::string(1, '\0'));
  feed(config);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace msd
