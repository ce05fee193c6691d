#include "msd/sequential.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "msd/error.hpp"
#include "msd/log.hpp"
#include "msd/parallel.hpp"
#include "msd/select.hpp"

namespace msd {

namespace {

PairSet union_of(std::span<const PairSet> coverage, const std::vector<int>& picked) {
  PairSet out;
  for (int c : picked) merge_into(out, coverage[c]);
  return out;
}

double marginal_gain(const PairSet& covered, const PairSet& add, const Instance& inst) {
  double gain = 0.0;
  auto it = covered.begin();
  for (PairKey key : add) {
    it = std::lower_bound(it, covered.end(), key);
    if (it == covered.end() || *it != key) gain += pair_weight(key, inst);
  }
  return gain;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

std::vector<PairSet> chain_coverage(std::span<const TripChain> chains, const CoverageTensor& tensor, int jobs) {
  return parallel_map<PairSet>(static_cast<int>(chains.size()), jobs,
                               [&](int c) { return tensor.union_of(chains[c].trips); });
}

AllocationResult allocate_greedy(std::span<const PairSet> coverage, const Instance& inst, int sensors) {
  if (sensors < 0) throw ArgumentError("sensor count must be non-negative");
  AllocationResult out;
  out.exact = false;
  out.contributions.assign(coverage.begin(), coverage.end());
  std::vector<bool> used(coverage.size(), false);
  PairSet covered;
  for (int round = 0; round < sensors; ++round) {
    int best = -1;
    double best_gain = 0.0;
    for (std::size_t c = 0; c < coverage.size(); ++c) {
      if (used[c]) continue;
      const double gain = marginal_gain(covered, coverage[c], inst);
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) break;
    used[best] = true;
    out.instrumented.push_back(best);
    merge_into(covered, coverage[best]);
  }
  std::sort(out.instrumented.begin(), out.instrumented.end());
  out.phi = sensing_reward(covered, inst);
  // Only a lower bound is known; the (1 - 1/e) guarantee caps the gap.
  out.status = SolveStatus::kFeasible;
  out.gap = out.phi > 0.0 && out.instrumented.size() == static_cast<std::size_t>(sensors) ? 1.0 / (std::exp(1.0) - 1.0)
                                                                                          : 0.0;
  return out;
}

AllocationResult allocate_greedy(std::span<const TripChain> chains, const Instance& inst, int sensors) {
  const CoverageTensor tensor(inst);
  const auto coverage = chain_coverage(chains, tensor);
  return allocate_greedy(coverage, inst, sensors);
}

AllocationResult allocate_exact(std::span<const PairSet> coverage, const Instance& inst, int sensors,
                                const PipelineOptions& options) {
  if (sensors < 0) throw ArgumentError("sensor count must be non-negative");
  const int n = static_cast<int>(coverage.size());
  AllocationResult out;
  out.contributions.assign(coverage.begin(), coverage.end());
  if (sensors == 0) return out;
  if (sensors >= n) {
    for (int c = 0; c < n; ++c) out.instrumented.push_back(c);
    out.phi = sensing_reward(union_of(coverage, out.instrumented), inst);
    return out;
  }

  BipModel model(Sense::kMaximize, "sensor_allocation");
  std::vector<int> z(n);
  for (int c = 0; c < n; ++c) z[c] = model.add_variable("z_" + std::to_string(c), 0.0, 1);

  PairSet pairs;
  for (const auto& cov : coverage) merge_into(pairs, cov);
  std::vector<std::vector<Term>> rows(pairs.size());
  std::vector<int> pair_var(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    pair_var[p] = model.add_variable("n_" + std::to_string(pairs[p]), pair_weight(pairs[p], inst), 0);
    rows[p].push_back({pair_var[p], 1.0});
  }
  for (int c = 0; c < n; ++c) {
    for (PairKey key : coverage[c]) {
      const auto p = std::lower_bound(pairs.begin(), pairs.end(), key) - pairs.begin();
      rows[p].push_back({z[c], -1.0});
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    model.add_constraint(std::move(rows[p]), Relation::kLessEqual, 0.0, "cover_" + std::to_string(pairs[p]));
  }
  std::vector<Term> budget;
  for (int c = 0; c < n; ++c) budget.push_back({z[c], 1.0});
  model.add_constraint(std::move(budget), Relation::kLessEqual, sensors, "budget");

  const auto greedy = allocate_greedy(coverage, inst, sensors);
  std::vector<std::uint8_t> hint(model.num_variables(), 0);
  for (int c : greedy.instrumented) hint[z[c]] = 1;
  const auto greedy_cover = union_of(coverage, greedy.instrumented);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    hint[pair_var[p]] = std::binary_search(greedy_cover.begin(), greedy_cover.end(), pairs[p]) ? 1 : 0;
  }
  model.set_hint(hint);
  if (options.model_sink) options.model_sink(model);

  const auto sol = solve_bip(model, options.limits);
  if (!sol.has_incumbent()) throw InternalError("sensor allocation produced no solution");
  for (int c = 0; c < n; ++c) {
    if (sol.value(z[c])) out.instrumented.push_back(c);
  }
  out.phi = sensing_reward(union_of(coverage, out.instrumented), inst);
  if (std::abs(out.phi - sol.objective_value) > 1e-9) {
    throw InternalError("allocation objective " + std::to_string(sol.objective_value) +
                        " disagrees with recomputed coverage " + std::to_string(out.phi));
  }
  out.status = sol.status;
  out.gap = sol.gap;
  out.nodes = sol.nodes;
  return out;
}

AllocationResult allocate_exact(std::span<const TripChain> chains, const Instance& inst, int sensors,
                                const PipelineOptions& options) {
  const CoverageTensor tensor(inst);
  const auto coverage = chain_coverage(chains, tensor, options.jobs);
  return allocate_exact(coverage, inst, sensors, options);
}

Deployment run_sequential(const Instance& inst, int sensors, const PipelineOptions& options) {
  if (sensors < 0) throw ArgumentError("sensor count must be non-negative");
  Stopwatch watch;
  Deployment out;
  out.approach = "sequential";
  out.sensor_budget = sensors;
  out.selection = select_lines(inst, options.limits);
  out.solves.push_back({"select", out.selection.status, out.selection.gap, 0});
  out.timings.push_back({"select", watch.lap()});

  const auto& chosen = out.selection.chosen;
  const auto fleets = parallel_map<FleetResult>(static_cast<int>(chosen.size()), options.jobs,
                                                [&](int k) { return min_fleet(inst.line(chosen[k])); });
  std::vector<TripChain> pool;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    LinePlan plan;
    plan.line_id = chosen[k];
    plan.min_fleet = fleets[k].min_fleet;
    plan.feasible_pairs = feasible_pairs(inst.line(chosen[k])).size();
    plan.chains = fleets[k].chains;
    pool.insert(pool.end(), plan.chains.begin(), plan.chains.end());
    out.lines.push_back(std::move(plan));
  }
  out.timings.push_back({"fleet", watch.lap()});

  const CoverageTensor tensor(inst);
  const auto coverage = chain_coverage(pool, tensor, options.jobs);
  std::size_t candidate_pairs = 0;
  {
    PairSet all;
    for (const auto& cov : coverage) merge_into(all, cov);
    candidate_pairs = all.size();
  }
  bool exact = options.mode == AllocationMode::kExact;
  if (options.mode == AllocationMode::kAuto) {
    exact = pool.size() <= options.exact_max_chains && candidate_pairs <= options.exact_max_pairs;
    if (!exact) {
      logger()->warn("{} chains over {} pairs exceed the exact threshold, allocating greedily", pool.size(),
                     candidate_pairs);
    }
  }
  const auto alloc = exact ? allocate_exact(coverage, inst, sensors, options)
                           : allocate_greedy(coverage, inst, sensors);
  out.allocation = exact ? "exact" : "greedy";
  out.solves.push_back({"allocate", alloc.status, alloc.gap, alloc.nodes});
  out.timings.push_back({"allocate", watch.lap()});

  std::vector<bool> on(pool.size(), false);
  for (int c : alloc.instrumented) on[c] = true;
  std::size_t index = 0;
  for (auto& plan : out.lines) {
    PairSet line_cover;
    for (auto& chain : plan.chains) {
      chain.instrumented = on[index];
      if (on[index]) {
        ++plan.sensors;
        merge_into(line_cover, coverage[index]);
      }
      ++index;
    }
    plan.phi_line = sensing_reward(line_cover, inst);
  }
  finalize_coverage(out, inst);
  if (out.phi != alloc.phi) throw InternalError("deployment coverage disagrees with the allocation");
  return out;
}

}  // namespace msd
