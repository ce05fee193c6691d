#include "msd/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "msd/coverage.hpp"
#include "msd/error.hpp"
#include "msd/fleet.hpp"
#include "msd/joint.hpp"
#include "msd/log.hpp"
#include "msd/select.hpp"
#include "msd/sequential.hpp"

namespace msd {

namespace {

using ojson = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ArgumentError("cannot write " + path.string());
  file << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << file.rdbuf();
  return ss.str();
}

Instance load_checked(const RunConfig& config) {
  if (config.instance.empty()) throw ArgumentError("an instance file is required");
  auto inst = load_instance(config.instance);
  if (config.interval) inst = with_interval_length(inst, *config.interval);
  if (config.gamma) {
    if (!(*config.gamma > 0.0 && *config.gamma <= 1.0)) throw ArgumentError("--gamma must lie in (0, 1]");
    inst.gamma = *config.gamma;
  }
  const auto report = validate_instance(inst);
  if (!report.ok()) {
    std::string all;
    for (const auto& v : report.violations) all += "\n  " + v;
    throw DataError("invalid instance:" + all);
  }
  return inst;
}

int sensors_of(const RunConfig& config, const Instance& inst) {
  const int n = config.sensors.value_or(inst.sensor_budget);
  if (n < 0) throw ArgumentError("--sensors must be non-negative");
  return n;
}

std::string delta_text(const RunConfig& config) {
  if (config.fixed_delta) return std::to_string(*config.fixed_delta);
  switch (config.delta_policy) {
    case DeltaPolicy::kSearch: return "auto";
    case DeltaPolicy::kStart: return "start";
    case DeltaPolicy::kNone: return "none";
  }
  return "auto";
}

std::string mode_text(AllocationMode mode) {
  switch (mode) {
    case AllocationMode::kAuto: return "auto";
    case AllocationMode::kExact: return "exact";
    case AllocationMode::kGreedy: return "greedy";
  }
  return "auto";
}

// Everything that can change a result; worker count and paths excluded.
std::string config_text(const RunConfig& config, const std::string& command, int sensors) {
  std::ostringstream os;
  os.precision(17);
  os << command << " sensors=" << sensors << " gamma=" << (config.gamma ? std::to_string(*config.gamma) : "file")
     << " interval=" << (config.interval ? std::to_string(*config.interval) : "file")
     << " mode=" << mode_text(config.mode) << " delta=" << delta_text(config)
     << " exhaustive=" << config.saturation_exhaustive << " time=" << config.limits.time_seconds
     << " nodes=" << config.limits.max_nodes << " gap=" << config.limits.relative_gap;
  return os.str();
}

PipelineOptions options_of(const RunConfig& config, std::mutex& dump_mutex) {
  PipelineOptions options;
  options.jobs = std::max(1, config.jobs);
  options.limits = config.limits;
  options.mode = config.mode;
  options.delta_policy = config.delta_policy;
  options.fixed_delta = config.fixed_delta;
  options.saturation_exhaustive = config.saturation_exhaustive;
  if (!config.dump_models.empty()) {
    std::filesystem::create_directories(config.dump_models);
    const auto dir = config.dump_models;
    options.model_sink = [dir, &dump_mutex](const BipModel& model) {
      std::lock_guard lock(dump_mutex);
      std::ofstream file(dir / ((model.name().empty() ? std::string("model") : model.name()) + ".lp"));
      write_lp(model, file);
    };
  }
  return options;
}

int status_code(const Deployment& d) { return d.all_optimal() ? kExitOk : kExitLimit; }

void write_coverage(const RunConfig& config, const Deployment& d, const Instance& inst) {
  if (config.coverage_csv.empty()) return;
  std::ofstream file(config.coverage_csv);
  if (!file) throw ArgumentError("cannot write " + config.coverage_csv.string());
  write_coverage_csv(coverage_report(d.instrumented_trips(), inst), inst, file);
}

int cmd_validate(const RunConfig& config, std::ostream& out) {
  const auto inst = load_instance(config.instance);
  const auto report = validate_instance(inst);
  if (report.ok()) {
    out << "ok: " << inst.lines.size() << " lines, " << inst.total_trips() << " trips, " << inst.num_grids()
        << " grids, " << inst.num_intervals() << " intervals\n";
    return kExitOk;
  }
  for (const auto& v : report.violations) out << "violation: " << v << '\n';
  return kExitData;
}

int cmd_gen(const RunConfig& config, std::ostream& out) {
  write_text(config.output, serialize_instance(generate_synthetic(config.generator)), out);
  return kExitOk;
}

int cmd_select(const RunConfig& config, std::ostream& out) {
  const auto inst = load_checked(config);
  const auto sel = select_lines(inst, config.limits);
  ojson root;
  root["gamma"] = inst.gamma;
  root["chosen"] = sel.chosen;
  root["covered_grids"] = sel.covered_grids;
  root["coverable_total"] = sel.coverable_total;
  root["required"] = sel.required;
  root["status"] = to_string(sel.status);
  root["gap"] = std::isfinite(sel.gap) ? ojson(sel.gap) : ojson(nullptr);
  write_text(config.output, root.dump(1) + "\n", out);
  return sel.status == SolveStatus::kOptimal ? kExitOk : kExitLimit;
}

int cmd_fleet(const RunConfig& config, std::ostream& out) {
  const auto inst = load_checked(config);
  std::vector<int> ids;
  if (!config.selection.empty()) {
    try {
      ids = ojson::parse(read_text(config.selection)).at("chosen").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("selection file: " + std::string(e.what()));
    }
  } else {
    for (const auto& line : inst.lines) ids.push_back(line.id);
  }
  ojson lines = ojson::array();
  for (int id : ids) {
    const Line& line = inst.line(id);
    const auto uncapped = min_fleet(line);
    ojson l;
    l["line_id"] = id;
    l["trips"] = line.trips.size();
    l["min_fleet"] = uncapped.min_fleet;
    std::optional<Minutes> delta = config.fixed_delta;
    if (!delta && config.delta_policy != DeltaPolicy::kNone) {
      const auto search = find_delta(line);
      delta = config.delta_policy == DeltaPolicy::kSearch ? search.delta : search.delta0;
      l["delta0"] = search.delta0;
      l["delta0_widened"] = search.widened;
    }
    l["delta"] = delta ? ojson(*delta) : ojson(nullptr);
    const auto graph = feasible_pairs(line, delta);
    l["feasible_pairs"] = graph.size();
    l["all_pairs"] = feasible_pairs(line).size();
    const auto capped = min_fleet(graph);
    l["capped_min_fleet"] = capped.min_fleet;
    ojson chains = ojson::array();
    for (const auto& chain : uncapped.chains) chains.push_back(chain.trips);
    l["chains"] = std::move(chains);
    lines.push_back(std::move(l));
  }
  ojson root;
  root["lines"] = std::move(lines);
  write_text(config.output, root.dump(1) + "\n", out);
  return kExitOk;
}

int cmd_solve(const RunConfig& config, std::ostream& out, bool joint) {
  const auto inst = load_checked(config);
  const int sensors = sensors_of(config, inst);
  std::mutex dump_mutex;
  const auto options = options_of(config, dump_mutex);
  auto d = joint ? run_joint(inst, sensors, options) : run_sequential(inst, sensors, options);
  d.fingerprint = fingerprint(inst, config_text(config, joint ? "solve-joint" : "solve-seq", sensors));
  write_text(config.output, deployment_to_json(d, config.timings), out);
  write_coverage(config, d, inst);
  return status_code(d);
}

bool parse_range(const std::string& text, int& from, int& to) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      from = to = std::stoi(text);
    } else {
      from = std::stoi(text.substr(0, dots));
      to = std::stoi(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    return false;
  }
  return from >= 0 && from <= to;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  const auto inst = load_checked(config);
  if (config.approach != "seq" && config.approach != "joint" && config.approach != "both") {
    throw ArgumentError("--approach must be seq, joint or both");
  }
  const bool seq = config.approach != "joint";
  const bool joint = config.approach != "seq";
  std::mutex dump_mutex;
  const auto options = options_of(config, dump_mutex);
  std::ostringstream csv;
  csv.precision(17);
  csv << "sensors";
  if (seq) csv << ",phi_sequential,pair_coverage_sequential";
  if (joint) csv << ",phi_joint,pair_coverage_joint";
  csv << '\n';
  int code = kExitOk;
  std::optional<Deployment> last_joint;
  for (int n = config.sweep_from; n <= config.sweep_to; ++n) {
    csv << n;
    if (seq) {
      const auto d = run_sequential(inst, n, options);
      code = std::max(code, status_code(d));
      csv << ',' << d.phi << ',' << d.covered_pairs;
    }
    if (joint) {
      auto d = run_joint(inst, n, options);
      code = std::max(code, status_code(d));
      csv << ',' << d.phi << ',' << d.covered_pairs;
      last_joint = std::move(d);
    }
    csv << '\n';
  }
  write_text(config.output, csv.str(), out);
  if (!config.lines_csv.empty()) {
    if (!last_joint) throw ArgumentError("--lines-csv needs the joint approach");
    std::ostringstream lines;
    lines.precision(17);
    lines << "line_id,sensors,phi_line,saturation\n";
    for (const auto& plan : last_joint->lines) {
      for (std::size_t m = 0; m < plan.phi_by_sensors.size(); ++m) {
        lines << plan.line_id << ',' << m << ',' << plan.phi_by_sensors[m] << ',' << plan.saturation << '\n';
      }
    }
    write_text(config.lines_csv, lines.str(), out);
  }
  return code;
}

ojson summarize(const Deployment& d, const Instance& inst) {
  const auto report = coverage_report(d.instrumented_trips(), inst);
  if (report.phi != d.phi) {
    throw InternalError("recorded reward " + std::to_string(d.phi) + " differs from the recomputed " +
                        std::to_string(report.phi));
  }
  ojson s;
  s["approach"] = d.approach;
  s["sensor_budget"] = d.sensor_budget;
  s["instrumented_chains"] = d.instrumented_chains();
  s["phi"] = report.phi;
  s["pair_coverage_percent"] = report.pair_coverage_percent();
  s["completely_covered_grids"] = report.completely_covered;
  s["all_optimal"] = d.all_optimal();
  s["max_gap"] = std::isfinite(d.max_gap()) ? ojson(d.max_gap()) : ojson(nullptr);
  return s;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  const auto inst = load_checked(config);
  if (config.deployment.empty()) throw ArgumentError("--deployment is required");
  const auto d = deployment_from_json(read_text(config.deployment));
  ojson root;
  root["deployment"] = summarize(d, inst);
  if (!config.compare.empty()) {
    const auto other = deployment_from_json(read_text(config.compare));
    root["compare"] = summarize(other, inst);
    root["phi_difference"] = d.phi - other.phi;
  }
  write_text(config.output, root.dump(1) + "\n", out);
  write_coverage(config, d, inst);
  return kExitOk;
}

}  // namespace

Instance with_interval_length(const Instance& inst, Minutes minutes) {
  const Minutes span = inst.horizon_end() - inst.horizon_start();
  if (minutes <= 0 || span % minutes != 0) {
    throw ArgumentError("interval length " + std::to_string(minutes) + " does not divide the " +
                        std::to_string(span) + "-minute horizon");
  }
  Instance out = inst;
  out.intervals.clear();
  const int count = span / minutes;
  for (int t = 0; t < count; ++t) {
    out.intervals.push_back({t, inst.horizon_start() + t * minutes, inst.horizon_start() + (t + 1) * minutes,
                             1.0 / count});
  }
  out.reindex();
  return out;
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == "validate") return cmd_validate(config, out);
    if (config.command == "gen") return cmd_gen(config, out);
    if (config.command == "select") return cmd_select(config, out);
    if (config.command == "fleet") return cmd_fleet(config, out);
    if (config.command == "solve-seq") return cmd_solve(config, out, false);
    if (config.command == "solve-joint") return cmd_solve(config, out, true);
    if (config.command == "sweep") return cmd_sweep(config, out);
    if (config.command == "report") return cmd_report(config, out);
    err << "error: unknown command '" << config.command << "'\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int run_command_line(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Mobile sensor deployment on bus fleets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "msd 1.0");

  std::string delta = "auto";
  std::string mode = "auto";
  std::string range = "1";
  std::optional<double> time_limit;
  std::optional<long> max_nodes;
  std::optional<double> gap;

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("instance", config.instance, "Instance JSON file")->required();
  };
  auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", config.output, "Output file (default stdout)"); };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--gamma", config.gamma, "Share of coverable grids the lines must reach");
    sub->add_option("--interval", config.interval, "Sensing interval length in minutes");
    sub->add_option("--time-limit", time_limit, "Seconds per 0-1 program");
    sub->add_option("--max-nodes", max_nodes, "Branch-and-bound nodes per 0-1 program");
    sub->add_option("--gap", gap, "Relative gap at which a solve may stop");
  };
  auto add_solve = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--mode", mode, "Sensor allocation: auto, exact or greedy")
        ->check(CLI::IsMember({"auto", "exact", "greedy"}));
    sub->add_option("--delta", delta, "Idle-time cap: auto, start, none or minutes");
    sub->add_option("--jobs", config.jobs, "Worker threads for per-line work")->check(CLI::PositiveNumber);
    sub->add_flag("--saturation-exhaustive", config.saturation_exhaustive, "Probe every sensor count per line");
    sub->add_option("--dump-models", config.dump_models, "Write every 0-1 program to this directory");
  };

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  add_instance(validate);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  auto& g = config.generator;
  gen->add_option("--seed", g.seed, "Random seed");
  gen->add_option("--lines", g.n_lines, "Number of lines")->check(CLI::PositiveNumber);
  gen->add_option("--trips-per-line", g.trips_per_line, "Trips per line")->check(CLI::PositiveNumber);
  gen->add_option("--delta", g.delta, "Sensing interval in minutes")->check(CLI::PositiveNumber);
  gen->add_option("--rows", g.mesh_rows, "Mesh rows")->check(CLI::PositiveNumber);
  gen->add_option("--cols", g.mesh_cols, "Mesh columns")->check(CLI::PositiveNumber);
  gen->add_option("--sensors", g.sensor_budget, "Sensor budget stored in the instance");
  gen->add_option("--gamma", g.gamma, "Coverage share stored in the instance");
  gen->add_option("--deadhead-percent", g.deadhead_percent, "Share of lines allowing cross-terminal moves");
  add_output(gen);

  auto* select = app.add_subcommand("select", "Choose the lines that cover the area");
  add_instance(select);
  add_common(select);
  add_output(select);

  auto* fleet = app.add_subcommand("fleet", "Minimum fleet, idle-time cap and feasible pairs per line");
  add_instance(fleet);
  add_common(fleet);
  fleet->add_option("--lines", config.selection, "Selection JSON from 'select'");
  fleet->add_option("--delta", delta, "Idle-time cap: auto, start, none or minutes");
  add_output(fleet);

  auto* seq = app.add_subcommand("solve-seq", "Select lines, form chains, then place sensors");
  add_instance(seq);
  seq->add_option("--sensors", config.sensors, "Sensor budget (default: from the instance)");
  add_solve(seq);
  seq->add_option("--coverage-csv", config.coverage_csv, "Per-grid coverage CSV");
  seq->add_flag("--timings", config.timings, "Include stage timings in the output");
  add_output(seq);

  auto* joint = app.add_subcommand("solve-joint", "Form chains and place sensors together");
  add_instance(joint);
  joint->add_option("--sensors", config.sensors, "Sensor budget (default: from the instance)");
  add_solve(joint);
  joint->add_option("--coverage-csv", config.coverage_csv, "Per-grid coverage CSV");
  joint->add_flag("--timings", config.timings, "Include stage timings in the output");
  add_output(joint);

  auto* sweep = app.add_subcommand("sweep", "Reward against the sensor budget");
  add_instance(sweep);
  sweep->add_option("--sensors", range, "Budget range, e.g. 1..6")->required();
  sweep->add_option("--approach", config.approach, "seq, joint or both");
  sweep->add_option("--lines-csv", config.lines_csv, "Per-line reward by sensor count (joint)");
  add_solve(sweep);
  add_output(sweep);

  auto* report = app.add_subcommand("report", "Recompute and summarize a deployment");
  add_instance(report);
  add_common(report);
  report->add_option("--deployment", config.deployment, "Deployment JSON")->required();
  report->add_option("--compare", config.compare, "Second deployment to compare against");
  report->add_option("--coverage-csv", config.coverage_csv, "Per-grid coverage CSV");
  add_output(report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  config.command = app.get_subcommands().front()->get_name();
  if (time_limit) config.limits.time_seconds = *time_limit;
  if (max_nodes) config.limits.max_nodes = *max_nodes;
  if (gap) config.limits.relative_gap = *gap;
  config.mode = mode == "exact" ? AllocationMode::kExact : mode == "greedy" ? AllocationMode::kGreedy : AllocationMode::kAuto;
  if (config.command != "gen") {
    if (delta == "auto") {
      config.delta_policy = DeltaPolicy::kSearch;
    } else if (delta == "start") {
      config.delta_policy = DeltaPolicy::kStart;
    } else if (delta == "none") {
      config.delta_policy = DeltaPolicy::kNone;
    } else {
      try {
        std::size_t used = 0;
        config.fixed_delta = std::stoi(delta, &used);
        if (used != delta.size() || *config.fixed_delta < 0) throw std::invalid_argument(delta);
      } catch (const std::exception&) {
        err << "error: --delta must be auto, start, none or a non-negative number of minutes\n";
        return kExitUsage;
      }
    }
  }
  if (config.command == "sweep" && !parse_range(range, config.sweep_from, config.sweep_to)) {
    err << "error: --sensors expects N or A..B with 0 <= A <= B\n";
    return kExitUsage;
  }
  return execute(config, out, err);
}

}  // namespace msd
