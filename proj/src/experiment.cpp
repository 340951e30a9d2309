#include "mbus/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mbus {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); }

int severity(solver::Status s) {
  switch (s) {
    case solver::Status::kOptimal: return 0;
    case solver::Status::kInfeasible: return 1;
    case solver::Status::kUnbounded: return 2;
    case solver::Status::kLimit: return 3;
  }
  return 3;
}

}  // namespace

Instance reseed_demand(const Instance& instance, std::uint64_t seed, std::optional<long> total) {
  if (!instance.recipe) {
    if (total && *total != instance.demand.total()) {
      throw InstanceError(instance.name,
                          "demand: explicit matrix cannot be rescaled to a new total");
    }
    return instance;
  }
  const long t = total.value_or(instance.recipe->total);
  if (t < 0) throw InstanceError(instance.name, "demand.total: must be non-negative");
  Instance out = with_demand(instance, generate_demand(seed, t, instance.num_stations()));
  out.recipe = DemandRecipe{seed, t};
  return out;
}

DesignRun run_design(const Instance& instance, const RunOptions& options) {
  DesignRun run;
  run.draws = sample_draws(options.seed, options.draws, instance.num_stations(),
                           instance.fleet.num_routes);
  if (options.subtour == SubtourMode::kMtz) {
    run.artifacts = build_mtz_variant(instance, run.draws, options.no_incentive);
  } else {
    run.artifacts = build_elp(instance, run.draws, {options.subtour, options.no_incentive});
  }
  solver::SolverConfig cfg;
  cfg.time_limit = options.time_limit;
  cfg.seed = options.seed;
  cfg.start = options.start;
  run.solution = solve_design(run.artifacts, cfg);
  if (run.solution.has_incumbent) {
    run.outcome = decode(run.solution, run.artifacts, instance);
    run.kpis = compute_kpis(*run.outcome, instance);
    run.validation = validate_nonlinear(*run.outcome, instance, run.draws);
  }
  return run;
}

Comparison run_compare(const Instance& instance, const RunOptions& options) {
  Comparison c;
  RunOptions base = options;
  base.no_incentive = true;
  c.no_incentive = run_design(instance, base);
  RunOptions inc = options;
  inc.no_incentive = false;
  // The no-incentive optimum is feasible for the incentive scheme: same
  // variables, one family of rows fewer.
  if (inc.start.empty() && c.no_incentive.solution.has_incumbent) {
    inc.start = c.no_incentive.solution.values;
  }
  c.incentive = run_design(instance, inc);
  return c;
}

std::string compare_csv(const Comparison& c) {
  std::string out = "scheme,status," + kpi_csv_header() + "\n";
  auto row = [&](const char* name, const DesignRun& run) {
    out += std::string(name) + "," + solver::to_string(run.solution.status) + ",";
    if (run.kpis) {
      out += kpi_csv_row(*run.kpis);
    } else {
      out += "NA,NA,NA,NA,NA,NA,NA,NA,NA";
    }
    out += "\n";
  };
  row("incentive", c.incentive);
  row("no_incentive", c.no_incentive);
  out += "delta,NA,";
  if (c.incentive.kpis && c.no_incentive.kpis) {
    const Kpis& a = *c.incentive.kpis;
    const Kpis& b = *c.no_incentive.kpis;
    auto diff = [](const std::optional<double>& x, const std::optional<double>& y) {
      return x && y ? opt_num(*x - *y) : std::string("NA");
    };
    out += num(a.ttd_km - b.ttd_km) + "," + diff(a.aivtt_min, b.aivtt_min) + "," +
           diff(a.tr_pct, b.tr_pct) + "," + diff(a.sr_pct, b.sr_pct) + "," +
           num(a.tsc - b.tsc) + "," + num(a.co1 - b.co1) + "," + num(a.co2 - b.co2) + "," +
           num(a.ct - b.ct) + "," + num(a.ce - b.ce);
  } else {
    out += "NA,NA,NA,NA,NA,NA,NA,NA,NA";
  }
  out += "\n";
  return out;
}

std::vector<SweepPoint> run_sweep(const Instance& instance, long lo, long hi, long step,
                                  const RunOptions& options) {
  if (step <= 0 || lo < 0 || hi < lo) {
    throw std::invalid_argument("sweep range must satisfy 0 <= lo <= hi and step > 0");
  }
  std::vector<SweepPoint> points;
  for (long total = lo; total <= hi; total += step) {
    const Instance level = reseed_demand(instance, options.seed, total);
    const Comparison c = run_compare(level, options);
    SweepPoint p;
    p.demand = total;
    p.incentive_status = c.incentive.solution.status;
    p.no_incentive_status = c.no_incentive.solution.status;
    if (c.incentive.kpis) {
      p.sr_incentive = c.incentive.kpis->sr_pct;
      p.transfers = c.incentive.kpis->transfers;
      p.tsc_incentive = c.incentive.kpis->tsc;
    }
    if (c.no_incentive.kpis) {
      p.sr_no_incentive = c.no_incentive.kpis->sr_pct;
      p.tsc_no_incentive = c.no_incentive.kpis->tsc;
    }
    points.push_back(p);
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "demand,SR_incentive,SR_noincentive,transfer_count\n";
  for (const auto& p : points) {
    out += std::to_string(p.demand) + "," + opt_num(p.sr_incentive) + "," +
           opt_num(p.sr_no_incentive) + "," + std::to_string(p.transfers) + "\n";
  }
  return out;
}

std::string sweep_gnuplot(const std::string& csv_path, const std::string& png_path) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set datafile missing 'NA'\n"
     << "set terminal pngcairo size 800,500\n"
     << "set output '" << png_path << "'\n"
     << "set xlabel 'total demand'\n"
     << "set ylabel 'service rate (%)'\n"
     << "set y2label 'transfers'\n"
     << "set ytics nomirror\n"
     << "set y2tics\n"
     << "set key bottom left\n"
     << "plot '" << csv_path << "' every ::1 using 1:2 with linespoints title 'incentive', \\\n"
     << "     '' every ::1 using 1:3 with linespoints title 'no incentive', \\\n"
     << "     '' every ::1 using 1:4 axes x1y2 with boxes fill transparent solid 0.3 "
        "title 'transfers'\n";
  return os.str();
}

solver::Status worst_status(const std::vector<solver::Status>& statuses) {
  solver::Status worst = solver::Status::kOptimal;
  for (auto s : statuses) {
    if (severity(s) > severity(worst)) worst = s;
  }
  return worst;
}

int exit_code(solver::Status status) {
  switch (status) {
    case solver::Status::kOptimal: return 0;
    case solver::Status::kInfeasible: return 2;
    case solver::Status::kUnbounded: return 2;
    case solver::Status::kLimit: return 3;
  }
  return 3;
}

}  // namespace mbus
