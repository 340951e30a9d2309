// Command-line front end: design, compare and sweep.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mbus/experiment.hpp"
#include "mbus/milp_io.hpp"

namespace fs = std::filesystem;
using namespace mbus;

namespace {

constexpr int kInputError = 4;

struct Args {
  std::string instance_path;
  std::optional<std::uint64_t> seed;
  int draws = 30;
  bool no_incentive = false;
  std::string subtour = "lazy";
  std::vector<std::string> export_spec;
  bool export_only = false;
  std::string out_dir = ".";
  std::optional<long> demand;
  std::string sweep = "50:150:25";
  double time_limit = -1.0;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--instance", a.instance_path, "instance file")->required();
  cmd->add_option("--seed", a.seed, "seed for demand weights and choice draws");
  cmd->add_option("--draws", a.draws, "number of draws D")->check(CLI::PositiveNumber);
  cmd->add_option("--subtour", a.subtour, "lazy or mtz")
      ->check(CLI::IsMember({"lazy", "mtz"}));
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--time-limit", a.time_limit, "seconds per solve");
}

struct Prepared {
  Instance instance;
  RunOptions options;
};

Prepared prepare(const Args& a) {
  Instance inst = load_instance_file(a.instance_path);
  const std::uint64_t seed = a.seed.value_or(inst.recipe ? inst.recipe->seed : 1);
  if (a.seed || a.demand) inst = reseed_demand(inst, seed, a.demand);
  RunOptions opt;
  opt.seed = seed;
  opt.draws = a.draws;
  opt.no_incentive = a.no_incentive;
  opt.subtour = parse_subtour_mode(a.subtour);
  opt.time_limit = a.time_limit;
  return {std::move(inst), opt};
}

void log_solve(const char* label, const DesignRun& run) {
  const auto& s = run.solution;
  std::cerr << label << ": " << solver::to_string(s.status) << " objective " << s.objective
            << " bound " << s.bound << " nodes " << s.nodes << " seconds " << s.wall_seconds
            << "\n";
}

milp::FileFormat export_format(const Args& a, milp::FileFormat fallback) {
  if (a.export_spec.empty()) return fallback;
  try {
    return milp::parse_format_name(a.export_spec[0]);
  } catch (const milp::ModelError& e) {
    throw std::invalid_argument(e.what());
  }
}

int cmd_design(const Args& a) {
  const Prepared p = prepare(a);
  const fs::path out(a.out_dir);
  const auto draws = sample_draws(p.options.seed, p.options.draws, p.instance.num_stations(),
                                  p.instance.fleet.num_routes);
  if (a.export_only) {
    const auto art = p.options.subtour == SubtourMode::kMtz
                         ? build_mtz_variant(p.instance, draws, p.options.no_incentive)
                         : build_elp(p.instance, draws,
                                     {p.options.subtour, p.options.no_incentive});
    const auto format = export_format(a, milp::FileFormat::kMpsFixed);
    const fs::path path = a.export_spec.empty() ? out / "model.mps" : fs::path(a.export_spec[1]);
    write_file(path, milp::export_model(art.model, format));
    return 0;
  }

  const auto format = export_format(a, milp::FileFormat::kLpText);
  const DesignRun run = run_design(p.instance, p.options);
  log_solve(p.options.no_incentive ? "no-incentive" : "incentive", run);
  const fs::path model_path = a.export_spec.empty() ? out / "model.lp" : fs::path(a.export_spec[1]);
  write_file(model_path, milp::export_model(run.artifacts.model, format));
  if (run.outcome) {
    const std::string table = format_design_table(*run.outcome, p.instance, run.draws);
    write_file(out / "design.txt", table);
    write_file(out / "kpis.csv", kpi_csv_header() + "\n" + kpi_csv_row(*run.kpis) + "\n");
    write_file(out / "solution.txt",
               solver::dump_solution(run.artifacts.model, run.solution.values));
    write_file(out / "validation.txt", format_violations(run.validation));
    std::cout << table << kpi_csv_header() << "\n" << kpi_csv_row(*run.kpis) << "\n";
    if (!run.validation.ok()) std::cerr << format_violations(run.validation);
  }
  return exit_code(run.solution.status);
}

int cmd_compare(const Args& a) {
  const Prepared p = prepare(a);
  const Comparison c = run_compare(p.instance, p.options);
  log_solve("no-incentive", c.no_incentive);
  log_solve("incentive", c.incentive);
  const std::string csv = compare_csv(c);
  write_file(fs::path(a.out_dir) / "compare.csv", csv);
  std::cout << csv;
  return exit_code(worst_status({c.incentive.solution.status, c.no_incentive.solution.status}));
}

std::vector<long> parse_range(const std::string& text) {
  std::vector<long> v;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    const std::string part = text.substr(start, colon == std::string::npos ? colon : colon - start);
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(part, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (part.empty() || used != part.size()) {
      throw std::invalid_argument("--sweep expects LO:HI:STEP, got '" + text + "'");
    }
    v.push_back(value);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (v.size() != 3) throw std::invalid_argument("--sweep expects LO:HI:STEP, got '" + text + "'");
  return v;
}

int cmd_sweep(const Args& a) {
  const auto range = parse_range(a.sweep);
  const Prepared p = prepare(a);
  const auto points = run_sweep(p.instance, range[0], range[1], range[2], p.options);
  std::vector<solver::Status> statuses;
  for (const auto& pt : points) {
    statuses.push_back(pt.incentive_status);
    statuses.push_back(pt.no_incentive_status);
  }
  const fs::path out(a.out_dir);
  const std::string csv = sweep_csv(points);
  write_file(out / "sweep.csv", csv);
  write_file(out / "sweep.gp", sweep_gnuplot("sweep.csv", "sweep.png"));
  std::cout << csv;
  return exit_code(worst_status(statuses));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular bus design with transfer incentives"};
  app.require_subcommand(1);
  Args a;

  auto* design = app.add_subcommand("design", "solve one scheme and write the design report");
  add_common(design, a);
  design->add_flag("--no-incentive", a.no_incentive, "forbid transfers");
  design->add_option("--demand", a.demand, "total demand (seeded instances)");
  design->add_option("--export", a.export_spec, "FORMAT PATH (lp or mps)")->expected(2);
  design->add_flag("--export-only", a.export_only, "write the model and stop");

  auto* compare = app.add_subcommand("compare", "incentive against no-incentive");
  add_common(compare, a);
  compare->add_option("--demand", a.demand, "total demand (seeded instances)");

  auto* sweep = app.add_subcommand("sweep", "service rate over demand levels");
  add_common(sweep, a);
  sweep->add_option("--sweep", a.sweep, "LO:HI:STEP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*design) return cmd_design(a);
    if (*compare) return cmd_compare(a);
    return cmd_sweep(a);
  } catch (const InstanceError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
