#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbus/choice.hpp"
#include "mbus/evaluate.hpp"
#include "mbus/formulation.hpp"
#include "mbus/instance.hpp"
#include "mbus/solver.hpp"

namespace mbus {

struct RunOptions {
  std::uint64_t seed = 1;
  int draws = 30;
  bool no_incentive = false;
  SubtourMode subtour = SubtourMode::kLazy;
  double time_limit = -1.0;  // seconds per solve; non-positive: unlimited
  std::vector<double> start;  // optional incumbent for the solver
};

// Regenerates a seeded demand matrix with `seed` (and `total` if given).
// Instances with an explicit matrix keep it; asking for a new total on such
// an instance is an error.
Instance reseed_demand(const Instance& instance, std::uint64_t seed,
                       std::optional<long> total = std::nullopt);

struct DesignRun {
  FormulationArtifacts artifacts;
  DrawSet draws;
  solver::Solution solution;
  // Present whenever the solver returned an incumbent.
  std::optional<DesignOutcome> outcome;
  std::optional<Kpis> kpis;
  ValidationReport validation;
};

DesignRun run_design(const Instance& instance, const RunOptions& options);

struct Comparison {
  DesignRun incentive;
  DesignRun no_incentive;
};

// Solves the no-incentive scheme first and hands its solution to the
// incentive solve as a starting incumbent; both share the same draws.
Comparison run_compare(const Instance& instance, const RunOptions& options);

// Header plus rows "incentive", "no_incentive" and "delta" (incentive minus
// no-incentive; NA where either side is undefined).
std::string compare_csv(const Comparison& comparison);

struct SweepPoint {
  long demand = 0;
  solver::Status incentive_status = solver::Status::kInfeasible;
  solver::Status no_incentive_status = solver::Status::kInfeasible;
  std::optional<double> sr_incentive;
  std::optional<double> sr_no_incentive;
  long transfers = 0;  // incentive scheme
  double tsc_incentive = 0.0;
  double tsc_no_incentive = 0.0;
};

// One comparison per total demand lo, lo+step, ..., <= hi. Demand weights
// come from the same seed at every level.
std::vector<SweepPoint> run_sweep(const Instance& instance, long lo, long hi, long step,
                                  const RunOptions& options);

std::string sweep_csv(const std::vector<SweepPoint>& points);
// gnuplot script drawing both service-rate series and the transfer count.
std::string sweep_gnuplot(const std::string& csv_path, const std::string& png_path);

// Worst of a set of statuses by exit-code severity (limit over infeasible
// over optimal).
solver::Status worst_status(const std::vector<solver::Status>& statuses);
int exit_code(solver::Status status);

}  // namespace mbus
