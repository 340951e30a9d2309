#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbus/choice.hpp"
#include "mbus/formulation.hpp"
#include "mbus/instance.hpp"
#include "mbus/solver.hpp"

namespace mbus {

struct BusPlan {
  int bus = 0;
  int type = 0;  // index into fleet.types
  int capacity = 0;
  std::vector<int> route;  // real stations in visiting order
  std::vector<int> loads;  // onboard passengers on each route link
};

// Passengers of OD (origin, dest) riding `bus` on link (from, to).
struct LinkFlow {
  int origin = 0, dest = 0, from = 0, to = 0, bus = 0;
  int count = 0;
};

// Passengers of OD (origin, dest) leaving `bus` at `station` to change buses.
struct TransferCount {
  int origin = 0, dest = 0, station = 0, bus = 0;
  int count = 0;
};

struct DesignOutcome {
  std::vector<BusPlan> buses;
  std::vector<LinkFlow> flows;           // nonzero entries only
  std::vector<TransferCount> transfers;  // nonzero entries only
  IntMatrix strategy;                    // [station][bus], index into incentive levels
};

struct TransferPlan {
  int station = 0;
  int bus = 0;
  int strategy = 0;
  double incentive = 0.0;
  int transferred = 0;
  double saa_probability = 0.0;
  double logit_probability = 0.0;
};

struct Kpis {
  double ttd_km = 0.0;
  std::optional<double> aivtt_min;  // undefined when nobody is served
  std::optional<double> tr_pct;     // undefined when nobody is served
  std::optional<double> sr_pct;     // undefined when there is no demand
  double tsc = 0.0;
  double co1 = 0.0;  // route operating cost
  double co2 = 0.0;  // incentive payments
  double ct = 0.0;   // in-vehicle time cost
  double ce = 0.0;   // unserved-passenger cost
  long served = 0;
  long transfers = 0;
  long demand = 0;
};

struct Violation {
  std::string constraint;
  std::string indices;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads x, y, z, r and p back by variable name. Routes follow x arcs from the
// start depot; any support that is not a single depot-to-depot path throws.
DesignOutcome decode(const solver::Solution& solution,
                     const FormulationArtifacts& artifacts,
                     const Instance& instance);

// Checks an outcome against the original (unlinearized) model using integer
// arithmetic; transfers are bounded by the sample-average willingness of the
// same draws.
ValidationReport validate_nonlinear(const DesignOutcome& outcome,
                                    const Instance& instance,
                                    const DrawSet& draws);
std::string format_violations(const ValidationReport& report);

Kpis compute_kpis(const DesignOutcome& outcome, const Instance& instance);

// Stations with an incentive or at least one transfer.
std::vector<TransferPlan> transfer_plans(const DesignOutcome& outcome,
                                         const Instance& instance,
                                         const DrawSet& draws);

// Passengers boarding each bus at their origin; the per-bus counts sum to the
// served total.
std::vector<long> served_by_bus(const DesignOutcome& outcome, int buses);

std::string kpi_csv_header();
std::string kpi_csv_row(const Kpis& kpis);

// One row per bus: capacity, route, transfer stations with their incentive
// and transferred count, passengers served.
std::string format_design_table(const DesignOutcome& outcome,
                                const Instance& instance, const DrawSet& draws);

}  // namespace mbus
