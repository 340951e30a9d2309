#pragma once

#include <stdexcept>

#include "mbus/choice.hpp"
#include "mbus/evaluate.hpp"
#include "mbus/instance.hpp"

namespace mbus {

struct TinyLimits {
  int max_stations = 4;
  int max_routes = 2;
  long max_total_demand = 4;
  int max_draws = 5;
};

class OracleLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  DesignOutcome outcome;
  long designs = 0;  // route/type combinations examined
};

// Exhaustive search over every route (simple station sequence within the
// duration limit), every type assignment within the fleet, every integer
// passenger flow on the chosen links and the cheapest admissible incentive
// per (station, bus). Independent of the MILP code path.
OracleResult enumerate_optimal(const Instance& instance, const DrawSet& draws,
                               bool no_incentive = false, const TinyLimits& limits = {});

}  // namespace mbus
