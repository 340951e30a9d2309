#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbus/milp_model.hpp"

namespace mbus::solver {

enum class Status { kOptimal, kInfeasible, kUnbounded, kLimit };
const char* to_string(Status s);

enum class Branching { kMostFractional, kPseudoCost };

struct SolverConfig {
  double integrality_tol = 1e-6;
  double gap_tol = 1e-9;  // absolute
  long node_limit = -1;   // negative: unlimited
  double time_limit = -1; // seconds; non-positive: unlimited
  Branching branching = Branching::kMostFractional;
  std::uint64_t seed = 0;
  // Per-variable branching priority; only fractional variables of the
  // highest priority present are branching candidates. Empty: all equal.
  std::vector<int> priority;
  // Optional starting incumbent (one value per variable). Ignored unless it
  // satisfies every row, bound, integrality requirement and lazy check.
  std::vector<double> start;
  // One line per processed node: "depth bound fractional_count".
  std::ostream* node_log = nullptr;
};

struct Solution {
  Status status = Status::kInfeasible;
  bool has_incumbent = false;
  double objective = milp::kInf;
  std::vector<double> values;
  double bound = -milp::kInf;
  long nodes = 0;
  long lp_iterations = 0;
  int lazy_rows = 0;
  double wall_seconds = 0.0;
  // Global dual bound after each processed node.
  std::vector<double> bound_trace;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Receives an integral candidate (values indexed by variable id) and returns
// constraints it violates; an empty result accepts the candidate.
using LazyCallback = std::function<std::vector<milp::LinearConstraint>(
    const std::vector<double>& values)>;

// Solves the continuous relaxation (integrality dropped).
Solution solve_lp(const milp::MilpModel& model);

// Branch-and-bound: dives depth first until the first incumbent, then runs
// best-first.
Solution solve_milp(const milp::MilpModel& model,
                    const SolverConfig& config = {},
                    const LazyCallback& lazy = {});

struct FamilyViolation {
  std::string family;
  int rows = 0;
  double max_violation = 0.0;
  std::string worst_row;
};

struct VerifyReport {
  double tolerance = 1e-6;
  double max_violation = 0.0;
  double max_bound_violation = 0.0;
  double max_integrality_violation = 0.0;
  std::vector<FamilyViolation> families;  // sorted by family name
  bool ok() const {
    return max_violation <= tolerance && max_bound_violation <= tolerance &&
           max_integrality_violation <= tolerance;
  }
};

// Re-evaluates every row, bound and integrality requirement at `values`.
// Rows are grouped by the family part of their structured name.
VerifyReport verify(const milp::MilpModel& model,
                    const std::vector<double>& values, double tol = 1e-6);

std::string format_report(const VerifyReport& report);

// "name value" per variable, in id order.
std::string dump_solution(const milp::MilpModel& model,
                          const std::vector<double>& values);

}  // namespace mbus::solver
