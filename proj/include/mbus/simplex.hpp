#pragma once

#include <cstdint>
#include <vector>

#include "mbus/basis_factor.hpp"
#include "mbus/milp_model.hpp"

namespace mbus::solver {

enum class VarStatus : std::uint8_t {
  kBasic,
  kLower,
  kUpper,
  kZero,   // free nonbasic held at 0
  kSuper,  // nonbasic strictly between its bounds
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kCutoff,
  kIterationLimit,
  kNumericalFailure,
};

const char* to_string(LpStatus s);

// Bounded revised simplex over min c'x s.t. row_lo <= Ax <= row_hi,
// col_lo <= x <= col_hi. Each row i carries a logical variable s_i = a_i x,
// so internally the system is [A -I](x,s) = 0 with all bounds on variables.
//
// The engine keeps its basis between calls: after bound changes or appended
// rows, solve() warm starts with the dual simplex.
class LpEngine {
 public:
  explicit LpEngine(const milp::MilpModel& model);

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  void set_col_bounds(int j, double lo, double hi);
  double col_lo(int j) const { return lo_[j]; }
  double col_hi(int j) const { return hi_[j]; }

  // Appends rows; their logicals enter the basis.
  void add_rows(const std::vector<milp::LinearConstraint>& rows);

  // Returns kCutoff early once the dual objective reaches `cutoff`.
  LpStatus solve(double cutoff = milp::kInf);

  double objective() const;
  std::vector<double> primal() const;  // structural values
  const std::vector<double>& reduced_costs() const { return d_; }

  std::vector<VarStatus> basis() const;
  void set_basis(const std::vector<VarStatus>& statuses);

  long iterations() const { return iterations_; }
  void set_iteration_limit(long limit) { iteration_limit_ = limit; }

 private:
  double cost(int j) const {
    return (j < n_ ? cost_[j] : 0.0) + (perturbed_ ? pert_[j] : 0.0);
  }
  // Small cost shifts on nonbasics, in the dual-feasible direction, against
  // dual degeneracy; removed before the final primal pass.
  void perturb();
  void unperturb();
  void load_column(int j, std::vector<double>& dense) const;
  double dot_column(int j, const std::vector<double>& y) const;

  bool refactor();
  void compute_primal();
  // Phase 1 prices the sum of primal infeasibilities instead of the cost.
  void compute_duals(bool phase1);
  void place_nonbasic(int j);
  double nonbasic_value(int j) const;
  bool boxed(int j) const;
  bool fixed(int j) const { return lo_[j] == hi_[j]; }
  double primal_infeasibility(int p) const;
  // Flips boxed nonbasics to their dual-feasible bound; returns the number of
  // dual infeasibilities that flips could not repair (none when `shift`).
  int repair_dual_feasibility(bool shift);
  bool primal_feasible() const;

  LpStatus dual_simplex(double cutoff);
  LpStatus primal_simplex();
  void pivot(int r, int q, const std::vector<double>& column);

  int n_ = 0;
  int m_ = 0;
  std::vector<int> cstart_, cidx_;
  std::vector<double> cval_;
  std::vector<int> rstart_, ridx_;
  std::vector<double> rval_;
  std::vector<double> cost_;

  std::vector<double> lo_, hi_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  std::vector<double> d_;
  std::vector<int> head_;
  std::vector<int> pos_of_;
  std::vector<double> dse_;
  std::vector<double> pert_;
  bool perturbed_ = false;

  BasisFactor factor_;
  bool factor_valid_ = false;
  long iterations_ = 0;
  long iteration_limit_ = -1;

  std::vector<double> work_a_, work_b_;
};

}  // namespace mbus::solver
