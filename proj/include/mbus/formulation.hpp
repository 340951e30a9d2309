#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbus/choice.hpp"
#include "mbus/instance.hpp"
#include "mbus/milp_model.hpp"
#include "mbus/solver.hpp"

namespace mbus {

enum class SubtourMode { kLazy, kMtz };
const char* to_string(SubtourMode mode);
SubtourMode parse_subtour_mode(const std::string& text);

struct FormulationOptions {
  SubtourMode subtour = SubtourMode::kLazy;
  bool no_incentive = false;  // adds r = 0 for every transfer variable
};

struct BigMSet {
  Matrix transfer;     // per OD (i, j): bounds |arrivals - departures|
  Matrix willingness;  // per OD (i, j): bounds arrivals on one bus
  std::vector<std::vector<std::vector<double>>> utility;  // per (m, k, d)
  std::vector<double> route_cost;  // per bus type
  Matrix incentive;    // per OD (i, j)
};

BigMSet compute_big_m(const Instance& instance, const DrawSet& draws);

// Dense id lookup for every variable family; -1 where the family has no
// variable for an index tuple. Station indices 0..n-1 are real, n is the
// start depot and n+1 the end depot.
class VarIndex {
 public:
  VarIndex() = default;
  VarIndex(int n, int buses, int types, int levels, int draws);

  int x(int i, int j, int k) const { return x_[(i * (n_ + 2) + j) * buses_ + k]; }
  int y(int p, int k) const { return y_[p * buses_ + k]; }
  int z(int i, int j, int m, int nn, int k) const {
    return z_[(((i * n_ + j) * n_ + m) * n_ + nn) * buses_ + k];
  }
  int r(int i, int j, int m, int k) const { return r_[((i * n_ + j) * n_ + m) * buses_ + k]; }
  int b(int i, int j, int m, int k) const { return b_[((i * n_ + j) * n_ + m) * buses_ + k]; }
  int p(int m, int k, int s) const { return p_[(m * buses_ + k) * levels_ + s]; }
  int w(int m, int k, int d, int c) const {
    return w_[((m * buses_ + k) * draws_ + d) * 2 + (c - 1)];
  }
  int au(int m, int k, int d) const { return au_[(m * buses_ + k) * draws_ + d]; }
  int t(int i, int j, int m, int k, int d) const {
    return t_[(((i * n_ + j) * n_ + m) * buses_ + k) * draws_ + d];
  }
  int co(int k, int p) const { return co_[k * types_ + p]; }
  int rc(int i, int j, int m, int k, int s) const {
    return rc_[(((i * n_ + j) * n_ + m) * buses_ + k) * levels_ + s];
  }
  int u(int j, int k) const { return u_.empty() ? -1 : u_[j * buses_ + k]; }

 private:
  friend class FormulationBuilder;
  int n_ = 0, buses_ = 0, types_ = 0, levels_ = 0, draws_ = 0;
  std::vector<int> x_, y_, z_, r_, b_, p_, w_, au_, t_, co_, rc_, u_;
};

struct FormulationArtifacts {
  milp::MilpModel model;
  VarIndex index;
  BigMSet big_m;
  SubtourMode subtour = SubtourMode::kLazy;
  bool no_incentive = false;
  int n = 0;       // real stations
  int buses = 0;
  int types = 0;
  int levels = 0;
  int draws = 0;
};

FormulationArtifacts build_elp(const Instance& instance, const DrawSet& draws,
                               const FormulationOptions& options = {});

// Same model with order variables and MTZ rows instead of lazy cuts.
FormulationArtifacts build_mtz_variant(const Instance& instance,
                                       const DrawSet& draws,
                                       bool no_incentive = false);

// Expected sizes per family, derived from the index domains alone.
struct FamilyCounts {
  std::map<std::string, long> variables;
  std::map<std::string, long> constraints;
  long total_variables() const;
  long total_constraints() const;
};
FamilyCounts expected_counts(int n, int buses, int types, int levels, int draws,
                             const FormulationOptions& options);
FamilyCounts actual_counts(const milp::MilpModel& model);

// A station subset whose internal arcs must number at most size - 1.
struct SubtourCut {
  std::vector<int> stations;  // sorted
  int rhs = 0;
};

// `arcs[i][j]` in {0, 1} for i, j in 0..n+1 (depots n and n+1) for one bus.
// Returns one cut per connected component of the real-station support that
// contains a cycle; empty iff the support is a single depot-to-depot path.
std::vector<SubtourCut> separate_subtours(const std::vector<std::vector<int>>& arcs,
                                          int n);

milp::LinearConstraint subtour_constraint(const FormulationArtifacts& art, int k,
                                          const SubtourCut& cut);

// Lazy callback separating subtours of every bus from an integral point.
solver::LazyCallback make_subtour_callback(const FormulationArtifacts& art);

// Solves with the subtour callback in lazy mode.
solver::Solution solve_design(const FormulationArtifacts& art,
                              const solver::SolverConfig& config = {});

}  // namespace mbus
