#include "mbus/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "mbus/milp_io.hpp"
#include "mbus/simplex.hpp"

namespace mbus::solver {
namespace {

using Clock = std::chrono::steady_clock;
using milp::kInf;
using Basis = std::vector<VarStatus>;

constexpr int kPropagationPasses = 5;

struct BoundChange {
  int var;
  double lo;
  double hi;
};

struct Node {
  double bound = -kInf;
  long seq = 0;
  int depth = 0;
  std::vector<BoundChange> changes;  // whole path from the root
  std::shared_ptr<const Basis> basis;
  int branch_var = -1;
  bool up = false;
  double frac = 0.0;
};

// Min-heap on (bound, seq).
bool heap_after(const std::unique_ptr<Node>& a, const std::unique_ptr<Node>& b) {
  if (a->bound != b->bound) return a->bound > b->bound;
  return a->seq > b->seq;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PseudoCosts {
  std::vector<double> sum_down, sum_up;
  std::vector<int> n_down, n_up;

  explicit PseudoCosts(int n)
      : sum_down(n, 0.0), sum_up(n, 0.0), n_down(n, 0), n_up(n, 0) {}

  void record(int var, bool up, double gain_per_unit) {
    if (up) {
      sum_up[var] += gain_per_unit;
      ++n_up[var];
    } else {
      sum_down[var] += gain_per_unit;
      ++n_down[var];
    }
  }
};

int choose_branch_var(const std::vector<int>& fractional,
                      const std::vector<double>& x, Branching rule,
                      const PseudoCosts& pc) {
  int best = -1;
  double best_score = -1.0;
  double avg_down = 1.0;
  double avg_up = 1.0;
  if (rule == Branching::kPseudoCost) {
    double sd = 0, su = 0;
    int nd = 0, nu = 0;
    for (std::size_t j = 0; j < pc.n_down.size(); ++j) {
      sd += pc.sum_down[j];
      nd += pc.n_down[j];
      su += pc.sum_up[j];
      nu += pc.n_up[j];
    }
    if (nd > 0) avg_down = sd / nd;
    if (nu > 0) avg_up = su / nu;
  }
  for (int j : fractional) {
    const double f = x[j] - std::floor(x[j]);
    double score;
    if (rule == Branching::kPseudoCost) {
      const double down = pc.n_down[j] ? pc.sum_down[j] / pc.n_down[j] : avg_down;
      const double up = pc.n_up[j] ? pc.sum_up[j] / pc.n_up[j] : avg_up;
      score = std::max(down * f, 1e-6) * std::max(up * (1.0 - f), 1e-6);
    } else {
      score = std::min(f, 1.0 - f);
    }
    if (score > best_score) {  // strict: lowest id wins ties
      best_score = score;
      best = j;
    }
  }
  return best;
}

// Activity-based bound tightening over the model rows. Continuous bounds are
// tightened only in the local copies (they feed later rows); the caller pushes
// integer bounds to the LP.
class Propagator {
 public:
  explicit Propagator(const milp::MilpModel& model) {
    const int n = model.num_variables();
    integral_.resize(n);
    for (int j = 0; j < n; ++j) integral_[j] = model.variable(j).integral();
    start_.push_back(0);
    for (const auto& c : model.constraints()) {
      for (const auto& t : c.terms) {
        if (t.coef == 0.0) continue;
        col_.push_back(t.var);
        val_.push_back(t.coef);
      }
      start_.push_back(static_cast<int>(col_.size()));
      lhs_.push_back(c.sense == milp::RowSense::kLessEqual ? -kInf : c.rhs);
      rhs_.push_back(c.sense == milp::RowSense::kGreaterEqual ? kInf : c.rhs);
    }
  }

  // False when some row is proven infeasible under the bounds.
  bool run(std::vector<double>& lo, std::vector<double>& hi, int max_passes) const {
    for (int pass = 0; pass < max_passes; ++pass) {
      bool changed = false;
      for (std::size_t r = 0; r < lhs_.size(); ++r) {
        if (!row(static_cast<int>(r), lo, hi, changed)) return false;
      }
      if (!changed) break;
    }
    return true;
  }

 private:
  static constexpr double kFeasTol = 1e-6;

  bool row(int r, std::vector<double>& lo, std::vector<double>& hi, bool& changed) const {
    const int b = start_[r], e = start_[r + 1];
    double min_fin = 0.0, max_fin = 0.0;
    int min_inf = 0, max_inf = 0, min_inf_var = -1, max_inf_var = -1;
    for (int p = b; p < e; ++p) {
      const int j = col_[p];
      const double a = val_[p];
      const double lo_c = a > 0 ? lo[j] : hi[j];  // bound giving the minimum
      const double hi_c = a > 0 ? hi[j] : lo[j];
      if (std::isfinite(lo_c)) {
        min_fin += a * lo_c;
      } else {
        ++min_inf;
        min_inf_var = j;
      }
      if (std::isfinite(hi_c)) {
        max_fin += a * hi_c;
      } else {
        ++max_inf;
        max_inf_var = j;
      }
    }
    const double rhs = rhs_[r], lhs = lhs_[r];
    if (min_inf == 0 && std::isfinite(rhs) && min_fin > rhs + kFeasTol * (1 + std::fabs(rhs))) {
      return false;
    }
    if (max_inf == 0 && std::isfinite(lhs) && max_fin < lhs - kFeasTol * (1 + std::fabs(lhs))) {
      return false;
    }
    const bool use_rhs = std::isfinite(rhs) && min_inf <= 1;
    const bool use_lhs = std::isfinite(lhs) && max_inf <= 1;
    if (!use_rhs && !use_lhs) return true;
    for (int p = b; p < e; ++p) {
      const int j = col_[p];
      const double a = val_[p];
      if (use_rhs && (min_inf == 0 || min_inf_var == j)) {
        // a x_j <= rhs - (minimum activity of the other terms)
        const double own = a > 0 ? lo[j] : hi[j];
        const double rest = min_inf == 0 ? min_fin - a * own : min_fin;
        const double limit = (rhs - rest) / a;
        if (a > 0) {
          if (!tighten_hi(j, limit, lo, hi, changed)) return false;
        } else {
          if (!tighten_lo(j, limit, lo, hi, changed)) return false;
        }
      }
      if (use_lhs && (max_inf == 0 || max_inf_var == j)) {
        const double own = a > 0 ? hi[j] : lo[j];
        const double rest = max_inf == 0 ? max_fin - a * own : max_fin;
        const double limit = (lhs - rest) / a;
        if (a > 0) {
          if (!tighten_lo(j, limit, lo, hi, changed)) return false;
        } else {
          if (!tighten_hi(j, limit, lo, hi, changed)) return false;
        }
      }
    }
    return true;
  }

  bool tighten_hi(int j, double v, std::vector<double>& lo, std::vector<double>& hi,
                  bool& changed) const {
    if (!std::isfinite(v)) return true;
    if (integral_[j]) v = std::floor(v + kFeasTol);
    if (v < hi[j] - 1e-7 * (1 + std::fabs(v))) {
      if (v < lo[j] - kFeasTol * (1 + std::fabs(v))) return false;
      hi[j] = std::max(v, lo[j]);
      changed = true;
    }
    return true;
  }

  bool tighten_lo(int j, double v, std::vector<double>& lo, std::vector<double>& hi,
                  bool& changed) const {
    if (!std::isfinite(v)) return true;
    if (integral_[j]) v = std::ceil(v - kFeasTol);
    if (v > lo[j] + 1e-7 * (1 + std::fabs(v))) {
      if (v > hi[j] + kFeasTol * (1 + std::fabs(v))) return false;
      lo[j] = std::min(v, hi[j]);
      changed = true;
    }
    return true;
  }

  std::vector<char> integral_;
  std::vector<int> start_, col_;
  std::vector<double> val_, lhs_, rhs_;
};

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
    case Status::kLimit:
      return "limit";
  }
  return "?";
}

Solution solve_lp(const milp::MilpModel& model) {
  const auto t0 = Clock::now();
  LpEngine engine(model);
  LpStatus st = engine.solve();
  if (st == LpStatus::kNumericalFailure) {
    engine.set_basis({});
    st = engine.solve();
  }
  Solution sol;
  sol.nodes = 1;
  sol.lp_iterations = engine.iterations();
  switch (st) {
    case LpStatus::kOptimal:
      sol.status = Status::kOptimal;
      sol.has_incumbent = true;
      sol.values = engine.primal();
      sol.objective = engine.objective() + model.objective().constant;
      sol.bound = sol.objective;
      break;
    case LpStatus::kInfeasible:
      sol.status = Status::kInfeasible;
      break;
    case LpStatus::kUnbounded:
      sol.status = Status::kUnbounded;
      break;
    case LpStatus::kIterationLimit:
    case LpStatus::kCutoff:
      sol.status = Status::kLimit;
      break;
    case LpStatus::kNumericalFailure:
      throw SolverError("LP numerical failure after " +
                        std::to_string(engine.iterations()) +
                        " iterations (basis could not be refactored stably)");
  }
  sol.wall_seconds = seconds_since(t0);
  return sol;
}

Solution solve_milp(const milp::MilpModel& model, const SolverConfig& config,
                    const LazyCallback& lazy) {
  if (!(config.integrality_tol > 0) || !(config.gap_tol > 0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (!config.priority.empty() &&
      static_cast<int>(config.priority.size()) != model.num_variables()) {
    throw std::invalid_argument("branching priority needs one entry per variable");
  }
  const auto t0 = Clock::now();
  const int n = model.num_variables();
  const double tol = config.integrality_tol;
  const double gap = config.gap_tol;

  std::vector<double> root_lo(n), root_hi(n);
  std::vector<int> integers;
  for (int j = 0; j < n; ++j) {
    const auto& v = model.variable(j);
    root_lo[j] = v.lo;
    root_hi[j] = v.hi;
    if (v.integral()) {
      integers.push_back(j);
      if (std::isfinite(v.lo)) root_lo[j] = std::ceil(v.lo - tol);
      if (std::isfinite(v.hi)) root_hi[j] = std::floor(v.hi + tol);
    }
  }

  Solution sol;
  for (int j : integers) {
    if (root_lo[j] > root_hi[j]) {
      sol.status = Status::kInfeasible;
      sol.wall_seconds = seconds_since(t0);
      return sol;
    }
  }

  LpEngine engine(model);
  for (int j : integers) engine.set_col_bounds(j, root_lo[j], root_hi[j]);

  std::vector<double> cur_lo = root_lo, cur_hi = root_hi;
  std::vector<int> touched;
  PseudoCosts pseudo(n);
  const Propagator propagator(model);

  std::vector<std::unique_ptr<Node>> heap;
  long seq = 0;
  {
    auto root = std::make_unique<Node>();
    root->seq = seq++;
    heap.push_back(std::move(root));
  }

  double incumbent = kInf;  // excludes the objective constant
  std::vector<double> best_values;
  bool limit_hit = false;
  double last_bound = -kInf;
  if (static_cast<int>(config.start.size()) == n &&
      verify(model, config.start, tol).ok() && (!lazy || lazy(config.start).empty())) {
    best_values = config.start;
    for (int j : integers) best_values[j] = std::round(best_values[j]);
    incumbent = milp::evaluate_terms(model.objective().terms, best_values);
  }

  auto set_bounds = [&](int j, double lo, double hi) {
    if (cur_lo[j] == lo && cur_hi[j] == hi) return;
    cur_lo[j] = lo;
    cur_hi[j] = hi;
    engine.set_col_bounds(j, lo, hi);
  };

  std::unique_ptr<Node> dive;  // child picked to continue the current dive
  while (dive || !heap.empty()) {
    if (config.node_limit >= 0 && sol.nodes >= config.node_limit) {
      limit_hit = true;
      break;
    }
    if (config.time_limit > 0 && seconds_since(t0) >= config.time_limit) {
      limit_hit = true;
      break;
    }
    std::unique_ptr<Node> node;
    bool warm = false;
    if (dive) {
      node = std::move(dive);
      warm = true;  // the engine still holds the parent's optimal basis
    } else {
      std::pop_heap(heap.begin(), heap.end(), heap_after);
      node = std::move(heap.back());
      heap.pop_back();
    }
    if (node->bound >= incumbent - gap) continue;

    for (int j : touched) set_bounds(j, root_lo[j], root_hi[j]);
    touched.clear();
    for (const auto& c : node->changes) touched.push_back(c.var);
    for (const auto& c : node->changes) {
      set_bounds(c.var, std::max(cur_lo[c.var], c.lo),
                 std::min(cur_hi[c.var], c.hi));
    }
    if (node->basis && !warm) engine.set_basis(*node->basis);
    ++sol.nodes;

    double node_obj = kInf;
    int n_fractional = 0;
    bool propagated = true;
    {
      std::vector<double> lo = cur_lo, hi = cur_hi;
      propagated = propagator.run(lo, hi, kPropagationPasses);
      if (propagated) {
        for (int j : integers) {
          if (lo[j] != cur_lo[j] || hi[j] != cur_hi[j]) {
            touched.push_back(j);
            set_bounds(j, lo[j], hi[j]);
          }
        }
      }
    }
    while (propagated) {
      const double cutoff = std::isfinite(incumbent) ? incumbent - gap : kInf;
      LpStatus st = engine.solve(cutoff);
      if (st == LpStatus::kNumericalFailure || st == LpStatus::kIterationLimit) {
        engine.set_basis({});
        st = engine.solve(cutoff);
      }
      if (st == LpStatus::kNumericalFailure || st == LpStatus::kIterationLimit) {
        throw SolverError("LP numerical failure at branch-and-bound node " +
                          std::to_string(sol.nodes));
      }
      if (st == LpStatus::kUnbounded) {
        if (sol.nodes == 1) {
          sol.status = Status::kUnbounded;
          sol.lp_iterations = engine.iterations();
          sol.wall_seconds = seconds_since(t0);
          return sol;
        }
        throw SolverError("unbounded relaxation below a bounded root");
      }
      if (st != LpStatus::kOptimal) break;  // infeasible or cut off

      const double obj = engine.objective();
      if (obj >= incumbent - gap) break;
      std::vector<double> x = engine.primal();

      std::vector<int> fractional;
      int top = std::numeric_limits<int>::min();
      for (int j : integers) {
        const double f = x[j] - std::floor(x[j]);
        if (std::min(f, 1.0 - f) <= tol) continue;
        const int prio = config.priority.empty() ? 0 : config.priority[j];
        if (prio > top) {
          top = prio;
          fractional.clear();
        }
        if (prio == top) fractional.push_back(j);
        ++n_fractional;
      }
      if (node->branch_var >= 0 && node_obj == kInf) {
        const double width = node->up ? 1.0 - node->frac : node->frac;
        if (width > 0) {
          pseudo.record(node->branch_var, node->up,
                        std::max(0.0, obj - node->bound) / width);
        }
      }
      node_obj = obj;

      if (fractional.empty()) {
        for (int j : integers) x[j] = std::round(x[j]);
        if (lazy) {
          auto cuts = lazy(x);
          if (!cuts.empty()) {
            sol.lazy_rows += static_cast<int>(cuts.size());
            engine.add_rows(cuts);
            n_fractional = 0;
            continue;
          }
        }
        const double value = milp::evaluate_terms(model.objective().terms, x);
        if (value < incumbent) {
          incumbent = value;
          best_values = std::move(x);
        }
        break;
      }

      const int j = choose_branch_var(fractional, x, config.branching, pseudo);
      const double f = x[j] - std::floor(x[j]);
      auto basis = std::make_shared<const Basis>(engine.basis());
      const int dive_side = f >= 0.5 ? 1 : 0;
      for (int side = 0; side < 2; ++side) {
        auto child = std::make_unique<Node>();
        child->bound = std::max(node->bound, obj);
        child->seq = seq++;
        child->depth = node->depth + 1;
        child->changes = node->changes;
        if (side == 0) {
          child->changes.push_back({j, -kInf, std::floor(x[j])});
        } else {
          child->changes.push_back({j, std::ceil(x[j]), kInf});
        }
        child->basis = basis;
        child->branch_var = j;
        child->up = side == 1;
        child->frac = f;
        // Once an incumbent exists a dive continues only while it is as good
        // as the best open node, which keeps the order best-first.
        const bool keep_diving = !std::isfinite(incumbent) || heap.empty() ||
                                 child->bound <= heap.front()->bound;
        if (side == dive_side && keep_diving) {
          dive = std::move(child);
        } else {
          heap.push_back(std::move(child));
          std::push_heap(heap.begin(), heap.end(), heap_after);
        }
      }
      break;
    }

    double global = incumbent;
    if (!heap.empty()) global = std::min(global, heap.front()->bound);
    if (dive) global = std::min(global, dive->bound);
    global = std::max(global, last_bound);
    last_bound = global;
    sol.bound_trace.push_back(global + model.objective().constant);
    if (config.node_log) {
      *config.node_log << node->depth << ' '
                       << milp::format_number(
                              (node_obj == kInf ? node->bound : node_obj) +
                              model.objective().constant)
                       << ' ' << n_fractional << '\n';
    }
  }

  const double constant = model.objective().constant;
  sol.lp_iterations = engine.iterations();
  sol.has_incumbent = std::isfinite(incumbent);
  if (sol.has_incumbent) {
    sol.objective = incumbent + constant;
    sol.values = std::move(best_values);
  }
  if (limit_hit) {
    sol.status = Status::kLimit;
    double b = incumbent;
    for (const auto& nd : heap) b = std::min(b, nd->bound);
    if (dive) b = std::min(b, dive->bound);
    sol.bound = std::max(b, last_bound) + constant;
  } else if (sol.has_incumbent) {
    sol.status = Status::kOptimal;
    sol.bound = sol.objective;
  } else {
    sol.status = Status::kInfeasible;
    sol.bound = kInf;
  }
  sol.wall_seconds = seconds_since(t0);
  return sol;
}

VerifyReport verify(const milp::MilpModel& model,
                    const std::vector<double>& values, double tol) {
  if (static_cast<int>(values.size()) != model.num_variables()) {
    throw std::invalid_argument("verify: value vector has wrong length");
  }
  VerifyReport report;
  report.tolerance = tol;
  std::map<std::string, FamilyViolation> by_family;
  for (const auto& c : model.constraints()) {
    const double act = milp::evaluate_terms(c.terms, values);
    double viol = 0.0;
    switch (c.sense) {
      case milp::RowSense::kLessEqual:
        viol = std::max(0.0, act - c.rhs);
        break;
      case milp::RowSense::kGreaterEqual:
        viol = std::max(0.0, c.rhs - act);
        break;
      case milp::RowSense::kEqual:
        viol = std::fabs(act - c.rhs);
        break;
    }
    const auto parsed = milp::parse_structured_name(c.name);
    const std::string family = parsed ? parsed->family : c.name;
    auto& fam = by_family[family];
    fam.family = family;
    ++fam.rows;
    if (fam.rows == 1 || viol > fam.max_violation) {
      fam.worst_row = c.name;
      fam.max_violation = viol;
    }
    report.max_violation = std::max(report.max_violation, viol);
  }
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    const double x = values[j];
    report.max_bound_violation =
        std::max({report.max_bound_violation, v.lo - x, x - v.hi, 0.0});
    if (v.integral()) {
      report.max_integrality_violation = std::max(
          report.max_integrality_violation, std::fabs(x - std::round(x)));
    }
  }
  for (auto& [name, fam] : by_family) report.families.push_back(std::move(fam));
  return report;
}

std::string format_report(const VerifyReport& report) {
  std::ostringstream out;
  out << "status " << (report.ok() ? "ok" : "violated") << '\n';
  out << "tolerance " << milp::format_number(report.tolerance) << '\n';
  out << "bounds " << milp::format_number(report.max_bound_violation) << '\n';
  out << "integrality "
      << milp::format_number(report.max_integrality_violation) << '\n';
  for (const auto& f : report.families) {
    out << "family " << f.family << " rows " << f.rows << " max "
        << milp::format_number(f.max_violation);
    if (f.max_violation > report.tolerance) out << " worst " << f.worst_row;
    out << '\n';
  }
  return out.str();
}

std::string dump_solution(const milp::MilpModel& model,
                          const std::vector<double>& values) {
  std::string out;
  for (int j = 0; j < model.num_variables(); ++j) {
    out += model.variable(j).name;
    out += ' ';
    out += milp::format_number(values.at(j));
    out += '\n';
  }
  return out;
}

}  // namespace mbus::solver
