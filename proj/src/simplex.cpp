#include "mbus/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mbus::solver {
namespace {

constexpr double kInf = milp::kInf;
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-7;
constexpr int kRefactorInterval = 100;
constexpr int kDegenerateRunForPerturb = 30;
constexpr int kDegenerateRunForBland = 3000;

double feas_tol(double bound) {
  return kPrimalTol * std::max(1.0, std::fabs(bound));
}

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kCutoff:
      return "cutoff";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
    case LpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "?";
}

LpEngine::LpEngine(const milp::MilpModel& model)
    : n_(model.num_variables()), m_(model.num_constraints()) {
  std::vector<int> count(n_ + 1, 0);
  rstart_.assign(1, 0);
  for (const auto& c : model.constraints()) {
    for (const auto& t : c.terms) {
      ridx_.push_back(t.var);
      rval_.push_back(t.coef);
      ++count[t.var + 1];
    }
    rstart_.push_back(static_cast<int>(ridx_.size()));
  }
  cstart_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) cstart_[j + 1] = cstart_[j] + count[j + 1];
  cidx_.resize(ridx_.size());
  cval_.resize(ridx_.size());
  std::vector<int> fill(cstart_.begin(), cstart_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (int e = rstart_[i]; e < rstart_[i + 1]; ++e) {
      const int j = ridx_[e];
      cidx_[fill[j]] = i;
      cval_[fill[j]] = rval_[e];
      ++fill[j];
    }
  }

  cost_.assign(n_, 0.0);
  for (const auto& t : model.objective().terms) cost_[t.var] = t.coef;

  const int total = n_ + m_;
  lo_.resize(total);
  hi_.resize(total);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model.variable(j).lo;
    hi_[j] = model.variable(j).hi;
  }
  for (int i = 0; i < m_; ++i) {
    const auto& c = model.constraint(i);
    lo_[n_ + i] = c.sense == milp::RowSense::kLessEqual ? -kInf : c.rhs;
    hi_[n_ + i] = c.sense == milp::RowSense::kGreaterEqual ? kInf : c.rhs;
  }
  status_.assign(total, VarStatus::kLower);
  x_.assign(total, 0.0);
  d_.assign(total, 0.0);
  head_.resize(m_);
  pos_of_.assign(total, -1);
  for (int j = 0; j < n_; ++j) {
    d_[j] = cost_[j];
    place_nonbasic(j);
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_of_[n_ + i] = i;
    status_[n_ + i] = VarStatus::kBasic;
  }
  dse_.assign(m_, 1.0);
}

bool LpEngine::boxed(int j) const {
  return std::isfinite(lo_[j]) && std::isfinite(hi_[j]);
}

double LpEngine::nonbasic_value(int j) const {
  switch (status_[j]) {
    case VarStatus::kLower:
      return lo_[j];
    case VarStatus::kUpper:
      return hi_[j];
    case VarStatus::kZero:
      return 0.0;
    case VarStatus::kSuper:
      return std::clamp(x_[j], lo_[j], hi_[j]);
    case VarStatus::kBasic:
      break;
  }
  return x_[j];
}

// Chooses a bound for nonbasic j consistent with the sign of d_j when possible.
void LpEngine::place_nonbasic(int j) {
  const bool has_lo = std::isfinite(lo_[j]);
  const bool has_hi = std::isfinite(hi_[j]);
  if (has_lo && has_hi) {
    status_[j] = d_[j] >= 0.0 ? VarStatus::kLower : VarStatus::kUpper;
  } else if (has_lo) {
    status_[j] = VarStatus::kLower;
  } else if (has_hi) {
    status_[j] = VarStatus::kUpper;
  } else {
    status_[j] = VarStatus::kZero;
  }
  x_[j] = nonbasic_value(j);
}

void LpEngine::set_col_bounds(int j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  switch (status_[j]) {
    case VarStatus::kBasic:
      return;
    case VarStatus::kLower:
      if (!std::isfinite(lo)) place_nonbasic(j);
      break;
    case VarStatus::kUpper:
      if (!std::isfinite(hi)) place_nonbasic(j);
      break;
    case VarStatus::kZero:
      if (std::isfinite(lo) || std::isfinite(hi)) place_nonbasic(j);
      break;
    case VarStatus::kSuper:
      break;
  }
  x_[j] = nonbasic_value(j);
}

void LpEngine::add_rows(const std::vector<milp::LinearConstraint>& rows) {
  if (rows.empty()) return;
  for (const auto& c : rows) {
    const int i = m_;
    for (const auto& t : milp::canonicalize(c.terms)) {
      ridx_.push_back(t.var);
      rval_.push_back(t.coef);
    }
    rstart_.push_back(static_cast<int>(ridx_.size()));
    const int j = n_ + i;
    lo_.push_back(c.sense == milp::RowSense::kLessEqual ? -kInf : c.rhs);
    hi_.push_back(c.sense == milp::RowSense::kGreaterEqual ? kInf : c.rhs);
    status_.push_back(VarStatus::kBasic);
    x_.push_back(0.0);
    d_.push_back(0.0);
    head_.push_back(j);
    pos_of_.push_back(i);
    dse_.push_back(1.0);
    ++m_;
  }
  // Rebuild the column-wise copy.
  std::vector<int> count(n_ + 1, 0);
  for (int j : ridx_) ++count[j + 1];
  cstart_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) cstart_[j + 1] = cstart_[j] + count[j + 1];
  cidx_.resize(ridx_.size());
  cval_.resize(ridx_.size());
  std::vector<int> fill(cstart_.begin(), cstart_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (int e = rstart_[i]; e < rstart_[i + 1]; ++e) {
      const int j = ridx_[e];
      cidx_[fill[j]] = i;
      cval_[fill[j]] = rval_[e];
      ++fill[j];
    }
  }
  factor_valid_ = false;
}

void LpEngine::load_column(int j, std::vector<double>& dense) const {
  dense.assign(m_, 0.0);
  if (j < n_) {
    for (int e = cstart_[j]; e < cstart_[j + 1]; ++e) dense[cidx_[e]] = cval_[e];
  } else {
    dense[j - n_] = -1.0;
  }
}

double LpEngine::dot_column(int j, const std::vector<double>& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int e = cstart_[j]; e < cstart_[j + 1]; ++e) s += cval_[e] * y[cidx_[e]];
  return s;
}

bool LpEngine::refactor() {
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<SparseColumn> cols(m_);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      if (j < n_) {
        for (int e = cstart_[j]; e < cstart_[j + 1]; ++e) {
          cols[p].index.push_back(cidx_[e]);
          cols[p].value.push_back(cval_[e]);
        }
      } else {
        cols[p].index.push_back(j - n_);
        cols[p].value.push_back(-1.0);
      }
    }
    const auto def = factor_.factorize(m_, cols);
    if (def.empty()) {
      factor_valid_ = true;
      return true;
    }
    for (std::size_t k = 0; k < def.positions.size(); ++k) {
      const int p = def.positions[k];
      const int old = head_[p];
      const int logical = n_ + def.rows[k];
      pos_of_[old] = -1;
      place_nonbasic(old);
      head_[p] = logical;
      pos_of_[logical] = p;
      status_[logical] = VarStatus::kBasic;
      dse_[p] = 1.0;
    }
  }
  factor_valid_ = false;
  return false;
}

void LpEngine::compute_primal() {
  std::vector<double>& rhs = work_a_;
  rhs.assign(m_, 0.0);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic) continue;
    x_[j] = nonbasic_value(j);
    const double v = x_[j];
    if (v == 0.0) continue;
    if (j < n_) {
      for (int e = cstart_[j]; e < cstart_[j + 1]; ++e) rhs[cidx_[e]] -= cval_[e] * v;
    } else {
      rhs[j - n_] += v;
    }
  }
  factor_.ftran(rhs);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

void LpEngine::compute_duals(bool phase1) {
  std::vector<double>& y = work_b_;
  y.assign(m_, 0.0);
  for (int p = 0; p < m_; ++p) {
    if (phase1) {
      const double delta = primal_infeasibility(p);
      y[p] = delta < 0 ? -1.0 : (delta > 0 ? 1.0 : 0.0);
    } else {
      y[p] = cost(head_[p]);
    }
  }
  factor_.btran(y);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic) {
      d_[j] = 0.0;
    } else {
      d_[j] = (phase1 ? 0.0 : cost(j)) - dot_column(j, y);
    }
  }
}

double LpEngine::primal_infeasibility(int p) const {
  const int j = head_[p];
  const double x = x_[j];
  if (x < lo_[j] - feas_tol(lo_[j])) return x - lo_[j];
  if (x > hi_[j] + feas_tol(hi_[j])) return x - hi_[j];
  return 0.0;
}

bool LpEngine::primal_feasible() const {
  for (int p = 0; p < m_; ++p) {
    if (primal_infeasibility(p) != 0.0) return false;
  }
  return true;
}

int LpEngine::repair_dual_feasibility(bool shift) {
  int unrepaired = 0;
  bool flipped = false;
  const int total = n_ + m_;
  // Cost shifting: zero the reduced cost of a variable that no bound flip
  // can make dual feasible. The shift is removed with the perturbation.
  auto unfixable = [&](int j) {
    if (!shift) {
      ++unrepaired;
      return;
    }
    if (!perturbed_) {
      pert_.assign(total, 0.0);
      perturbed_ = true;
    }
    pert_.resize(total, 0.0);
    pert_[j] -= d_[j];
    d_[j] = 0.0;
  };
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
    const double dj = d_[j];
    switch (status_[j]) {
      case VarStatus::kLower:
        if (dj < -kDualTol) {
          if (std::isfinite(hi_[j])) {
            status_[j] = VarStatus::kUpper;
            flipped = true;
          } else {
            unfixable(j);
          }
        }
        break;
      case VarStatus::kUpper:
        if (dj > kDualTol) {
          if (std::isfinite(lo_[j])) {
            status_[j] = VarStatus::kLower;
            flipped = true;
          } else {
            unfixable(j);
          }
        }
        break;
      case VarStatus::kZero:
      case VarStatus::kSuper:
        if (dj > kDualTol && std::isfinite(lo_[j])) {
          status_[j] = VarStatus::kLower;
          flipped = true;
        } else if (dj < -kDualTol && std::isfinite(hi_[j])) {
          status_[j] = VarStatus::kUpper;
          flipped = true;
        } else if (std::fabs(dj) > kDualTol) {
          unfixable(j);
        }
        break;
      case VarStatus::kBasic:
        break;
    }
  }
  if (flipped) compute_primal();
  return unrepaired;
}

void LpEngine::pivot(int r, int q, const std::vector<double>& column) {
  const int leaving = head_[r];
  factor_.update(r, column);
  pos_of_[leaving] = -1;
  pos_of_[q] = r;
  head_[r] = q;
  status_[q] = VarStatus::kBasic;
  ++iterations_;
}

LpStatus LpEngine::dual_simplex(double cutoff) {
  std::vector<double> rho, alpha, col, tau;
  const int total = n_ + m_;
  int degenerate_run = 0;
  int recoveries = 0;
  bool bland = false;
  int since_cutoff_check = 0;
  while (true) {
    if (iteration_limit_ >= 0 && iterations_ >= iteration_limit_) {
      return LpStatus::kIterationLimit;
    }
    if (!factor_valid_ || factor_.num_updates() >= kRefactorInterval) {
      if (!refactor()) return LpStatus::kNumericalFailure;
      compute_primal();
      compute_duals(false);
      repair_dual_feasibility(true);
    }
    if (std::isfinite(cutoff) && !perturbed_ && ++since_cutoff_check >= 8) {
      since_cutoff_check = 0;
      if (objective() >= cutoff) return LpStatus::kCutoff;
    }

    // Leaving row.
    int r = -1;
    double best = 0.0;
    for (int p = 0; p < m_; ++p) {
      const double delta = primal_infeasibility(p);
      if (delta == 0.0) continue;
      if (bland) {
        if (r < 0 || head_[p] < head_[r]) r = p;
      } else {
        const double score = delta * delta / dse_[p];
        if (score > best) {
          best = score;
          r = p;
        }
      }
    }
    if (r < 0) return LpStatus::kOptimal;
    const int leaving = head_[r];
    const double delta = primal_infeasibility(r);
    const double sgn = delta < 0 ? -1.0 : 1.0;

    rho.assign(m_, 0.0);
    rho[r] = 1.0;
    factor_.btran(rho);
    alpha.assign(total, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (ri == 0.0) continue;
      for (int e = rstart_[i]; e < rstart_[i + 1]; ++e) alpha[ridx_[e]] += ri * rval_[e];
      alpha[n_ + i] = -ri;
    }

    // Ratio test (Harris two-pass; textbook with index ties under Bland).
    int q = -1;
    if (!bland) {
      double theta_max = kInf;
      for (int j = 0; j < total; ++j) {
        if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
        const double a = sgn * alpha[j];
        switch (status_[j]) {
          case VarStatus::kLower:
            if (a > kPivotTol) theta_max = std::min(theta_max, (d_[j] + kDualTol) / a);
            break;
          case VarStatus::kUpper:
            if (a < -kPivotTol) theta_max = std::min(theta_max, (d_[j] - kDualTol) / a);
            break;
          default:
            if (std::fabs(a) > kPivotTol) {
              theta_max = std::min(theta_max, (std::fabs(d_[j]) + kDualTol) / std::fabs(a));
            }
        }
      }
      double best_mag = 0.0;
      for (int j = 0; j < total && std::isfinite(theta_max); ++j) {
        if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
        const double a = sgn * alpha[j];
        double ratio;
        switch (status_[j]) {
          case VarStatus::kLower:
            if (a <= kPivotTol) continue;
            ratio = d_[j] / a;
            break;
          case VarStatus::kUpper:
            if (a >= -kPivotTol) continue;
            ratio = d_[j] / a;
            break;
          default:
            if (std::fabs(a) <= kPivotTol) continue;
            ratio = std::fabs(d_[j]) / std::fabs(a);
        }
        if (ratio <= theta_max && std::fabs(a) > best_mag) {
          best_mag = std::fabs(a);
          q = j;
        }
      }
    } else {
      double best_ratio = kInf;
      for (int j = 0; j < total; ++j) {
        if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
        const double a = sgn * alpha[j];
        double ratio;
        if (status_[j] == VarStatus::kLower) {
          if (a <= kPivotTol) continue;
          ratio = std::max(0.0, d_[j] / a);
        } else if (status_[j] == VarStatus::kUpper) {
          if (a >= -kPivotTol) continue;
          ratio = std::max(0.0, d_[j] / a);
        } else {
          if (std::fabs(a) <= kPivotTol) continue;
          ratio = std::fabs(d_[j] / a);
        }
        if (ratio < best_ratio) {
          best_ratio = ratio;
          q = j;
        }
      }
    }
    if (q < 0) {
      if (factor_.num_updates() > 0 && recoveries < 3) {
        ++recoveries;
        factor_valid_ = false;
        continue;
      }
      return LpStatus::kInfeasible;
    }

    load_column(q, col);
    factor_.ftran(col);
    const double alpha_q = alpha[q];
    if (std::fabs(col[r] - alpha_q) > 1e-7 * (1.0 + std::fabs(col[r])) ||
        std::fabs(col[r]) < kPivotTol) {
      if (recoveries++ > 20) return LpStatus::kNumericalFailure;
      factor_valid_ = false;
      continue;
    }

    const double theta_d = d_[q] / alpha_q;
    const double t = delta / col[r];

    for (int j = 0; j < total; ++j) {
      if (status_[j] == VarStatus::kBasic || alpha[j] == 0.0) continue;
      d_[j] -= theta_d * alpha[j];
    }
    d_[q] = 0.0;
    d_[leaving] = -theta_d;

    // Dual steepest-edge weights.
    double wr = 0.0;
    for (double v : rho) wr += v * v;
    tau = rho;
    factor_.ftran(tau);
    const double cr = col[r];
    for (int p = 0; p < m_; ++p) {
      if (p == r || col[p] == 0.0) continue;
      const double ratio = col[p] / cr;
      dse_[p] = std::max(dse_[p] - 2.0 * ratio * tau[p] + ratio * ratio * wr, 1e-10);
    }
    dse_[r] = std::max(wr / (cr * cr), 1e-10);

    for (int p = 0; p < m_; ++p) {
      if (col[p] != 0.0) x_[head_[p]] -= t * col[p];
    }
    x_[q] += t;
    x_[leaving] = delta < 0 ? lo_[leaving] : hi_[leaving];
    status_[leaving] = delta < 0 ? VarStatus::kLower : VarStatus::kUpper;
    pivot(r, q, col);

    if (std::fabs(theta_d) < 1e-12) {
      ++degenerate_run;
      if (!perturbed_ && degenerate_run > kDegenerateRunForPerturb) {
        perturb();
        degenerate_run = 0;
      }
      if (degenerate_run > kDegenerateRunForBland) bland = true;
    } else {
      degenerate_run = 0;
    }
  }
}

void LpEngine::perturb() {
  const int total = n_ + m_;
  pert_.assign(total, 0.0);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int j = 0; j < total; ++j) {
    // splitmix64 step: a fixed pseudo-random magnitude per column.
    h += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
    const double base = j < n_ ? std::fabs(cost_[j]) : 0.0;
    const double delta = (1.0 + static_cast<double>(z >> 11) * 0x1.0p-53) * 1e-7 * (1.0 + base);
    if (status_[j] == VarStatus::kLower) {
      pert_[j] = delta;
    } else if (status_[j] == VarStatus::kUpper) {
      pert_[j] = -delta;
    } else {
      continue;
    }
    d_[j] += pert_[j];
  }
  perturbed_ = true;
}

void LpEngine::unperturb() {
  if (!perturbed_) return;
  perturbed_ = false;
  compute_duals(false);
}

// Primal simplex from any basis. While basics violate bounds it minimizes
// the sum of infeasibilities (phase 1), otherwise the true objective.
LpStatus LpEngine::primal_simplex() {
  std::vector<double> col;
  int degenerate_run = 0;
  int recoveries = 0;
  bool bland = false;
  const int total = n_ + m_;
  while (true) {
    if (iteration_limit_ >= 0 && iterations_ >= iteration_limit_) {
      return LpStatus::kIterationLimit;
    }
    if (!factor_valid_ || factor_.num_updates() >= kRefactorInterval) {
      if (!refactor()) return LpStatus::kNumericalFailure;
      compute_primal();
    }
    const bool phase1 = !primal_feasible();
    compute_duals(phase1);

    int q = -1;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      if (status_[j] == VarStatus::kBasic || fixed(j)) continue;
      const double dj = d_[j];
      bool eligible = false;
      switch (status_[j]) {
        case VarStatus::kLower:
          eligible = dj < -kDualTol;
          break;
        case VarStatus::kUpper:
          eligible = dj > kDualTol;
          break;
        default:
          eligible = (dj < -kDualTol && x_[j] < hi_[j]) ||
                     (dj > kDualTol && x_[j] > lo_[j]);
      }
      if (!eligible) continue;
      if (bland) {
        q = j;
        break;
      }
      if (std::fabs(dj) > best) {
        best = std::fabs(dj);
        q = j;
      }
    }
    if (q < 0) return phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;

    const double dir = d_[q] < 0 ? 1.0 : -1.0;
    load_column(q, col);
    factor_.ftran(col);

    // Step limits per basic: feasible basics stay within their bounds;
    // infeasible ones stop when they reach the bound they violate.
    auto limit = [&](int p, double g, double slack_tol) -> double {
      const int j = head_[p];
      const double x = x_[j];
      const bool below = x < lo_[j] - feas_tol(lo_[j]);
      const bool above = x > hi_[j] + feas_tol(hi_[j]);
      if (below) return g > kPivotTol ? (lo_[j] - x) / g : kInf;
      if (above) return g < -kPivotTol ? (hi_[j] - x) / g : kInf;
      if (g < -kPivotTol && std::isfinite(lo_[j])) {
        return (x - lo_[j] + slack_tol * feas_tol(lo_[j])) / -g;
      }
      if (g > kPivotTol && std::isfinite(hi_[j])) {
        return (hi_[j] - x + slack_tol * feas_tol(hi_[j])) / g;
      }
      return kInf;
    };

    double theta_max = kInf;
    if (!bland) {
      for (int p = 0; p < m_; ++p) {
        if (col[p] == 0.0) continue;
        theta_max = std::min(theta_max, limit(p, -dir * col[p], 1.0));
      }
    }
    int r = -1;
    double step = kInf;
    double best_mag = 0.0;
    for (int p = 0; p < m_; ++p) {
      if (col[p] == 0.0) continue;
      const double g = -dir * col[p];
      double ratio = limit(p, g, 0.0);
      if (!std::isfinite(ratio)) continue;
      ratio = std::max(0.0, ratio);
      if (bland) {
        if (ratio < step || (ratio == step && r >= 0 && head_[p] < head_[r])) {
          step = ratio;
          r = p;
        }
      } else if (ratio <= theta_max && std::fabs(g) > best_mag) {
        best_mag = std::fabs(g);
        step = ratio;
        r = p;
      }
    }

    const double range = dir > 0 ? hi_[q] - x_[q] : x_[q] - lo_[q];
    if (range <= step) {
      if (!std::isfinite(range)) return LpStatus::kUnbounded;
      for (int p = 0; p < m_; ++p) {
        if (col[p] != 0.0) x_[head_[p]] -= dir * range * col[p];
      }
      status_[q] = dir > 0 ? VarStatus::kUpper : VarStatus::kLower;
      x_[q] = nonbasic_value(q);
      ++iterations_;
      continue;
    }
    if (r < 0) return LpStatus::kUnbounded;
    if (std::fabs(col[r]) < kPivotTol) {
      if (recoveries++ > 20) return LpStatus::kNumericalFailure;
      factor_valid_ = false;
      continue;
    }
    const int leaving = head_[r];
    const double x_leave = x_[leaving];
    const double g = -dir * col[r];
    for (int p = 0; p < m_; ++p) {
      if (col[p] != 0.0) x_[head_[p]] -= dir * step * col[p];
    }
    x_[q] += dir * step;
    // The leaving variable lands on the bound it was heading towards.
    bool to_lower = g < 0;
    if (x_leave < lo_[leaving] - feas_tol(lo_[leaving])) to_lower = true;
    if (x_leave > hi_[leaving] + feas_tol(hi_[leaving])) to_lower = false;
    if (to_lower) {
      x_[leaving] = lo_[leaving];
      status_[leaving] = VarStatus::kLower;
    } else {
      x_[leaving] = hi_[leaving];
      status_[leaving] = VarStatus::kUpper;
    }
    pivot(r, q, col);
    dse_[r] = 1.0;
    if (step < 1e-12) {
      if (++degenerate_run > kDegenerateRunForBland) bland = true;
    } else {
      degenerate_run = 0;
    }
  }
}

LpStatus LpEngine::solve(double cutoff) {
  if (!factor_valid_ && !refactor()) return LpStatus::kNumericalFailure;
  compute_primal();
  LpStatus st = LpStatus::kNumericalFailure;
  for (int round = 0; round < 4; ++round) {
    compute_duals(false);
    if (repair_dual_feasibility(false) == 0) {
      st = dual_simplex(cutoff);
      unperturb();
      if (st == LpStatus::kOptimal) {
        // Harris steps may leave tiny dual infeasibilities.
        st = primal_simplex();
      }
    } else {
      st = primal_simplex();
    }
    if (st != LpStatus::kOptimal) {
      if (st != LpStatus::kNumericalFailure) return st;
      set_basis({});
      if (!refactor()) return st;
      compute_primal();
      continue;
    }
    // Final accuracy check on a fresh factorization.
    if (!refactor()) return LpStatus::kNumericalFailure;
    compute_primal();
    if (primal_feasible()) {
      compute_duals(false);
      return LpStatus::kOptimal;
    }
  }
  return st;
}

double LpEngine::objective() const {
  double s = 0.0;
  for (int j = 0; j < n_; ++j) s += cost_[j] * x_[j];
  return s;
}

std::vector<double> LpEngine::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

std::vector<VarStatus> LpEngine::basis() const { return status_; }

void LpEngine::set_basis(const std::vector<VarStatus>& statuses) {
  const int total = n_ + m_;
  int basic = 0;
  for (int j = 0; j < total; ++j) {
    status_[j] = j < static_cast<int>(statuses.size()) ? statuses[j]
                                                       : VarStatus::kBasic;
    if (status_[j] == VarStatus::kBasic) ++basic;
  }
  if (basic != m_) {
    // Inconsistent snapshot: fall back to the slack basis.
    for (int j = 0; j < n_; ++j) {
      status_[j] = VarStatus::kLower;
      place_nonbasic(j);
    }
    for (int i = 0; i < m_; ++i) status_[n_ + i] = VarStatus::kBasic;
  }
  int p = 0;
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic) {
      head_[p] = j;
      pos_of_[j] = p;
      ++p;
    } else {
      pos_of_[j] = -1;
      if (status_[j] == VarStatus::kSuper) place_nonbasic(j);
      if (status_[j] == VarStatus::kLower && !std::isfinite(lo_[j])) place_nonbasic(j);
      if (status_[j] == VarStatus::kUpper && !std::isfinite(hi_[j])) place_nonbasic(j);
      x_[j] = nonbasic_value(j);
    }
  }
  std::fill(dse_.begin(), dse_.end(), 1.0);
  factor_valid_ = false;
}

}  // namespace mbus::solver
