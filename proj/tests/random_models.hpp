#pragma once

// Seeded random MILPs for the solver and file-format properties.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mbus/milp_model.hpp"

namespace mbus::testing {

// Pure binary model: `vars` binaries, a few random rows of mixed sense and a
// random objective. Coefficients are small integers.
inline milp::MilpModel random_binary_milp(std::uint64_t seed, int vars, int rows) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> pick(0, 2);
  milp::MilpModel m;
  for (int j = 0; j < vars; ++j) m.add_variable(milp::Variable::binary("b[" + std::to_string(j) + "]"));
  for (int r = 0; r < rows; ++r) {
    milp::LinearConstraint c;
    c.name = "row[" + std::to_string(r) + "]";
    double sum_pos = 0.0;
    for (int j = 0; j < vars; ++j) {
      const int a = coef(rng);
      if (a != 0 && pick(rng) != 0) {
        c.terms.push_back({j, static_cast<double>(a)});
        if (a > 0) sum_pos += a;
      }
    }
    const int s = pick(rng);
    c.sense = s == 0 ? milp::RowSense::kLessEqual
                     : (s == 1 ? milp::RowSense::kGreaterEqual : milp::RowSense::kEqual);
    std::uniform_int_distribution<int> rhs(-3, static_cast<int>(sum_pos / 2) + 1);
    c.rhs = rhs(rng);
    if (c.sense == milp::RowSense::kEqual && pick(rng) != 0) c.sense = milp::RowSense::kLessEqual;
    m.add_constraint(std::move(c));
  }
  std::vector<milp::Term> obj;
  for (int j = 0; j < vars; ++j) obj.push_back({j, static_cast<double>(coef(rng))});
  m.set_objective(obj);
  return m;
}

// Exhaustive minimum over all binary points; +inf when infeasible.
inline double enumerate_binary_optimum(const milp::MilpModel& m) {
  const int n = m.num_variables();
  double best = milp::kInf;
  std::vector<double> x(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (int j = 0; j < n; ++j) x[j] = static_cast<double>((mask >> j) & 1);
    bool ok = true;
    for (const auto& c : m.constraints()) {
      const double a = milp::evaluate_terms(c.terms, x);
      if ((c.sense == milp::RowSense::kLessEqual && a > c.rhs + 1e-9) ||
          (c.sense == milp::RowSense::kGreaterEqual && a < c.rhs - 1e-9) ||
          (c.sense == milp::RowSense::kEqual && std::abs(a - c.rhs) > 1e-9)) {
        ok = false;
        break;
      }
    }
    if (ok) best = std::min(best, milp::evaluate_terms(m.objective().terms, x) + m.objective().constant);
  }
  return best;
}

// Mixed model exercising every feature the file formats carry: all variable
// kinds, free and infinite bounds, long names, empty rows and an objective
// constant.
inline milp::MilpModel random_format_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_int_distribution<int> small(-900, 900);
  std::uniform_int_distribution<int> pick(0, 5);
  milp::MilpModel m;
  const int vars = count(rng);
  for (int j = 0; j < vars; ++j) {
    const bool long_name = pick(rng) == 0;
    const std::string name = long_name ? "flow_variable[" + std::to_string(j) + ",12,3]"
                                       : "v[" + std::to_string(j) + "]";
    switch (pick(rng) % 3) {
      case 0:
        m.add_variable(milp::Variable::binary(name));
        break;
      case 1: {
        const double lo = pick(rng) == 0 ? -5.0 : 0.0;
        const double hi = pick(rng) == 0 ? milp::kInf : lo + pick(rng) + 1;
        m.add_variable(milp::Variable::integer(name, lo, hi));
        break;
      }
      default: {
        const int kind = pick(rng);
        double lo = 0.0, hi = milp::kInf;
        if (kind == 0) lo = -milp::kInf;
        if (kind == 1) {
          const int base = small(rng);
          lo = base / 100.0;
          hi = (base + 250) / 100.0;
        }
        if (kind == 2) { lo = -milp::kInf; hi = small(rng) / 10.0; }
        m.add_variable(milp::Variable::continuous(name, lo, hi));
      }
    }
  }
  const int rows = count(rng) - 1;
  for (int r = 0; r < rows; ++r) {
    milp::LinearConstraint c;
    c.name = pick(rng) == 0 ? "long_row_name[" + std::to_string(r) + "]" : "c[" + std::to_string(r) + "]";
    for (int j = 0; j < vars; ++j) {
      if (pick(rng) < 3) c.terms.push_back({j, small(rng) / 100.0});
    }
    const int s = pick(rng) % 3;
    c.sense = s == 0 ? milp::RowSense::kLessEqual
                     : (s == 1 ? milp::RowSense::kGreaterEqual : milp::RowSense::kEqual);
    c.rhs = small(rng) / 10.0;
    m.add_constraint(std::move(c));
  }
  std::vector<milp::Term> obj;
  for (int j = 0; j < vars; ++j) {
    if (pick(rng) < 4) obj.push_back({j, small(rng) / 1000.0});
  }
  m.set_objective(obj, pick(rng) == 0 ? small(rng) / 10.0 : 0.0);
  return m;
}

}  // namespace mbus::testing
