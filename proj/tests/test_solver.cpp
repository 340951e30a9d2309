#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "mbus/milp_model.hpp"
#include "mbus/simplex.hpp"
#include "mbus/solver.hpp"

using namespace mbus;
using milp::LinearConstraint;
using milp::MilpModel;
using milp::RowSense;
using milp::Variable;

namespace {

MilpModel single_var(bool integer) {
  MilpModel m;
  const int x = m.add_variable(integer ? Variable::integer("x", 0, milp::kInf)
                                       : Variable::continuous("x"));
  m.add_constraint({"c", {{x, 1.0}}, RowSense::kGreaterEqual, 2.5});
  m.set_objective({{x, 1.0}});
  return m;
}

// Exhaustive minimum over all binary points; +inf when infeasible.
double enumerate_binary(const MilpModel& m) {
  const int n = m.num_variables();
  double best = milp::kInf;
  std::vector<double> x(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1;
    bool ok = true;
    for (const auto& c : m.constraints()) {
      const double a = milp::evaluate_terms(c.terms, x);
      if ((c.sense == RowSense::kLessEqual && a > c.rhs + 1e-9) ||
          (c.sense == RowSense::kGreaterEqual && a < c.rhs - 1e-9) ||
          (c.sense == RowSense::kEqual && std::fabs(a - c.rhs) > 1e-9)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      best = std::min(best, milp::evaluate_terms(m.objective().terms, x) +
                                m.objective().constant);
    }
  }
  return best;
}

MilpModel random_binary_model(std::mt19937_64& rng, int n, int rows) {
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> sense(0, 4);
  MilpModel m;
  for (int j = 0; j < n; ++j) m.add_variable(Variable::binary("b" + std::to_string(j)));
  for (int i = 0; i < rows; ++i) {
    LinearConstraint c;
    c.name = "r[" + std::to_string(i) + "]";
    int sum_pos = 0;
    for (int j = 0; j < n; ++j) {
      const int a = coef(rng);
      if (a != 0 && rng() % 2) {
        c.terms.push_back({j, double(a)});
        sum_pos += std::max(a, 0);
      }
    }
    const int s = sense(rng);
    c.sense = s == 0 ? RowSense::kEqual
                     : (s < 3 ? RowSense::kLessEqual : RowSense::kGreaterEqual);
    c.rhs = c.sense == RowSense::kGreaterEqual ? -double(rng() % 4)
                                                : double(rng() % (sum_pos + 2));
    if (c.sense == RowSense::kEqual) c.rhs = double(rng() % 3);
    m.add_constraint(c);
  }
  std::vector<milp::Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, double(coef(rng))});
  m.set_objective(obj, 0.5);
  return m;
}

// Minimum over vertices of a tiny LP in n<=3 variables with finite boxes.
double vertex_minimum(const MilpModel& m) {
  const int n = m.num_variables();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& c : m.constraints()) {
    Plane p{std::vector<double>(n, 0.0), c.rhs};
    for (const auto& t : c.terms) p.a[t.var] = t.coef;
    planes.push_back(p);
  }
  for (int j = 0; j < n; ++j) {
    Plane lo{std::vector<double>(n, 0.0), m.variable(j).lo};
    lo.a[j] = 1;
    Plane hi = lo;
    hi.b = m.variable(j).hi;
    planes.push_back(lo);
    planes.push_back(hi);
  }
  double best = milp::kInf;
  const int p = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      // Gaussian elimination with partial pivoting.
      std::vector<std::vector<double>> a(n, std::vector<double>(n + 1));
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a[r][c] = planes[pick[r]].a[c];
        a[r][n] = planes[pick[r]].b;
      }
      for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c; r < n; ++r)
          if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (std::fabs(a[piv][c]) < 1e-12) return;
        std::swap(a[c], a[piv]);
        for (int r = 0; r < n; ++r) {
          if (r == c) continue;
          const double f = a[r][c] / a[c][c];
          for (int k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
      }
      std::vector<double> x(n);
      for (int r = 0; r < n; ++r) x[r] = a[r][n] / a[r][r];
      for (int j = 0; j < n; ++j) {
        if (x[j] < m.variable(j).lo - 1e-9 || x[j] > m.variable(j).hi + 1e-9) return;
      }
      for (const auto& c : m.constraints()) {
        const double v = milp::evaluate_terms(c.terms, x);
        if ((c.sense == RowSense::kLessEqual && v > c.rhs + 1e-9) ||
            (c.sense == RowSense::kGreaterEqual && v < c.rhs - 1e-9) ||
            (c.sense == RowSense::kEqual && std::fabs(v - c.rhs) > 1e-9))
          return;
      }
      best = std::min(best, milp::evaluate_terms(m.objective().terms, x));
      return;
    }
    for (int i = start; i < p; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("lp: single lower bound") {
  const auto s = solver::solve_lp(single_var(false));
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(2.5));
}

TEST_CASE("lp: maximization through negation") {
  MilpModel m;
  const int x = m.add_variable(Variable::continuous("x"));
  const int y = m.add_variable(Variable::continuous("y"));
  m.add_constraint({"c", {{x, 1}, {y, 1}}, RowSense::kLessEqual, 1});
  m.set_objective({{x, -1}, {y, -1}});
  const auto s = solver::solve_lp(m);
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-1));
}

TEST_CASE("lp: degenerate equality system with a redundant row") {
  MilpModel m;
  std::vector<int> v;
  for (int j = 0; j < 4; ++j) v.push_back(m.add_variable(Variable::continuous("v" + std::to_string(j))));
  m.add_constraint({"a", {{v[0], 1}, {v[1], 1}}, RowSense::kEqual, 0});
  m.add_constraint({"b", {{v[1], 1}, {v[2], 1}}, RowSense::kEqual, 0});
  m.add_constraint({"c", {{v[0], 1}, {v[1], 2}, {v[2], 1}}, RowSense::kEqual, 0});
  m.add_constraint({"d", {{v[2], 1}, {v[3], 1}}, RowSense::kEqual, 1});
  m.set_objective({{v[0], 1}, {v[1], 1}, {v[2], 1}, {v[3], -1}});
  const auto s = solver::solve_lp(m);
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-1));
}

TEST_CASE("lp: infeasible and unbounded") {
  MilpModel a;
  const int x = a.add_variable(Variable::continuous("x", 0, 1));
  a.add_constraint({"c", {{x, 1}}, RowSense::kGreaterEqual, 2});
  CHECK(solver::solve_lp(a).status == solver::Status::kInfeasible);

  MilpModel b;
  const int y = b.add_variable(Variable::continuous("y", -milp::kInf, milp::kInf));
  b.add_constraint({"c", {{y, 1}}, RowSense::kLessEqual, 2});
  b.set_objective({{y, 1}});
  CHECK(solver::solve_lp(b).status == solver::Status::kUnbounded);

  MilpModel e;
  e.add_variable(Variable::continuous("z"));
  e.add_constraint({"empty", {}, RowSense::kLessEqual, -1});
  CHECK(solver::solve_lp(e).status == solver::Status::kInfeasible);
}

TEST_CASE("lp: random tiny LPs match vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-4, 4);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 2;
    MilpModel m;
    for (int j = 0; j < n; ++j) {
      const double lo = -double(rng() % 3);
      m.add_variable(Variable::continuous("x" + std::to_string(j), lo, lo + 1 + rng() % 4));
    }
    const int rows = 1 + rng() % 4;
    for (int i = 0; i < rows; ++i) {
      LinearConstraint c;
      c.name = "r" + std::to_string(i);
      for (int j = 0; j < n; ++j) c.terms.push_back({j, double(coef(rng))});
      c.sense = static_cast<RowSense>(rng() % 3);
      c.rhs = double(coef(rng));
      m.add_constraint(c);
    }
    std::vector<milp::Term> obj;
    for (int j = 0; j < n; ++j) obj.push_back({j, double(coef(rng))});
    m.set_objective(obj);
    const double expect = vertex_minimum(m);
    const auto s = solver::solve_lp(m);
    if (std::isinf(expect)) {
      CHECK(s.status == solver::Status::kInfeasible);
    } else {
      REQUIRE(s.status == solver::Status::kOptimal);
      CHECK(s.objective == doctest::Approx(expect).epsilon(1e-9));
      CHECK(solver::verify(m, s.values, 1e-7).ok());
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("milp: integer lower bound rounds up") {
  const auto s = solver::solve_milp(single_var(true));
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(3));
}

TEST_CASE("milp: binary knapsack") {
  MilpModel m;
  const int a = m.add_variable(Variable::binary("a"));
  const int b = m.add_variable(Variable::binary("b"));
  m.add_constraint({"cap", {{a, 2}, {b, 2}}, RowSense::kLessEqual, 3});
  m.set_objective({{a, -3}, {b, -2}});
  const auto s = solver::solve_milp(m);
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(-s.objective == doctest::Approx(3));
  CHECK(s.values[a] == 1);
  CHECK(s.values[b] == 0);
}

TEST_CASE("milp: lazy callback rejecting a point") {
  MilpModel m;
  const int a = m.add_variable(Variable::binary("a"));
  const int b = m.add_variable(Variable::binary("b"));
  m.set_objective({{a, -3}, {b, -2}});
  int calls = 0;
  const auto s = solver::solve_milp(m, {}, [&](const std::vector<double>& x) {
    ++calls;
    std::vector<LinearConstraint> cuts;
    if (x[a] > 0.5 && x[b] > 0.5) {
      cuts.push_back({"no_both", {{a, 1}, {b, 1}}, RowSense::kLessEqual, 1});
    }
    return cuts;
  });
  CHECK(calls >= 2);
  CHECK(s.objective == doctest::Approx(-3));
  CHECK(s.lazy_rows == 1);
}

TEST_CASE("milp: random binary models match enumeration") {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 4 + trial % 9;  // up to 12 binaries
    const auto m = random_binary_model(rng, n, 2 + trial % 5);
    const double expect = enumerate_binary(m);
    for (auto rule : {solver::Branching::kMostFractional, solver::Branching::kPseudoCost}) {
      solver::SolverConfig cfg;
      cfg.branching = rule;
      const auto s = solver::solve_milp(m, cfg);
      if (std::isinf(expect)) {
        CHECK(s.status == solver::Status::kInfeasible);
      } else {
        REQUIRE(s.status == solver::Status::kOptimal);
        CHECK(std::fabs(s.objective - expect) <= 1e-9);
        CHECK(solver::verify(m, s.values).ok());
        for (std::size_t i = 1; i < s.bound_trace.size(); ++i) {
          CHECK(s.bound_trace[i] >= s.bound_trace[i - 1] - 1e-12);
        }
      }
    }
    if (!std::isinf(expect)) ++feasible;
  }
  CHECK(feasible >= 50);
}

TEST_CASE("milp: node limit reports limit with incumbent") {
  std::mt19937_64 rng(5);
  const auto m = random_binary_model(rng, 12, 6);
  solver::SolverConfig cfg;
  cfg.node_limit = 1;
  const auto s = solver::solve_milp(m, cfg);
  CHECK((s.status == solver::Status::kLimit || s.status == solver::Status::kOptimal ||
         s.status == solver::Status::kInfeasible));
  CHECK(s.nodes <= 1);
}

TEST_CASE("milp: node log has one line per node") {
  std::mt19937_64 rng(9);
  const auto m = random_binary_model(rng, 8, 4);
  std::ostringstream log;
  solver::SolverConfig cfg;
  cfg.node_log = &log;
  const auto s = solver::solve_milp(m, cfg);
  std::size_t lines = 0;
  for (char c : log.str()) lines += c == '\n';
  CHECK(static_cast<long>(lines) == s.nodes);
}

TEST_CASE("milp: a valid start becomes the incumbent, an invalid one is ignored") {
  MilpModel m;
  const int a = m.add_variable(Variable::binary("a"));
  const int b = m.add_variable(Variable::binary("b"));
  m.add_constraint({"cap", {{a, 2}, {b, 2}}, RowSense::kLessEqual, 3});
  m.set_objective({{a, -3}, {b, -2}}, 1.0);
  solver::SolverConfig cfg;
  cfg.node_limit = 0;
  cfg.start = {0.0, 1.0};
  auto s = solver::solve_milp(m, cfg);
  CHECK(s.status == solver::Status::kLimit);
  REQUIRE(s.has_incumbent);
  CHECK(s.objective == doctest::Approx(-1.0));

  cfg.start = {1.0, 1.0};
  s = solver::solve_milp(m, cfg);
  CHECK_FALSE(s.has_incumbent);

  cfg.node_limit = -1;
  cfg.start = {0.0, 1.0};
  s = solver::solve_milp(m, cfg);
  CHECK(s.status == solver::Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-2.0));
}

TEST_CASE("milp: branching priorities do not change the optimum") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + trial % 9;
    const auto m = random_binary_model(rng, n, 2 + trial % 4);
    const double expect = enumerate_binary(m);
    solver::SolverConfig cfg;
    std::uniform_int_distribution<int> level(0, 2);
    for (int j = 0; j < n; ++j) cfg.priority.push_back(level(rng));
    const auto s = solver::solve_milp(m, cfg);
    CAPTURE(trial);
    if (std::isinf(expect)) {
      CHECK(s.status == solver::Status::kInfeasible);
    } else {
      REQUIRE(s.status == solver::Status::kOptimal);
      CHECK(std::fabs(s.objective - expect) <= 1e-9);
    }
  }
}

TEST_CASE("milp: parity row with a feasible relaxation is infeasible") {
  MilpModel m;
  const int x = m.add_variable(Variable::integer("x", 0, 10));
  const int y = m.add_variable(Variable::integer("y", 0, 10));
  m.add_constraint({"odd", {{x, 2}, {y, -2}}, RowSense::kEqual, 1});
  m.set_objective({{x, 1}});
  CHECK(solver::solve_lp(m).status == solver::Status::kOptimal);
  CHECK(solver::solve_milp(m).status == solver::Status::kInfeasible);
}

TEST_CASE("verify: groups rows by family") {
  MilpModel m;
  const int x = m.add_variable(Variable::continuous("x"));
  m.add_constraint({"cap[0]", {{x, 1}}, RowSense::kLessEqual, 1});
  m.add_constraint({"cap[1]", {{x, 1}}, RowSense::kLessEqual, 3});
  m.add_constraint({"demand[0]", {{x, 1}}, RowSense::kGreaterEqual, 0});
  const auto r = solver::verify(m, {2.0});
  CHECK_FALSE(r.ok());
  REQUIRE(r.families.size() == 2);
  CHECK(r.families[0].family == "cap");
  CHECK(r.families[0].max_violation == doctest::Approx(1));
  CHECK(r.families[0].worst_row == "cap[0]");
  CHECK(r.families[1].max_violation == 0);
}

TEST_CASE("lp: medium random LPs satisfy optimality conditions") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int optimal = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 30 + trial, rows = 20 + trial / 2;
    MilpModel m;
    for (int j = 0; j < n; ++j) {
      const int kind = rng() % 4;
      const double lo = kind == 3 ? -milp::kInf : -double(rng() % 3);
      const double hi = kind == 0 ? milp::kInf : 2.0 + double(rng() % 5);
      m.add_variable(Variable::continuous("x" + std::to_string(j), lo, hi));
    }
    for (int i = 0; i < rows; ++i) {
      LinearConstraint c;
      c.name = "r" + std::to_string(i);
      for (int j = 0; j < n; ++j)
        if (rng() % 4 == 0) c.terms.push_back({j, std::round(u(rng) * 10) / 2});
      c.sense = static_cast<RowSense>(rng() % 3);
      c.rhs = std::round(u(rng) * 8);
      m.add_constraint(c);
    }
    std::vector<milp::Term> obj;
    for (int j = 0; j < n; ++j) obj.push_back({j, std::round(u(rng) * 6)});
    m.set_objective(obj);

    solver::LpEngine eng(m);
    const auto st = eng.solve();
    if (st != solver::LpStatus::kOptimal) continue;
    ++optimal;
    const auto x = eng.primal();
    CHECK(solver::verify(m, x, 1e-7).ok());
    const auto& d = eng.reduced_costs();
    std::vector<double> y(rows);
    for (int i = 0; i < rows; ++i) y[i] = d[n + i];
    std::vector<double> aty(n, 0.0);
    for (int i = 0; i < rows; ++i)
      for (const auto& t : m.constraint(i).terms) aty[t.var] += t.coef * y[i];
    std::vector<double> c(n, 0.0);
    for (const auto& t : m.objective().terms) c[t.var] = t.coef;
    for (int j = 0; j < n; ++j) {
      const double dj = c[j] - aty[j];
      const auto& v = m.variable(j);
      if (x[j] > v.lo + 1e-7) CHECK(dj <= 1e-7);
      if (x[j] < v.hi - 1e-7) CHECK(dj >= -1e-7);
    }
    for (int i = 0; i < rows; ++i) {
      const auto& row = m.constraint(i);
      const double act = milp::evaluate_terms(row.terms, x);
      // The logical s_i = a_i x has cost 0; its reduced cost is y_i.
      if (row.sense == RowSense::kLessEqual && act < row.rhs - 1e-7) CHECK(std::fabs(y[i]) <= 1e-7);
      if (row.sense == RowSense::kGreaterEqual && act > row.rhs + 1e-7) CHECK(std::fabs(y[i]) <= 1e-7);
      if (row.sense == RowSense::kLessEqual) CHECK(y[i] <= 1e-7);
      if (row.sense == RowSense::kGreaterEqual) CHECK(y[i] >= -1e-7);
    }
  }
  CHECK(optimal >= 10);
}
