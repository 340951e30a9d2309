#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbus/evaluate.hpp"
#include "mbus/formulation.hpp"
#include "tiny_instances.hpp"

using namespace mbus;

namespace {

Instance line_instance(std::vector<double> lengths, int buses) {
  Instance inst;
  inst.name = "line";
  const int n = static_cast<int>(lengths.size()) + 1;
  for (int v = 0; v < n; ++v) inst.network.stations.push_back({v, std::to_string(v + 1)});
  for (int v = 0; v + 1 < n; ++v) inst.network.edges.push_back({v, v + 1, lengths[v]});
  inst.network.bus_speed = 30.0;
  inst.metrics = derive_metrics(inst.network);
  inst.demand.q.assign(n, std::vector<int>(n, 0));
  inst.fleet = {buses, 10, {{1, 0.35}, {2, 0.5}}, 2 * buses};
  inst.incentives = {1.0, {0.0, 1.0, 2.0, 3.0}};
  inst.costs = {6.0, 3.7, 0.4, 0.4, 0.2, 26.0 / 60.0};
  validate_instance(inst);
  return inst;
}

// One draw in which transferring wins under every strategy.
DrawSet willing_draws(int n, int buses) {
  DrawSet d;
  d.n_stations = n;
  d.n_buses = buses;
  d.draws = 1;
  d.xi.assign(static_cast<std::size_t>(n) * buses * 2, 0.0);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < buses; ++k) d.xi[d.index(m, k, 0, kTransfer)] = 5.0;
  }
  return d;
}

// Two passengers 1 -> 3 on bus 0 (1 -> 2 -> 3); one of them moves to bus 1
// (2 -> 3) at station 2 under the lowest paid incentive.
struct TransferCase {
  Instance inst;
  DesignOutcome outcome;
};

TransferCase transfer_case() {
  TransferCase c{line_instance({2.0, 2.0}, 2), {}};
  c.inst.demand.q[0][2] = 2;
  validate_instance(c.inst);
  auto& o = c.outcome;
  o.buses = {{0, 0, 10, {0, 1, 2}, {2, 1}}, {1, 0, 10, {1, 2}, {1}}};
  o.flows = {{0, 2, 0, 1, 0, 2}, {0, 2, 1, 2, 0, 1}, {0, 2, 1, 2, 1, 1}};
  o.transfers = {{0, 2, 1, 0, 1}};
  o.strategy = {{0, 0}, {1, 0}, {0, 0}};
  return c;
}

bool has(const ValidationReport& rep, const std::string& constraint) {
  for (const auto& v : rep.violations) {
    if (v.constraint == constraint) return true;
  }
  return false;
}

std::vector<double> zero_design_values(const FormulationArtifacts& art) {
  std::vector<double> v(art.model.num_variables(), 0.0);
  for (int k = 0; k < art.buses; ++k) {
    for (int m = 0; m < art.n; ++m) v[art.index.p(m, k, 0)] = 1.0;
  }
  return v;
}

}  // namespace

TEST_CASE("validate: hand-built design with a transfer is clean") {
  const auto c = transfer_case();
  const auto rep = validate_nonlinear(c.outcome, c.inst, willing_draws(3, 2));
  CHECK_MESSAGE(rep.ok(), format_violations(rep));
  CHECK(format_violations(rep) == "no violations\n");
}

TEST_CASE("validate: single-bus two-station design is clean") {
  Instance inst = line_instance({2.0}, 1);
  inst.demand.q[0][1] = 3;
  DesignOutcome o;
  o.buses = {{0, 0, 10, {0, 1}, {3}}};
  o.flows = {{0, 1, 0, 1, 0, 3}};
  o.strategy = {{0}, {0}};
  CHECK(validate_nonlinear(o, inst, sample_draws(1, 3, 2, 1)).ok());
}

TEST_CASE("validate: load above capacity is flagged at the link") {
  Instance inst = line_instance({2.0}, 1);
  inst.demand.q[0][1] = 21;
  DesignOutcome o;
  o.buses = {{0, 1, 20, {0, 1}, {21}}};
  o.flows = {{0, 1, 0, 1, 0, 21}};
  o.strategy = {{0}, {0}};
  const auto rep = validate_nonlinear(o, inst, sample_draws(1, 3, 2, 1));
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].constraint == "capacity");
  CHECK(rep.violations[0].indices == "[0,1,0]");
}

TEST_CASE("validate: one transfer too many breaks the max expression") {
  auto c = transfer_case();
  c.outcome.transfers[0].count += 1;
  const auto rep = validate_nonlinear(c.outcome, c.inst, willing_draws(3, 2));
  CHECK(has(rep, "transfer-max"));
}

TEST_CASE("validate: willingness, gating, conservation and duration") {
  auto c = transfer_case();
  // Nobody is willing in any draw.
  DrawSet unwilling = willing_draws(3, 2);
  for (auto& v : unwilling.xi) v = 0.0;
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 2; ++k) unwilling.xi[unwilling.index(m, k, 0, kStay)] = 9.0;
  }
  CHECK(has(validate_nonlinear(c.outcome, c.inst, unwilling), "willingness"));

  auto gated = transfer_case();
  gated.outcome.strategy[0][1] = 2;
  CHECK(has(validate_nonlinear(gated.outcome, gated.inst, willing_draws(3, 2)), "gating"));

  auto lost = transfer_case();
  lost.outcome.flows.pop_back();
  const auto rep = validate_nonlinear(lost.outcome, lost.inst, willing_draws(3, 2));
  CHECK(has(rep, "conservation"));
  CHECK(has(rep, "arrival"));

  auto slow = transfer_case();
  slow.inst.costs.max_duration_h = 0.1;
  CHECK(has(validate_nonlinear(slow.outcome, slow.inst, willing_draws(3, 2)), "duration"));

  auto greedy = transfer_case();
  greedy.inst.fleet.max_units = 2;
  greedy.outcome.buses[1].type = 1;
  CHECK(has(validate_nonlinear(greedy.outcome, greedy.inst, willing_draws(3, 2)), "fleet"));

  auto ghost = transfer_case();
  ghost.outcome.flows.push_back({0, 2, 0, 1, 1, 0});
  CHECK(has(validate_nonlinear(ghost.outcome, ghost.inst, willing_draws(3, 2)), "link-service"));
}

TEST_CASE("kpis: documented arithmetic") {
  Instance two = line_instance({2.0}, 1);
  DesignOutcome o;
  o.buses = {{0, 0, 10, {0, 1}, {0}}};
  o.strategy = {{0}, {0}};
  CHECK(compute_kpis(o, two).co1 == doctest::Approx(0.7));

  Instance tenth = line_instance({3.0}, 1);
  tenth.demand.q[0][1] = 10;
  o.flows = {{0, 1, 0, 1, 0, 10}};
  const auto k = compute_kpis(o, tenth);
  CHECK(k.ct == doctest::Approx(6.0));
  CHECK(*k.aivtt_min == doctest::Approx(6.0));
  CHECK(*k.tr_pct == 0.0);
  CHECK(k.tsc == doctest::Approx(0.4 * k.co1 + 0.4 * k.ct));

  Instance hundred = line_instance({3.0}, 1);
  hundred.demand.q[0][1] = 100;
  o.flows = {{0, 1, 0, 1, 0, 92}};
  const auto s = compute_kpis(o, hundred);
  CHECK(*s.sr_pct == doctest::Approx(92.0));
  CHECK(s.ce == doctest::Approx(8 * 3.7));
  CHECK(s.served == 92);
}

TEST_CASE("kpis: undefined ratios and incentive cost") {
  Instance inst = line_instance({2.0}, 1);
  DesignOutcome o;
  o.buses = {{0, 0, 10, {0, 1}, {0}}};
  o.strategy = {{0}, {0}};
  const auto k = compute_kpis(o, inst);
  CHECK_FALSE(k.aivtt_min.has_value());
  CHECK_FALSE(k.tr_pct.has_value());
  CHECK_FALSE(k.sr_pct.has_value());
  CHECK(kpi_csv_row(k) == "2,NA,NA,NA,0.28,0.7,0,0,0");
  CHECK(kpi_csv_header() == "TTD_km,AIVTT_min,TR_pct,SR_pct,TSC,Co1,Co2,CT,CE");

  const auto c = transfer_case();
  const auto t = compute_kpis(c.outcome, c.inst);
  CHECK(t.co2 == doctest::Approx(1.0));
  CHECK(t.transfers == 1);
  CHECK(*t.tr_pct == doctest::Approx(50.0));
  CHECK(t.served == 2);
}

TEST_CASE("report: transfer plans and design table") {
  const auto c = transfer_case();
  const auto draws = willing_draws(3, 2);
  const auto plans = transfer_plans(c.outcome, c.inst, draws);
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].station == 1);
  CHECK(plans[0].bus == 0);
  CHECK(plans[0].incentive == 1.0);
  CHECK(plans[0].transferred == 1);
  CHECK(plans[0].saa_probability == 1.0);
  CHECK(plans[0].logit_probability == doctest::Approx(0.5));
  CHECK(served_by_bus(c.outcome, 2) == std::vector<long>{2, 0});
  const auto table = format_design_table(c.outcome, c.inst, draws);
  CHECK(table.find("1->2->3") != std::string::npos);
  CHECK(table.find("capacity") != std::string::npos);
}

TEST_CASE("decode: depot path becomes the route, zero flows give zero loads") {
  Instance inst = line_instance({1.0, 1.0, 1.0}, 1);
  const auto draws = sample_draws(1, 2, 4, 1);
  const auto art = build_elp(inst, draws);
  auto v = zero_design_values(art);
  const int s = inst.source(), t = inst.sink();
  v[art.index.x(s, 2, 0)] = v[art.index.x(2, 3, 0)] = v[art.index.x(3, t, 0)] = 1.0;
  v[art.index.y(0, 0)] = 1.0;
  solver::Solution sol;
  sol.has_incumbent = true;
  sol.values = v;
  const auto o = decode(sol, art, inst);
  REQUIRE(o.buses.size() == 1);
  CHECK(o.buses[0].route == std::vector<int>{2, 3});
  CHECK(o.buses[0].loads == std::vector<int>{0});
  CHECK(o.flows.empty());

  inst.demand.q[0][1] = 4;
  const auto k = compute_kpis(o, inst);
  CHECK(*k.sr_pct == 0.0);
}

TEST_CASE("decode: subtours and fractional values are errors") {
  Instance inst = line_instance({1.0, 1.0, 1.0}, 1);
  const auto art = build_elp(inst, sample_draws(1, 2, 4, 1));
  const int s = inst.source(), t = inst.sink();
  auto v = zero_design_values(art);
  v[art.index.y(0, 0)] = 1.0;
  v[art.index.x(s, 0, 0)] = v[art.index.x(0, t, 0)] = 1.0;
  v[art.index.x(2, 3, 0)] = v[art.index.x(3, 2, 0)] = 1.0;
  solver::Solution sol;
  sol.has_incumbent = true;
  sol.values = v;
  CHECK_THROWS_AS(decode(sol, art, inst), DecodeError);

  v[art.index.x(2, 3, 0)] = v[art.index.x(3, 2, 0)] = 0.0;
  v[art.index.y(0, 0)] = 0.5;
  sol.values = v;
  CHECK_THROWS_AS(decode(sol, art, inst), DecodeError);
}

TEST_CASE("property: solved tiny designs validate and reproduce the objective") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto tc = testing::make_tiny_case(seed);
    for (bool noinc : {false, true}) {
      const auto art = build_elp(tc.instance, tc.draws, {SubtourMode::kLazy, noinc});
      const auto sol = solve_design(art);
      REQUIRE(sol.status == solver::Status::kOptimal);
      const auto o = decode(sol, art, tc.instance);
      const auto rep = validate_nonlinear(o, tc.instance, tc.draws);
      CAPTURE(seed);
      CHECK_MESSAGE(rep.ok(), format_violations(rep));
      const auto k = compute_kpis(o, tc.instance);
      CHECK(k.tsc == doctest::Approx(sol.objective).epsilon(1e-6));
      long boarded = 0;
      for (long b : served_by_bus(o, tc.instance.fleet.num_routes)) boarded += b;
      CHECK(boarded == k.served);
      if (noinc) CHECK(k.transfers == 0);
    }
  }
}
