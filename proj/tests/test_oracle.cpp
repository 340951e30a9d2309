#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbus/evaluate.hpp"
#include "mbus/formulation.hpp"
#include "mbus/oracle.hpp"
#include "tiny_instances.hpp"

using namespace mbus;

namespace {

Instance two_stations(double length, int demand, int max_units) {
  Instance inst;
  inst.name = "pair";
  inst.network.stations = {{0, "a"}, {1, "b"}};
  inst.network.edges = {{0, 1, length}};
  inst.network.bus_speed = 30.0;
  inst.metrics = derive_metrics(inst.network);
  inst.demand.q = {{0, demand}, {0, 0}};
  inst.fleet = {1, 1, {{1, 0.35}, {2, 0.5}}, max_units};
  inst.incentives = {1.0, {0.0, 1.0, 2.0, 3.0}};
  inst.costs = {6.0, 3.7, 0.4, 0.4, 0.2, 26.0 / 60.0};
  validate_instance(inst);
  return inst;
}

}  // namespace

TEST_CASE("limits are refused up front") {
  auto tc = testing::make_tiny_case(2);
  CHECK_THROWS_AS(enumerate_optimal(tc.instance, sample_draws(1, 6, tc.instance.num_stations(),
                                                              tc.instance.fleet.num_routes)),
                  OracleLimitError);
  Instance big = two_stations(2.0, 5, 2);
  CHECK_THROWS_AS(enumerate_optimal(big, sample_draws(1, 1, 2, 1)), OracleLimitError);
  TinyLimits narrow;
  narrow.max_stations = 1;
  CHECK_THROWS_AS(enumerate_optimal(two_stations(2.0, 1, 2), sample_draws(1, 1, 2, 1), false,
                                    narrow),
                  OracleLimitError);
  CHECK_THROWS_AS(enumerate_optimal(two_stations(2.0, 1, 2), sample_draws(1, 1, 3, 1)),
                  std::invalid_argument);
}

TEST_CASE("zero demand costs only the cheapest forced routes") {
  // Every route must visit a station; a one-station route has no length.
  const Instance inst = two_stations(2.0, 0, 2);
  const auto r = enumerate_optimal(inst, sample_draws(1, 2, 2, 1));
  REQUIRE(r.feasible);
  CHECK(r.objective == doctest::Approx(0.0));
  REQUIRE(r.outcome.buses.size() == 1);
  CHECK(r.outcome.buses[0].route.size() == 1);
}

TEST_CASE("one passenger between two stations rides the direct link") {
  const Instance inst = two_stations(2.0, 1, 2);
  const auto r = enumerate_optimal(inst, sample_draws(3, 1, 2, 1));
  REQUIRE(r.feasible);
  const double hours = 2.0 / 30.0;
  CHECK(r.objective == doctest::Approx(0.4 * 0.35 * 2.0 + 0.4 * 6.0 * hours));
  CHECK(r.outcome.buses[0].route == std::vector<int>{0, 1});
  CHECK(r.outcome.buses[0].type == 0);
  REQUIRE(r.outcome.flows.size() == 1);
  CHECK(r.outcome.flows[0].count == 1);
}

TEST_CASE("demand above every capacity pays the unserved penalty") {
  // Largest bus carries two; four want to travel.
  const Instance inst = two_stations(2.0, 4, 2);
  const auto r = enumerate_optimal(inst, sample_draws(3, 1, 2, 1));
  REQUIRE(r.feasible);
  const double hours = 2.0 / 30.0;
  CHECK(r.objective ==
        doctest::Approx(0.4 * 0.5 * 2.0 + 0.4 * 6.0 * hours * 2 + 0.2 * 3.7 * 2));
  CHECK(compute_kpis(r.outcome, inst).ce == doctest::Approx(2 * 3.7));
}

TEST_CASE("property: oracle agrees with the MILP and its designs validate") {
  int transfers_seen = 0;
  auto check = [&](const testing::TinyCase& tc, bool no_incentive) {
    const auto oracle = enumerate_optimal(tc.instance, tc.draws, no_incentive);
    const auto art = build_elp(tc.instance, tc.draws, {SubtourMode::kLazy, no_incentive});
    const auto milp = solve_design(art);
    CAPTURE(tc.instance.name);
    CAPTURE(no_incentive);
    REQUIRE(oracle.feasible);
    REQUIRE(milp.status == solver::Status::kOptimal);
    CHECK(milp.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
    const auto rep = validate_nonlinear(oracle.outcome, tc.instance, tc.draws);
    CHECK_MESSAGE(rep.ok(), format_violations(rep));
    CHECK(compute_kpis(oracle.outcome, tc.instance).tsc ==
          doctest::Approx(oracle.objective).epsilon(1e-9));
    if (no_incentive) CHECK(oracle.outcome.transfers.empty());
    transfers_seen += static_cast<int>(oracle.outcome.transfers.size());
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) check(testing::make_tiny_case(seed), false);
  for (std::uint64_t seed : {1, 10, 12}) {
    check(testing::make_transfer_case(seed), false);
    check(testing::make_transfer_case(seed), true);
  }
  CHECK(transfers_seen > 0);
}
