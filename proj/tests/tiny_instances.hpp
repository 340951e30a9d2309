#pragma once

// Seeded random instances small enough for the brute-force oracle.

#include <cstdint>
#include <string>

#include "mbus/choice.hpp"
#include "mbus/instance.hpp"
#include "mbus/rng.hpp"

namespace mbus::testing {

struct TinyCase {
  Instance instance;
  DrawSet draws;
};

inline TinyCase make_tiny_case(std::uint64_t seed) {
  Rng rng(seed * 7919 + 13);
  Instance inst;
  inst.name = "tiny-" + std::to_string(seed);
  const int n = 2 + static_cast<int>(rng.uniform_int(0, 2));  // 2..4 stations
  for (int v = 0; v < n; ++v) inst.network.stations.push_back({v, std::to_string(v + 1)});
  auto length = [&] { return 1.0 + 0.5 * static_cast<double>(rng.uniform_int(0, 6)); };
  for (int v = 0; v + 1 < n; ++v) inst.network.edges.push_back({v, v + 1, length()});
  if (n > 2) inst.network.edges.push_back({n - 1, 0, length()});
  if (n == 4 && rng.uniform01() < 0.5) inst.network.edges.push_back({0, 2, length()});
  inst.network.bus_speed = 30.0;
  inst.metrics = derive_metrics(inst.network);

  inst.demand.q.assign(n, std::vector<int>(n, 0));
  const long total = rng.uniform_int(1, 4);
  for (long p = 0; p < total; ++p) {
    const int i = static_cast<int>(rng.uniform_int(0, n - 1));
    int j = static_cast<int>(rng.uniform_int(0, n - 2));
    if (j >= i) ++j;
    ++inst.demand.q[i][j];
  }

  inst.fleet.num_routes = n == 2 ? 1 : 1 + static_cast<int>(rng.uniform_int(0, 1));
  inst.fleet.unit_capacity = 1;
  inst.fleet.types = {{1, 0.35}, {2, 0.5}};
  inst.fleet.max_units = inst.fleet.num_routes + static_cast<int>(rng.uniform_int(0, 1));
  inst.incentives.cons = 1.0;
  inst.incentives.costs = {0.0, 1.0, 2.0, 3.0};
  inst.costs.c_t = 6.0;
  // A wide range of unserved penalties so that some cases serve nobody and
  // others pay for transfers.
  inst.costs.c_e = 2.0 + 4.0 * static_cast<double>(rng.uniform_int(0, 8));
  inst.costs.w_operator = 0.4;
  inst.costs.w_travel = 0.4;
  inst.costs.w_unserved = 0.2;
  inst.costs.max_duration_h = (12.0 + 2.0 * static_cast<double>(rng.uniform_int(0, 6))) / 60.0;
  validate_instance(inst);

  const int draws = 1 + static_cast<int>(rng.uniform_int(0, 4));
  DrawSet ds = sample_draws(seed, draws, n, inst.fleet.num_routes);
  return {std::move(inst), std::move(ds)};
}

// Four stations on a line (sometimes closed into a ring), two routes of unit
// capacity and a high unserved penalty, with a long trip overlapping a crossing
// one so that moving a passenger between buses is often worth an incentive.
inline TinyCase make_transfer_case(std::uint64_t seed) {
  Rng rng(seed * 31 + 5);
  Instance inst;
  inst.name = "transfer-" + std::to_string(seed);
  const int n = 4;
  for (int v = 0; v < n; ++v) inst.network.stations.push_back({v, std::to_string(v + 1)});
  for (int v = 0; v + 1 < n; ++v) {
    inst.network.edges.push_back({v, v + 1, 1.0 + 0.5 * static_cast<double>(rng.uniform_int(0, 4))});
  }
  if (rng.uniform01() < 0.5) inst.network.edges.push_back({3, 0, 2.0});
  inst.network.bus_speed = 30.0;
  inst.metrics = derive_metrics(inst.network);

  inst.demand.q.assign(n, std::vector<int>(n, 0));
  inst.demand.q[0][2] += 1 + static_cast<int>(rng.uniform_int(0, 1));
  inst.demand.q[1][3] += 1;
  const long left = 4 - inst.demand.total();
  for (long p = 0; p < left; ++p) {
    const int i = static_cast<int>(rng.uniform_int(0, n - 1));
    int j = static_cast<int>(rng.uniform_int(0, n - 2));
    if (j >= i) ++j;
    ++inst.demand.q[i][j];
  }

  inst.fleet = {2, 1, {{1, 0.35}, {2, 0.5}}, 3};
  inst.incentives = {1.0, {0.0, 1.0, 2.0, 3.0}};
  inst.costs = {6.0, 30.0, 0.4, 0.4, 0.2,
                (10.0 + 2.0 * static_cast<double>(rng.uniform_int(0, 4))) / 60.0};
  validate_instance(inst);

  const int draws = 1 + static_cast<int>(rng.uniform_int(0, 4));
  DrawSet ds = sample_draws(seed, draws, n, 2);
  return {std::move(inst), std::move(ds)};
}

}  // namespace mbus::testing
