#include "mbus/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mbus {
namespace {

struct Arc {
  int from, to, bus;
};

struct OdFlow {
  std::vector<int> z;  // per arc of the current route set
  int served = 0;
  double cost = 0.0;   // in-vehicle time cost minus the unserved credit
};

struct Od {
  int origin, dest, demand;
};

class Enumerator {
 public:
  Enumerator(const Instance& inst, const DrawSet& draws, bool no_incentive)
      : inst_(inst), no_incentive_(no_incentive), n_(inst.num_stations()),
        buses_(inst.fleet.num_routes), levels_(static_cast<int>(inst.incentives.costs.size())),
        draws_(draws.draws) {
    const auto& c = inst.costs;
    w_op_ = c.w_operator;
    time_coef_ = c.w_travel * c.c_t;
    unserved_coef_ = c.w_unserved * c.c_e;
    willing_.assign(n_ * buses_, std::vector<int>(levels_, 0));
    for (int m = 0; m < n_; ++m) {
      for (int k = 0; k < buses_; ++k) {
        for (int s = 0; s < levels_; ++s) {
          const double v = -inst.incentives.cons + inst.incentives.costs[s];
          int count = 0;
          for (int d = 0; d < draws_; ++d) {
            if (v + draws.at(m, k, d, kTransfer) > draws.at(m, k, d, kStay)) ++count;
          }
          willing_[m * buses_ + k][s] = count;
        }
      }
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j && inst.demand.q[i][j] > 0) ods_.push_back({i, j, inst.demand.q[i][j]});
        if (i != j) total_demand_ += inst.demand.q[i][j];
      }
    }
    std::vector<int> seq;
    std::vector<char> used(n_, 0);
    extend_route(seq, used, 0.0);
    std::vector<int> types;
    extend_types(types, 0);
  }

  OracleResult run() {
    std::vector<int> pick(buses_, 0);
    walk_routes(pick, 0);
    result_.objective = best_;
    return result_;
  }

 private:
  void extend_route(std::vector<int>& seq, std::vector<char>& used, double hours) {
    if (!seq.empty()) routes_.push_back(seq);
    for (int v = 0; v < n_; ++v) {
      if (used[v]) continue;
      const double t = seq.empty() ? 0.0 : hours + inst_.metrics.time[seq.back()][v];
      if (t > inst_.costs.max_duration_h + 1e-9) continue;
      used[v] = 1;
      seq.push_back(v);
      extend_route(seq, used, t);
      seq.pop_back();
      used[v] = 0;
    }
  }

  void extend_types(std::vector<int>& types, int units) {
    if (static_cast<int>(types.size()) == buses_) {
      type_sets_.push_back(types);
      return;
    }
    for (int p = 0; p < static_cast<int>(inst_.fleet.types.size()); ++p) {
      const int u = units + inst_.fleet.types[p].units;
      if (u > inst_.fleet.max_units) continue;
      types.push_back(p);
      extend_types(types, u);
      types.pop_back();
    }
  }

  void walk_routes(std::vector<int>& pick, int k) {
    if (k == buses_) {
      evaluate_routes(pick);
      return;
    }
    for (std::size_t r = 0; r < routes_.size(); ++r) {
      pick[k] = static_cast<int>(r);
      walk_routes(pick, k + 1);
    }
  }

  double route_km(const std::vector<int>& route) const {
    double km = 0.0;
    for (std::size_t a = 0; a + 1 < route.size(); ++a) km += inst_.metrics.dist[route[a]][route[a + 1]];
    return km;
  }

  void evaluate_routes(const std::vector<int>& pick) {
    arcs_.clear();
    for (int k = 0; k < buses_; ++k) {
      const auto& route = routes_[pick[k]];
      for (std::size_t a = 0; a + 1 < route.size(); ++a) arcs_.push_back({route[a], route[a + 1], k});
    }
    flows_.assign(ods_.size(), {});
    double flow_floor = 0.0;
    for (std::size_t o = 0; o < ods_.size(); ++o) {
      flows_[o] = od_flows(ods_[o]);
      flow_floor += flows_[o].front().cost;
    }
    rest_floor_.assign(ods_.size() + 1, 0.0);
    for (int o = static_cast<int>(ods_.size()) - 1; o >= 0; --o) {
      rest_floor_[o] = rest_floor_[o + 1] + flows_[o].front().cost;
    }
    for (const auto& types : type_sets_) {
      ++result_.designs;
      double route_cost = 0.0;
      for (int k = 0; k < buses_; ++k) {
        route_cost += w_op_ * inst_.fleet.types[types[k]].cost_per_km * route_km(routes_[pick[k]]);
      }
      const double base = route_cost + unserved_coef_ * static_cast<double>(total_demand_);
      if (base + flow_floor >= best_ - 1e-12) continue;
      load_.assign(arcs_.size(), 0);
      cap_.assign(buses_, 0);
      for (int k = 0; k < buses_; ++k) cap_[k] = inst_.capacity(types[k]);
      chosen_.assign(ods_.size(), 0);
      combine(0, base, pick, types);
    }
  }

  // Every integer flow for one OD on the current arcs, as nonnegative
  // combinations of station-simple paths and cycles, each arc at most q.
  std::vector<OdFlow> od_flows(const Od& od) {
    std::vector<int> usable;
    for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) {
      if (arcs_[a].from != od.dest && arcs_[a].to != od.origin) usable.push_back(a);
    }
    std::vector<std::vector<int>> paths, cycles;
    std::vector<int> trail;
    std::vector<char> on(n_, 0);
    // Paths origin -> dest.
    on[od.origin] = 1;
    find_paths(od.origin, od.dest, usable, on, trail, paths);
    on[od.origin] = 0;
    // Cycles rooted at their smallest station.
    for (int root = 0; root < n_; ++root) {
      on.assign(n_, 0);
      on[root] = 1;
      find_cycles(root, root, usable, on, trail, cycles);
    }
    std::set<std::vector<int>> seen;
    std::vector<int> z(arcs_.size(), 0);
    std::vector<OdFlow> out;
    combine_items(paths, cycles, 0, 0, od.demand, z, seen, out);
    std::stable_sort(out.begin(), out.end(),
                     [](const OdFlow& a, const OdFlow& b) { return a.cost < b.cost; });
    return out;
  }

  void find_paths(int at, int dest, const std::vector<int>& usable, std::vector<char>& on,
                  std::vector<int>& trail, std::vector<std::vector<int>>& paths) {
    for (int a : usable) {
      if (arcs_[a].from != at) continue;
      const int next = arcs_[a].to;
      if (next == dest) {
        trail.push_back(a);
        paths.push_back(trail);
        trail.pop_back();
        continue;
      }
      if (on[next]) continue;
      on[next] = 1;
      trail.push_back(a);
      find_paths(next, dest, usable, on, trail, paths);
      trail.pop_back();
      on[next] = 0;
    }
  }

  void find_cycles(int root, int at, const std::vector<int>& usable, std::vector<char>& on,
                   std::vector<int>& trail, std::vector<std::vector<int>>& cycles) {
    for (int a : usable) {
      if (arcs_[a].from != at) continue;
      const int next = arcs_[a].to;
      if (next == root) {
        trail.push_back(a);
        cycles.push_back(trail);
        trail.pop_back();
        continue;
      }
      if (next < root || on[next]) continue;
      on[next] = 1;
      trail.push_back(a);
      find_cycles(root, next, usable, on, trail, cycles);
      trail.pop_back();
      on[next] = 0;
    }
  }

  void combine_items(const std::vector<std::vector<int>>& paths,
                     const std::vector<std::vector<int>>& cycles, std::size_t item, int served,
                     int q, std::vector<int>& z, std::set<std::vector<int>>& seen,
                     std::vector<OdFlow>& out) {
    const std::size_t total = paths.size() + cycles.size();
    if (item == total) {
      if (!seen.insert(z).second) return;
      OdFlow f;
      f.z = z;
      f.served = served;
      double hours = 0.0;
      for (std::size_t a = 0; a < z.size(); ++a) {
        if (z[a]) hours += z[a] * inst_.metrics.time[arcs_[a].from][arcs_[a].to];
      }
      f.cost = time_coef_ * hours - unserved_coef_ * served;
      out.push_back(std::move(f));
      return;
    }
    const bool is_path = item < paths.size();
    const auto& arcs = is_path ? paths[item] : cycles[item - paths.size()];
    int added = 0;
    combine_items(paths, cycles, item + 1, served, q, z, seen, out);
    while (true) {
      bool fits = !is_path || served + added + 1 <= q;
      for (int a : arcs) fits = fits && z[a] + 1 <= q;
      if (!fits) break;
      for (int a : arcs) ++z[a];
      ++added;
      combine_items(paths, cycles, item + 1, served + (is_path ? added : 0), q, z, seen, out);
    }
    for (int a : arcs) z[a] -= added;
  }

  void combine(std::size_t o, double partial, const std::vector<int>& pick,
               const std::vector<int>& types) {
    if (partial + rest_floor_[o] >= best_ - 1e-12) return;
    if (o == ods_.size()) {
      finish(partial, pick, types);
      return;
    }
    for (std::size_t c = 0; c < flows_[o].size(); ++c) {
      const auto& f = flows_[o][c];
      if (partial + f.cost + rest_floor_[o + 1] >= best_ - 1e-12) break;  // sorted by cost
      bool fits = true;
      for (std::size_t a = 0; a < arcs_.size() && fits; ++a) {
        fits = load_[a] + f.z[a] <= cap_[arcs_[a].bus];
      }
      if (!fits) continue;
      for (std::size_t a = 0; a < arcs_.size(); ++a) load_[a] += f.z[a];
      chosen_[o] = static_cast<int>(c);
      combine(o + 1, partial + f.cost, pick, types);
      for (std::size_t a = 0; a < arcs_.size(); ++a) load_[a] -= f.z[a];
    }
  }

  // Transfers follow from the flows; pick the cheapest admissible incentive
  // per (station, bus) and keep the design if it beats the incumbent.
  void finish(double partial, const std::vector<int>& pick, const std::vector<int>& types) {
    // r and arrivals per (od, station, bus).
    std::vector<std::vector<int>> r(ods_.size(), std::vector<int>(n_ * buses_, 0));
    std::vector<std::vector<int>> in(ods_.size(), std::vector<int>(n_ * buses_, 0));
    std::vector<int> moved(n_ * buses_, 0);
    for (std::size_t o = 0; o < ods_.size(); ++o) {
      const auto& z = flows_[o][chosen_[o]].z;
      std::vector<int> out(n_ * buses_, 0);
      for (std::size_t a = 0; a < arcs_.size(); ++a) {
        if (!z[a]) continue;
        in[o][arcs_[a].to * buses_ + arcs_[a].bus] += z[a];
        out[arcs_[a].from * buses_ + arcs_[a].bus] += z[a];
      }
      for (int m = 0; m < n_; ++m) {
        if (m == ods_[o].origin || m == ods_[o].dest) continue;
        for (int k = 0; k < buses_; ++k) {
          const int v = std::max(in[o][m * buses_ + k] - out[m * buses_ + k], 0);
          if (v && no_incentive_) return;
          r[o][m * buses_ + k] = v;
          moved[m * buses_ + k] += v;
        }
      }
    }
    double incentive = 0.0;
    std::vector<int> strategy(n_ * buses_, 0);
    for (int mk = 0; mk < n_ * buses_; ++mk) {
      if (moved[mk] == 0) continue;  // gating leaves only the free level
      int pick_s = -1;
      double pick_cost = 0.0;
      for (int s = 0; s < levels_; ++s) {
        bool ok = true;
        for (std::size_t o = 0; o < ods_.size() && ok; ++o) {
          ok = static_cast<long>(draws_) * r[o][mk] <=
               static_cast<long>(willing_[mk][s]) * in[o][mk];
        }
        if (!ok) continue;
        const double cost = inst_.incentives.costs[s] * moved[mk];
        if (pick_s < 0 || cost < pick_cost) {
          pick_s = s;
          pick_cost = cost;
        }
      }
      if (pick_s < 0) return;
      strategy[mk] = pick_s;
      incentive += pick_cost;
    }
    const double total = partial + w_op_ * incentive;
    if (total >= best_ - 1e-12) return;
    best_ = total;
    result_.feasible = true;
    DesignOutcome& out = result_.outcome;
    out = {};
    for (int k = 0; k < buses_; ++k) {
      BusPlan plan;
      plan.bus = k;
      plan.type = types[k];
      plan.capacity = inst_.capacity(types[k]);
      plan.route = routes_[pick[k]];
      out.buses.push_back(std::move(plan));
    }
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      out.buses[arcs_[a].bus].loads.push_back(load_[a]);
    }
    for (std::size_t o = 0; o < ods_.size(); ++o) {
      const auto& z = flows_[o][chosen_[o]].z;
      for (std::size_t a = 0; a < arcs_.size(); ++a) {
        if (z[a]) {
          out.flows.push_back(
              {ods_[o].origin, ods_[o].dest, arcs_[a].from, arcs_[a].to, arcs_[a].bus, z[a]});
        }
      }
      for (int mk = 0; mk < n_ * buses_; ++mk) {
        if (r[o][mk]) {
          out.transfers.push_back(
              {ods_[o].origin, ods_[o].dest, mk / buses_, mk % buses_, r[o][mk]});
        }
      }
    }
    out.strategy.assign(n_, std::vector<int>(buses_, 0));
    for (int mk = 0; mk < n_ * buses_; ++mk) out.strategy[mk / buses_][mk % buses_] = strategy[mk];
  }

  const Instance& inst_;
  bool no_incentive_;
  int n_, buses_, levels_, draws_;
  double w_op_ = 0, time_coef_ = 0, unserved_coef_ = 0;
  long total_demand_ = 0;
  std::vector<std::vector<int>> willing_;  // [m * buses + k][s]
  std::vector<Od> ods_;
  std::vector<std::vector<int>> routes_;
  std::vector<std::vector<int>> type_sets_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<OdFlow>> flows_;
  std::vector<double> rest_floor_;
  std::vector<int> load_, cap_, chosen_;
  double best_ = std::numeric_limits<double>::infinity();
  OracleResult result_;
};

}  // namespace

OracleResult enumerate_optimal(const Instance& instance, const DrawSet& draws, bool no_incentive,
                               const TinyLimits& limits) {
  const int n = instance.num_stations();
  if (n > limits.max_stations) {
    throw OracleLimitError("oracle handles at most " + std::to_string(limits.max_stations) +
                           " stations, instance has " + std::to_string(n));
  }
  if (instance.fleet.num_routes > limits.max_routes) {
    throw OracleLimitError("oracle handles at most " + std::to_string(limits.max_routes) +
                           " routes, instance has " + std::to_string(instance.fleet.num_routes));
  }
  if (instance.demand.total() > limits.max_total_demand) {
    throw OracleLimitError("oracle handles total demand up to " +
                           std::to_string(limits.max_total_demand) + ", instance has " +
                           std::to_string(instance.demand.total()));
  }
  if (draws.draws > limits.max_draws) {
    throw OracleLimitError("oracle handles at most " + std::to_string(limits.max_draws) +
                           " draws, got " + std::to_string(draws.draws));
  }
  if (draws.n_stations != n || draws.n_buses != instance.fleet.num_routes) {
    throw std::invalid_argument("draw set dimensions do not match the instance");
  }
  return Enumerator(instance, draws, no_incentive).run();
}

}  // namespace mbus
