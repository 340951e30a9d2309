#include "mbus/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace mbus {
namespace {

using Key4 = std::array<int, 4>;

int parse_node(const std::string& s, int n) {
  if (s == "s") return n;
  if (s == "t") return n + 1;
  return std::stoi(s);
}

std::string idx(std::initializer_list<int> parts) {
  std::string out = "[";
  bool first = true;
  for (int p : parts) {
    if (!first) out += ',';
    out += std::to_string(p);
    first = false;
  }
  return out + "]";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Per (origin, dest, station, bus): passengers arriving on and leaving with
// that bus at the station.
struct StationFlows {
  std::map<Key4, long> in, out;

  explicit StationFlows(const std::vector<LinkFlow>& flows) {
    for (const auto& f : flows) {
      in[{f.origin, f.dest, f.to, f.bus}] += f.count;
      out[{f.origin, f.dest, f.from, f.bus}] += f.count;
    }
  }
  long arrivals(int i, int j, int m, int k) const { return get(in, {i, j, m, k}); }
  long departures(int i, int j, int m, int k) const { return get(out, {i, j, m, k}); }

 private:
  static long get(const std::map<Key4, long>& m, const Key4& key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  }
};

double route_length(const BusPlan& plan, const Instance& inst) {
  double len = 0.0;
  for (std::size_t a = 0; a + 1 < plan.route.size(); ++a) {
    len += inst.dist(plan.route[a], plan.route[a + 1]);
  }
  return len;
}

double route_time(const BusPlan& plan, const Instance& inst) {
  double t = 0.0;
  for (std::size_t a = 0; a + 1 < plan.route.size(); ++a) {
    t += inst.time(plan.route[a], plan.route[a + 1]);
  }
  return t;
}

}  // namespace

DesignOutcome decode(const solver::Solution& solution, const FormulationArtifacts& art,
                     const Instance& inst) {
  if (!solution.has_incumbent) throw DecodeError("solution has no values to decode");
  const auto& model = art.model;
  if (static_cast<int>(solution.values.size()) != model.num_variables()) {
    throw DecodeError("solution has " + std::to_string(solution.values.size()) +
                      " values but the model has " + std::to_string(model.num_variables()) +
                      " variables");
  }
  const int n = inst.num_stations();
  const int buses = inst.fleet.num_routes;
  DesignOutcome out;
  out.strategy.assign(n, std::vector<int>(buses, -1));
  std::vector<int> type(buses, -1);
  std::vector<std::map<int, std::vector<int>>> arcs(buses);

  for (int id = 0; id < model.num_variables(); ++id) {
    const auto parsed = milp::parse_structured_name(model.variable(id).name);
    if (!parsed) continue;
    const double v = solution.values[id];
    const long rounded = std::lround(v);
    const auto& ix = parsed->indices;
    const std::string& fam = parsed->family;
    if (fam != "x" && fam != "y" && fam != "z" && fam != "r" && fam != "p") continue;
    if (std::fabs(v - rounded) > 1e-4) {
      throw DecodeError(model.variable(id).name + " = " + num(v) + " is not integral");
    }
    if (rounded == 0) continue;
    if (fam == "x") {
      const int k = std::stoi(ix[2]);
      arcs[k][parse_node(ix[0], n)].push_back(parse_node(ix[1], n));
    } else if (fam == "y") {
      type[std::stoi(ix[1])] = std::stoi(ix[0]);
    } else if (fam == "z") {
      out.flows.push_back({std::stoi(ix[0]), std::stoi(ix[1]), std::stoi(ix[2]),
                           std::stoi(ix[3]), std::stoi(ix[4]), static_cast<int>(rounded)});
    } else if (fam == "r") {
      out.transfers.push_back({std::stoi(ix[0]), std::stoi(ix[1]), std::stoi(ix[2]),
                               std::stoi(ix[3]), static_cast<int>(rounded)});
    } else {
      out.strategy[std::stoi(ix[0])][std::stoi(ix[1])] = std::stoi(ix[2]);
    }
  }

  for (int k = 0; k < buses; ++k) {
    BusPlan plan;
    plan.bus = k;
    plan.type = type[k];
    if (plan.type < 0) throw DecodeError("bus " + std::to_string(k) + " has no type");
    plan.capacity = inst.capacity(plan.type);
    auto& succ = arcs[k];
    std::size_t arc_count = 0;
    for (const auto& [from, tos] : succ) arc_count += tos.size();
    int at = n;
    std::size_t used = 0;
    std::set<int> seen;
    while (at != n + 1) {
      auto it = succ.find(at);
      if (it == succ.end() || it->second.size() != 1) {
        throw DecodeError("bus " + std::to_string(k) + ": route support branches or breaks at node " +
                          std::to_string(at));
      }
      at = it->second.front();
      ++used;
      if (at == n + 1) break;
      if (!seen.insert(at).second) {
        throw DecodeError("bus " + std::to_string(k) + ": route revisits station " +
                          std::to_string(at));
      }
      plan.route.push_back(at);
    }
    if (used != arc_count) {
      throw DecodeError("bus " + std::to_string(k) +
                        ": arcs outside the depot-to-depot path (subtour)");
    }
    out.buses.push_back(std::move(plan));
  }

  std::map<std::array<int, 3>, int> load;
  for (const auto& f : out.flows) load[{f.from, f.to, f.bus}] += f.count;
  for (auto& plan : out.buses) {
    for (std::size_t a = 0; a + 1 < plan.route.size(); ++a) {
      auto it = load.find({plan.route[a], plan.route[a + 1], plan.bus});
      plan.loads.push_back(it == load.end() ? 0 : it->second);
    }
  }
  return out;
}

ValidationReport validate_nonlinear(const DesignOutcome& o, const Instance& inst,
                                    const DrawSet& draws) {
  ValidationReport rep;
  auto flag = [&](std::string c, std::string i, std::string d) {
    rep.violations.push_back({std::move(c), std::move(i), std::move(d)});
  };
  const int n = inst.num_stations();
  const int buses = inst.fleet.num_routes;
  const int levels = static_cast<int>(inst.incentives.costs.size());

  // Routes, types, duration and fleet.
  if (static_cast<int>(o.buses.size()) != buses) {
    flag("route", "", "expected " + std::to_string(buses) + " buses, got " +
                          std::to_string(o.buses.size()));
  }
  std::set<std::array<int, 3>> served_links;
  long units = 0;
  for (const auto& plan : o.buses) {
    const int k = plan.bus;
    if (plan.route.empty()) flag("route", idx({k}), "empty route");
    std::set<int> seen;
    bool stations_ok = true;
    for (int v : plan.route) {
      if (v < 0 || v >= n || !seen.insert(v).second) {
        flag("route", idx({k}), "station " + std::to_string(v) + " invalid or repeated");
        stations_ok = false;
      }
    }
    if (plan.type < 0 || plan.type >= static_cast<int>(inst.fleet.types.size())) {
      flag("type", idx({k}), "unknown bus type " + std::to_string(plan.type));
      continue;
    }
    units += inst.fleet.types[plan.type].units;
    if (!stations_ok) continue;
    for (std::size_t a = 0; a + 1 < plan.route.size(); ++a) {
      served_links.insert({plan.route[a], plan.route[a + 1], k});
    }
    const double t = route_time(plan, inst);
    if (t > inst.costs.max_duration_h + 1e-9) {
      flag("duration", idx({k}), "route takes " + num(t * 60) + " min, limit " +
                                     num(inst.costs.max_duration_h * 60) + " min");
    }
  }
  if (units > inst.fleet.max_units) {
    flag("fleet", "", std::to_string(units) + " modules used, " +
                          std::to_string(inst.fleet.max_units) + " available");
  }

  // Passenger flows.
  std::map<std::array<int, 3>, long> load;
  std::map<std::array<int, 2>, long> boarded;
  for (const auto& f : o.flows) {
    const std::string where = idx({f.origin, f.dest, f.from, f.to, f.bus});
    const bool in_range = f.origin >= 0 && f.origin < n && f.dest >= 0 && f.dest < n &&
                          f.from >= 0 && f.from < n && f.to >= 0 && f.to < n &&
                          f.bus >= 0 && f.bus < buses;
    if (!in_range || f.origin == f.dest || f.from == f.to || f.from == f.dest ||
        f.to == f.origin) {
      flag("flow-domain", where, "flow on a link the OD cannot use");
      continue;
    }
    if (f.count < 0) flag("flow-domain", where, "negative flow");
    if (!served_links.count({f.from, f.to, f.bus})) {
      flag("link-service", where, std::to_string(f.count) + " passengers on a link bus " +
                                      std::to_string(f.bus) + " does not drive");
    }
    load[{f.from, f.to, f.bus}] += f.count;
    if (f.from == f.origin) boarded[{f.origin, f.dest}] += f.count;
  }
  for (const auto& [link, total] : load) {
    const int k = link[2];
    const BusPlan* plan = nullptr;
    for (const auto& p : o.buses) {
      if (p.bus == k) plan = &p;
    }
    if (plan && plan->type >= 0 && plan->type < static_cast<int>(inst.fleet.types.size()) &&
        total > inst.capacity(plan->type)) {
      flag("capacity", idx({link[0], link[1], k}),
           "load " + std::to_string(total) + " exceeds capacity " +
               std::to_string(inst.capacity(plan->type)));
    }
  }
  const StationFlows sf(o.flows);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long q = inst.demand.q[i][j];
      auto it = boarded.find({i, j});
      const long left = it == boarded.end() ? 0 : it->second;
      if (left > q) {
        flag("demand", idx({i, j}), std::to_string(left) + " departures exceed demand " +
                                        std::to_string(q));
      }
      long arrived = 0;
      for (int k = 0; k < buses; ++k) arrived += sf.arrivals(i, j, j, k);
      if (arrived != left) {
        flag("arrival", idx({i, j}), std::to_string(left) + " depart but " +
                                         std::to_string(arrived) + " arrive");
      }
      for (int m = 0; m < n; ++m) {
        if (m == i || m == j) continue;
        long in = 0, outgoing = 0;
        for (int k = 0; k < buses; ++k) {
          in += sf.arrivals(i, j, m, k);
          outgoing += sf.departures(i, j, m, k);
        }
        if (in != outgoing) {
          flag("conservation", idx({i, j, m}),
               std::to_string(in) + " arrive, " + std::to_string(outgoing) + " leave");
        }
      }
    }
  }

  // Strategies and gating.
  bool strategy_shape = static_cast<int>(o.strategy.size()) == n;
  for (const auto& row : o.strategy) {
    strategy_shape = strategy_shape && static_cast<int>(row.size()) == buses;
  }
  if (!strategy_shape) {
    flag("strategy", "", "strategy table must be stations x buses");
    return rep;
  }
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < buses; ++k) {
      const int s = o.strategy[m][k];
      if (s < 0 || s >= levels) flag("strategy", idx({m, k}), "no single strategy chosen");
    }
  }

  // Transfers: r must equal max(arrivals - departures, 0) on each bus and
  // respect the sample-average willingness of the chosen incentive.
  std::map<Key4, long> r;
  std::map<std::array<int, 2>, long> at_station;
  for (const auto& t : o.transfers) {
    if (t.origin == t.dest || t.station == t.origin || t.station == t.dest) {
      flag("transfer-max", idx({t.origin, t.dest, t.station, t.bus}),
           "transfer recorded at an OD endpoint");
      continue;
    }
    r[{t.origin, t.dest, t.station, t.bus}] += t.count;
    at_station[{t.station, t.bus}] += t.count;
  }
  const UtilitySpec spec = UtilitySpec::from(inst);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int m = 0; m < n; ++m) {
        if (m == i || m == j) continue;
        for (int k = 0; k < buses; ++k) {
          const long in = sf.arrivals(i, j, m, k);
          const long expect = std::max(in - sf.departures(i, j, m, k), 0L);
          auto it = r.find({i, j, m, k});
          const long got = it == r.end() ? 0 : it->second;
          if (got != expect) {
            flag("transfer-max", idx({i, j, m, k}),
                 "r = " + std::to_string(got) + " but max(in - out, 0) = " +
                     std::to_string(expect));
          }
          if (got == 0) continue;
          const int s = o.strategy[m][k];
          if (s < 0 || s >= levels) continue;
          const long cnt = saa_count(draws, spec, s, m, k);
          if (static_cast<long>(draws.draws) * got > cnt * in) {
            flag("willingness", idx({i, j, m, k}),
                 std::to_string(got) + " of " + std::to_string(in) + " transfer, willing " +
                     std::to_string(cnt) + "/" + std::to_string(draws.draws));
          }
        }
      }
    }
  }
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < buses; ++k) {
      if (o.strategy[m][k] <= 0) continue;
      auto it = at_station.find({m, k});
      if (it == at_station.end() || it->second < 1) {
        flag("gating", idx({m, k}), "incentive offered where nobody transfers");
      }
    }
  }
  return rep;
}

std::string format_violations(const ValidationReport& report) {
  if (report.ok()) return "no violations\n";
  std::ostringstream os;
  for (const auto& v : report.violations) {
    os << v.constraint << v.indices << ": " << v.detail << '\n';
  }
  return os.str();
}

Kpis compute_kpis(const DesignOutcome& o, const Instance& inst) {
  Kpis kp;
  kp.demand = inst.demand.total();
  for (const auto& plan : o.buses) {
    const double len = route_length(plan, inst);
    kp.ttd_km += len;
    kp.co1 += inst.fleet.types.at(plan.type).cost_per_km * len;
  }
  double passenger_hours = 0.0;
  for (const auto& f : o.flows) {
    passenger_hours += f.count * inst.time(f.from, f.to);
    if (f.from == f.origin) kp.served += f.count;
  }
  for (const auto& t : o.transfers) {
    kp.transfers += t.count;
    kp.co2 += t.count * inst.incentives.costs.at(o.strategy.at(t.station).at(t.bus));
  }
  const auto& c = inst.costs;
  kp.ct = c.c_t * passenger_hours;
  kp.ce = c.c_e * static_cast<double>(kp.demand - kp.served);
  kp.tsc = c.w_operator * (kp.co1 + kp.co2) + c.w_travel * kp.ct + c.w_unserved * kp.ce;
  if (kp.served > 0) {
    kp.aivtt_min = passenger_hours * 60.0 / static_cast<double>(kp.served);
    kp.tr_pct = 100.0 * static_cast<double>(kp.transfers) / static_cast<double>(kp.served);
  }
  if (kp.demand > 0) {
    kp.sr_pct = 100.0 * static_cast<double>(kp.served) / static_cast<double>(kp.demand);
  }
  return kp;
}

std::vector<TransferPlan> transfer_plans(const DesignOutcome& o, const Instance& inst,
                                         const DrawSet& draws) {
  std::map<std::array<int, 2>, int> count;
  for (const auto& t : o.transfers) count[{t.station, t.bus}] += t.count;
  const UtilitySpec spec = UtilitySpec::from(inst);
  std::vector<TransferPlan> plans;
  for (int m = 0; m < static_cast<int>(o.strategy.size()); ++m) {
    for (int k = 0; k < static_cast<int>(o.strategy[m].size()); ++k) {
      auto it = count.find({m, k});
      const int moved = it == count.end() ? 0 : it->second;
      const int s = o.strategy[m][k];
      if (moved == 0 && s <= 0) continue;
      TransferPlan p;
      p.station = m;
      p.bus = k;
      p.strategy = s;
      p.incentive = inst.incentives.costs.at(s);
      p.transferred = moved;
      p.saa_probability = saa_probability(draws, spec, s, m, k);
      p.logit_probability = logit_probability(spec, s);
      plans.push_back(p);
    }
  }
  return plans;
}

std::vector<long> served_by_bus(const DesignOutcome& o, int buses) {
  std::vector<long> served(buses, 0);
  for (const auto& f : o.flows) {
    if (f.from == f.origin && f.bus >= 0 && f.bus < buses) served[f.bus] += f.count;
  }
  return served;
}

std::string kpi_csv_header() { return "TTD_km,AIVTT_min,TR_pct,SR_pct,TSC,Co1,Co2,CT,CE"; }

std::string kpi_csv_row(const Kpis& k) {
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); };
  return num(k.ttd_km) + "," + opt(k.aivtt_min) + "," + opt(k.tr_pct) + "," + opt(k.sr_pct) +
         "," + num(k.tsc) + "," + num(k.co1) + "," + num(k.co2) + "," + num(k.ct) + "," +
         num(k.ce);
}

std::string format_design_table(const DesignOutcome& o, const Instance& inst,
                                const DrawSet& draws) {
  const auto plans = transfer_plans(o, inst, draws);
  const auto served = served_by_bus(o, static_cast<int>(o.buses.size()));
  auto label = [&](int v) { return inst.network.stations.at(v).name; };
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-4s %-8s %-28s %-14s %-10s %-11s %s\n", "bus", "capacity",
                "route", "transfer_node", "incentive", "transferred", "served");
  os << line;
  for (const auto& plan : o.buses) {
    std::string route;
    for (std::size_t a = 0; a < plan.route.size(); ++a) {
      if (a) route += "->";
      route += label(plan.route[a]);
    }
    std::string nodes, incentives, moved;
    for (const auto& p : plans) {
      if (p.bus != plan.bus || p.transferred == 0) continue;
      if (!nodes.empty()) {
        nodes += ";";
        incentives += ";";
        moved += ";";
      }
      nodes += label(p.station);
      incentives += num(p.incentive);
      moved += std::to_string(p.transferred);
    }
    if (nodes.empty()) nodes = incentives = moved = "-";
    std::snprintf(line, sizeof line, "%-4d %-8d %-28s %-14s %-10s %-11s %ld\n", plan.bus,
                  plan.capacity, route.c_str(), nodes.c_str(), incentives.c_str(),
                  moved.c_str(), served.at(plan.bus));
    os << line;
  }
  return os.str();
}

}  // namespace mbus
