#include "mbus/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mbus/rng.hpp"

namespace mbus {
namespace {

using nlohmann::json;
constexpr double kInfDist = std::numeric_limits<double>::infinity();

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw InstanceError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw InstanceError(path.empty() ? key : path + "." + key,
                        "missing required field");
  }
  return *it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InstanceError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InstanceError(path, "expected a finite number");
  return d;
}

long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw InstanceError(path, "expected an integer");
  return v.get<long>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw InstanceError(path, "expected an array");
  return v;
}

double number_field(const json& obj, const std::string& path, const char* key) {
  return as_number(field(obj, path, key), join(path, key));
}

long integer_field(const json& obj, const std::string& path, const char* key) {
  return as_integer(field(obj, path, key), join(path, key));
}

IntMatrix parse_int_matrix(const json& v, const std::string& path, int n) {
  as_array(v, path);
  if (static_cast<int>(v.size()) != n) {
    throw InstanceError(path, "expected " + std::to_string(n) + " rows");
  }
  IntMatrix m(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i) {
    const std::string rp = index_path(path, i);
    as_array(v[i], rp);
    if (static_cast<int>(v[i].size()) != n) {
      throw InstanceError(rp, "expected " + std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) {
      const long x = as_integer(v[i][j], index_path(rp, j));
      if (x < 0) throw InstanceError(index_path(rp, j), "demand must be non-negative");
      if (i == j && x != 0) throw InstanceError(index_path(rp, j), "diagonal demand must be 0");
      m[i][j] = static_cast<int>(x);
    }
  }
  return m;
}

void check_connected(const RoadNetwork& net) {
  const int n = static_cast<int>(net.stations.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : net.edges) parent[find(e.a)] = find(e.b);
  for (int i = 1; i < n; ++i) {
    if (find(i) != find(0)) {
      throw InstanceError("network.edges", "network is disconnected (station " +
                                               std::to_string(i) +
                                               " unreachable from 0)");
    }
  }
}

void validate_network(const RoadNetwork& net) {
  const int n = static_cast<int>(net.stations.size());
  if (n < 2) throw InstanceError("network.stations", "need at least 2 stations");
  for (int i = 0; i < n; ++i) {
    if (net.stations[i].id != i) {
      throw InstanceError(index_path("network.stations", i) + ".id",
                          "station ids must be 0..n-1 in order");
    }
  }
  if (!(net.bus_speed > 0)) throw InstanceError("network.bus_speed", "must be positive");
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const auto& e = net.edges[k];
    const std::string p = index_path("network.edges", k);
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) {
      throw InstanceError(p, "station index out of range");
    }
    if (e.a == e.b) throw InstanceError(p, "self-loop");
    if (!(e.length_km > 0)) throw InstanceError(p, "length must be positive");
  }
  check_connected(net);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

long DemandMatrix::total() const {
  long s = 0;
  for (const auto& row : q) {
    for (int v : row) s += v;
  }
  return s;
}

double Instance::max_incentive() const {
  return incentives.costs.empty() ? 0.0 : incentives.costs.back();
}

TravelMetrics derive_metrics(const RoadNetwork& network) {
  validate_network(network);
  const int n = static_cast<int>(network.stations.size());
  Matrix d(n, std::vector<double>(n, kInfDist));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : network.edges) {
    d[e.a][e.b] = std::min(d[e.a][e.b], e.length_km);
    d[e.b][e.a] = d[e.a][e.b];
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  TravelMetrics m;
  m.dist = d;
  m.time = d;
  for (auto& row : m.time) {
    for (double& t : row) t /= network.bus_speed;
  }
  return m;
}

IntMatrix draw_demand_weights(std::uint64_t seed, int n_stations) {
  Rng rng(seed);
  IntMatrix w(n_stations, std::vector<int>(n_stations, 0));
  for (int i = 0; i < n_stations; ++i) {
    for (int j = 0; j < n_stations; ++j) {
      if (i != j) w[i][j] = static_cast<int>(rng.uniform_int(1, 5));
    }
  }
  return w;
}

DemandMatrix apportion_demand(const IntMatrix& weights, long total) {
  if (total < 0) throw std::invalid_argument("total demand must be non-negative");
  const int n = static_cast<int>(weights.size());
  DemandMatrix out;
  out.q.assign(n, std::vector<int>(n, 0));
  long sum_w = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) sum_w += weights[i][j];
    }
  }
  if (sum_w == 0 || total == 0) return out;
  struct Share {
    long remainder;
    int i, j;
  };
  std::vector<Share> shares;
  long assigned = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long num = total * weights[i][j];
      out.q[i][j] = static_cast<int>(num / sum_w);
      assigned += num / sum_w;
      shares.push_back({num % sum_w, i, j});
    }
  }
  std::stable_sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
    return a.remainder > b.remainder;
  });
  for (long k = 0; k < total - assigned; ++k) ++out.q[shares[k].i][shares[k].j];
  return out;
}

DemandMatrix generate_demand(std::uint64_t seed, long total, int n_stations) {
  if (n_stations < 2) throw std::invalid_argument("need at least 2 stations");
  return apportion_demand(draw_demand_weights(seed, n_stations), total);
}

void validate_instance(const Instance& inst) {
  validate_network(inst.network);
  const int n = inst.num_stations();
  const auto& md = inst.metrics.dist;
  const auto& mt = inst.metrics.time;
  if (static_cast<int>(md.size()) != n || static_cast<int>(mt.size()) != n) {
    throw InstanceError("metrics", "matrix size does not match station count");
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(md[i].size()) != n || static_cast<int>(mt[i].size()) != n) {
      throw InstanceError("metrics", "matrix size does not match station count");
    }
    if (md[i][i] != 0.0) throw InstanceError("metrics.dist", "non-zero diagonal");
    for (int j = 0; j < n; ++j) {
      if (md[i][j] != md[j][i]) throw InstanceError("metrics.dist", "not symmetric");
      if (i != j && !(md[i][j] > 0)) throw InstanceError("metrics.dist", "non-positive distance");
    }
  }
  const auto& q = inst.demand.q;
  if (static_cast<int>(q.size()) != n) throw InstanceError("demand", "matrix size mismatch");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(q[i].size()) != n) throw InstanceError("demand", "matrix size mismatch");
    for (int j = 0; j < n; ++j) {
      if (q[i][j] < 0) throw InstanceError("demand", "negative demand");
      if (i == j && q[i][j] != 0) throw InstanceError("demand", "diagonal demand must be 0");
    }
  }
  if (inst.recipe && inst.recipe->total != inst.demand.total()) {
    throw InstanceError("demand.total", "matrix does not sum to the configured total");
  }
  const auto& f = inst.fleet;
  if (f.num_routes < 1) throw InstanceError("fleet.K", "must be at least 1");
  if (f.unit_capacity < 1) throw InstanceError("fleet.v", "must be at least 1");
  if (f.types.empty()) throw InstanceError("fleet.types", "need at least one type");
  for (std::size_t p = 0; p < f.types.size(); ++p) {
    const std::string path = index_path("fleet.types", p);
    if (f.types[p].units < 1) throw InstanceError(path + ".p", "must be at least 1");
    if (!(f.types[p].cost_per_km >= 0)) throw InstanceError(path + ".cost_per_km", "must be non-negative");
    if (p > 0 && f.types[p].units <= f.types[p - 1].units) {
      throw InstanceError(path + ".p", "capacities must be strictly increasing");
    }
    if (p > 0 && f.types[p].cost_per_km <= f.types[p - 1].cost_per_km) {
      throw InstanceError(path + ".cost_per_km", "costs must be strictly increasing");
    }
  }
  if (f.max_units < f.num_routes) throw InstanceError("fleet.N", "must be at least K");
  const auto& inc = inst.incentives;
  if (!(inc.cons > 0)) throw InstanceError("incentives.cons", "must be positive");
  if (inc.costs.empty() || inc.costs[0] != 0.0) {
    throw InstanceError("incentives.costs", "first level must cost 0 (no incentive)");
  }
  for (std::size_t s = 1; s < inc.costs.size(); ++s) {
    if (!(inc.costs[s] > inc.costs[s - 1])) {
      throw InstanceError(index_path("incentives.costs", s), "costs must be strictly increasing");
    }
  }
  const auto& c = inst.costs;
  const std::pair<const char*, double> nonneg[] = {
      {"costs.c_t", c.c_t},           {"costs.c_e", c.c_e},
      {"costs.weights[0]", c.w_operator}, {"costs.weights[1]", c.w_travel},
      {"costs.weights[2]", c.w_unserved}, {"costs.T_bar_minutes", c.max_duration_h}};
  for (const auto& [path, v] : nonneg) {
    if (!(v >= 0) || !std::isfinite(v)) throw InstanceError(path, "must be non-negative");
  }
}

Instance load_instance(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw InstanceError("(document)", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InstanceError("(document)", "expected an object");

  Instance inst;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) {
    inst.name = it->get<std::string>();
  }

  const json& net = field(doc, "", "network");
  const json& stations = as_array(field(net, "network", "stations"), "network.stations");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::string p = index_path("network.stations", i);
    Station s;
    if (stations[i].is_string()) {
      s.id = static_cast<int>(i);
      s.name = stations[i].get<std::string>();
    } else {
      s.id = static_cast<int>(integer_field(stations[i], p, "id"));
      if (auto it = stations[i].find("name"); it != stations[i].end()) {
        if (!it->is_string()) throw InstanceError(p + ".name", "expected a string");
        s.name = it->get<std::string>();
      }
    }
    if (s.name.empty()) s.name = std::to_string(s.id + 1);
    inst.network.stations.push_back(s);
  }
  const json& edges = as_array(field(net, "network", "edges"), "network.edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string p = index_path("network.edges", k);
    const json& e = edges[k];
    Edge edge;
    if (e.is_array()) {
      if (e.size() != 3) throw InstanceError(p, "expected [a, b, length_km]");
      edge.a = static_cast<int>(as_integer(e[0], index_path(p, 0)));
      edge.b = static_cast<int>(as_integer(e[1], index_path(p, 1)));
      edge.length_km = as_number(e[2], index_path(p, 2));
    } else {
      edge.a = static_cast<int>(integer_field(e, p, "a"));
      edge.b = static_cast<int>(integer_field(e, p, "b"));
      edge.length_km = number_field(e, p, "length_km");
    }
    inst.network.edges.push_back(edge);
  }
  inst.network.bus_speed = number_field(net, "network", "bus_speed");
  validate_network(inst.network);
  inst.metrics = derive_metrics(inst.network);
  const int n = inst.num_stations();

  const json& dem = field(doc, "", "demand");
  if (!dem.is_object()) throw InstanceError("demand", "expected an object");
  if (auto it = dem.find("matrix"); it != dem.end()) {
    inst.demand.q = parse_int_matrix(*it, "demand.matrix", n);
    if (auto t = dem.find("total"); t != dem.end()) {
      const long total = as_integer(*t, "demand.total");
      if (total != inst.demand.total()) {
        throw InstanceError("demand.total", "matrix sums to " +
                                                std::to_string(inst.demand.total()) +
                                                ", expected " + std::to_string(total));
      }
    }
  } else {
    DemandRecipe r;
    const long seed = integer_field(dem, "demand", "seed");
    if (seed < 0) throw InstanceError("demand.seed", "must be non-negative");
    r.seed = static_cast<std::uint64_t>(seed);
    r.total = integer_field(dem, "demand", "total");
    if (r.total < 0) throw InstanceError("demand.total", "must be non-negative");
    inst.demand = generate_demand(r.seed, r.total, n);
    inst.recipe = r;
  }

  const json& fleet = field(doc, "", "fleet");
  inst.fleet.num_routes = static_cast<int>(integer_field(fleet, "fleet", "K"));
  inst.fleet.unit_capacity = static_cast<int>(integer_field(fleet, "fleet", "v"));
  inst.fleet.max_units = static_cast<int>(integer_field(fleet, "fleet", "N"));
  const json& types = as_array(field(fleet, "fleet", "types"), "fleet.types");
  for (std::size_t p = 0; p < types.size(); ++p) {
    const std::string path = index_path("fleet.types", p);
    BusType t;
    t.units = static_cast<int>(integer_field(types[p], path, "p"));
    t.cost_per_km = number_field(types[p], path, "cost_per_km");
    inst.fleet.types.push_back(t);
  }

  const json& inc = field(doc, "", "incentives");
  inst.incentives.cons = number_field(inc, "incentives", "cons");
  const json& levels = as_array(field(inc, "incentives", "costs"), "incentives.costs");
  for (std::size_t s = 0; s < levels.size(); ++s) {
    inst.incentives.costs.push_back(as_number(levels[s], index_path("incentives.costs", s)));
  }

  const json& costs = field(doc, "", "costs");
  inst.costs.c_t = number_field(costs, "costs", "c_t");
  inst.costs.c_e = number_field(costs, "costs", "c_e");
  const json& w = as_array(field(costs, "costs", "weights"), "costs.weights");
  if (w.size() != 3) throw InstanceError("costs.weights", "expected 3 weights");
  inst.costs.w_operator = as_number(w[0], "costs.weights[0]");
  inst.costs.w_travel = as_number(w[1], "costs.weights[1]");
  inst.costs.w_unserved = as_number(w[2], "costs.weights[2]");
  inst.costs.max_duration_h = number_field(costs, "costs", "T_bar_minutes") / 60.0;

  validate_instance(inst);
  return inst;
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError(path, "cannot open instance file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_instance(buf.str());
}

Instance with_demand(const Instance& instance, DemandMatrix demand) {
  Instance out = instance;
  out.demand = std::move(demand);
  if (out.recipe) out.recipe->total = out.demand.total();
  validate_instance(out);
  return out;
}

std::string instance_to_json(const Instance& inst) {
  json doc;
  doc["name"] = inst.name;
  json stations = json::array();
  for (const auto& s : inst.network.stations) stations.push_back({{"id", s.id}, {"name", s.name}});
  json edges = json::array();
  for (const auto& e : inst.network.edges) edges.push_back({e.a, e.b, e.length_km});
  doc["network"] = {{"stations", stations}, {"edges", edges}, {"bus_speed", inst.network.bus_speed}};
  doc["demand"] = {{"matrix", inst.demand.q}, {"total", inst.demand.total()}};
  json types = json::array();
  for (const auto& t : inst.fleet.types) types.push_back({{"p", t.units}, {"cost_per_km", t.cost_per_km}});
  doc["fleet"] = {{"K", inst.fleet.num_routes},
                  {"v", inst.fleet.unit_capacity},
                  {"N", inst.fleet.max_units},
                  {"types", types}};
  doc["incentives"] = {{"cons", inst.incentives.cons}, {"costs", inst.incentives.costs}};
  doc["costs"] = {{"c_t", inst.costs.c_t},
                  {"c_e", inst.costs.c_e},
                  {"weights", {inst.costs.w_operator, inst.costs.w_travel, inst.costs.w_unserved}},
                  {"T_bar_minutes", inst.costs.max_duration_h * 60.0}};
  return doc.dump(2);
}

std::string instance_hash(const Instance& instance) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(instance_to_json(instance))));
  return buf;
}

}  // namespace mbus
