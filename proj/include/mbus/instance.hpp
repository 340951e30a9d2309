#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbus {

using Matrix = std::vector<std::vector<double>>;
using IntMatrix = std::vector<std::vector<int>>;

struct Station {
  int id = 0;
  std::string name;
};

struct Edge {
  int a = 0;
  int b = 0;
  double length_km = 0.0;
};

struct RoadNetwork {
  std::vector<Station> stations;
  std::vector<Edge> edges;  // undirected
  double bus_speed = 0.0;   // km/h
};

struct TravelMetrics {
  Matrix dist;  // km, shortest-path closure
  Matrix time;  // hours
};

struct DemandMatrix {
  IntMatrix q;
  long total() const;
};

struct BusType {
  int units = 1;  // capacity = units * unit_capacity
  double cost_per_km = 0.0;
};

struct FleetSpec {
  int num_routes = 1;
  int unit_capacity = 1;
  std::vector<BusType> types;
  int max_units = 1;
};

struct IncentiveSpec {
  double cons = 1.0;          // reluctance; enters the transfer utility as -cons
  std::vector<double> costs;  // costs[0] is the "no incentive" level (0)
};

struct CostParams {
  double c_t = 0.0;  // $ per passenger-hour in vehicle
  double c_e = 0.0;  // $ per unserved passenger
  double w_operator = 0.0;
  double w_travel = 0.0;
  double w_unserved = 0.0;
  double max_duration_h = 0.0;
};

// Seeded demand recipe, kept so sweeps can re-apportion the same weights.
struct DemandRecipe {
  std::uint64_t seed = 0;
  long total = 0;
};

// Depot convention: stations are 0..n-1, the start depot is n and the end
// depot n+1. Depot arcs have zero length and zero time.
struct Instance {
  std::string name;
  RoadNetwork network;
  TravelMetrics metrics;
  DemandMatrix demand;
  std::optional<DemandRecipe> recipe;
  FleetSpec fleet;
  IncentiveSpec incentives;
  CostParams costs;

  int num_stations() const { return static_cast<int>(network.stations.size()); }
  int source() const { return num_stations(); }
  int sink() const { return num_stations() + 1; }
  bool is_depot(int v) const { return v >= num_stations(); }

  double dist(int i, int j) const {
    return is_depot(i) || is_depot(j) ? 0.0 : metrics.dist[i][j];
  }
  double time(int i, int j) const {
    return is_depot(i) || is_depot(j) ? 0.0 : metrics.time[i][j];
  }
  int capacity(int type) const {
    return fleet.types[type].units * fleet.unit_capacity;
  }
  double max_incentive() const;
};

class InstanceError : public std::runtime_error {
 public:
  InstanceError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// All-pairs shortest paths over edge lengths; time = dist / speed.
TravelMetrics derive_metrics(const RoadNetwork& network);

// One weight in {1..5} per ordered pair i != j, drawn row-major.
IntMatrix draw_demand_weights(std::uint64_t seed, int n_stations);

// Largest-remainder apportionment of `total` proportional to the weights;
// equal remainders favour the lexicographically smaller (i, j).
DemandMatrix apportion_demand(const IntMatrix& weights, long total);

DemandMatrix generate_demand(std::uint64_t seed, long total, int n_stations);

// Parses and validates a JSON instance document. Errors name the offending
// field path (for example "fleet.types[1].cost_per_km").
Instance load_instance(std::string_view document);
Instance load_instance_file(const std::string& path);

// Checks every invariant of an instance built in code; throws InstanceError.
void validate_instance(const Instance& instance);

// Copy with a different demand matrix (same everything else).
Instance with_demand(const Instance& instance, DemandMatrix demand);

// Canonical JSON rendering (explicit demand matrix) and its FNV-1a hash.
std::string instance_to_json(const Instance& instance);
std::string instance_hash(const Instance& instance);

}  // namespace mbus
