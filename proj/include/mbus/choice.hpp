#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mbus/instance.hpp"

namespace mbus {

// Binary stay/transfer choice. Stay has deterministic utility 0; transfer
// under strategy s has -cons + incentive_costs[s].
struct UtilitySpec {
  double cons = 1.0;
  std::vector<double> incentive_costs;

  static UtilitySpec from(const Instance& instance);
  double transfer_utility(int s) const { return -cons + incentive_costs.at(s); }
};

// Alternatives: 1 = stay, 2 = transfer.
inline constexpr int kStay = 1;
inline constexpr int kTransfer = 2;

// Standard Gumbel noise per (station, bus, draw, alternative). Stored in
// stream order: station-major, then bus, then draw, then alternative.
struct DrawSet {
  int n_stations = 0;
  int n_buses = 0;
  int draws = 0;
  std::uint64_t seed = 0;
  std::vector<double> xi;

  double at(int m, int k, int d, int c) const {
    return xi[index(m, k, d, c)];
  }
  std::size_t index(int m, int k, int d, int c) const {
    return ((static_cast<std::size_t>(m) * n_buses + k) * draws + d) * 2 + (c - 1);
  }
};

double logit_probability(const UtilitySpec& spec, int s);

// Inverse CDF of the standard Gumbel distribution.
double gumbel_from_uniform(double u);

DrawSet sample_draws(std::uint64_t seed, int draws, int n_stations, int n_buses);

// Number of draws in which transfer strictly beats stay (ties stay).
int saa_count(const DrawSet& draws, const UtilitySpec& spec, int s, int m, int k);
double saa_probability(const DrawSet& draws, const UtilitySpec& spec, int s,
                       int m, int k);

// "m,k,d,c,value" rows with a header; values use %.17g so a parse
// reproduces the draws bit for bit.
std::string export_draws(const DrawSet& draws);
DrawSet parse_draws(std::string_view text);

}  // namespace mbus
