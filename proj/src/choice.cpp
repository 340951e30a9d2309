#include "mbus/choice.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mbus/rng.hpp"

namespace mbus {

UtilitySpec UtilitySpec::from(const Instance& instance) {
  return {instance.incentives.cons, instance.incentives.costs};
}

double logit_probability(const UtilitySpec& spec, int s) {
  const double v = spec.transfer_utility(s);
  // e^v / (e^v + 1), written to avoid overflow for large v.
  return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (std::exp(v) + 1.0);
}

double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

DrawSet sample_draws(std::uint64_t seed, int draws, int n_stations, int n_buses) {
  if (draws < 1) throw std::invalid_argument("draw count must be at least 1");
  if (n_stations < 1 || n_buses < 1) {
    throw std::invalid_argument("draws need at least one station and one bus");
  }
  DrawSet set;
  set.n_stations = n_stations;
  set.n_buses = n_buses;
  set.draws = draws;
  set.seed = seed;
  set.xi.resize(static_cast<std::size_t>(n_stations) * n_buses * draws * 2);
  Rng rng(seed);
  for (double& x : set.xi) x = gumbel_from_uniform(rng.uniform01());
  return set;
}

int saa_count(const DrawSet& draws, const UtilitySpec& spec, int s, int m, int k) {
  const double v2 = spec.transfer_utility(s);
  int count = 0;
  for (int d = 0; d < draws.draws; ++d) {
    if (v2 + draws.at(m, k, d, kTransfer) > draws.at(m, k, d, kStay)) ++count;
  }
  return count;
}

double saa_probability(const DrawSet& draws, const UtilitySpec& spec, int s,
                       int m, int k) {
  return static_cast<double>(saa_count(draws, spec, s, m, k)) / draws.draws;
}

std::string export_draws(const DrawSet& draws) {
  std::string out = "# seed " + std::to_string(draws.seed) + " stations " +
                    std::to_string(draws.n_stations) + " buses " +
                    std::to_string(draws.n_buses) + " draws " +
                    std::to_string(draws.draws) + "\nm,k,d,c,value\n";
  char buf[64];
  for (int m = 0; m < draws.n_stations; ++m) {
    for (int k = 0; k < draws.n_buses; ++k) {
      for (int d = 0; d < draws.draws; ++d) {
        for (int c = 1; c <= 2; ++c) {
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g\n", m, k, d, c,
                        draws.at(m, k, d, c));
          out += buf;
        }
      }
    }
  }
  return out;
}

DrawSet parse_draws(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  DrawSet set;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# seed %lu stations %d buses %d draws %d",
                  reinterpret_cast<unsigned long*>(&set.seed), &set.n_stations,
                  &set.n_buses, &set.draws) != 4) {
    throw std::runtime_error("draw file: malformed header on line 1");
  }
  if (!std::getline(in, line) || line != "m,k,d,c,value") {
    throw std::runtime_error("draw file: missing column header on line 2");
  }
  set.xi.assign(static_cast<std::size_t>(set.n_stations) * set.n_buses * set.draws * 2, 0.0);
  std::vector<char> seen(set.xi.size(), 0);
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int m, k, d, c;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf", &m, &k, &d, &c, &v) != 5 ||
        m < 0 || m >= set.n_stations || k < 0 || k >= set.n_buses || d < 0 ||
        d >= set.draws || (c != 1 && c != 2)) {
      throw std::runtime_error("draw file: malformed row on line " + std::to_string(line_no));
    }
    set.xi[set.index(m, k, d, c)] = v;
    seen[set.index(m, k, d, c)] = 1;
  }
  for (char s : seen) {
    if (!s) throw std::runtime_error("draw file: missing rows");
  }
  return set;
}

}  // namespace mbus
