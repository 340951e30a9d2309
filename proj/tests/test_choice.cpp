#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mbus/choice.hpp"

using namespace mbus;

namespace {

UtilitySpec spec(double cons) { return {cons, {0.0, 1.0, 2.0, 3.0}}; }

DrawSet single_draw(double stay, double transfer) {
  DrawSet d;
  d.n_stations = 1;
  d.n_buses = 1;
  d.draws = 1;
  d.xi = {stay, transfer};
  return d;
}

}  // namespace

TEST_CASE("logit: closed-form values") {
  CHECK(logit_probability(spec(1.0), 0) == doctest::Approx(std::exp(-1.0) / (std::exp(-1.0) + 1.0)));
  CHECK(logit_probability(spec(1.0), 0) == doctest::Approx(0.26894).epsilon(1e-4));
  CHECK(logit_probability(spec(0.0), 0) == doctest::Approx(0.5));
  CHECK(logit_probability(spec(1.0), 3) == doctest::Approx(0.88080).epsilon(1e-4));
}

TEST_CASE("logit: strictly increasing and inside (0, 1)") {
  for (double cons : {0.1, 1.0, 4.0}) {
    const auto u = spec(cons);
    for (int s = 0; s < 4; ++s) {
      const double p = logit_probability(u, s);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      if (s > 0) CHECK(p > logit_probability(u, s - 1));
    }
  }
}

TEST_CASE("gumbel: inverse CDF fixes 1/e at zero") {
  CHECK(gumbel_from_uniform(std::exp(-1.0)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("draws: same seed gives identical draws, different seeds differ") {
  const auto a = sample_draws(11, 7, 3, 2);
  const auto b = sample_draws(11, 7, 3, 2);
  CHECK(a.xi == b.xi);
  CHECK(a.xi.size() == 3u * 2u * 7u * 2u);
  CHECK(sample_draws(12, 7, 3, 2).xi != a.xi);
  CHECK_THROWS(sample_draws(1, 0, 3, 2));
}

TEST_CASE("draws: stream order is station, bus, draw, alternative") {
  const auto d = sample_draws(5, 3, 2, 2);
  CHECK(d.index(0, 0, 0, kStay) == 0u);
  CHECK(d.index(0, 0, 0, kTransfer) == 1u);
  CHECK(d.index(0, 0, 1, kStay) == 2u);
  CHECK(d.index(0, 1, 0, kStay) == 6u);
  CHECK(d.index(1, 0, 0, kStay) == 12u);
}

TEST_CASE("draws: sample mean near the Euler-Mascheroni constant") {
  const auto d = sample_draws(2024, 50000, 1, 1);
  double sum = 0.0;
  for (double v : d.xi) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(std::abs(sum / static_cast<double>(d.xi.size()) - 0.5772156649) < 0.02);
}

TEST_CASE("saa: single draw indicator and ties") {
  const auto u = spec(1.0);
  CHECK(saa_probability(single_draw(0.0, 1.5), u, 0, 0, 0) == 1.0);
  CHECK(saa_probability(single_draw(0.0, 0.5), u, 0, 0, 0) == 0.0);
  // Exact tie goes to staying.
  CHECK(saa_probability(single_draw(0.0, 1.0), u, 0, 0, 0) == 0.0);
  CHECK(saa_probability(single_draw(0.0, 1.0), u, 1, 0, 0) == 1.0);
}

TEST_CASE("saa: a huge incentive makes everyone willing") {
  const auto d = sample_draws(3, 200, 2, 2);
  const UtilitySpec u{1.0, {0.0, 1e6}};
  CHECK(saa_probability(d, u, 1, 1, 1) == 1.0);
}

TEST_CASE("property: saa is non-decreasing in the incentive for fixed draws") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = sample_draws(seed, 30, 3, 2);
    const auto u = spec(1.0);
    for (int m = 0; m < 3; ++m) {
      for (int k = 0; k < 2; ++k) {
        for (int s = 1; s < 4; ++s) {
          CHECK(saa_count(d, u, s, m, k) >= saa_count(d, u, s - 1, m, k));
        }
      }
    }
  }
}

TEST_CASE("saa: converges to the logit value at ten thousand draws") {
  const auto d = sample_draws(1, 10000, 1, 1);
  const auto u = spec(1.0);
  const double p = logit_probability(u, 2);
  CHECK(p == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(std::abs(saa_probability(d, u, 2, 0, 0) - p) <= 3.0 * std::sqrt(p * (1 - p) / 10000.0));
}

TEST_CASE("export: draws replay bit for bit") {
  const auto d = sample_draws(9, 4, 2, 3);
  const auto back = parse_draws(export_draws(d));
  CHECK(back.xi == d.xi);
  CHECK(back.draws == d.draws);
  CHECK(back.n_stations == d.n_stations);
  CHECK(back.n_buses == d.n_buses);
}
