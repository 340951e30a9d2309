#include "mbus/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mbus/rng.hpp"

namespace mbus {

using milp::LinearConstraint;
using milp::RowSense;
using milp::Term;
using milp::Variable;

const char* to_string(SubtourMode mode) {
  return mode == SubtourMode::kLazy ? "lazy" : "mtz";
}

SubtourMode parse_subtour_mode(const std::string& text) {
  if (text == "lazy") return SubtourMode::kLazy;
  if (text == "mtz") return SubtourMode::kMtz;
  throw std::invalid_argument("unknown subtour mode '" + text + "' (lazy|mtz)");
}

BigMSet compute_big_m(const Instance& inst, const DrawSet& draws) {
  const int n = inst.num_stations();
  const int buses = inst.fleet.num_routes;
  const double ic_max = inst.max_incentive();
  BigMSet m;
  m.transfer.assign(n, std::vector<double>(n, 0.0));
  m.willingness = m.transfer;
  m.incentive = m.transfer;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double q = inst.demand.q[i][j];
      m.transfer[i][j] = q;
      m.willingness[i][j] = q;
      m.incentive[i][j] = ic_max * q;
    }
  }
  m.utility.assign(n, std::vector<std::vector<double>>(buses));
  for (int s = 0; s < n; ++s) {
    for (int k = 0; k < buses; ++k) {
      for (int d = 0; d < draws.draws; ++d) {
        m.utility[s][k].push_back(inst.incentives.cons + ic_max +
                                  std::fabs(draws.at(s, k, d, kStay)) +
                                  std::fabs(draws.at(s, k, d, kTransfer)) + 1.0);
      }
    }
  }
  const double longest_km = inst.network.bus_speed * inst.costs.max_duration_h;
  for (const auto& t : inst.fleet.types) m.route_cost.push_back(t.cost_per_km * longest_km);
  return m;
}

VarIndex::VarIndex(int n, int buses, int types, int levels, int draws)
    : n_(n), buses_(buses), types_(types), levels_(levels), draws_(draws) {
  const int nn = n + 2;
  x_.assign(static_cast<std::size_t>(nn) * nn * buses, -1);
  y_.assign(static_cast<std::size_t>(types) * buses, -1);
  z_.assign(static_cast<std::size_t>(n) * n * n * n * buses, -1);
  r_.assign(static_cast<std::size_t>(n) * n * n * buses, -1);
  b_ = r_;
  p_.assign(static_cast<std::size_t>(n) * buses * levels, -1);
  w_.assign(static_cast<std::size_t>(n) * buses * draws * 2, -1);
  au_.assign(static_cast<std::size_t>(n) * buses * draws, -1);
  t_.assign(static_cast<std::size_t>(n) * n * n * buses * draws, -1);
  co_.assign(static_cast<std::size_t>(buses) * types, -1);
  rc_.assign(static_cast<std::size_t>(n) * n * n * buses * levels, -1);
}

class FormulationBuilder {
 public:
  FormulationBuilder(const Instance& inst, const DrawSet& draws,
                     const FormulationOptions& opt)
      : inst_(inst), draws_(draws), opt_(opt), n_(inst.num_stations()),
        buses_(inst.fleet.num_routes),
        types_(static_cast<int>(inst.fleet.types.size())),
        levels_(static_cast<int>(inst.incentives.costs.size())), nd_(draws.draws) {
    if (draws.n_stations != n_ || draws.n_buses != buses_) {
      throw std::invalid_argument(
          "draw set dimensions (" + std::to_string(draws.n_stations) + " stations, " +
          std::to_string(draws.n_buses) + " buses) do not match the instance (" +
          std::to_string(n_) + ", " + std::to_string(buses_) + ")");
    }
  }

  FormulationArtifacts build() {
    art_.index = VarIndex(n_, buses_, types_, levels_, nd_);
    art_.big_m = compute_big_m(inst_, draws_);
    art_.subtour = opt_.subtour;
    art_.no_incentive = opt_.no_incentive;
    art_.n = n_;
    art_.buses = buses_;
    art_.types = types_;
    art_.levels = levels_;
    art_.draws = nd_;
    add_variables();
    add_routing();
    add_passenger_flow();
    add_capacity_and_fleet();
    add_transfers();
    add_choice();
    add_costs();
    if (opt_.no_incentive) add_no_incentive();
    if (opt_.subtour == SubtourMode::kMtz) add_mtz();
    add_objective();
    auto& meta = art_.model.metadata();
    meta["instance"] = inst_.name.empty() ? "unnamed" : inst_.name;
    meta["instance_hash"] = instance_hash(inst_);
    meta["draw_seed"] = std::to_string(draws_.seed);
    meta["draws"] = std::to_string(nd_);
    meta["generator"] = Rng::kName;
    meta["subtour"] = to_string(opt_.subtour);
    meta["no_incentive"] = opt_.no_incentive ? "1" : "0";
    art_.model.freeze();
    return std::move(art_);
  }

 private:
  std::string node(int v) const {
    if (v == n_) return "s";
    if (v == n_ + 1) return "t";
    return std::to_string(v);
  }
  static std::string num(int v) { return std::to_string(v); }

  int add(Variable v) { return art_.model.add_variable(std::move(v)); }
  void row(const std::string& family, std::vector<std::string> idx,
           std::vector<Term> terms, RowSense sense, double rhs) {
    art_.model.add_constraint(
        {milp::structured_name(family, idx), std::move(terms), sense, rhs});
  }
  VarIndex& ix() { return art_.index; }
  double q(int i, int j) const { return inst_.demand.q[i][j]; }

  // Real links usable by OD (i, j): m != n, m != j, n != i.
  bool od_link(int i, int j, int m, int nn) const {
    return m != nn && m != j && nn != i;
  }

  void add_variables() {
    const int s = n_, t = n_ + 1;
    for (int k = 0; k < buses_; ++k) {
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
          if (i != j) ix().x_[(i * (n_ + 2) + j) * buses_ + k] =
              add(Variable::binary(milp::structured_name("x", {node(i), node(j), num(k)})));
        }
      }
      for (int j = 0; j < n_; ++j) {
        ix().x_[(s * (n_ + 2) + j) * buses_ + k] =
            add(Variable::binary(milp::structured_name("x", {node(s), node(j), num(k)})));
      }
      for (int i = 0; i < n_; ++i) {
        ix().x_[(i * (n_ + 2) + t) * buses_ + k] =
            add(Variable::binary(milp::structured_name("x", {node(i), node(t), num(k)})));
      }
    }
    for (int p = 0; p < types_; ++p) {
      for (int k = 0; k < buses_; ++k) {
        ix().y_[p * buses_ + k] =
            add(Variable::binary(milp::structured_name("y", {num(p), num(k)})));
      }
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        for (int m = 0; m < n_; ++m) {
          for (int nn = 0; nn < n_; ++nn) {
            if (!od_link(i, j, m, nn)) continue;
            for (int k = 0; k < buses_; ++k) {
              ix().z_[(((i * n_ + j) * n_ + m) * n_ + nn) * buses_ + k] = add(Variable::integer(
                  milp::structured_name("z", {num(i), num(j), num(m), num(nn), num(k)}), 0,
                  q(i, j)));
            }
          }
        }
      }
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      const std::size_t at = ((i * n_ + j) * n_ + m) * buses_ + k;
      const std::vector<std::string> idx{num(i), num(j), num(m), num(k)};
      ix().r_[at] = add(Variable::continuous(milp::structured_name("r", idx), 0, q(i, j)));
      ix().b_[at] = add(Variable::binary(milp::structured_name("b", idx)));
    });
    for (int m = 0; m < n_; ++m) {
      for (int k = 0; k < buses_; ++k) {
        for (int s = 0; s < levels_; ++s) {
          ix().p_[(m * buses_ + k) * levels_ + s] =
              add(Variable::binary(milp::structured_name("p", {num(m), num(k), num(s)})));
        }
      }
    }
    for (int m = 0; m < n_; ++m) {
      for (int k = 0; k < buses_; ++k) {
        for (int d = 0; d < nd_; ++d) {
          for (int c = 1; c <= 2; ++c) {
            ix().w_[((m * buses_ + k) * nd_ + d) * 2 + (c - 1)] = add(
                Variable::binary(milp::structured_name("w", {num(m), num(k), num(d), num(c)})));
          }
          ix().au_[(m * buses_ + k) * nd_ + d] = add(Variable::continuous(
              milp::structured_name("AU", {num(m), num(k), num(d)}), -milp::kInf, milp::kInf));
        }
      }
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      for (int d = 0; d < nd_; ++d) {
        ix().t_[(((i * n_ + j) * n_ + m) * buses_ + k) * nd_ + d] = add(Variable::continuous(
            milp::structured_name("T", {num(i), num(j), num(m), num(k), num(d)})));
      }
    });
    for (int k = 0; k < buses_; ++k) {
      for (int p = 0; p < types_; ++p) {
        ix().co_[k * types_ + p] =
            add(Variable::continuous(milp::structured_name("Co", {num(k), num(p)})));
      }
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      for (int s = 0; s < levels_; ++s) {
        ix().rc_[(((i * n_ + j) * n_ + m) * buses_ + k) * levels_ + s] = add(Variable::continuous(
            milp::structured_name("R", {num(i), num(j), num(m), num(k), num(s)})));
      }
    });
    if (opt_.subtour == SubtourMode::kMtz) {
      ix().u_.assign(static_cast<std::size_t>(n_) * buses_, -1);
      for (int j = 0; j < n_; ++j) {
        for (int k = 0; k < buses_; ++k) {
          ix().u_[j * buses_ + k] = add(
              Variable::continuous(milp::structured_name("u", {num(j), num(k)}), 1, n_));
        }
      }
    }
  }

  template <class F>
  void for_transfer_index(F&& f) {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        for (int m = 0; m < n_; ++m) {
          if (m == i || m == j) continue;
          for (int k = 0; k < buses_; ++k) f(i, j, m, k);
        }
      }
    }
  }

  void add_routing() {
    const auto& X = art_.index;
    const int s = n_, t = n_ + 1;
    for (int k = 0; k < buses_; ++k) {
      std::vector<Term> dep, ret;
      for (int j = 0; j < n_; ++j) dep.push_back({X.x(s, j, k), 1});
      for (int i = 0; i < n_; ++i) ret.push_back({X.x(i, t, k), 1});
      row("depart", {num(k)}, dep, RowSense::kEqual, 1);
      row("return", {num(k)}, ret, RowSense::kEqual, 1);
    }
    for (int k = 0; k < buses_; ++k) {
      for (int j = 0; j < n_; ++j) {
        std::vector<Term> terms{{X.x(s, j, k), 1}, {X.x(j, t, k), -1}};
        for (int i = 0; i < n_; ++i) {
          if (i == j) continue;
          terms.push_back({X.x(i, j, k), 1});
          terms.push_back({X.x(j, i, k), -1});
        }
        row("vflow", {num(j), num(k)}, terms, RowSense::kEqual, 0);
      }
    }
    for (int k = 0; k < buses_; ++k) {
      std::vector<Term> terms;
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
          if (i != j && inst_.time(i, j) != 0.0) terms.push_back({X.x(i, j, k), inst_.time(i, j)});
        }
      }
      row("duration", {num(k)}, terms, RowSense::kLessEqual, inst_.costs.max_duration_h);
    }
  }

  // Terms summing OD (i, j) flow on bus k into (into=true) or out of m.
  void flow_terms(std::vector<Term>& terms, int i, int j, int m, int k, bool into,
                  double coef) const {
    const auto& X = art_.index;
    for (int v = 0; v < n_; ++v) {
      const int id = into ? X.z(i, j, v, m, k) : X.z(i, j, m, v, k);
      if (id >= 0) terms.push_back({id, coef});
    }
  }

  void add_passenger_flow() {
    const auto& X = art_.index;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        std::vector<Term> out;
        for (int k = 0; k < buses_; ++k) flow_terms(out, i, j, i, k, false, 1);
        row("demand", {num(i), num(j)}, out, RowSense::kLessEqual, q(i, j));
        for (int m = 0; m < n_; ++m) {
          if (m == i || m == j) continue;
          std::vector<Term> bal;
          for (int k = 0; k < buses_; ++k) {
            flow_terms(bal, i, j, m, k, true, 1);
            flow_terms(bal, i, j, m, k, false, -1);
          }
          row("pflow", {num(i), num(j), num(m)}, bal, RowSense::kEqual, 0);
        }
        std::vector<Term> arr;
        for (int k = 0; k < buses_; ++k) {
          flow_terms(arr, i, j, j, k, true, 1);
          flow_terms(arr, i, j, i, k, false, -1);
        }
        row("arrive", {num(i), num(j)}, arr, RowSense::kEqual, 0);
        for (int m = 0; m < n_; ++m) {
          for (int nn = 0; nn < n_; ++nn) {
            if (!od_link(i, j, m, nn)) continue;
            for (int k = 0; k < buses_; ++k) {
              row("link", {num(i), num(j), num(m), num(nn), num(k)},
                  {{X.z(i, j, m, nn, k), 1}, {X.x(m, nn, k), -q(i, j)}}, RowSense::kLessEqual, 0);
            }
          }
        }
      }
    }
  }

  void add_capacity_and_fleet() {
    const auto& X = art_.index;
    for (int m = 0; m < n_; ++m) {
      for (int nn = 0; nn < n_; ++nn) {
        if (m == nn) continue;
        for (int k = 0; k < buses_; ++k) {
          std::vector<Term> terms;
          for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
              if (i != j && X.z(i, j, m, nn, k) >= 0) terms.push_back({X.z(i, j, m, nn, k), 1});
            }
          }
          for (int p = 0; p < types_; ++p) terms.push_back({X.y(p, k), -double(inst_.capacity(p))});
          row("cap", {num(m), num(nn), num(k)}, terms, RowSense::kLessEqual, 0);
        }
      }
    }
    for (int k = 0; k < buses_; ++k) {
      std::vector<Term> terms;
      for (int p = 0; p < types_; ++p) terms.push_back({X.y(p, k), 1});
      row("type", {num(k)}, terms, RowSense::kEqual, 1);
    }
    std::vector<Term> fleet;
    for (int p = 0; p < types_; ++p) {
      for (int k = 0; k < buses_; ++k) {
        fleet.push_back({X.y(p, k), double(inst_.fleet.types[p].units)});
      }
    }
    row("fleet", {}, fleet, RowSense::kLessEqual, inst_.fleet.max_units);
  }

  void add_transfers() {
    const auto& X = art_.index;
    for_transfer_index([&](int i, int j, int m, int k) {
      const std::vector<std::string> idx{num(i), num(j), num(m), num(k)};
      const double big = art_.big_m.transfer[i][j];
      const int r = X.r(i, j, m, k), b = X.b(i, j, m, k);
      // r >= in - out
      std::vector<Term> lo{{r, 1}};
      flow_terms(lo, i, j, m, k, true, -1);
      flow_terms(lo, i, j, m, k, false, 1);
      row("tr_lo", idx, lo, RowSense::kGreaterEqual, 0);
      // r <= in - out + M (1 - b)
      std::vector<Term> hi{{r, 1}, {b, big}};
      flow_terms(hi, i, j, m, k, true, -1);
      flow_terms(hi, i, j, m, k, false, 1);
      row("tr_hi", idx, hi, RowSense::kLessEqual, big);
      row("tr_ind", idx, {{r, 1}, {b, -big}}, RowSense::kLessEqual, 0);
    });
    for (int m = 0; m < n_; ++m) {
      for (int k = 0; k < buses_; ++k) {
        std::vector<Term> pick;
        for (int s = 0; s < levels_; ++s) pick.push_back({X.p(m, k, s), 1});
        row("strategy", {num(m), num(k)}, pick, RowSense::kEqual, 1);
        std::vector<Term> gate;
        for (int s = 1; s < levels_; ++s) gate.push_back({X.p(m, k, s), 1});
        for (int i = 0; i < n_; ++i) {
          for (int j = 0; j < n_; ++j) {
            if (X.r(i, j, m, k) >= 0) gate.push_back({X.r(i, j, m, k), -1});
          }
        }
        row("gate", {num(m), num(k)}, gate, RowSense::kLessEqual, 0);
      }
    }
  }

  void add_choice() {
    const auto& X = art_.index;
    const double cons = inst_.incentives.cons;
    for (int m = 0; m < n_; ++m) {
      for (int k = 0; k < buses_; ++k) {
        for (int d = 0; d < nd_; ++d) {
          const std::vector<std::string> idx{num(m), num(k), num(d)};
          const int au = X.au(m, k, d);
          const int w_tr = X.w(m, k, d, 1);  // transfer chosen
          const int w_st = X.w(m, k, d, 2);  // stay
          const double xi_stay = draws_.at(m, k, d, kStay);
          const double xi_tr = draws_.at(m, k, d, kTransfer);
          const double big = art_.big_m.utility[m][k][d];
          row("choose", idx, {{w_tr, 1}, {w_st, 1}}, RowSense::kEqual, 1);
          // Stay utility is the constant xi_stay.
          row("umax", {num(m), num(k), num(d), "stay"}, {{au, 1}}, RowSense::kGreaterEqual,
              xi_stay);
          // Transfer utility: -cons + sum_s ic_s p + xi_tr.
          std::vector<Term> tr_max{{au, 1}};
          for (int s = 0; s < levels_; ++s) {
            const double ic = inst_.incentives.costs[s];
            if (ic != 0.0) tr_max.push_back({X.p(m, k, s), -ic});
          }
          row("umax", {num(m), num(k), num(d), "transfer"}, tr_max, RowSense::kGreaterEqual,
              -cons + xi_tr);
          // AU <= U + M (1 - w)
          row("usel", {num(m), num(k), num(d), "stay"}, {{au, 1}, {w_st, big}},
              RowSense::kLessEqual, xi_stay + big);
          std::vector<Term> tr_sel{{au, 1}, {w_tr, big}};
          for (int s = 0; s < levels_; ++s) {
            const double ic = inst_.incentives.costs[s];
            if (ic != 0.0) tr_sel.push_back({X.p(m, k, s), -ic});
          }
          row("usel", {num(m), num(k), num(d), "transfer"}, tr_sel, RowSense::kLessEqual,
              -cons + xi_tr + big);
        }
      }
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      const std::vector<std::string> idx{num(i), num(j), num(m), num(k)};
      std::vector<Term> saa{{X.r(i, j, m, k), double(nd_)}};
      for (int d = 0; d < nd_; ++d) saa.push_back({X.t(i, j, m, k, d), -1});
      row("saa", idx, saa, RowSense::kLessEqual, 0);
      const double big = art_.big_m.willingness[i][j];
      for (int d = 0; d < nd_; ++d) {
        const std::vector<std::string> idd{num(i), num(j), num(m), num(k), num(d)};
        const int tv = X.t(i, j, m, k, d);
        const int w = X.w(m, k, d, 1);
        // T >= in - M (1 - w)
        std::vector<Term> lo{{tv, 1}, {w, -big}};
        flow_terms(lo, i, j, m, k, true, -1);
        row("wlo", idd, lo, RowSense::kGreaterEqual, -big);
        // T <= in + M (1 - w)
        std::vector<Term> hi{{tv, 1}, {w, big}};
        flow_terms(hi, i, j, m, k, true, -1);
        row("whi", idd, hi, RowSense::kLessEqual, big);
        row("wind", idd, {{tv, 1}, {w, -big}}, RowSense::kLessEqual, 0);
      }
    });
  }

  void add_costs() {
    const auto& X = art_.index;
    for (int k = 0; k < buses_; ++k) {
      for (int p = 0; p < types_; ++p) {
        const std::vector<std::string> idx{num(k), num(p)};
        const double c = inst_.fleet.types[p].cost_per_km;
        const double big = art_.big_m.route_cost[p];
        const int co = X.co(k, p), y = X.y(p, k);
        std::vector<Term> len;
        for (int i = 0; i < n_; ++i) {
          for (int j = 0; j < n_; ++j) {
            if (i != j && inst_.dist(i, j) != 0.0) len.push_back({X.x(i, j, k), c * inst_.dist(i, j)});
          }
        }
        // Co >= c L - M (1 - y)
        std::vector<Term> lo{{co, 1}, {y, -big}};
        for (const auto& t : len) lo.push_back({t.var, -t.coef});
        row("ocost_lo", idx, lo, RowSense::kGreaterEqual, -big);
        // Co <= c L + M (1 - y)
        std::vector<Term> hi{{co, 1}, {y, big}};
        for (const auto& t : len) hi.push_back({t.var, -t.coef});
        row("ocost_hi", idx, hi, RowSense::kLessEqual, big);
        row("ocost_ind", idx, {{co, 1}, {y, -big}}, RowSense::kLessEqual, 0);
      }
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      const double big = art_.big_m.incentive[i][j];
      const int r = X.r(i, j, m, k);
      for (int s = 0; s < levels_; ++s) {
        const std::vector<std::string> idx{num(i), num(j), num(m), num(k), num(s)};
        const double ic = inst_.incentives.costs[s];
        const int rc = X.rc(i, j, m, k, s), p = X.p(m, k, s);
        row("icost_lo", idx, {{rc, 1}, {r, -ic}, {p, -big}}, RowSense::kGreaterEqual, -big);
        row("icost_hi", idx, {{rc, 1}, {r, -ic}, {p, big}}, RowSense::kLessEqual, big);
        row("icost_ind", idx, {{rc, 1}, {p, -big}}, RowSense::kLessEqual, 0);
      }
    });
  }

  void add_no_incentive() {
    const auto& X = art_.index;
    for_transfer_index([&](int i, int j, int m, int k) {
      row("noinc", {num(i), num(j), num(m), num(k)}, {{X.r(i, j, m, k), 1}}, RowSense::kEqual, 0);
    });
  }

  void add_mtz() {
    const auto& X = art_.index;
    for (int k = 0; k < buses_; ++k) {
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
          if (i == j) continue;
          row("mtz", {num(i), num(j), num(k)},
              {{X.u(i, k), 1}, {X.u(j, k), -1}, {X.x(i, j, k), double(n_)}},
              RowSense::kLessEqual, n_ - 1);
        }
      }
    }
  }

  void add_objective() {
    const auto& X = art_.index;
    const auto& c = inst_.costs;
    auto& model = art_.model;
    for (int k = 0; k < buses_; ++k) {
      for (int p = 0; p < types_; ++p) model.add_objective_term(X.co(k, p), c.w_operator);
    }
    for_transfer_index([&](int i, int j, int m, int k) {
      for (int s = 0; s < levels_; ++s) model.add_objective_term(X.rc(i, j, m, k, s), c.w_operator);
    });
    double total_demand = 0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        total_demand += q(i, j);
        for (int m = 0; m < n_; ++m) {
          for (int nn = 0; nn < n_; ++nn) {
            if (!od_link(i, j, m, nn)) continue;
            for (int k = 0; k < buses_; ++k) {
              double coef = c.w_travel * c.c_t * inst_.time(m, nn);
              if (m == i) coef -= c.w_unserved * c.c_e;
              if (coef != 0.0) model.add_objective_term(X.z(i, j, m, nn, k), coef);
            }
          }
        }
      }
    }
    model.set_objective_constant(c.w_unserved * c.c_e * total_demand);
  }

  const Instance& inst_;
  const DrawSet& draws_;
  FormulationOptions opt_;
  int n_, buses_, types_, levels_, nd_;
  FormulationArtifacts art_;
};

FormulationArtifacts build_elp(const Instance& instance, const DrawSet& draws,
                               const FormulationOptions& options) {
  return FormulationBuilder(instance, draws, options).build();
}

FormulationArtifacts build_mtz_variant(const Instance& instance, const DrawSet& draws,
                                       bool no_incentive) {
  return build_elp(instance, draws, {SubtourMode::kMtz, no_incentive});
}

long FamilyCounts::total_variables() const {
  long s = 0;
  for (const auto& [k, v] : variables) s += v;
  return s;
}

long FamilyCounts::total_constraints() const {
  long s = 0;
  for (const auto& [k, v] : constraints) s += v;
  return s;
}

FamilyCounts expected_counts(int n, int buses, int types, int levels, int draws,
                             const FormulationOptions& options) {
  const long K = buses, P = types, S = levels, D = draws;
  const long od = long(n) * (n - 1);
  const long tr = od * (n - 2) * K;                      // (i, j, m, k), m not in {i, j}
  const long links_per_od = long(n - 1) * (n - 2) + 1;   // m != n, m != j, n != i
  const long z = od * links_per_od * K;
  FamilyCounts c;
  c.variables = {{"x", K * (od + 2L * n)},
                 {"y", P * K},
                 {"z", z},
                 {"r", tr},
                 {"b", tr},
                 {"p", n * K * S},
                 {"w", n * K * D * 2},
                 {"AU", n * K * D},
                 {"T", tr * D},
                 {"Co", K * P},
                 {"R", tr * S}};
  c.constraints = {{"depart", K},       {"return", K},        {"vflow", n * K},
                   {"duration", K},     {"demand", od},       {"pflow", od * (n - 2)},
                   {"arrive", od},      {"link", z},          {"cap", od * K},
                   {"type", K},         {"fleet", 1},         {"tr_lo", tr},
                   {"tr_hi", tr},       {"tr_ind", tr},       {"strategy", n * K},
                   {"gate", n * K},     {"choose", n * K * D}, {"umax", 2 * n * K * D},
                   {"usel", 2 * n * K * D}, {"saa", tr},      {"wlo", tr * D},
                   {"whi", tr * D},     {"wind", tr * D},     {"ocost_lo", K * P},
                   {"ocost_hi", K * P}, {"ocost_ind", K * P}, {"icost_lo", tr * S},
                   {"icost_hi", tr * S}, {"icost_ind", tr * S}};
  if (options.no_incentive) c.constraints["noinc"] = tr;
  if (options.subtour == SubtourMode::kMtz) {
    c.variables["u"] = n * K;
    c.constraints["mtz"] = od * K;
  }
  return c;
}

FamilyCounts actual_counts(const milp::MilpModel& model) {
  FamilyCounts c;
  for (const auto& v : model.variables()) {
    const auto parsed = milp::parse_structured_name(v.name);
    ++c.variables[parsed ? parsed->family : v.name];
  }
  for (const auto& r : model.constraints()) {
    const auto parsed = milp::parse_structured_name(r.name);
    ++c.constraints[parsed ? parsed->family : r.name];
  }
  return c;
}

std::vector<SubtourCut> separate_subtours(const std::vector<std::vector<int>>& arcs, int n) {
  if (static_cast<int>(arcs.size()) != n + 2) {
    throw std::invalid_argument("arc matrix must be (n+2) x (n+2)");
  }
  for (const auto& row : arcs) {
    for (int v : row) {
      if (v != 0 && v != 1) throw std::invalid_argument("subtour separation needs integral arcs");
    }
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<char> used(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && arcs[i][j]) {
        used[i] = used[j] = 1;
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<std::vector<int>> members(n);
  for (int v = 0; v < n; ++v) {
    if (used[v]) members[find(v)].push_back(v);
  }
  std::vector<SubtourCut> cuts;
  for (int root = 0; root < n; ++root) {
    const auto& comp = members[root];
    if (comp.size() < 2) continue;
    int internal = 0;
    for (int i : comp) {
      for (int j : comp) {
        if (i != j && arcs[i][j]) ++internal;
      }
    }
    // A path through c stations has c - 1 internal arcs; more means a cycle.
    if (internal >= static_cast<int>(comp.size())) {
      SubtourCut cut{comp, static_cast<int>(comp.size()) - 1};
      std::sort(cut.stations.begin(), cut.stations.end());
      cuts.push_back(std::move(cut));
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const SubtourCut& a, const SubtourCut& b) {
    return a.stations < b.stations;
  });
  return cuts;
}

milp::LinearConstraint subtour_constraint(const FormulationArtifacts& art, int k,
                                          const SubtourCut& cut) {
  LinearConstraint c;
  std::vector<std::string> idx{std::to_string(k)};
  for (int v : cut.stations) idx.push_back(std::to_string(v));
  c.name = milp::structured_name("subtour", idx);
  for (int i : cut.stations) {
    for (int j : cut.stations) {
      if (i != j) c.terms.push_back({art.index.x(i, j, k), 1});
    }
  }
  c.sense = RowSense::kLessEqual;
  c.rhs = cut.rhs;
  return c;
}

solver::LazyCallback make_subtour_callback(const FormulationArtifacts& art) {
  return [&art](const std::vector<double>& values) {
    std::vector<LinearConstraint> rows;
    const int n = art.n;
    for (int k = 0; k < art.buses; ++k) {
      std::vector<std::vector<int>> arcs(n + 2, std::vector<int>(n + 2, 0));
      for (int i = 0; i < n + 2; ++i) {
        for (int j = 0; j < n + 2; ++j) {
          const int id = art.index.x(i, j, k);
          if (id >= 0) arcs[i][j] = values[id] > 0.5 ? 1 : 0;
        }
      }
      for (const auto& cut : separate_subtours(arcs, n)) {
        rows.push_back(subtour_constraint(art, k, cut));
      }
    }
    return rows;
  };
}

solver::Solution solve_design(const FormulationArtifacts& art,
                              const solver::SolverConfig& config) {
  solver::SolverConfig cfg = config;
  if (cfg.priority.empty()) {
    // Bus types and routes first: with both fixed the flow relaxation is
    // usually integral already.
    cfg.priority.assign(art.model.num_variables(), 0);
    for (int k = 0; k < art.buses; ++k) {
      for (int p = 0; p < art.types; ++p) cfg.priority[art.index.y(p, k)] = 3;
      for (int i = 0; i < art.n + 2; ++i) {
        for (int j = 0; j < art.n + 2; ++j) {
          if (art.index.x(i, j, k) >= 0) cfg.priority[art.index.x(i, j, k)] = 2;
        }
      }
      for (int m = 0; m < art.n; ++m) {
        for (int s = 0; s < art.levels; ++s) cfg.priority[art.index.p(m, k, s)] = 1;
      }
    }
  }
  if (art.subtour == SubtourMode::kMtz) return solver::solve_milp(art.model, cfg);
  return solver::solve_milp(art.model, cfg, make_subtour_callback(art));
}

}  // namespace mbus
