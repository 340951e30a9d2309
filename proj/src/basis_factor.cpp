#include "mbus/basis_factor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace mbus::solver {
namespace {

constexpr double kThreshold = 0.1;     // relative pivot threshold
constexpr double kAbsPivotTol = 1e-11;
constexpr int kSearchLimit = 4;

// Doubly linked lists of indices bucketed by nonzero count.
class CountBuckets {
 public:
  explicit CountBuckets(int size)
      : head_(size + 2, -1), next_(size, -1), prev_(size, -1),
        count_(size, -1) {}

  void insert(int i, int count) {
    count_[i] = count;
    prev_[i] = -1;
    next_[i] = head_[count];
    if (head_[count] >= 0) prev_[head_[count]] = i;
    head_[count] = i;
  }
  void remove(int i) {
    if (count_[i] < 0) return;
    if (prev_[i] >= 0) {
      next_[prev_[i]] = next_[i];
    } else {
      head_[count_[i]] = next_[i];
    }
    if (next_[i] >= 0) prev_[next_[i]] = prev_[i];
    count_[i] = -1;
  }
  void move(int i, int count) {
    if (count_[i] == count) return;
    remove(i);
    insert(i, count);
  }
  int head(int count) const { return head_[count]; }
  int next(int i) const { return next_[i]; }
  int max_count() const { return static_cast<int>(head_.size()) - 2; }

 private:
  std::vector<int> head_, next_, prev_, count_;
};

}  // namespace

BasisFactor::Deficiency BasisFactor::factorize(
    int m, const std::vector<SparseColumn>& columns) {
  m_ = m;
  l_row_.clear();
  l_start_.assign(1, 0);
  l_index_.clear();
  l_value_.clear();
  u_row_.clear();
  u_col_.clear();
  u_pivot_.clear();
  u_start_.assign(1, 0);
  u_index_.clear();
  u_value_.clear();
  eta_pivot_pos_.clear();
  eta_pivot_val_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();
  work_.assign(m, 0.0);

  std::vector<std::vector<int>> rcol(m);
  std::vector<std::vector<double>> rval(m);
  std::vector<std::vector<int>> crow(m);
  for (int p = 0; p < m; ++p) {
    const SparseColumn& col = columns[p];
    for (std::size_t e = 0; e < col.index.size(); ++e) {
      if (col.value[e] == 0.0) continue;
      const int i = col.index[e];
      rcol[i].push_back(p);
      rval[i].push_back(col.value[e]);
      crow[p].push_back(i);
    }
  }

  CountBuckets col_buckets(m), row_buckets(m);
  for (int j = 0; j < m; ++j) col_buckets.insert(j, static_cast<int>(crow[j].size()));
  for (int i = 0; i < m; ++i) row_buckets.insert(i, static_cast<int>(rcol[i].size()));
  std::vector<char> row_done(m, 0), col_done(m, 0);
  std::vector<int> mark(m, -1);

  auto get = [&](int i, int j) {
    const auto& cols = rcol[i];
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (cols[e] == j) return rval[i][e];
    }
    return 0.0;
  };
  auto col_max = [&](int j) {
    double mx = 0.0;
    for (int i : crow[j]) mx = std::max(mx, std::fabs(get(i, j)));
    return mx;
  };
  auto erase_from = [](std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) {
      *it = v.back();
      v.pop_back();
    }
  };

  int pivots = 0;
  std::vector<int> touched_cols;
  while (pivots < m) {
    int best_r = -1, best_c = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_mag = 0.0;
    int searched = 0;
    for (int cnt = 1; cnt <= m && searched < kSearchLimit; ++cnt) {
      for (int j = col_buckets.head(cnt); j >= 0 && searched < kSearchLimit;
           j = col_buckets.next(j)) {
        const double mx = col_max(j);
        if (mx < kAbsPivotTol) continue;
        ++searched;
        for (int i : crow[j]) {
          const double a = std::fabs(get(i, j));
          if (a < kThreshold * mx || a < kAbsPivotTol) continue;
          const double cost = double(rcol[i].size() - 1) * double(cnt - 1);
          if (cost < best_cost || (cost == best_cost && a > best_mag)) {
            best_cost = cost;
            best_mag = a;
            best_r = i;
            best_c = j;
          }
        }
      }
      if (searched >= kSearchLimit) break;
      for (int i = row_buckets.head(cnt); i >= 0 && searched < kSearchLimit;
           i = row_buckets.next(i)) {
        bool any = false;
        for (std::size_t e = 0; e < rcol[i].size(); ++e) {
          const int j = rcol[i][e];
          const double a = std::fabs(rval[i][e]);
          if (a < kAbsPivotTol) continue;
          if (a < kThreshold * col_max(j)) continue;
          any = true;
          const double cost = double(cnt - 1) * double(crow[j].size() - 1);
          if (cost < best_cost || (cost == best_cost && a > best_mag)) {
            best_cost = cost;
            best_mag = a;
            best_r = i;
            best_c = j;
          }
        }
        if (any) ++searched;
      }
      if (best_r >= 0 && best_cost <= double(cnt - 1) * double(cnt - 1)) break;
    }
    if (best_r < 0) break;  // remaining submatrix is (numerically) singular

    const int r = best_r;
    const int c = best_c;
    const double piv = get(r, c);

    // U row.
    u_row_.push_back(r);
    u_col_.push_back(c);
    u_pivot_.push_back(piv);
    for (std::size_t e = 0; e < rcol[r].size(); ++e) {
      if (rcol[r][e] == c) continue;
      u_index_.push_back(rcol[r][e]);
      u_value_.push_back(rval[r][e]);
    }
    u_start_.push_back(static_cast<int>(u_index_.size()));
    const int ubeg = u_start_[u_start_.size() - 2];
    const int uend = u_start_.back();

    for (int j : rcol[r]) erase_from(crow[j], r);
    row_buckets.remove(r);
    row_done[r] = 1;

    // Eliminate column c from the remaining rows.
    l_row_.push_back(r);
    for (int i : crow[c]) {
      auto& cols = rcol[i];
      auto& vals = rval[i];
      double a_ic = 0.0;
      for (std::size_t e = 0; e < cols.size(); ++e) {
        if (cols[e] == c) {
          a_ic = vals[e];
          cols[e] = cols.back();
          vals[e] = vals.back();
          cols.pop_back();
          vals.pop_back();
          break;
        }
      }
      const double mult = a_ic / piv;
      l_index_.push_back(i);
      l_value_.push_back(mult);
      if (mult == 0.0) continue;
      for (std::size_t e = 0; e < cols.size(); ++e) mark[cols[e]] = static_cast<int>(e);
      for (int u = ubeg; u < uend; ++u) {
        const int j = u_index_[u];
        const double delta = -mult * u_value_[u];
        if (mark[j] >= 0) {
          vals[mark[j]] += delta;
        } else {
          cols.push_back(j);
          vals.push_back(delta);
          crow[j].push_back(i);
        }
      }
      for (int j : cols) mark[j] = -1;
      row_buckets.move(i, static_cast<int>(cols.size()));
    }
    l_start_.push_back(static_cast<int>(l_index_.size()));

    col_buckets.remove(c);
    col_done[c] = 1;
    crow[c].clear();
    for (int u = ubeg; u < uend; ++u) {
      const int j = u_index_[u];
      col_buckets.move(j, static_cast<int>(crow[j].size()));
    }
    rcol[r].clear();
    rval[r].clear();
    ++pivots;
  }

  Deficiency def;
  if (pivots < m) {
    for (int j = 0; j < m; ++j) {
      if (!col_done[j]) def.positions.push_back(j);
    }
    for (int i = 0; i < m; ++i) {
      if (!row_done[i]) def.rows.push_back(i);
    }
  }
  return def;
}

void BasisFactor::ftran(std::vector<double>& v) const {
  const int nl = static_cast<int>(l_row_.size());
  for (int k = 0; k < nl; ++k) {
    const double x = v[l_row_[k]];
    if (x == 0.0) continue;
    for (int e = l_start_[k]; e < l_start_[k + 1]; ++e) {
      v[l_index_[e]] -= l_value_[e] * x;
    }
  }
  std::vector<double>& out = work_;
  const int nu = static_cast<int>(u_row_.size());
  for (int k = nu - 1; k >= 0; --k) {
    double s = v[u_row_[k]];
    for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) {
      s -= u_value_[e] * out[u_index_[e]];
    }
    out[u_col_[k]] = s / u_pivot_[k];
  }
  v.swap(out);
  const int ne = static_cast<int>(eta_pivot_pos_.size());
  for (int k = 0; k < ne; ++k) {
    const int r = eta_pivot_pos_[k];
    const double x = v[r] / eta_pivot_val_[k];
    v[r] = x;
    if (x == 0.0) continue;
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e) {
      v[eta_index_[e]] -= eta_value_[e] * x;
    }
  }
}

void BasisFactor::btran(std::vector<double>& v) const {
  const int ne = static_cast<int>(eta_pivot_pos_.size());
  for (int k = ne - 1; k >= 0; --k) {
    const int r = eta_pivot_pos_[k];
    double s = v[r];
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e) {
      s -= eta_value_[e] * v[eta_index_[e]];
    }
    v[r] = s / eta_pivot_val_[k];
  }
  std::vector<double>& z = work_;
  const int nu = static_cast<int>(u_row_.size());
  for (int k = 0; k < nu; ++k) {
    const double zr = v[u_col_[k]] / u_pivot_[k];
    z[u_row_[k]] = zr;
    if (zr == 0.0) continue;
    for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) {
      v[u_index_[e]] -= zr * u_value_[e];
    }
  }
  const int nl = static_cast<int>(l_row_.size());
  for (int k = nl - 1; k >= 0; --k) {
    double s = 0.0;
    for (int e = l_start_[k]; e < l_start_[k + 1]; ++e) {
      s += l_value_[e] * z[l_index_[e]];
    }
    z[l_row_[k]] -= s;
  }
  v.swap(z);
}

void BasisFactor::update(int position, const std::vector<double>& column) {
  eta_pivot_pos_.push_back(position);
  eta_pivot_val_.push_back(column[position]);
  for (int i = 0; i < m_; ++i) {
    if (i != position && column[i] != 0.0) {
      eta_index_.push_back(i);
      eta_value_.push_back(column[i]);
    }
  }
  eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

}  // namespace mbus::solver
