#include <algorithm>
#include <optional>

#include "cmcq/error.hpp"
#include "cmcq/lp.hpp"

namespace cmcq {
namespace {

int sign_of(const FastRational& q) { return q.sign(); }
int sign_of(const Rational& q) { return sgn(q); }
Rational to_rational(const FastRational& q) { return q.to_mpq(); }
Rational to_rational(const Rational& q) { return q; }

// Dictionary form: x_B = b - A x_N, z = v + c x_N. Labels [0, n) are the
// structural variables, [n, n + m) the slacks.
template <typename Q>
class Dictionary {
 public:
  Dictionary(std::size_t n, const std::vector<std::vector<int>>& rows, const std::vector<bool>& objective)
      : n_(n), m_(rows.size()), a_(m_ * n_, Q(0)), b_(m_, Q(1)), c_(n_, Q(0)), basic_(m_), nonbasic_(n_) {
    for (std::size_t i = 0; i < m_; ++i) {
      basic_[i] = static_cast<int>(n_ + i);
      for (int j : rows[i]) a_[i * n_ + static_cast<std::size_t>(j)] = Q(1);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      nonbasic_[j] = static_cast<int>(j);
      if (objective[j]) c_[j] = Q(1);
    }
  }

  void solve() {
    // Dantzig pricing until degenerate pivots pile up, then Bland's rule,
    // which cannot cycle.
    constexpr int kDegenerateLimit = 32;
    int degenerate = 0;
    for (;;) {
      const bool bland = degenerate >= kDegenerateLimit;
      std::size_t s = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (sign_of(c_[j]) <= 0) continue;
        if (s == n_ || (bland ? nonbasic_[j] < nonbasic_[s]
                              : (c_[s] < c_[j] || (c_[j] == c_[s] && nonbasic_[j] < nonbasic_[s]))))
          s = j;
      }
      if (s == n_) return;

      std::size_t r = m_;
      Q best;
      for (std::size_t i = 0; i < m_; ++i) {
        const Q& a = at(i, s);
        if (sign_of(a) <= 0) continue;
        Q ratio = b_[i] / a;
        if (r == m_ || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
          r = i;
          best = ratio;
        }
      }
      // Every structural variable sits in some row, so the LP is bounded.
      if (r == m_) throw InvariantViolation("packing LP unbounded");
      if (sign_of(best) == 0) ++degenerate;
      pivot(r, s);
    }
  }

  Q value() const { return v_; }

  std::vector<Rational> assignment() const {
    std::vector<Rational> x(n_);
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] < static_cast<int>(n_)) x[static_cast<std::size_t>(basic_[i])] = to_rational(b_[i]);
    return x;
  }

 private:
  Q& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

  void pivot(std::size_t r, std::size_t s) {
    const Q p = at(r, s);
    b_[r] = b_[r] / p;
    nz_.clear();
    for (std::size_t j = 0; j < n_; ++j)
      if (j != s && sign_of(at(r, j)) != 0) {
        at(r, j) = at(r, j) / p;
        nz_.push_back(j);
      }
    at(r, s) = Q(1) / p;

    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const Q f = at(i, s);
      if (sign_of(f) == 0) continue;
      b_[i] = b_[i] - f * b_[r];
      for (std::size_t j : nz_) at(i, j) = at(i, j) - f * at(r, j);
      at(i, s) = -(f / p);
    }

    const Q cs = c_[s];
    v_ = v_ + cs * b_[r];
    for (std::size_t j : nz_) c_[j] = c_[j] - cs * at(r, j);
    c_[s] = -(cs / p);

    std::swap(basic_[r], nonbasic_[s]);
  }

  std::size_t n_, m_;
  std::vector<Q> a_, b_, c_;
  Q v_ = Q(0);
  std::vector<int> basic_, nonbasic_;
  std::vector<std::size_t> nz_;
};

// Floating-point simplex on the same dictionary. Only its final basis is
// used; it is then certified (or rejected) in exact arithmetic.
std::optional<std::vector<int>> float_basis(std::size_t n, const std::vector<std::vector<int>>& rows,
                                            const std::vector<bool>& objective) {
  constexpr double eps = 1e-9;
  const std::size_t m = rows.size();
  std::vector<double> a(m * n, 0.0), b(m, 1.0), c(n, 0.0);
  std::vector<int> basic(m), nonbasic(n);
  for (std::size_t i = 0; i < m; ++i) {
    basic[i] = static_cast<int>(n + i);
    for (int j : rows[i]) a[i * n + static_cast<std::size_t>(j)] = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    nonbasic[j] = static_cast<int>(j);
    c[j] = objective[j] ? 1.0 : 0.0;
  }
  int degenerate = 0;
  for (std::size_t iter = 0; iter < 50 * (m + n) + 100; ++iter) {
    const bool bland = degenerate >= 32;
    std::size_t s = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (c[j] <= eps) continue;
      if (s == n || (bland ? nonbasic[j] < nonbasic[s] : c[j] > c[s] + eps)) s = j;
    }
    if (s == n) return basic;
    std::size_t r = m;
    double best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = a[i * n + s];
      if (x <= eps) continue;
      const double ratio = b[i] / x;
      if (r == m || ratio < best - eps || (ratio <= best + eps && basic[i] < basic[r])) {
        r = i;
        best = ratio;
      }
    }
    if (r == m) return std::nullopt;
    if (best <= eps) ++degenerate;
    const double p = a[r * n + s];
    b[r] /= p;
    for (std::size_t j = 0; j < n; ++j)
      if (j != s) a[r * n + j] /= p;
    a[r * n + s] = 1.0 / p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = a[i * n + s];
      if (f == 0.0) continue;
      b[i] -= f * b[r];
      for (std::size_t j = 0; j < n; ++j)
        if (j != s) a[i * n + j] -= f * a[r * n + j];
      a[i * n + s] = -f / p;
    }
    const double cs = c[s];
    for (std::size_t j = 0; j < n; ++j)
      if (j != s) c[j] -= cs * a[r * n + j];
    c[s] = -cs / p;
    std::swap(basic[r], nonbasic[s]);
  }
  return std::nullopt;
}

// Solves M z = rhs exactly by Gauss-Jordan elimination; false when singular.
template <typename Q>
bool solve_square(std::vector<std::vector<Q>> M, std::vector<Q> rhs, std::vector<Q>& z) {
  const std::size_t k = rhs.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    while (piv < k && sign_of(M[piv][col]) == 0) ++piv;
    if (piv == k) return false;
    std::swap(M[piv], M[col]);
    std::swap(rhs[piv], rhs[col]);
    const Q p = M[col][col];
    for (std::size_t j = col; j < k; ++j) M[col][j] = M[col][j] / p;
    rhs[col] = rhs[col] / p;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == col || sign_of(M[i][col]) == 0) continue;
      const Q f = M[i][col];
      for (std::size_t j = col; j < k; ++j) M[i][j] = M[i][j] - f * M[col][j];
      rhs[i] = rhs[i] - f * rhs[col];
    }
  }
  z = std::move(rhs);
  return true;
}

// Exact optimality check of a basis: the basic structural variables solve
// the tight rows, the point is feasible, and the duals of the tight rows are
// nonnegative and cover every objective column.
template <typename Q>
std::optional<PackingSolution> certify(std::size_t n, const std::vector<std::vector<int>>& rows,
                                       const std::vector<bool>& objective, const std::vector<int>& basic) {
  std::vector<bool> in_basis(n + rows.size(), false);
  for (int l : basic) in_basis[static_cast<std::size_t>(l)] = true;
  std::vector<std::size_t> S, T;
  for (std::size_t j = 0; j < n; ++j)
    if (in_basis[j]) S.push_back(j);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!in_basis[n + i]) T.push_back(i);
  if (S.size() != T.size()) return std::nullopt;

  const std::size_t k = S.size();
  std::vector<std::vector<Q>> M(k, std::vector<Q>(k, Q(0)));
  std::vector<std::size_t> col_of(n, k);
  for (std::size_t q = 0; q < k; ++q) col_of[S[q]] = q;
  std::vector<std::vector<bool>> member(rows.size(), std::vector<bool>(n, false));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j : rows[i]) member[i][static_cast<std::size_t>(j)] = true;
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q)
      if (member[T[p]][S[q]]) M[p][q] = Q(1);

  std::vector<Q> xs, y;
  if (!solve_square(M, std::vector<Q>(k, Q(1)), xs)) return std::nullopt;
  std::vector<std::vector<Q>> Mt(k, std::vector<Q>(k, Q(0)));
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q) Mt[q][p] = M[p][q];
  std::vector<Q> cs(k, Q(0));
  for (std::size_t q = 0; q < k; ++q)
    if (objective[S[q]]) cs[q] = Q(1);
  if (!solve_square(Mt, cs, y)) return std::nullopt;

  for (const auto& v : xs)
    if (sign_of(v) < 0) return std::nullopt;
  for (const auto& v : y)
    if (sign_of(v) < 0) return std::nullopt;
  for (const auto& r : rows) {
    Q sum(0);
    for (int j : r)
      if (col_of[static_cast<std::size_t>(j)] < k) sum = sum + xs[col_of[static_cast<std::size_t>(j)]];
    if (Q(1) < sum) return std::nullopt;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_of[j] < k) continue;
    Q cover(0);
    for (std::size_t p = 0; p < k; ++p)
      if (member[T[p]][j]) cover = cover + y[p];
    if (cover < Q(objective[j] ? 1 : 0)) return std::nullopt;
  }

  PackingSolution out{Rational(0), std::vector<Rational>(n)};
  for (std::size_t q = 0; q < k; ++q) {
    out.x[S[q]] = to_rational(xs[q]);
    if (objective[S[q]]) out.value += out.x[S[q]];
  }
  return out;
}

template <typename Q>
PackingSolution run(std::size_t n, const std::vector<std::vector<int>>& rows, const std::vector<bool>& objective) {
  Dictionary<Q> d(n, rows, objective);
  d.solve();
  return {to_rational(d.value()), d.assignment()};
}

// Drops duplicate rows and rows contained in another row: the larger row
// already implies them, given nonnegativity.
std::vector<std::vector<int>> undominated(std::vector<std::vector<int>> rows) {
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::vector<std::vector<int>> kept;
  for (auto& r : rows) {
    if (r.empty()) continue;
    const bool dominated = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::includes(k.begin(), k.end(), r.begin(), r.end());
    });
    if (!dominated) kept.push_back(std::move(r));
  }
  return kept;
}

}  // namespace

std::string to_string(const Rational& q) { return q.get_str(); }

PackingSolution solve_packing_lp(std::size_t num_vars, const std::vector<bool>& objective,
                                 const std::vector<std::vector<int>>& rows) {
  if (objective.size() != num_vars) throw InvariantViolation("objective size mismatch");
  for (const auto& r : rows)
    for (int j : r)
      if (j < 0 || static_cast<std::size_t>(j) >= num_vars) throw InvariantViolation("LP variable out of range");

  auto kept = undominated(rows);

  // Variables outside every row only meet their box: 1 if rewarded, else 0.
  // The rest are renumbered densely for the simplex.
  std::vector<int> dense(num_vars, -1);
  std::vector<int> original;
  for (auto& r : kept)
    for (int& j : r) {
      if (dense[static_cast<std::size_t>(j)] < 0) {
        dense[static_cast<std::size_t>(j)] = static_cast<int>(original.size());
        original.push_back(j);
      }
      j = dense[static_cast<std::size_t>(j)];
    }
  std::vector<bool> sub_objective(original.size());
  for (std::size_t k = 0; k < original.size(); ++k) sub_objective[k] = objective[static_cast<std::size_t>(original[k])];

  // Fast path: floating-point pivoting, exact certificate. Any doubt falls
  // back to the exact simplex.
  std::optional<PackingSolution> certified;
  if (auto basis = float_basis(original.size(), kept, sub_objective)) {
    try {
      certified = certify<FastRational>(original.size(), kept, sub_objective, *basis);
    } catch (const RationalOverflow&) {
      certified = certify<Rational>(original.size(), kept, sub_objective, *basis);
    }
  }
  PackingSolution sub;
  if (certified) {
    sub = std::move(*certified);
  } else {
    try {
      sub = run<FastRational>(original.size(), kept, sub_objective);
    } catch (const RationalOverflow&) {
      sub = run<Rational>(original.size(), kept, sub_objective);
    }
  }

  PackingSolution out{sub.value, std::vector<Rational>(num_vars)};
  for (std::size_t k = 0; k < original.size(); ++k) out.x[static_cast<std::size_t>(original[k])] = sub.x[k];
  for (std::size_t j = 0; j < num_vars; ++j)
    if (dense[j] < 0 && objective[j]) {
      out.x[j] = 1;
      out.value += 1;
    }
  return out;
}

}  // namespace cmcq
