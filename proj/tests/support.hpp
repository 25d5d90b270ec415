#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <random>
#include <vector>

#include "tdcif/decomp.hpp"
#include "tdcif/linalg.hpp"
#include "tdcif/tensor.hpp"

namespace tdcif::testing {

using Gen = std::mt19937_64;

inline Matrix random_matrix(Gen& g, std::size_t r, std::size_t c) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(r, c);
  for (double& x : m.data()) x = n01(g);
  return m;
}

inline Vector random_vector(Gen& g, std::size_t n) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector v(n);
  for (double& x : v) x = n01(g);
  return v;
}

inline Vector random_unit(Gen& g, std::size_t n) {
  Vector v = random_vector(g, n);
  const double s = norm2(v);
  for (double& x : v) x /= s;
  return v;
}

inline Vector random_nonneg(Gen& g, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (double& x : v) x = u(g);
  return v;
}

inline DenseTensor random_tensor(Gen& g, const Shape& shape) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> data(shape_size(shape));
  for (double& x : data) x = n01(g);
  return DenseTensor(shape, std::move(data));
}

inline Shape random_shape(Gen& g, std::size_t max_order, std::size_t max_extent) {
  std::uniform_int_distribution<std::size_t> order(1, max_order), ext(1, max_extent);
  Shape s(order(g));
  for (auto& e : s) e = ext(g);
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double abs_cosine(std::span<const double> a, std::span<const double> b) {
  return std::abs(dot(a, b)) / (norm2(a) * norm2(b));
}

/// Greedy maximum absolute cosine assignment of estimate columns to truth
/// columns. perm[j] is the estimate column matched to truth column j and
/// cos[j] its absolute cosine.
struct Match {
  std::vector<std::size_t> perm;
  std::vector<double> cos;
  double worst() const { return cos.empty() ? 0.0 : *std::min_element(cos.begin(), cos.end()); }
};

inline Match greedy_match(const Matrix& truth, const Matrix& est) {
  const std::size_t n = truth.cols();
  Match m{std::vector<std::size_t>(n, 0), std::vector<double>(n, 0.0)};
  std::vector<bool> used_t(n, false), used_e(est.cols(), false);
  for (std::size_t step = 0; step < std::min(n, est.cols()); ++step) {
    double best = -1.0;
    std::size_t bt = 0, be = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (used_t[t]) continue;
      for (std::size_t e = 0; e < est.cols(); ++e) {
        if (used_e[e]) continue;
        const double c = abs_cosine(truth.col(t), est.col(e));
        if (c > best) best = c, bt = t, be = e;
      }
    }
    used_t[bt] = used_e[be] = true;
    m.perm[bt] = be;
    m.cos[bt] = best;
  }
  return m;
}

/// Columns as a matrix.
inline Matrix columns(const std::vector<Vector>& cols) {
  Matrix m(cols.at(0).size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    std::copy(cols[j].begin(), cols[j].end(), m.col(j).begin());
  return m;
}

/// Mixing matrix (Q x K) of an LL1 fit.
inline Matrix c_matrix(const LL1Factors& f) {
  std::vector<Vector> cs;
  for (const auto& t : f.terms) cs.push_back(t.c);
  return columns(cs);
}

/// Brute-force sum_k (A_k diag(lambda_k) B_k^T) o c_k.
inline DenseTensor naive_ll1(const LL1Factors& f) {
  const std::size_t o = f.terms[0].a.rows(), p = f.terms[0].b.rows(), q = f.terms[0].c.size();
  std::vector<double> data(o * p * q, 0.0);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i < o; ++i) {
        double s = 0.0;
        for (const auto& t : f.terms)
          for (std::size_t l = 0; l < t.rank(); ++l)
            s += t.lambda[l] * t.a(i, l) * t.b(j, l) * t.c[k];
        data[i + o * (j + p * k)] = s;
      }
  return DenseTensor({o, p, q}, std::move(data));
}

/// Random ground-truth LL1 model: normal A_k, B_k, uniform(lo, 1) c_k.
inline LL1Factors random_ll1(Gen& g, std::size_t o, std::size_t p, std::size_t q,
                             const std::vector<std::size_t>& ranks, double c_lo = 0.0) {
  LL1Factors f;
  for (std::size_t l : ranks) {
    BlockTerm t{random_matrix(g, o, l), random_matrix(g, p, l), random_nonneg(g, q, c_lo, 1.0),
                Vector(l, 1.0)};
    f.terms.push_back(std::move(t));
  }
  return f;
}

// --- oracles ---------------------------------------------------------------------

// Odometer over all multi-indices, first index fastest.
inline bool next_index(std::vector<std::size_t>& idx, const Shape& shape) {
  for (std::size_t m = 0; m < shape.size(); ++m) {
    if (++idx[m] < shape[m]) return true;
    idx[m] = 0;
  }
  return false;
}

// Column of element `idx` in the mode-n unfolding: remaining modes ascending,
// lowest fastest.
inline std::size_t unfold_column(const std::vector<std::size_t>& idx, const Shape& shape,
                          std::size_t mode) {
  std::size_t col = 0, stride = 1;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    if (m == mode) continue;
    col += idx[m] * stride;
    stride *= shape[m];
  }
  return col;
}

inline Matrix oracle_unfold(const DenseTensor& t, std::size_t mode) {
  const Shape& s = t.shape();
  Matrix m(s[mode], t.size() / s[mode]);
  std::vector<std::size_t> idx(s.size(), 0);
  do {
    m(idx[mode], unfold_column(idx, s, mode)) = t(idx);
  } while (next_index(idx, s));
  return m;
}

inline DenseTensor oracle_mode_product(const DenseTensor& t, const Matrix& a, std::size_t mode) {
  Shape out = t.shape();
  out[mode] = a.rows();
  std::vector<double> data(shape_size(out), 0.0);
  const DenseTensor zero(out, data);
  std::vector<std::size_t> idx(out.size(), 0);
  do {
    double s = 0.0;
    std::vector<std::size_t> src = idx;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      src[mode] = k;
      s += a(idx[mode], k) * t(src);
    }
    data[zero.offset(idx)] = s;
  } while (next_index(idx, out));
  return DenseTensor(out, std::move(data));
}

// Solves the small dense system g x = h by Gaussian elimination with partial
// pivoting. Returns false when singular.
inline bool solve_small(std::vector<std::vector<double>> g, std::vector<double> h, std::vector<double>& x) {
  const std::size_t n = h.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(g[r][c]) > std::abs(g[p][c])) p = r;
    if (std::abs(g[p][c]) < 1e-13) return false;
    std::swap(g[p], g[c]);
    std::swap(h[p], h[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = g[r][c] / g[c][c];
      for (std::size_t k = c; k < n; ++k) g[r][k] -= f * g[c][k];
      h[r] -= f * h[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = h[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= g[c][k] * x[k];
    x[c] = s / g[c][c];
  }
  return true;
}

inline double residual_sq(const Matrix& a, std::span<const double> x, std::span<const double> y) {
  const Vector ax = matvec(a, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (ax[i] - y[i]) * (ax[i] - y[i]);
  return s;
}

// Exhaustive active-set search: least squares on every support, keep the best
// feasible one.
inline double enumerate_nnls_objective(const Matrix& a, std::span<const double> y) {
  const std::size_t n = a.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < n; ++j)
      if (mask & (1u << j)) s.push_back(j);
    Vector x(n, 0.0);
    if (!s.empty()) {
      std::vector<std::vector<double>> g(s.size(), std::vector<double>(s.size()));
      std::vector<double> h(s.size()), xs;
      for (std::size_t i = 0; i < s.size(); ++i) {
        h[i] = dot(a.col(s[i]), y);
        for (std::size_t j = 0; j < s.size(); ++j) g[i][j] = dot(a.col(s[i]), a.col(s[j]));
      }
      if (!solve_small(g, h, xs)) continue;
      bool feasible = true;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (xs[i] < 0.0) feasible = false;
        x[s[i]] = xs[i];
      }
      if (!feasible) continue;
    }
    best = std::min(best, residual_sq(a, x, y));
  }
  return best;
}

}  // namespace tdcif::testing
