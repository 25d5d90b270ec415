#include "tdcif/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tdcif/error.hpp"

namespace tdcif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const Matrix& m, const char* what) {
  for (double x : m.data())
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite input");
}

// Appends unit vectors orthogonal to the first `have` columns of u until it
// has `want` orthonormal columns. Candidates are the standard basis vectors.
void complete_orthonormal(Matrix& u, std::size_t have, std::size_t want) {
  const std::size_t n = u.rows();
  for (std::size_t e = 0; e < n && have < want; ++e) {
    Vector v(n, 0.0);
    v[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < have; ++j) {
        const double proj = dot(u.col(j), v);
        auto cj = u.col(j);
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * cj[i];
      }
    const double nv = norm2(v);
    if (nv < 0.5) continue;
    auto dst = u.col(have++);
    for (std::size_t i = 0; i < n; ++i) dst[i] = v[i] / nv;
  }
}

SvdResult svd_tall(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  // Columns below eps * |A|_F are rounding noise; rotating them never settles.
  double fro2 = 0.0;
  for (double x : a.data()) fro2 += x * x;
  const double negligible = kEps * kEps * fro2;

  bool converged = n < 2;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto ap = a.col(p);
        auto aq = a.col(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gamma += ap[i] * aq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiTolerance * std::sqrt(alpha * beta) ||
            alpha <= negligible || beta <= negligible)
          continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw NumericError("svd: Jacobi sweeps did not converge");

  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(a.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out{Matrix(rows, n), Vector(n), Matrix(n, n)};
  const double smax = n ? norms[order[0]] : 0.0;
  const double zero_tol = static_cast<double>(std::max(rows, n)) * kEps * smax;
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.s[j] = norms[src];
    std::copy(v.col(src).begin(), v.col(src).end(), out.v.col(j).begin());
    if (norms[src] > zero_tol && norms[src] > 0.0) {
      auto dst = out.u.col(j);
      auto col = a.col(src);
      for (std::size_t i = 0; i < rows; ++i) dst[i] = col[i] / norms[src];
      ++nonzero;
    }
  }
  // Columns past `nonzero` carry numerically zero singular values.
  complete_orthonormal(out.u, nonzero, n);
  return out;
}

}  // namespace

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult t = svd_tall(transpose(m));
  return {std::move(t.v), std::move(t.s), std::move(t.u)};
}

double default_pinv_tolerance(const Matrix& m, std::span<const double> singular_values) {
  const double smax = singular_values.empty() ? 0.0 : singular_values[0];
  return static_cast<double>(std::max(m.rows(), m.cols())) * kEps * smax;
}

Matrix pinv(const Matrix& m, double tol) {
  const SvdResult d = svd(m);
  if (tol < 0.0) tol = default_pinv_tolerance(m, d.s);
  // pinv = V diag(1/s) U^T
  Matrix vs = d.v;
  for (std::size_t j = 0; j < d.s.size(); ++j) {
    const double inv = d.s[j] > tol ? 1.0 / d.s[j] : 0.0;
    for (double& x : vs.col(j)) x *= inv;
  }
  return matmul(vs, transpose(d.u));
}

QrResult qr(const Matrix& m) {
  require_finite(m, "qr");
  const std::size_t rows = m.rows(), n = m.cols();
  if (rows < n)
    throw InvalidArgument("qr: needs rows >= cols, got " + std::to_string(rows) + "x" +
                          std::to_string(n));
  Matrix r = m;
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v(rows - k);
    for (std::size_t i = k; i < rows; ++i) v[i - k] = r(i, k);
    const double alpha = norm2(v);
    if (alpha == 0.0) {
      reflectors.emplace_back();
      continue;
    }
    v[0] += v[0] >= 0.0 ? alpha : -alpha;
    const double vn = norm2(v);
    for (double& x : v) x /= vn;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += v[i - k] * r(i, j);
      for (std::size_t i = k; i < rows; ++i) r(i, j) -= 2.0 * s * v[i - k];
    }
    reflectors.push_back(std::move(v));
  }
  // Accumulate the thin Q by applying the reflectors to the first n unit vectors.
  Matrix q(rows, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    const Vector& v = reflectors[k];
    if (v.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += v[i - k] * q(i, j);
      for (std::size_t i = k; i < rows; ++i) q(i, j) -= 2.0 * s * v[i - k];
    }
  }
  Matrix rr(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) rr(i, j) = r(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    if (rr(i, i) < 0.0) {
      for (std::size_t j = 0; j < n; ++j) rr(i, j) = -rr(i, j);
      for (double& x : q.col(i)) x = -x;
    }
  }
  return {std::move(q), std::move(rr)};
}

Matrix orthonormal_extend(const Matrix& u, std::size_t cols) {
  if (cols < u.cols() || cols > u.rows())
    throw InvalidArgument("orthonormal_extend: cannot extend " + std::to_string(u.cols()) +
                          " columns to " + std::to_string(cols) + " in dimension " +
                          std::to_string(u.rows()));
  Matrix out(u.rows(), cols);
  std::copy(u.data().begin(), u.data().end(), out.data().begin());
  complete_orthonormal(out, u.cols(), cols);
  return out;
}

Matrix orthonormal_basis(const Matrix& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Matrix(m.rows(), 0);
  const SvdResult d = svd(m);
  std::size_t keep = 0;
  while (keep < d.s.size() && d.s[keep] > rel_tol * d.s[0] && d.s[keep] > 0.0) ++keep;
  Matrix out(m.rows(), keep);
  for (std::size_t j = 0; j < keep; ++j)
    std::copy(d.u.col(j).begin(), d.u.col(j).end(), out.col(j).begin());
  return out;
}

// --- NNLS ----------------------------------------------------------------------

Vector nnls_gram(const Matrix& gram, std::span<const double> rhs) {
  const std::size_t n = gram.cols();
  if (gram.rows() != n || rhs.size() != n)
    throw InvalidArgument("nnls: Gram matrix and right-hand side sizes disagree");
  require_finite(gram, "nnls");

  double scale = 1.0;
  for (double h : rhs) {
    if (!std::isfinite(h)) throw NumericError("nnls: non-finite right-hand side");
    scale = std::max(scale, std::abs(h));
  }
  const double tol = kNnlsDualTolerance * scale;
  const std::size_t max_outer = 3 * n;

  Vector x(n, 0.0);
  std::vector<bool> passive(n, false);

  auto gradient = [&] {
    Vector w(rhs.begin(), rhs.end());
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] != 0.0)
        for (std::size_t i = 0; i < n; ++i) w[i] -= gram(i, j) * x[j];
    return w;
  };

  // Unconstrained minimizer restricted to the passive set.
  auto solve_passive = [&] {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Matrix g(idx.size(), idx.size());
    Vector h(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      h[a] = rhs[idx[a]];
      for (std::size_t b = 0; b < idx.size(); ++b) g(a, b) = gram(idx[a], idx[b]);
    }
    const Vector zp = matvec(pinv(g), h);
    Vector z(n, 0.0);
    for (std::size_t a = 0; a < idx.size(); ++a) z[idx[a]] = zp[a];
    return z;
  };

  std::size_t outer = 0;
  for (;;) {
    const Vector w = gradient();
    std::size_t best = n;
    double best_w = tol;
    for (std::size_t j = 0; j < n; ++j)
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best == n) break;
    if (outer++ >= max_outer)
      throw NumericError("nnls: no convergence after " + std::to_string(max_outer) +
                         " outer iterations (ill-conditioned problem)");
    passive[best] = true;

    for (std::size_t inner = 0;; ++inner) {
      Vector z = solve_passive();
      bool feasible = true;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) {
        x = std::move(z);
        break;
      }
      if (inner > n) throw NumericError("nnls: inner loop failed to terminate");
      // Step toward z until the first passive coordinate hits zero.
      double alpha = 1.0;
      std::size_t blocking = n;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) {
          const double denom = x[j] - z[j];
          const double step = denom > 0.0 ? x[j] / denom : 0.0;
          if (blocking == n || step < alpha) {
            alpha = step;
            blocking = j;
          }
        }
      for (std::size_t j = 0; j < n; ++j) {
        if (!passive[j]) continue;
        x[j] += alpha * (z[j] - x[j]);
        if (j == blocking || x[j] <= 0.0) {
          x[j] = 0.0;
          passive[j] = false;
        }
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!passive[j]) x[j] = 0.0;
  return x;
}

Vector nnls(const Matrix& a, std::span<const double> y) {
  if (a.rows() != y.size())
    throw InvalidArgument("nnls: design has " + std::to_string(a.rows()) + " rows, target has " +
                          std::to_string(y.size()) + " entries");
  require_finite(a, "nnls");
  return nnls_gram(matmul_tn(a, a), matvec_t(a, y));
}

Matrix nnls_multi(const Matrix& a, const Matrix& ys) {
  if (a.rows() != ys.rows())
    throw InvalidArgument("nnls_multi: design and targets have different row counts");
  require_finite(a, "nnls_multi");
  const Matrix gram = matmul_tn(a, a);
  const Matrix rhs = matmul_tn(a, ys);
  Matrix out(a.cols(), ys.cols());
  const auto cols = static_cast<std::ptrdiff_t>(ys.cols());
  std::vector<std::string> failures(ys.cols());
#pragma omp parallel for schedule(dynamic) if (cols > 1)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    const auto col = static_cast<std::size_t>(j);
    try {
      const Vector x = nnls_gram(gram, rhs.col(col));
      std::copy(x.begin(), x.end(), out.col(col).begin());
    } catch (const Error& e) {
      failures[col] = e.what();
    }
  }
  for (std::size_t j = 0; j < failures.size(); ++j)
    if (!failures[j].empty())
      throw NumericError("nnls_multi: column " + std::to_string(j) + ": " + failures[j]);
  return out;
}

}  // namespace tdcif
