#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "decomp_detail.hpp"
#include "tdcif/error.hpp"
#include "tdcif/kernels.hpp"
#include "tdcif/linalg.hpp"

namespace tdcif {

void DecompConfig::validate() const {
  if (max_sweeps < 1) throw InvalidArgument("max_sweeps must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("rel_tol must be > 0");
}

Matrix BlockTerm::slice() const { return matmul(scale_columns(a, lambda), transpose(b)); }

std::vector<std::size_t> LL1Factors::ranks() const {
  std::vector<std::size_t> r;
  for (const auto& t : terms) r.push_back(t.rank());
  return r;
}

Shape LL1Factors::shape() const {
  if (terms.empty()) throw InvalidArgument("LL1Factors: no terms");
  return {terms[0].a.rows(), terms[0].b.rows(), terms[0].c.size()};
}

namespace detail {

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = n01(rng);
  return m;
}

void fill_random_unit(std::span<double> col, Rng& rng, bool nonnegative) {
  std::normal_distribution<double> n01(0.0, 1.0);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (double& x : col) x = nonnegative ? std::abs(n01(rng)) : n01(rng);
    nrm = norm2(col);
  }
  for (double& x : col) x /= nrm;
}

Vector normalize_columns(Matrix& m, Rng& rng, int& degenerate, bool nonnegative) {
  Vector norms(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    auto col = m.col(j);
    const double n = norm2(col);
    if (n > 0.0 && std::isfinite(n)) {
      for (double& x : col) x /= n;
      norms[j] = n;
    } else {
      fill_random_unit(col, rng, nonnegative);
      norms[j] = 0.0;
      ++degenerate;
    }
  }
  return norms;
}

bool fit_converged(double previous, double current, double rel_tol) {
  if (current <= kExactFitFloor) return true;
  const double denom = std::max(previous, std::numeric_limits<double>::epsilon());
  return std::abs(previous - current) / denom < rel_tol;
}

Matrix leading_left_vectors(const DenseTensor& t, std::size_t mode, std::size_t count, Rng& rng) {
  const SvdResult d = svd(unfold(t, mode));
  const std::size_t rows = t.extent(mode);
  const std::size_t from_svd = std::min(count, d.u.cols());
  Matrix lead(rows, from_svd);
  for (std::size_t j = 0; j < from_svd; ++j)
    std::copy(d.u.col(j).begin(), d.u.col(j).end(), lead.col(j).begin());
  if (from_svd < rows) lead = orthonormal_extend(lead, std::min(count, rows));
  if (lead.cols() == count) return lead;
  // More columns than rows: the remainder cannot be orthogonal, draw them.
  Matrix out(rows, count);
  std::copy(lead.data().begin(), lead.data().end(), out.data().begin());
  for (std::size_t j = lead.cols(); j < count; ++j) fill_random_unit(out.col(j), rng, false);
  return out;
}

void require_order3(const DenseTensor& t, const char* what) {
  if (t.order() != 3)
    throw InvalidArgument(std::string(what) + ": expects an order-3 tensor, got order " +
                          std::to_string(t.order()));
}

}  // namespace detail

Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode) {
  detail::require_order3(t, "mttkrp");
  if (factors.size() != 3 || mode > 2) throw InvalidArgument("mttkrp: needs three factors");
  std::size_t r = 0;
  bool have_r = false;
  for (std::size_t n = 0; n < 3; ++n) {
    if (n == mode) continue;
    if (factors[n].rows() != t.extent(n))
      throw InvalidArgument("mttkrp: factor " + std::to_string(n) + " has wrong row count");
    if (have_r && factors[n].cols() != r)
      throw InvalidArgument("mttkrp: factors have different column counts");
    r = factors[n].cols();
    have_r = true;
  }
  Matrix out(t.extent(mode), r);
  kernels::parallel::mttkrp3(t.extent(0), t.extent(1), t.extent(2), t.data(), mode, r,
                             factors[0].data(), factors[1].data(), factors[2].data(),
                             out.data());
  return out;
}

DenseTensor reconstruct(const KruskalFactors& f) {
  if (f.factors.size() < 2) throw InvalidArgument("reconstruct: Kruskal model needs >= 2 modes");
  const std::size_t r = f.weights.size();
  Shape shape;
  for (const auto& m : f.factors) {
    if (m.cols() != r) throw InvalidArgument("reconstruct: factor column count != rank");
    shape.push_back(m.rows());
  }
  // X_(0) = A_0 diag(w) (A_{N-1} kr ... kr A_1)^T
  Matrix kr = f.factors.back();
  for (std::size_t n = f.factors.size() - 1; n-- > 1;) kr = khatri_rao(kr, f.factors[n]);
  const Matrix x0 = matmul(scale_columns(f.factors[0], f.weights), transpose(kr));
  return DenseTensor(std::move(shape), std::vector<double>(x0.data().begin(), x0.data().end()));
}

DenseTensor reconstruct(const TuckerFactors& f) {
  if (f.factors.size() != f.core.order())
    throw InvalidArgument("reconstruct: Tucker factor count != core order");
  DenseTensor x = f.core;
  for (std::size_t n = 0; n < f.factors.size(); ++n) x = mode_n_product(x, f.factors[n], n);
  return x;
}

DenseTensor reconstruct(const LL1Factors& f) {
  const Shape shape = f.shape();
  const std::size_t op = shape[0] * shape[1];
  const std::size_t k = f.terms.size();
  std::vector<double> slices(op * k);
  Matrix mix(shape[2], k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& t = f.terms[j];
    if (t.a.rows() != shape[0] || t.b.rows() != shape[1] || t.c.size() != shape[2] ||
        t.a.cols() != t.rank() || t.b.cols() != t.rank())
      throw InvalidArgument("reconstruct: inconsistent dimensions in block term " +
                            std::to_string(j));
    const Matrix s = t.slice();
    std::copy(s.data().begin(), s.data().end(), slices.begin() + static_cast<std::ptrdiff_t>(op * j));
    std::copy(t.c.begin(), t.c.end(), mix.col(j).begin());
  }
  std::vector<double> out(op * shape[2]);
  kernels::parallel::slice_mix(op, shape[2], k, slices, mix.data(), out);
  return DenseTensor(shape, std::move(out));
}

double relative_error(const DenseTensor& t, const DenseTensor& model) {
  if (t.shape() != model.shape()) throw InvalidArgument("fit_error: shape mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = t.data()[i] - model.data()[i];
    diff += d * d;
    ref += t.data()[i] * t.data()[i];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

double fit_error(const DenseTensor& t, const KruskalFactors& f) {
  return relative_error(t, reconstruct(f));
}
double fit_error(const DenseTensor& t, const TuckerFactors& f) {
  return relative_error(t, reconstruct(f));
}
double fit_error(const DenseTensor& t, const LL1Factors& f) {
  return relative_error(t, reconstruct(f));
}

}  // namespace tdcif
