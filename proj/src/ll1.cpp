#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "decomp_detail.hpp"
#include "tdcif/error.hpp"
#include "tdcif/kernels.hpp"
#include "tdcif/linalg.hpp"

namespace tdcif {

namespace {

std::vector<BlockTerm> init_random(const Shape& shape, std::span<const std::size_t> ranks, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<BlockTerm> terms;
  int ignored = 0;
  for (std::size_t l : ranks) {
    BlockTerm t;
    t.a = detail::random_normal(shape[0], l, rng);
    t.b = detail::random_normal(shape[1], l, rng);
    t.c.resize(shape[2]);
    for (double& x : t.c) x = u01(rng);
    detail::normalize_columns(t.a, rng, ignored);
    detail::normalize_columns(t.b, rng, ignored);
    Matrix c = Matrix::column(t.c);
    detail::normalize_columns(c, rng, ignored, true);
    t.c = c.col_vector(0);
    t.lambda.assign(l, 1.0);
    terms.push_back(std::move(t));
  }
  return terms;
}

std::vector<BlockTerm> init_hosvd(const DenseTensor& x, std::span<const std::size_t> ranks, Rng& rng) {
  const std::size_t total = std::accumulate(ranks.begin(), ranks.end(), std::size_t{0});
  const Matrix u0 = detail::leading_left_vectors(x, 0, total, rng);
  const Matrix u1 = detail::leading_left_vectors(x, 1, total, rng);
  const Matrix u2 = detail::leading_left_vectors(x, 2, ranks.size(), rng);
  std::vector<BlockTerm> terms;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    BlockTerm t;
    t.a = Matrix(x.extent(0), ranks[k]);
    t.b = Matrix(x.extent(1), ranks[k]);
    for (std::size_t j = 0; j < ranks[k]; ++j) {
      std::copy(u0.col(offset + j).begin(), u0.col(offset + j).end(), t.a.col(j).begin());
      std::copy(u1.col(offset + j).begin(), u1.col(offset + j).end(), t.b.col(j).begin());
    }
    offset += ranks[k];
    // Orient the singular vector toward the positive orthant, then clamp.
    Matrix c = Matrix::column(u2.col(k));
    const double sum = std::accumulate(c.data().begin(), c.data().end(), 0.0);
    for (double& v : c.data()) v = std::max(0.0, sum < 0.0 ? -v : v);
    int ignored = 0;
    detail::normalize_columns(c, rng, ignored, true);
    t.c = c.col_vector(0);
    t.lambda.assign(ranks[k], 1.0);
    terms.push_back(std::move(t));
  }
  return terms;
}

// O*P x K matrix whose columns are the vectorized term slices.
Matrix slice_matrix(const std::vector<BlockTerm>& terms, std::size_t op) {
  Matrix m(op, terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Matrix s = terms[k].slice();
    std::copy(s.data().begin(), s.data().end(), m.col(k).begin());
  }
  return m;
}

// Sum of all terms except `skip`.
DenseTensor reconstruct_without(const std::vector<BlockTerm>& terms, std::size_t skip,
                                const Shape& shape) {
  const std::size_t op = shape[0] * shape[1];
  const std::size_t k = terms.size() - 1;
  std::vector<double> out(op * shape[2], 0.0);
  if (k == 0) return DenseTensor(shape, std::move(out));
  std::vector<double> slices(op * k);
  Matrix mix(shape[2], k);
  std::size_t col = 0;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (j == skip) continue;
    const Matrix s = terms[j].slice();
    std::copy(s.data().begin(), s.data().end(),
              slices.begin() + static_cast<std::ptrdiff_t>(op * col));
    std::copy(terms[j].c.begin(), terms[j].c.end(), mix.col(col).begin());
    ++col;
  }
  kernels::parallel::slice_mix(op, shape[2], k, slices, mix.data(), out);
  return DenseTensor(shape, std::move(out));
}

Matrix repeat_column(std::span<const double> c, std::size_t times) {
  Matrix m(c.size(), times);
  for (std::size_t j = 0; j < times; ++j) std::copy(c.begin(), c.end(), m.col(j).begin());
  return m;
}

}  // namespace

LL1Factors ll1_nn(const DenseTensor& t, std::span<const std::size_t> ranks,
                  const DecompConfig& cfg) {
  detail::require_order3(t, "ll1_nn");
  cfg.validate();
  if (ranks.empty()) throw InvalidArgument("ll1_nn: needs at least one block term");
  for (std::size_t l : ranks)
    if (l < 1) throw InvalidArgument("ll1_nn: every block rank must be >= 1");

  const Shape& shape = t.shape();
  const std::size_t op = shape[0] * shape[1];
  const std::size_t q = shape[2];
  const std::size_t nterms = ranks.size();

  LL1Factors out;
  out.info.seed = cfg.seed;
  Rng init_rng = make_rng(cfg.seed, "ll1/init");
  Rng degenerate_rng = make_rng(cfg.seed, "ll1/degenerate");
  out.terms = cfg.init == InitMethod::Hosvd ? init_hosvd(t, ranks, init_rng)
                                            : init_random(shape, ranks, init_rng);
  auto& terms = out.terms;

  // Mode-3 unfolding, transposed: one column per frontal slice.
  const Matrix slices_by_column(op, q, std::vector<double>(t.data().begin(), t.data().end()));

  double previous = 0.0;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < nterms; ++k) {
      BlockTerm& term = terms[k];
      const std::size_t l = term.rank();

      // Deflate by every other term.
      const DenseTensor residual = subtract(t, reconstruct_without(terms, k, shape));

      const Matrix ck = repeat_column(term.c, l);
      const Matrix c_gram = matmul_tn(ck, ck);

      const Matrix a_fac[3] = {Matrix(), term.b, ck};
      Matrix a_hat = matmul(mttkrp(residual, a_fac, 0),
                            pinv(hadamard(c_gram, matmul_tn(term.b, term.b))));
      const Matrix b_fac[3] = {a_hat, Matrix(), ck};
      Matrix b_hat = matmul(mttkrp(residual, b_fac, 1),
                            pinv(hadamard(c_gram, matmul_tn(a_hat, a_hat))));

      // Non-negative third mode, all terms jointly against the full tensor.
      term.a = a_hat;
      term.b = b_hat;
      term.lambda.assign(l, 1.0);
      Matrix c_hat;
      try {
        c_hat = nnls_multi(slice_matrix(terms, op), slices_by_column);
      } catch (const NumericError& e) {
        throw NumericError("ll1_nn: term " + std::to_string(k) + ", sweep " +
                           std::to_string(sweep) + ": " + e.what());
      }

      // Unit-norm columns, norms into lambda.
      const Vector a_norms = detail::normalize_columns(term.a, degenerate_rng,
                                                       out.info.degenerate_columns);
      const Vector b_norms = detail::normalize_columns(term.b, degenerate_rng,
                                                       out.info.degenerate_columns);
      for (std::size_t j = 0; j < nterms; ++j) {
        Matrix cj(q, 1);
        for (std::size_t s = 0; s < q; ++s) cj(s, 0) = c_hat(j, s);
        const double gamma =
            detail::normalize_columns(cj, degenerate_rng, out.info.degenerate_columns, true)[0];
        terms[j].c = cj.col_vector(0);
        if (j == k) {
          for (std::size_t i = 0; i < l; ++i) term.lambda[i] = a_norms[i] * b_norms[i] * gamma;
        } else {
          for (double& lam : terms[j].lambda) lam *= gamma;
        }
      }
    }

    const double fit = fit_error(t, out);
    out.info.fit_history.push_back(fit);
    out.info.sweeps = sweep;
    if ((sweep > 1 && detail::fit_converged(previous, fit, cfg.rel_tol)) || fit <= kExactFitFloor) {
      out.info.converged = true;
      break;
    }
    previous = fit;
  }

  for (const auto& term : terms)
    out.info.zero_c_entries += static_cast<int>(std::count(term.c.begin(), term.c.end(), 0.0));
  return out;
}

LL1Factors ll1_nn_best(const DenseTensor& t, std::span<const std::size_t> ranks,
                       const DecompConfig& cfg, int restarts) {
  return detail::best_of(cfg.seed, restarts, [&](std::uint64_t seed) {
    DecompConfig c = cfg;
    c.seed = seed;
    return ll1_nn(t, ranks, c);
  });
}

}  // namespace tdcif
