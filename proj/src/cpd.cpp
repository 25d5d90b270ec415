#include <algorithm>
#include <array>
#include <string>

#include "decomp_detail.hpp"
#include "tdcif/error.hpp"
#include "tdcif/linalg.hpp"

namespace tdcif {

KruskalFactors cpd_als(const DenseTensor& t, std::size_t rank, const DecompConfig& cfg) {
  detail::require_order3(t, "cpd_als");
  cfg.validate();
  if (rank < 1) throw InvalidArgument("cpd_als: rank must be >= 1");

  KruskalFactors out;
  out.info.seed = cfg.seed;
  out.info.rank_flagged = rank > *std::min_element(t.shape().begin(), t.shape().end());

  Rng rng = make_rng(cfg.seed, "cpd/init");
  Rng degenerate_rng = make_rng(cfg.seed, "cpd/degenerate");
  for (std::size_t n = 0; n < 3; ++n) {
    out.factors.push_back(cfg.init == InitMethod::Hosvd
                              ? detail::leading_left_vectors(t, n, rank, rng)
                              : detail::random_normal(t.extent(n), rank, rng));
    int init_degenerate = 0;
    detail::normalize_columns(out.factors[n], rng, init_degenerate);
  }
  out.weights.assign(rank, 1.0);

  std::array<Matrix, 3> grams;
  for (std::size_t n = 0; n < 3; ++n) grams[n] = matmul_tn(out.factors[n], out.factors[n]);

  double previous = 0.0;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (std::size_t n = 0; n < 3; ++n) {
      const std::size_t p = (n + 1) % 3, q = (n + 2) % 3;
      const Matrix m = mttkrp(t, out.factors, n);
      Matrix updated = matmul(m, pinv(hadamard(grams[p], grams[q])));
      out.weights = detail::normalize_columns(updated, degenerate_rng, out.info.degenerate_columns);
      out.factors[n] = std::move(updated);
      grams[n] = matmul_tn(out.factors[n], out.factors[n]);
    }
    const double fit = fit_error(t, out);
    out.info.fit_history.push_back(fit);
    out.info.sweeps = sweep;
    if (sweep > 1 && detail::fit_converged(previous, fit, cfg.rel_tol)) {
      out.info.converged = true;
      break;
    }
    if (fit <= kExactFitFloor) {
      out.info.converged = true;
      break;
    }
    previous = fit;
  }
  return out;
}

KruskalFactors cpd_als_best(const DenseTensor& t, std::size_t rank, const DecompConfig& cfg,
                            int restarts) {
  return detail::best_of(cfg.seed, restarts, [&](std::uint64_t seed) {
    DecompConfig c = cfg;
    c.seed = seed;
    return cpd_als(t, rank, c);
  });
}

TuckerFactors hosvd(const DenseTensor& t, std::span<const std::size_t> mlrank) {
  if (mlrank.size() != t.order())
    throw InvalidArgument("hosvd: multilinear rank needs " + std::to_string(t.order()) +
                          " entries, got " + std::to_string(mlrank.size()));
  std::vector<Matrix> factors;
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (mlrank[n] < 1 || mlrank[n] > t.extent(n))
      throw InvalidArgument("hosvd: rank " + std::to_string(mlrank[n]) + " out of range for mode " +
                            std::to_string(n) + " of extent " + std::to_string(t.extent(n)));
    const SvdResult d = svd(unfold(t, n));
    Matrix a(t.extent(n), std::min(mlrank[n], d.u.cols()));
    for (std::size_t j = 0; j < a.cols(); ++j)
      std::copy(d.u.col(j).begin(), d.u.col(j).end(), a.col(j).begin());
    // A tall unfolding has fewer singular vectors than rows.
    factors.push_back(a.cols() < mlrank[n] ? orthonormal_extend(a, mlrank[n]) : std::move(a));
  }
  DenseTensor core = t;
  for (std::size_t n = 0; n < t.order(); ++n) core = mode_n_product(core, transpose(factors[n]), n);
  return TuckerFactors{std::move(core), std::move(factors)};
}

}  // namespace tdcif
