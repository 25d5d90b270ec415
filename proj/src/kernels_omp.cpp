#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernel_bodies.hpp"
#include "tdcif/kernels.hpp"

namespace tdcif::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

namespace {
using Index = std::ptrdiff_t;
inline Index as_index(std::size_t n) { return static_cast<Index>(n); }
}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
          std::span<const double> b, std::span<double> c) {
  const Index units = as_index(n);
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index j = 0; j < units; ++j)
    detail::gemm_col(m, k, a.data(), b.data(), c.data(), static_cast<std::size_t>(j));
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const Index units = as_index(n);
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index j = 0; j < units; ++j)
    detail::gemm_tn_col(m, k, a.data(), b.data(), c.data(), static_cast<std::size_t>(j));
}

void mode_product(std::size_t left, std::size_t in, std::size_t right, std::size_t out,
                  std::span<const double> a, std::span<const double> x, std::span<double> y) {
  const Index units = as_index(right * out);
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index u = 0; u < units; ++u)
    detail::mode_product_unit(left, in, out, a.data(), x.data(), y.data(),
                              static_cast<std::size_t>(u));
}

void khatri_rao(std::size_t ra, std::size_t rb, std::size_t n, std::span<const double> a,
                std::span<const double> b, std::span<double> out) {
  const Index units = as_index(n);
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index j = 0; j < units; ++j)
    detail::khatri_rao_col(ra, rb, a.data(), b.data(), out.data(), static_cast<std::size_t>(j));
}

void mttkrp3(std::size_t i0, std::size_t i1, std::size_t i2, std::span<const double> x,
             std::size_t mode, std::size_t r, std::span<const double> f0,
             std::span<const double> f1, std::span<const double> f2, std::span<double> out) {
  const std::size_t rows = mode == 0 ? i0 : (mode == 1 ? i1 : i2);
  const Index units = as_index(detail::row_blocks(rows));
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index b = 0; b < units; ++b)
    detail::mttkrp3_block(i0, i1, i2, x.data(), mode, r, f0.data(), f1.data(), f2.data(),
                          out.data(), static_cast<std::size_t>(b));
}

void slice_mix(std::size_t op, std::size_t q, std::size_t nk, std::span<const double> slices,
               std::span<const double> mix, std::span<double> out) {
  const Index units = as_index(q);
#pragma omp parallel for schedule(static) if (units > 1)
  for (Index s = 0; s < units; ++s)
    detail::slice_mix_slice(op, q, nk, slices.data(), mix.data(), out.data(),
                            static_cast<std::size_t>(s));
}

void pairwise_sq_dist(std::size_t d, std::size_t nt, std::size_t nr, std::span<const double> t,
                      std::span<const double> r, std::span<double> out) {
  const Index units = as_index(nt);
#pragma omp parallel for schedule(dynamic, 4) if (units > 1)
  for (Index i = 0; i < units; ++i)
    detail::sq_dist_row(d, nt, nr, t.data(), r.data(), out.data(), static_cast<std::size_t>(i));
}

}  // namespace parallel
}  // namespace tdcif::kernels
