#include "kernel_bodies.hpp"
#include "tdcif/kernels.hpp"

namespace tdcif::kernels::serial {

void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
          std::span<const double> b, std::span<double> c) {
  for (std::size_t j = 0; j < n; ++j) detail::gemm_col(m, k, a.data(), b.data(), c.data(), j);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t j = 0; j < n; ++j) detail::gemm_tn_col(m, k, a.data(), b.data(), c.data(), j);
}

void mode_product(std::size_t left, std::size_t in, std::size_t right, std::size_t out,
                  std::span<const double> a, std::span<const double> x, std::span<double> y) {
  const std::size_t units = right * out;
  for (std::size_t u = 0; u < units; ++u)
    detail::mode_product_unit(left, in, out, a.data(), x.data(), y.data(), u);
}

void khatri_rao(std::size_t ra, std::size_t rb, std::size_t n, std::span<const double> a,
                std::span<const double> b, std::span<double> out) {
  for (std::size_t j = 0; j < n; ++j)
    detail::khatri_rao_col(ra, rb, a.data(), b.data(), out.data(), j);
}

void mttkrp3(std::size_t i0, std::size_t i1, std::size_t i2, std::span<const double> x,
             std::size_t mode, std::size_t r, std::span<const double> f0,
             std::span<const double> f1, std::span<const double> f2, std::span<double> out) {
  const std::size_t rows = mode == 0 ? i0 : (mode == 1 ? i1 : i2);
  const std::size_t blocks = detail::row_blocks(rows);
  for (std::size_t b = 0; b < blocks; ++b)
    detail::mttkrp3_block(i0, i1, i2, x.data(), mode, r, f0.data(), f1.data(), f2.data(),
                          out.data(), b);
}

void slice_mix(std::size_t op, std::size_t q, std::size_t nk, std::span<const double> slices,
               std::span<const double> mix, std::span<double> out) {
  for (std::size_t s = 0; s < q; ++s)
    detail::slice_mix_slice(op, q, nk, slices.data(), mix.data(), out.data(), s);
}

void pairwise_sq_dist(std::size_t d, std::size_t nt, std::size_t nr, std::span<const double> t,
                      std::span<const double> r, std::span<double> out) {
  for (std::size_t i = 0; i < nt; ++i)
    detail::sq_dist_row(d, nt, nr, t.data(), r.data(), out.data(), i);
}

}  // namespace tdcif::kernels::serial
