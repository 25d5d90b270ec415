#pragma once

// Data-parallel inner loops. Every kernel exists twice with the same
// signature: `serial` is the reference used by tests and `parallel` is the
// OpenMP version used by the library. Both evaluate each output element with
// the same operation order, so their results are bitwise identical.
//
// All matrices are column-major; leading dimension equals the row count.
// Output buffers are overwritten.

#include <cstddef>
#include <span>

namespace tdcif::kernels {

#define TDCIF_KERNEL_DECLS                                                                     \
  /* C (m x n) = A (m x k) * B (k x n) */                                                     \
  void gemm(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,           \
            std::span<const double> b, std::span<double> c);                                  \
  /* C (m x n) = A^T * B with A (k x m), B (k x n) */                                         \
  void gemm_tn(std::size_t m, std::size_t n, std::size_t k, std::span<const double> a,        \
               std::span<const double> b, std::span<double> c);                               \
  /* X viewed as (left, in, right); Y (left, out, right) = A (out x in) along the middle */   \
  void mode_product(std::size_t left, std::size_t in, std::size_t right, std::size_t out,     \
                    std::span<const double> a, std::span<const double> x, std::span<double> y); \
  /* column-wise Kronecker product, (ra*rb) x n */                                            \
  void khatri_rao(std::size_t ra, std::size_t rb, std::size_t n, std::span<const double> a,   \
                  std::span<const double> b, std::span<double> out);                          \
  /* order-3 MTTKRP: out (I_mode x r) = X_(mode) * KR of the other two factors */             \
  void mttkrp3(std::size_t i0, std::size_t i1, std::size_t i2, std::span<const double> x,     \
               std::size_t mode, std::size_t r, std::span<const double> f0,                   \
               std::span<const double> f1, std::span<const double> f2, std::span<double> out); \
  /* out (o x p x q) = sum_k slices[k] (o x p, stacked) o mix(:, k), mix is q x nk */        \
  void slice_mix(std::size_t op, std::size_t q, std::size_t nk, std::span<const double> slices, \
                 std::span<const double> mix, std::span<double> out);                         \
  /* D (nt x nr) squared Euclidean distances between columns of T (d x nt) and R (d x nr) */  \
  void pairwise_sq_dist(std::size_t d, std::size_t nt, std::size_t nr,                        \
                        std::span<const double> t, std::span<const double> r,                 \
                        std::span<double> out);

namespace serial {
TDCIF_KERNEL_DECLS
}  // namespace serial

namespace parallel {
TDCIF_KERNEL_DECLS
}  // namespace parallel

#undef TDCIF_KERNEL_DECLS

/// Number of OpenMP threads the parallel kernels may use (1 without OpenMP).
int max_threads();

}  // namespace tdcif::kernels
