#pragma once

// One unit of work per kernel. The serial and OpenMP translation units loop
// over the same units, which is what makes their outputs bitwise equal.

#include <algorithm>
#include <cstddef>
#include <span>

namespace tdcif::kernels::detail {

inline constexpr std::size_t kRowBlock = 64;

inline std::size_t row_blocks(std::size_t rows) { return (rows + kRowBlock - 1) / kRowBlock; }

// gemm: unit = output column j
inline void gemm_col(std::size_t m, std::size_t k, const double* a, const double* b,
                     double* c, std::size_t j) {
  double* cj = c + m * j;
  std::fill(cj, cj + m, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double bpj = b[p + k * j];
    const double* ap = a + m * p;
    for (std::size_t i = 0; i < m; ++i) cj[i] += ap[i] * bpj;
  }
}

// gemm_tn: unit = output column j
inline void gemm_tn_col(std::size_t m, std::size_t k, const double* a, const double* b,
                        double* c, std::size_t j) {
  const double* bj = b + k * j;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + k * i;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
    c[i + m * j] = s;
  }
}

// mode product: unit = (rr, r) flattened as rr * out + r
inline void mode_product_unit(std::size_t left, std::size_t in, std::size_t out,
                              const double* a, const double* x, double* y, std::size_t unit) {
  const std::size_t rr = unit / out;
  const std::size_t r = unit % out;
  double* yr = y + left * (r + out * rr);
  std::fill(yr, yr + left, 0.0);
  for (std::size_t i = 0; i < in; ++i) {
    const double w = a[r + out * i];
    const double* xi = x + left * (i + in * rr);
    for (std::size_t l = 0; l < left; ++l) yr[l] += w * xi[l];
  }
}

// khatri-rao: unit = column j
inline void khatri_rao_col(std::size_t ra, std::size_t rb, const double* a, const double* b,
                           double* out, std::size_t j) {
  const double* aj = a + ra * j;
  const double* bj = b + rb * j;
  double* oj = out + ra * rb * j;
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t p = 0; p < rb; ++p) oj[p + rb * i] = aj[i] * bj[p];
}

// mttkrp3: unit = block of kRowBlock output rows
inline void mttkrp3_block(std::size_t i0, std::size_t i1, std::size_t i2, const double* x,
                          std::size_t mode, std::size_t r, const double* f0, const double* f1,
                          const double* f2, double* out, std::size_t block) {
  const std::size_t rows = mode == 0 ? i0 : (mode == 1 ? i1 : i2);
  const std::size_t lo = block * kRowBlock;
  const std::size_t hi = std::min(rows, lo + kRowBlock);
  for (std::size_t l = 0; l < r; ++l) {
    double* ol = out + rows * l;
    if (mode == 0) {
      std::fill(ol + lo, ol + hi, 0.0);
      for (std::size_t q = 0; q < i2; ++q)
        for (std::size_t j = 0; j < i1; ++j) {
          const double w = f1[j + i1 * l] * f2[q + i2 * l];
          const double* xc = x + i0 * (j + i1 * q);
          for (std::size_t i = lo; i < hi; ++i) ol[i] += xc[i] * w;
        }
    } else if (mode == 1) {
      const double* a = f0 + i0 * l;
      for (std::size_t j = lo; j < hi; ++j) {
        double acc = 0.0;
        for (std::size_t q = 0; q < i2; ++q) {
          const double w = f2[q + i2 * l];
          const double* xc = x + i0 * (j + i1 * q);
          for (std::size_t i = 0; i < i0; ++i) acc += xc[i] * a[i] * w;
        }
        ol[j] = acc;
      }
    } else {
      const double* a = f0 + i0 * l;
      for (std::size_t q = lo; q < hi; ++q) {
        double acc = 0.0;
        for (std::size_t j = 0; j < i1; ++j) {
          const double w = f1[j + i1 * l];
          const double* xc = x + i0 * (j + i1 * q);
          for (std::size_t i = 0; i < i0; ++i) acc += xc[i] * a[i] * w;
        }
        ol[q] = acc;
      }
    }
  }
}

// slice_mix: unit = frontal slice q
inline void slice_mix_slice(std::size_t op, std::size_t q, std::size_t nk, const double* slices,
                            const double* mix, double* out, std::size_t s) {
  double* os = out + op * s;
  for (std::size_t e = 0; e < op; ++e) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nk; ++k) acc += slices[e + op * k] * mix[s + q * k];
    os[e] = acc;
  }
}

// pairwise distances: unit = test column t
inline void sq_dist_row(std::size_t d, std::size_t nt, std::size_t nr, const double* t,
                        const double* r, double* out, std::size_t ti) {
  const double* tc = t + d * ti;
  for (std::size_t j = 0; j < nr; ++j) {
    const double* rc = r + d * j;
    double s = 0.0;
    for (std::size_t e = 0; e < d; ++e) {
      const double diff = tc[e] - rc[e];
      s += diff * diff;
    }
    out[ti + nt * j] = s;
  }
}

}  // namespace tdcif::kernels::detail
