#pragma once

#include <cstddef>
#include <span>

#include "tdcif/tensor.hpp"

namespace tdcif {

/// Thin SVD: m (r x c) = u * diag(s) * v^T with k = min(r, c) columns.
struct SvdResult {
  Matrix u;  // r x k, orthonormal columns
  Vector s;  // k values, descending, >= 0
  Matrix v;  // c x k, orthonormal columns
};

/// Thin QR of a tall matrix: q (r x c) with orthonormal columns, r upper
/// triangular with a non-negative diagonal.
struct QrResult {
  Matrix q;
  Matrix r;
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

/// One-sided Jacobi SVD. Throws NumericError on non-finite input or when the
/// sweep cap is exhausted.
SvdResult svd(const Matrix& m);

/// Default truncation: max(rows, cols) * eps * largest singular value.
double default_pinv_tolerance(const Matrix& m, std::span<const double> singular_values);

/// Moore-Penrose pseudoinverse; singular values <= tol are treated as zero.
/// A negative tol selects the default.
Matrix pinv(const Matrix& m, double tol = -1.0);

/// Householder QR; requires rows >= cols.
QrResult qr(const Matrix& m);

/// Appends orthonormal columns to `u` (orthonormal columns) until it has `cols`.
Matrix orthonormal_extend(const Matrix& u, std::size_t cols);

/// Orthonormal basis of the column space (singular values above `rel_tol`
/// times the largest one). May have zero columns.
Matrix orthonormal_basis(const Matrix& m, double rel_tol = 1e-10);

// --- non-negative least squares ---------------------------------------------

inline constexpr double kNnlsDualTolerance = 1e-10;

/// Lawson-Hanson active-set NNLS on the normal equations:
/// minimize 0.5 x^T G x - h^T x subject to x >= 0, where G = A^T A, h = A^T y.
/// The dual feasibility test uses kNnlsDualTolerance * max(1, |h|_inf).
/// Entries outside the final passive set are exactly zero. Throws
/// NumericError after 3 * n outer iterations.
Vector nnls_gram(const Matrix& gram, std::span<const double> rhs);

/// argmin_{x >= 0} |a x - y|_2
Vector nnls(const Matrix& a, std::span<const double> y);

/// Column j of the result solves nnls(a, ys.col(j)). Columns are solved
/// concurrently; the result does not depend on the thread count.
Matrix nnls_multi(const Matrix& a, const Matrix& ys);

}  // namespace tdcif
