#pragma once

// Dense matrices and N-way tensors.
//
// Layout: first index varies fastest (generalized column-major). Element
// (i_0, ..., i_{N-1}) of a tensor with extents (I_0, ..., I_{N-1}) lives at
//   i_0 + I_0 * (i_1 + I_1 * (i_2 + ...)).
// A matrix is the order-2 case: (r, c) lives at r + rows * c.
//
// The mode-n unfolding has rows indexed by i_n and columns ordered by the
// remaining modes in ascending order, the lowest remaining mode fastest.
// Modes are 0-based throughout the C++ API.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tdcif {

using Shape = std::vector<std::size_t>;
using Vector = std::vector<double>;

inline constexpr std::size_t kMaxOrder = 8;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  /// Row-wise literal, e.g. from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Single-column matrix holding `v`.
  static Matrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r + rows_ * c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r + rows_ * c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> col(std::size_t c) noexcept { return {data_.data() + rows_ * c, rows_}; }
  std::span<const double> col(std::size_t c) const noexcept {
    return {data_.data() + rows_ * c, rows_};
  }
  Vector col_vector(std::size_t c) const;
  Vector row_vector(std::size_t r) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Immutable N-way array of doubles. Every extent is at least 1 and the
/// order is between 1 and kMaxOrder.
class DenseTensor {
 public:
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }

  /// Flat position of a multi-index; throws on rank or range violations.
  std::size_t offset(std::span<const std::size_t> index) const;
  double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset({index.begin(), index.size()})];
  }
  /// Unchecked order-3 access.
  double at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[i + shape_[0] * (j + shape_[1] * k)];
  }

  bool operator==(const DenseTensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_size(std::span<const std::size_t> shape);
void validate_shape(std::span<const std::size_t> shape);

// --- multilinear primitives ----------------------------------------------

Matrix unfold(const DenseTensor& t, std::size_t mode);
DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

/// Y = X x_mode A, i.e. unfold(Y, mode) == A * unfold(X, mode).
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& a, std::size_t mode);

/// Rank-1 tensor v_0 o v_1 o ... ; needs at least two non-empty vectors.
DenseTensor outer_product(std::span<const Vector> vs);
DenseTensor outer_product(std::initializer_list<Vector> vs);

/// Column-wise Kronecker product; column j is a_j (x) b_j with b's index fastest.
Matrix khatri_rao(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// X(:, :, q) of an order-3 tensor.
Matrix frontal_slice(const DenseTensor& t, std::size_t q);
/// Stacks equally-sized matrices along a new third mode.
DenseTensor stack_frontal(std::span<const Matrix> slices);

double norm_frobenius(const DenseTensor& t);
double norm_frobenius(const Matrix& m);
double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(const DenseTensor& t, double s);

// --- dense matrix helpers --------------------------------------------------

Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
/// a^T * x.
Vector matvec_t(const Matrix& a, std::span<const double> x);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
/// m * diag(d)
Matrix scale_columns(const Matrix& m, std::span<const double> d);

/// Order-2 tensor with the same layout as `m`.
DenseTensor as_tensor(const Matrix& m);
/// Order-1 tensor.
DenseTensor as_tensor(std::span<const double> v);
/// Reads an order-1 or order-2 tensor back as a matrix (order 1 -> one column).
Matrix as_matrix(const DenseTensor& t);

}  // namespace tdcif
