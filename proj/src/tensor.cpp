#include "tdcif/tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "tdcif/error.hpp"
#include "tdcif/kernels.hpp"

namespace tdcif {

namespace {

std::string shape_str(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(what) + ": matrix shapes differ");
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw InvalidArgument(std::string(what) + ": tensor shapes " + shape_str(a.shape()) +
                          " and " + shape_str(b.shape()) + " differ");
}

// Extents before and after `mode`, as used by the (left, mode, right) view.
std::pair<std::size_t, std::size_t> split_extents(const Shape& shape, std::size_t mode) {
  std::size_t left = 1, right = 1;
  for (std::size_t m = 0; m < mode; ++m) left *= shape[m];
  for (std::size_t m = mode + 1; m < shape.size(); ++m) right *= shape[m];
  return {left, right};
}

}  // namespace

// --- Matrix ------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw InvalidArgument("Matrix: data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(rows_) + "x" +
                          std::to_string(cols_));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidArgument("Matrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector Matrix::col_vector(std::size_t c) const {
  auto s = col(c);
  return Vector(s.begin(), s.end());
}

Vector Matrix::row_vector(std::size_t r) const {
  Vector v(cols_);
  for (std::size_t c = 0; c < cols_; ++c) v[c] = (*this)(r, c);
  return v;
}

// --- DenseTensor -------------------------------------------------------------

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void validate_shape(std::span<const std::size_t> shape) {
  if (shape.empty() || shape.size() > kMaxOrder)
    throw InvalidArgument("tensor order must be between 1 and " + std::to_string(kMaxOrder) +
                          ", got " + std::to_string(shape.size()));
  for (std::size_t e : shape)
    if (e == 0) throw InvalidArgument("tensor extents must be positive: " + shape_str(shape));
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_size(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_size(shape_))
    throw InvalidArgument("DenseTensor: " + std::to_string(data_.size()) +
                          " values for shape " + shape_str(shape_));
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size())
    throw InvalidArgument("tensor index has " + std::to_string(index.size()) +
                          " entries, order is " + std::to_string(shape_.size()));
  std::size_t off = 0;
  for (std::size_t m = shape_.size(); m-- > 0;) {
    if (index[m] >= shape_[m]) throw InvalidArgument("tensor index out of range");
    off = off * shape_[m] + index[m];
  }
  return off;
}

// --- multilinear primitives ----------------------------------------------------

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order())
    throw InvalidArgument("unfold: mode " + std::to_string(mode) + " out of range for order " +
                          std::to_string(t.order()));
  const std::size_t rows = t.extent(mode);
  const std::size_t cols = t.size() / rows;
  const auto [left, right] = split_extents(t.shape(), mode);
  // Column index = l + left * rr for the (left, mode, right) view.
  std::vector<double> out(t.size());
  auto src = t.data();
  for (std::size_t rr = 0; rr < right; ++rr)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t l = 0; l < left; ++l)
        out[i + rows * (l + left * rr)] = src[l + left * (i + rows * rr)];
  return Matrix(rows, cols, std::move(out));
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
  validate_shape(shape);
  if (mode >= shape.size()) throw InvalidArgument("fold: mode out of range");
  if (m.rows() != shape[mode] || m.size() != shape_size(shape))
    throw InvalidArgument("fold: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          " matrix is inconsistent with shape " + shape_str(shape) +
                          " along mode " + std::to_string(mode));
  const std::size_t rows = shape[mode];
  const auto [left, right] = split_extents(shape, mode);
  std::vector<double> out(m.size());
  auto src = m.data();
  for (std::size_t rr = 0; rr < right; ++rr)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t l = 0; l < left; ++l)
        out[l + left * (i + rows * rr)] = src[i + rows * (l + left * rr)];
  return DenseTensor(shape, std::move(out));
}

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& a, std::size_t mode) {
  if (mode >= t.order()) throw InvalidArgument("mode_n_product: mode out of range");
  if (a.cols() != t.extent(mode))
    throw InvalidArgument("mode_n_product: matrix has " + std::to_string(a.cols()) +
                          " columns, tensor extent is " + std::to_string(t.extent(mode)));
  if (a.rows() == 0) throw InvalidArgument("mode_n_product: matrix has no rows");
  const auto [left, right] = split_extents(t.shape(), mode);
  Shape shape = t.shape();
  shape[mode] = a.rows();
  std::vector<double> out(shape_size(shape));
  kernels::parallel::mode_product(left, t.extent(mode), right, a.rows(), a.data(), t.data(), out);
  return DenseTensor(std::move(shape), std::move(out));
}

DenseTensor outer_product(std::span<const Vector> vs) {
  if (vs.size() < 2) throw InvalidArgument("outer_product: needs at least two vectors");
  Shape shape;
  for (const auto& v : vs) {
    if (v.empty()) throw InvalidArgument("outer_product: empty vector");
    shape.push_back(v.size());
  }
  validate_shape(shape);
  std::vector<double> out{1.0};
  // Grow one mode at a time; earlier modes stay fastest.
  for (const auto& v : vs) {
    std::vector<double> next(out.size() * v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      for (std::size_t i = 0; i < out.size(); ++i) next[i + out.size() * j] = out[i] * v[j];
    out = std::move(next);
  }
  return DenseTensor(std::move(shape), std::move(out));
}

DenseTensor outer_product(std::initializer_list<Vector> vs) {
  return outer_product(std::span<const Vector>(vs.begin(), vs.size()));
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw InvalidArgument("khatri_rao: column counts " + std::to_string(a.cols()) + " and " +
                          std::to_string(b.cols()) + " differ");
  Matrix out(a.rows() * b.rows(), a.cols());
  kernels::parallel::khatri_rao(a.rows(), b.rows(), a.cols(), a.data(), b.data(), out.data());
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

Matrix frontal_slice(const DenseTensor& t, std::size_t q) {
  if (t.order() != 3) throw InvalidArgument("frontal_slice: tensor must be of order 3");
  if (q >= t.extent(2)) throw InvalidArgument("frontal_slice: index out of range");
  const std::size_t n = t.extent(0) * t.extent(1);
  auto src = t.data().subspan(n * q, n);
  return Matrix(t.extent(0), t.extent(1), std::vector<double>(src.begin(), src.end()));
}

DenseTensor stack_frontal(std::span<const Matrix> slices) {
  if (slices.empty()) throw InvalidArgument("stack_frontal: no slices");
  const std::size_t r = slices[0].rows(), c = slices[0].cols();
  std::vector<double> out;
  out.reserve(r * c * slices.size());
  for (const auto& s : slices) {
    if (s.rows() != r || s.cols() != c)
      throw InvalidArgument("stack_frontal: slices differ in size");
    out.insert(out.end(), s.data().begin(), s.data().end());
  }
  return DenseTensor({r, c, slices.size()}, std::move(out));
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_frobenius(const DenseTensor& t) { return norm2(t.data()); }
double norm_frobenius(const Matrix& m) { return norm2(m.data()); }

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return DenseTensor(a.shape(), std::move(out));
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "subtract");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return DenseTensor(a.shape(), std::move(out));
}

DenseTensor scale(const DenseTensor& t, double s) {
  std::vector<double> out(t.data().begin(), t.data().end());
  for (double& x : out) x *= s;
  return DenseTensor(t.shape(), std::move(out));
}

// --- matrices ------------------------------------------------------------------

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out(j, i) = m(i, j);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw InvalidArgument("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                          std::to_string(b.rows()) + " differ");
  Matrix out(a.rows(), b.cols());
  kernels::parallel::gemm(a.rows(), b.cols(), a.cols(), a.data(), b.data(), out.data());
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("matmul_tn: row counts differ");
  Matrix out(a.cols(), b.cols());
  kernels::parallel::gemm_tn(a.cols(), b.cols(), a.rows(), a.data(), b.data(), out.data());
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += a(i, j) * xj;
  }
  return y;
}

Vector matvec_t(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw InvalidArgument("matvec_t: dimension mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& m, double s) {
  Matrix out = m;
  for (double& x : out.data()) x *= s;
  return out;
}

Matrix scale_columns(const Matrix& m, std::span<const double> d) {
  if (d.size() != m.cols()) throw InvalidArgument("scale_columns: length mismatch");
  Matrix out = m;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (double& x : out.col(j)) x *= d[j];
  return out;
}

DenseTensor as_tensor(const Matrix& m) {
  return DenseTensor({m.rows(), m.cols()}, std::vector<double>(m.data().begin(), m.data().end()));
}

DenseTensor as_tensor(std::span<const double> v) {
  return DenseTensor({v.size()}, std::vector<double>(v.begin(), v.end()));
}

Matrix as_matrix(const DenseTensor& t) {
  std::vector<double> d(t.data().begin(), t.data().end());
  if (t.order() == 1) return Matrix(t.extent(0), 1, std::move(d));
  if (t.order() == 2) return Matrix(t.extent(0), t.extent(1), std::move(d));
  throw InvalidArgument("as_matrix: tensor of order " + std::to_string(t.order()));
}

}  // namespace tdcif
