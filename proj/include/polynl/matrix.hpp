#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "polynl/errors.hpp"
#include "polynl/instrument.hpp"

namespace polynl {

// Dense row-major matrix. Feature maps (N spatial positions x C channels),
// C x C weight matrices and every intermediate buffer use this one type;
// shape semantics live at the call sites. Transposition and reshapes always
// materialize a fresh buffer — no views — so the instrumented allocation
// registry sees every live intermediate.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  // zero-filled
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {
    instrument::note_alloc(data_.size());
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("matrix: data length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
    instrument::note_alloc(data_.size());
  }

  Matrix(const Matrix& other)
      : rows_(other.rows_), cols_(other.cols_), data_(other.data_) {
    instrument::note_alloc(data_.size());
  }

  Matrix& operator=(const Matrix& other) {
    if (this != &other) {
      rows_ = other.rows_;
      cols_ = other.cols_;
      data_ = other.data_;
      instrument::note_alloc(data_.size());
    }
    return *this;
  }

  Matrix(Matrix&&) noexcept = default;
  Matrix& operator=(Matrix&&) noexcept = default;

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  void require_finite(const std::string& what) const {
    if (!all_finite()) throw NumericError(what + ": non-finite value");
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Folds an H x W x C activation block (row-major h, w, c) into the N x C
// feature-map layout with N = H*W; row n = h*W + w holds the channel vector
// at spatial position (h, w). The memory layouts coincide, so this is a
// validated copy.
template <typename T>
Matrix<T> fold(const std::vector<T>& map3d, std::size_t h, std::size_t w,
               std::size_t c) {
  if (h == 0 || w == 0 || c == 0)
    throw ShapeError("fold: zero-sized dimension");
  if (map3d.size() != h * w * c)
    throw ShapeError("fold: data length " + std::to_string(map3d.size()) +
                     " does not match " + std::to_string(h) + "x" +
                     std::to_string(w) + "x" + std::to_string(c));
  Matrix<T> out(h * w, c, std::vector<T>(map3d));
  out.require_finite("fold");
  return out;
}

// Inverse of fold.
template <typename T>
std::vector<T> unfold(const Matrix<T>& x, std::size_t h, std::size_t w) {
  if (h * w != x.rows())
    throw ShapeError("unfold: H*W != rows (" + std::to_string(h * w) +
                     " vs " + std::to_string(x.rows()) + ")");
  return std::vector<T>(x.data(), x.data() + x.size());
}

template <typename T>
double frobenius_norm(const Matrix<T>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = static_cast<double>(a.data()[i]);
    s += v * v;
  }
  return std::sqrt(s);
}

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(static_cast<double>(a.data()[i]) -
                              static_cast<double>(b.data()[i]));
    if (d > m) m = d;
  }
  return m;
}

// ||a - b||_F / max(||a||_F, ||b||_F); 0 when both are zero.
template <typename T>
double rel_fro_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("rel_fro_diff: shape mismatch");
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) -
                     static_cast<double>(b.data()[i]);
    num += d * d;
  }
  const double denom = std::max(frobenius_norm(a), frobenius_norm(b));
  if (denom == 0.0) return 0.0;
  return std::sqrt(num) / denom;
}

// Row permutation: out row i = x row perm[i].
template <typename T>
Matrix<T> permute_rows(const Matrix<T>& x, const std::vector<std::size_t>& perm) {
  if (perm.size() != x.rows())
    throw ShapeError("permute_rows: permutation length mismatch");
  Matrix<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(perm[i], j);
  return out;
}

}  // namespace polynl
