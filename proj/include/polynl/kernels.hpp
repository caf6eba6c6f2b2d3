#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polynl/errors.hpp"
#include "polynl/instrument.hpp"
#include "polynl/matrix.hpp"

namespace polynl {

// Execution lane for the dense kernels. The parallel lane splits work only
// across independent output elements and keeps every per-element reduction
// in the same fixed order as the serial lane, so the two lanes produce
// bitwise-identical results at any thread count. Verification code always
// runs the serial lane.
enum class Exec { serial, parallel };

// c = a * b with a fixed k-ascending accumulation per output element.
// 2*M*K*P flops.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b, Exec ex = Exec::serial) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree (" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " by " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  Matrix<T> out(a.rows(), b.cols());
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t kdim = a.cols();
  const std::size_t p = b.cols();
  const T* adat = a.data();
  const T* bdat = b.data();
  T* odat = out.data();
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < m; ++i) {
    T* orow = odat + static_cast<std::size_t>(i) * p;
    const T* arow = adat + static_cast<std::size_t>(i) * kdim;
    for (std::size_t k = 0; k < kdim; ++k) {
      const T aik = arow[k];
      const T* brow = bdat + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  instrument::note_flops(2ULL * a.rows() * a.cols() * b.cols());
  return out;
}

// Materializes the transpose (no views). 0 flops.
template <typename T>
Matrix<T> transpose(const Matrix<T>& a, Exec ex = Exec::serial) {
  Matrix<T> out(a.cols(), a.rows());
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(j, static_cast<std::size_t>(i)) = a(static_cast<std::size_t>(i), j);
  return out;
}

// Element-wise product. M*P flops.
template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b, Exec ex = Exec::serial) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("hadamard: shape mismatch (" + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                     ")");
  Matrix<T> out(a.rows(), a.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const T* adat = a.data();
  const T* bdat = b.data();
  T* odat = out.data();
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i) odat[i] = adat[i] * bdat[i];
  instrument::note_flops(static_cast<std::uint64_t>(a.size()));
  return out;
}

// a + b. M*P flops.
template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b, Exec ex = Exec::serial) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("add: shape mismatch");
  Matrix<T> out(a.rows(), a.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const T* adat = a.data();
  const T* bdat = b.data();
  T* odat = out.data();
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i) odat[i] = adat[i] + bdat[i];
  instrument::note_flops(static_cast<std::uint64_t>(a.size()));
  return out;
}

// alpha*a + beta*b. 3*M*P flops.
template <typename T>
Matrix<T> axpby(T alpha, const Matrix<T>& a, T beta, const Matrix<T>& b,
                Exec ex = Exec::serial) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("axpby: shape mismatch");
  Matrix<T> out(a.rows(), a.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const T* adat = a.data();
  const T* bdat = b.data();
  T* odat = out.data();
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i) odat[i] = alpha * adat[i] + beta * bdat[i];
  instrument::note_flops(3ULL * a.size());
  return out;
}

// Spatial average pooling followed by expansion: every output row equals the
// column-wise mean of x. Column sums accumulate in row-ascending order in
// both lanes; each output element is the column sum times 1/N, one multiply
// per element. 2*N*C flops (N*C adds + N*C multiplies).
template <typename T>
Matrix<T> pool_expand(const Matrix<T>& x, Exec ex = Exec::serial) {
  const std::size_t n = x.rows();
  const std::size_t c = x.cols();
  Matrix<T> out(n, c);
  std::vector<T> col_sum(c, T(0));
  instrument::note_alloc(col_sum.size());
  if (ex == Exec::parallel) {
    const std::int64_t cc = static_cast<std::int64_t>(c);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < cc; ++j) {
      T s = T(0);
      for (std::size_t i = 0; i < n; ++i) s += x(i, static_cast<std::size_t>(j));
      col_sum[static_cast<std::size_t>(j)] = s;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) col_sum[j] += x(i, j);
  }
  const T inv_n = T(1) / static_cast<T>(n);
  const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
  for (std::int64_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out(static_cast<std::size_t>(i), j) = col_sum[j] * inv_n;
  instrument::note_flops(2ULL * n * c);
  return out;
}

// Frobenius inner product <a, b>, summed in index-ascending order.
template <typename T>
T inner(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("inner: shape mismatch");
  T s = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace polynl
