#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "polynl/io.hpp"
#include "polynl/kernels.hpp"
#include "polynl/matrix.hpp"
#include "polynl/rng.hpp"

using namespace polynl;

namespace {

Matrix<double> rand_mat(Rng& rng, std::size_t r, std::size_t c) {
  Matrix<double> m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

// independent triple-loop reference, i,j,k order
Matrix<double> matmul_ref(const Matrix<double>& a, const Matrix<double>& b) {
  Matrix<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k)
        c(i, j) += a(i, k) * b(k, j);
  return c;
}

}  // namespace

TEST_CASE("matrix construction and invariants") {
  Matrix<double> m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  CHECK(m(1, 2) == 0.0);

  CHECK_THROWS_AS(Matrix<double>(2, 3, {1.0, 2.0}), ShapeError);

  Matrix<double> bad(1, 2, {1.0, std::nan("")});
  CHECK(!bad.all_finite());
  CHECK_THROWS_AS(bad.require_finite("test"), NumericError);
}

TEST_CASE("fold and unfold") {
  // single position
  Matrix<double> one = fold<double>({1.0, 2.0, 3.0}, 1, 1, 3);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 3);
  CHECK(one(0, 2) == 3.0);

  // 2x2x1 row-major enumeration
  Matrix<double> col = fold<double>({1, 2, 3, 4}, 2, 2, 1);
  CHECK(col.rows() == 4);
  CHECK(col.cols() == 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(col(i, 0) == double(i + 1));

  // row n = h*W + w holds the channel vector at (h, w)
  Rng rng(7);
  const std::size_t h = 2, w = 3, c = 2;
  std::vector<double> block(h * w * c);
  for (double& v : block) v = rng.uniform(-1, 1);
  Matrix<double> folded = fold(block, h, w, c);
  for (std::size_t hi = 0; hi < h; ++hi)
    for (std::size_t wi = 0; wi < w; ++wi)
      for (std::size_t ci = 0; ci < c; ++ci)
        CHECK(folded(hi * w + wi, ci) == block[(hi * w + wi) * c + ci]);

  CHECK_THROWS_AS(fold<double>({}, 0, 1, 1), ShapeError);
  CHECK_THROWS_AS(fold<double>({1.0}, 1, 1, 2), ShapeError);
  CHECK_THROWS_AS(unfold(folded, 5, 1), ShapeError);
}

TEST_CASE("fold/unfold round-trip exact for all H,W,C <= 8") {
  Rng rng(11);
  for (std::size_t h = 1; h <= 8; ++h)
    for (std::size_t w = 1; w <= 8; ++w)
      for (std::size_t c = 1; c <= 8; ++c) {
        std::vector<double> block(h * w * c);
        for (double& v : block) v = rng.uniform(-10, 10);
        CHECK(unfold(fold(block, h, w, c), h, w) == block);
      }
  // and the matrix-side identity: fold(unfold(X)) == X
  Matrix<double> x = rand_mat(rng, 15, 4);
  Matrix<double> back = fold(unfold(x, 3, 5), 3, 5, 4);
  CHECK(max_abs_diff(x, back) == 0.0);
}

TEST_CASE("matmul basics") {
  Matrix<double> b(2, 2, {5, 6, 7, 8});
  Matrix<double> prod = matmul(Matrix<double>::identity(2), b);
  CHECK(max_abs_diff(prod, b) == 0.0);

  Matrix<double> r = matmul(Matrix<double>(1, 2, {1, 2}), Matrix<double>(2, 1, {3, 4}));
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 1);
  CHECK(r(0, 0) == 11.0);

  CHECK_THROWS_AS(matmul(Matrix<double>(2, 3), Matrix<double>(2, 3)), ShapeError);
}

TEST_CASE("matmul against triple-loop reference") {
  Rng rng(3);
  Matrix<double> a = rand_mat(rng, 7, 3);
  Matrix<double> b = rand_mat(rng, 3, 5);
  Matrix<double> got = matmul(a, b);
  Matrix<double> ref = matmul_ref(a, b);
  CHECK(rel_fro_diff(got, ref) <= 1e-12);
}

TEST_CASE("matmul associativity within tolerance") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t m = 1 + rng.index(32), k = 1 + rng.index(32),
                      p = 1 + rng.index(32), q = 1 + rng.index(32);
    Matrix<double> a = rand_mat(rng, m, k);
    Matrix<double> b = rand_mat(rng, k, p);
    Matrix<double> c = rand_mat(rng, p, q);
    Matrix<double> lhs = matmul(matmul(a, b), c);
    Matrix<double> rhs = matmul(a, matmul(b, c));
    CHECK(rel_fro_diff(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("transpose involution is exact") {
  Rng rng(5);
  Matrix<double> x = rand_mat(rng, 6, 9);
  CHECK(max_abs_diff(transpose(transpose(x)), x) == 0.0);
}

TEST_CASE("hadamard") {
  Rng rng(9);
  Matrix<double> a = rand_mat(rng, 4, 4);
  Matrix<double> ones(4, 4);
  for (std::size_t i = 0; i < ones.size(); ++i) ones.data()[i] = 1.0;
  CHECK(max_abs_diff(hadamard(a, ones), a) == 0.0);

  Matrix<double> m(2, 2, {1, 2, 3, 4});
  Matrix<double> mask(2, 2, {0, 1, 1, 0});
  Matrix<double> masked = hadamard(m, mask);
  CHECK(masked(0, 0) == 0.0);
  CHECK(masked(0, 1) == 2.0);
  CHECK(masked(1, 0) == 3.0);
  CHECK(masked(1, 1) == 0.0);

  Matrix<double> b = rand_mat(rng, 4, 4);
  CHECK(max_abs_diff(hadamard(a, b), hadamard(b, a)) == 0.0);
  CHECK_THROWS_AS(hadamard(a, Matrix<double>(4, 3)), ShapeError);
}

TEST_CASE("pool_expand") {
  Matrix<double> x(2, 2, {2, 4, 4, 8});
  Matrix<double> p = pool_expand(x);
  CHECK(p(0, 0) == 3.0);
  CHECK(p(0, 1) == 6.0);
  CHECK(p(1, 0) == 3.0);
  CHECK(p(1, 1) == 6.0);

  // N=1 input unchanged
  Matrix<double> single(1, 3, {1.5, -2.0, 0.25});
  CHECK(max_abs_diff(pool_expand(single), single) == 0.0);

  // rows of the output are identical, exactly
  Rng rng(21);
  Matrix<double> y = pool_expand(rand_mat(rng, 6, 3));
  for (std::size_t i = 1; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) CHECK(y(i, j) == y(0, j));

  // idempotence
  Matrix<double> z = rand_mat(rng, 6, 3);
  CHECK(rel_fro_diff(pool_expand(pool_expand(z)), pool_expand(z)) <= 1e-14);
}

TEST_CASE("parallel lane is bitwise identical to serial") {
  Rng rng(33);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t m = 1 + rng.index(37), k = 1 + rng.index(29),
                      p = 1 + rng.index(41);
    Matrix<double> a = rand_mat(rng, m, k);
    Matrix<double> b = rand_mat(rng, k, p);
    CHECK(max_abs_diff(matmul(a, b, Exec::parallel), matmul(a, b)) == 0.0);

    Matrix<double> c = rand_mat(rng, m, k);
    CHECK(max_abs_diff(hadamard(a, c, Exec::parallel), hadamard(a, c)) == 0.0);
    CHECK(max_abs_diff(add(a, c, Exec::parallel), add(a, c)) == 0.0);
    CHECK(max_abs_diff(axpby(2.5, a, -0.5, c, Exec::parallel),
                       axpby(2.5, a, -0.5, c)) == 0.0);
    CHECK(max_abs_diff(pool_expand(a, Exec::parallel), pool_expand(a)) == 0.0);
    CHECK(max_abs_diff(transpose(a, Exec::parallel), transpose(a)) == 0.0);
  }
}

TEST_CASE("matrix text format round-trips at full precision") {
  Rng rng(13);
  Matrix<double> x = rand_mat(rng, 5, 7);
  x(0, 0) = 1.0 / 3.0;
  x(1, 1) = -1e-300;
  x(2, 2) = 12345678.987654321;
  std::stringstream ss;
  write_matrix(ss, x);
  Matrix<double> back = read_matrix(ss);
  CHECK(back.rows() == x.rows());
  CHECK(back.cols() == x.cols());
  CHECK(max_abs_diff(back, x) == 0.0);

  std::stringstream bad("2 2\n1 2 3");
  CHECK_THROWS_AS(read_matrix(bad), ShapeError);
}

TEST_CASE("instrumentation counts kernel flops and peak buffer") {
  Rng rng(19);
  Matrix<double> a = rand_mat(rng, 6, 4);
  Matrix<double> b = rand_mat(rng, 4, 5);
  instrument::Scope scope;
  Matrix<double> c = matmul(a, b);
  CHECK(scope.counters().flops == 2ull * 6 * 4 * 5);
  CHECK(scope.counters().peak_elems == 30);  // the 6x5 product
}
