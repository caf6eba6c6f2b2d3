#include "polynl/oracle.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "polynl/errors.hpp"
#include "polynl/io.hpp"

namespace polynl {

Tensor Tensor::zeros(std::vector<std::size_t> dims) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw ShapeError("Tensor: zero-sized dimension");
    total *= d;
  }
  Tensor t;
  t.dims = std::move(dims);
  t.data.assign(total, 0.0);
  return t;
}

Tensor double_dot(const Tensor& w, const Matrix<double>& x) {
  if (w.order() < 2) throw ShapeError("double_dot: tensor order below 2");
  const std::size_t r = w.dims[w.order() - 2];
  const std::size_t c = w.dims[w.order() - 1];
  if (r != x.rows() || c != x.cols())
    throw ShapeError("double_dot: trailing dims (" + std::to_string(r) + "x" +
                     std::to_string(c) + ") do not match matrix (" +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     ")");
  Tensor out = Tensor::zeros(
      std::vector<std::size_t>(w.dims.begin(), w.dims.end() - 2));
  const std::size_t inner = r * c;
  for (std::size_t lead = 0; lead < out.size(); ++lead) {
    const double* slab = w.data.data() + lead * inner;
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) acc += slab[i * c + j] * x(i, j);
    out.data[lead] = acc;
  }
  return out;
}

Matrix<double> tensor_to_matrix(const Tensor& t) {
  if (t.order() != 2) throw ShapeError("tensor_to_matrix: order is not 2");
  return Matrix<double>(t.dims[0], t.dims[1], std::vector<double>(t.data));
}

InteractionTensor3::InteractionTensor3(std::size_t n_in, std::size_t c_in,
                                       std::size_t cap)
    : n(n_in), c(c_in) {
  if (n == 0 || c == 0) throw ShapeError("InteractionTensor3: zero dimension");
  if (n * c > cap)
    throw CapacityError("InteractionTensor3: N*C = " + std::to_string(n * c) +
                        " exceeds cap " + std::to_string(cap) +
                        " ((N*C)^4 scalars would be required)");
  const std::size_t nc = n * c;
  data.assign(nc * nc * nc * nc, 0.0);
}

Tensor InteractionTensor3::to_tensor() const {
  Tensor t = Tensor::zeros({n, c, n, c, n, c, n, c});
  t.data = data;
  return t;
}

std::size_t InteractionTensor3::nonzero_count() const {
  std::size_t k = 0;
  for (double v : data)
    if (v != 0.0) ++k;
  return k;
}

static void check_poly3_shapes(const InteractionTensor3& w3,
                               const Matrix<double>& x, const char* what) {
  if (x.rows() != w3.n || x.cols() != w3.c)
    throw ShapeError(std::string(what) + ": feature map " +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     " does not match tensor dims " + std::to_string(w3.n) +
                     "x" + std::to_string(w3.c));
}

Matrix<double> poly3_forward(const InteractionTensor3& w3,
                             const Matrix<double>& x) {
  check_poly3_shapes(w3, x, "poly3_forward");
  Tensor t = double_dot(double_dot(double_dot(w3.to_tensor(), x), x), x);
  return tensor_to_matrix(t);
}

Matrix<double> poly3_elementwise(const InteractionTensor3& w3,
                                 const Matrix<double>& x) {
  check_poly3_shapes(w3, x, "poly3_elementwise");
  return poly3_trilinear(w3, x, x, x);
}

Matrix<double> poly3_trilinear(const InteractionTensor3& w3,
                               const Matrix<double>& x1,
                               const Matrix<double>& x2,
                               const Matrix<double>& x3) {
  check_poly3_shapes(w3, x1, "poly3_trilinear");
  check_poly3_shapes(w3, x2, "poly3_trilinear");
  check_poly3_shapes(w3, x3, "poly3_trilinear");
  const std::size_t n = w3.n, c = w3.c;
  Matrix<double> y(n, c);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < c; ++b) {
      double acc = 0.0;
      for (std::size_t cc = 0; cc < n; ++cc)
        for (std::size_t e = 0; e < n; ++e)
          for (std::size_t g = 0; g < n; ++g)
            for (std::size_t d = 0; d < c; ++d)
              for (std::size_t f = 0; f < c; ++f)
                for (std::size_t h = 0; h < c; ++h)
                  acc += w3.at(a, b, cc, d, e, f, g, h) * x1(cc, d) *
                         x2(e, f) * x3(g, h);
      y(a, b) = acc;
    }
  return y;
}

InteractionTensor3 build_w3_nl(const Matrix<double>& wf,
                               const Matrix<double>& wg, std::size_t n,
                               std::size_t cap) {
  if (wf.rows() != wf.cols() || wg.rows() != wg.cols() ||
      wf.rows() != wg.rows())
    throw ShapeError("build_w3_nl: weights must be square with a shared dim");
  const std::size_t c = wf.rows();
  InteractionTensor3 w3(n, c, cap);
  // Only the delta slots c==a, g==e are populated: N^2 * C^4 entries.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < c; ++b)
      for (std::size_t d = 0; d < c; ++d)
        for (std::size_t e = 0; e < n; ++e)
          for (std::size_t f = 0; f < c; ++f)
            for (std::size_t h = 0; h < c; ++h)
              w3.at(a, b, a, d, e, f, e, h) = wf(d, f) * wg(h, b);
  return w3;
}

InteractionTensor3 build_w3_polynl(const Matrix<double>& w1,
                                   const Matrix<double>& w2,
                                   const Matrix<double>& w3m, std::size_t n,
                                   std::size_t cap) {
  if (w1.rows() != w1.cols() || w2.rows() != w2.cols() ||
      w3m.rows() != w3m.cols() || w1.rows() != w2.rows() ||
      w1.rows() != w3m.rows())
    throw ShapeError("build_w3_polynl: weights must be square with a shared dim");
  const std::size_t c = w1.rows();
  InteractionTensor3 w3(n, c, cap);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < c; ++b)
      for (std::size_t d = 0; d < c; ++d)
        for (std::size_t e = 0; e < n; ++e)
          for (std::size_t f = 0; f < c; ++f)
            for (std::size_t h = 0; h < c; ++h)
              w3.at(a, b, a, d, e, f, e, h) =
                  inv_n * w1(h, d) * w2(f, d) * w3m(d, b);
  return w3;
}

Matrix<double> nl_elementwise(const Matrix<double>& wf,
                              const Matrix<double>& wg,
                              const Matrix<double>& x) {
  if (wf.rows() != wf.cols() || wg.rows() != wg.cols() ||
      wf.rows() != wg.rows() || x.cols() != wf.rows())
    throw ShapeError("nl_elementwise: dim mismatch");
  const std::size_t n = x.rows(), c = x.cols();
  Matrix<double> y(n, c);
  // y[a,b] = sum_{d,f,h} sum_e wf[d,f] * wg[h,b] * x[a,d] * x[e,f] * x[e,h]
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < c; ++b) {
      double acc = 0.0;
      for (std::size_t d = 0; d < c; ++d)
        for (std::size_t f = 0; f < c; ++f)
          for (std::size_t h = 0; h < c; ++h)
            for (std::size_t e = 0; e < n; ++e)
              acc += wf(d, f) * wg(h, b) * x(a, d) * x(e, f) * x(e, h);
      y(a, b) = acc;
    }
  return y;
}

Matrix<double> polynl_elementwise(const Matrix<double>& w1,
                                  const Matrix<double>& w2,
                                  const Matrix<double>& w3m,
                                  const Matrix<double>& x) {
  if (w1.rows() != w1.cols() || w2.rows() != w2.cols() ||
      w3m.rows() != w3m.cols() || w1.rows() != w2.rows() ||
      w1.rows() != w3m.rows() || x.cols() != w1.rows())
    throw ShapeError("polynl_elementwise: dim mismatch");
  const std::size_t n = x.rows(), c = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix<double> y(n, c);
  // y[a,b] = sum_{d,f,h} sum_e (1/N) * w1[h,d] * w2[f,d] * w3m[d,b]
  //          * x[a,d] * x[e,f] * x[e,h]
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < c; ++b) {
      double acc = 0.0;
      for (std::size_t d = 0; d < c; ++d)
        for (std::size_t f = 0; f < c; ++f)
          for (std::size_t h = 0; h < c; ++h)
            for (std::size_t e = 0; e < n; ++e)
              acc += inv_n * w1(h, d) * w2(f, d) * w3m(d, b) * x(a, d) *
                     x(e, f) * x(e, h);
      y(a, b) = acc;
    }
  return y;
}

void dump_w3(std::ostream& os, const InteractionTensor3& w3) {
  os << w3.n << ' ' << w3.c << '\n';
  for (double v : w3.data) os << format_full(v) << '\n';
}

InteractionTensor3 load_w3(std::istream& is, std::size_t cap) {
  std::size_t n = 0, c = 0;
  if (!(is >> n >> c)) throw ShapeError("load_w3: malformed header");
  InteractionTensor3 w3(n, c, cap);
  for (double& v : w3.data)
    if (!(is >> v)) throw ShapeError("load_w3: truncated data");
  return w3;
}

}  // namespace polynl
