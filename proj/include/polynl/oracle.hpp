#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "polynl/matrix.hpp"

namespace polynl {

// Small dense row-major tensor of arbitrary order. Exists only to express
// the brute-force contraction path; nothing performance-sensitive lives here.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  static Tensor zeros(std::vector<std::size_t> dims);
  std::size_t order() const { return dims.size(); }
  std::size_t size() const { return data.size(); }
};

// Contraction of the trailing two indices of w against x:
//   y[i1..i_{k-2}] = sum_r sum_c w[i1..i_{k-2}, r, c] * x[r, c]
// Requires w's last two dims to equal x's shape. Result has order k-2.
Tensor double_dot(const Tensor& w, const Matrix<double>& x);

// Order-2 tensor to matrix.
Matrix<double> tensor_to_matrix(const Tensor& t);

// Dense order-8 interaction tensor, indexed (a,b,c,d,e,f,g,h) with
// a,c,e,g < N and b,d,f,h < C, row-major. Holds (N*C)^4 scalars, so
// construction refuses N*C above the cap.
struct InteractionTensor3 {
  static constexpr std::size_t kDefaultCap = 8;

  std::size_t n = 0;
  std::size_t c = 0;
  std::vector<double> data;

  InteractionTensor3(std::size_t n, std::size_t c,
                     std::size_t cap = kDefaultCap);

  std::size_t index(std::size_t a, std::size_t b, std::size_t cc,
                    std::size_t d, std::size_t e, std::size_t f,
                    std::size_t g, std::size_t h) const {
    return ((((((a * c + b) * n + cc) * c + d) * n + e) * c + f) * n + g) * c + h;
  }
  double& at(std::size_t a, std::size_t b, std::size_t cc, std::size_t d,
             std::size_t e, std::size_t f, std::size_t g, std::size_t h) {
    return data[index(a, b, cc, d, e, f, g, h)];
  }
  double at(std::size_t a, std::size_t b, std::size_t cc, std::size_t d,
            std::size_t e, std::size_t f, std::size_t g, std::size_t h) const {
    return data[index(a, b, cc, d, e, f, g, h)];
  }

  Tensor to_tensor() const;
  std::size_t nonzero_count() const;
};

// Y = ((W3 . X) . X) . X via three successive double-dot contractions.
Matrix<double> poly3_forward(const InteractionTensor3& w3,
                             const Matrix<double>& x);

// Root oracle: the literal eight-nested-loop summation
//   y[a,b] = sum_{c,e,g < N} sum_{d,f,h < C} w3[a,b,c,d,e,f,g,h]
//            * x[c,d] * x[e,f] * x[g,h]
// Kept naive by policy; every fast path is checked against it.
Matrix<double> poly3_elementwise(const InteractionTensor3& w3,
                                 const Matrix<double>& x);

// Generalized evaluator with three independent inputs in the three slots;
// poly3_elementwise(w3, x) == poly3_trilinear(w3, x, x, x).
Matrix<double> poly3_trilinear(const InteractionTensor3& w3,
                               const Matrix<double>& x1,
                               const Matrix<double>& x2,
                               const Matrix<double>& x3);

// W3 instance of the non-local block:
//   w3[a,b,c,d,e,f,g,h] = [c==a]*[g==e]*wf[d,f]*wg[h,b].
// Feeding it to poly3_elementwise reproduces nl_forward.
InteractionTensor3 build_w3_nl(const Matrix<double>& wf,
                               const Matrix<double>& wg, std::size_t n,
                               std::size_t cap = InteractionTensor3::kDefaultCap);

// W3 instance of Poly-NL (includes the 1/N pooling factor):
//   w3[a,b,c,d,e,f,g,h] = [c==a]*[g==e]*(1/N)*w1[h,d]*w2[f,d]*w3m[d,b].
InteractionTensor3 build_w3_polynl(const Matrix<double>& w1,
                                   const Matrix<double>& w2,
                                   const Matrix<double>& w3m, std::size_t n,
                                   std::size_t cap = InteractionTensor3::kDefaultCap);

// Literal loop transcriptions of the two blocks' element-wise forms; the
// independent middle legs of the oracle triangle.
Matrix<double> nl_elementwise(const Matrix<double>& wf,
                              const Matrix<double>& wg,
                              const Matrix<double>& x);
Matrix<double> polynl_elementwise(const Matrix<double>& w1,
                                  const Matrix<double>& w2,
                                  const Matrix<double>& w3m,
                                  const Matrix<double>& x);

// Flat text dump: header "N C", then (N*C)^4 scalars one per line.
void dump_w3(std::ostream& os, const InteractionTensor3& w3);
InteractionTensor3 load_w3(std::istream& is,
                           std::size_t cap = InteractionTensor3::kDefaultCap);

}  // namespace polynl
