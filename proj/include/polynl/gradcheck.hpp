#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polynl/blocks.hpp"
#include "polynl/matrix.hpp"

namespace polynl {

// Gradients of <upstream, residual_nl(p, x)> with respect to x and both
// weight matrices.
struct NlGrads {
  Matrix<double> d_x;
  Matrix<double> d_wf;
  Matrix<double> d_wg;
};

// Gradients of <upstream, residual_polynl(p, x)>.
struct PolyNlGrads {
  Matrix<double> d_x;
  Matrix<double> d_w1;
  Matrix<double> d_w2;
  Matrix<double> d_w3;
  double d_alpha = 0.0;
  double d_beta = 0.0;
};

NlGrads nl_backward(const NlParams<double>& p, const Matrix<double>& x,
                    const Matrix<double>& upstream);
PolyNlGrads polynl_backward(const PolyNlParams<double>& p,
                            const Matrix<double>& x,
                            const Matrix<double>& upstream);

// Central differences (f(t+h*e_i) - f(t-h*e_i)) / (2h) per coordinate.
Matrix<double> finite_diff(const std::function<double(const Matrix<double>&)>& fn,
                           const Matrix<double>& point, double step);

struct ParamCheck {
  std::string name;
  double max_rel = 0.0;  // over coordinates whose abs error exceeds the floor
  double max_abs = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  bool pass = false;
};

struct CheckOptions {
  double step = 1e-5;
  double tolerance = 1e-6;
  double abs_floor = 1e-8;
  // Test hook: added to one entry of the analytic input gradient so tests
  // can confirm the checker catches a wrong backward pass.
  double perturb = 0.0;
};

// Seeded end-to-end checks: random unit-RMS input, seeded weights and
// upstream, analytic backward vs finite differences on every parameter.
GradCheckReport check_nl_gradients(std::size_t n, std::size_t c,
                                   std::uint64_t seed, const CheckOptions& opt);
GradCheckReport check_polynl_gradients(std::size_t n, std::size_t c,
                                       std::uint64_t seed,
                                       const CheckOptions& opt);

}  // namespace polynl
