#include "polynl/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "polynl/kernels.hpp"
#include "polynl/rng.hpp"

namespace polynl {

NlGrads nl_backward(const NlParams<double>& p, const Matrix<double>& x,
                    const Matrix<double>& upstream) {
  if (x.cols() != p.dim())
    throw ShapeError("nl_backward: channel count does not match weights");
  if (upstream.rows() != x.rows() || upstream.cols() != x.cols())
    throw ShapeError("nl_backward: upstream shape mismatch");

  // Forward chain: A = X*Wf, S = A*X^T, T = S*X, Y = T*Wg, Z = Y + X.
  Matrix<double> a = matmul(x, p.wf);
  Matrix<double> xt = transpose(x);
  Matrix<double> s = matmul(a, xt);
  Matrix<double> t = matmul(s, x);

  // Reverse: dY = U.
  Matrix<double> d_wg = matmul(transpose(t), upstream);
  Matrix<double> d_t = matmul(upstream, transpose(p.wg));
  Matrix<double> d_s = matmul(d_t, xt);                      // T = S*X
  Matrix<double> d_x = matmul(transpose(s), d_t);
  Matrix<double> d_a = matmul(d_s, x);                       // S = A*X^T
  d_x = add(d_x, matmul(transpose(d_s), a));
  Matrix<double> d_wf = matmul(transpose(x), d_a);           // A = X*Wf
  d_x = add(d_x, matmul(d_a, transpose(p.wf)));
  d_x = add(d_x, upstream);                                  // residual
  return NlGrads{std::move(d_x), std::move(d_wf), std::move(d_wg)};
}

PolyNlGrads polynl_backward(const PolyNlParams<double>& p,
                            const Matrix<double>& x,
                            const Matrix<double>& upstream) {
  if (x.cols() != p.dim())
    throw ShapeError("polynl_backward: channel count does not match weights");
  if (upstream.rows() != x.rows() || upstream.cols() != x.cols())
    throw ShapeError("polynl_backward: upstream shape mismatch");

  // Forward chain: A = X*W1, B = X*W2, H = A(.)B, P = pool_expand(H),
  // M = P(.)X, Y = M*W3, Z = alpha*X + beta*Y.
  Matrix<double> a = matmul(x, p.w1);
  Matrix<double> b = matmul(x, p.w2);
  Matrix<double> h = hadamard(a, b);
  Matrix<double> pooled = pool_expand(h);
  Matrix<double> m = hadamard(pooled, x);
  Matrix<double> y = matmul(m, p.w3);

  const double d_alpha = inner(upstream, x);
  const double d_beta = inner(upstream, y);

  Matrix<double> d_y(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < d_y.size(); ++i)
    d_y.data()[i] = p.beta * upstream.data()[i];

  Matrix<double> d_w3 = matmul(transpose(m), d_y);
  Matrix<double> d_m = matmul(d_y, transpose(p.w3));
  Matrix<double> d_pooled = hadamard(d_m, x);
  Matrix<double> d_x = hadamard(d_m, pooled);
  // pool_expand is self-adjoint: its transpose as an N x N operator per
  // column is again the (1/N) averaging matrix.
  Matrix<double> d_h = pool_expand(d_pooled);
  Matrix<double> d_a = hadamard(d_h, b);
  Matrix<double> d_b = hadamard(d_h, a);
  Matrix<double> d_w1 = matmul(transpose(x), d_a);
  Matrix<double> d_w2 = matmul(transpose(x), d_b);
  d_x = add(d_x, matmul(d_a, transpose(p.w1)));
  d_x = add(d_x, matmul(d_b, transpose(p.w2)));
  for (std::size_t i = 0; i < d_x.size(); ++i)
    d_x.data()[i] += p.alpha * upstream.data()[i];

  return PolyNlGrads{std::move(d_x), std::move(d_w1), std::move(d_w2),
                     std::move(d_w3), d_alpha, d_beta};
}

Matrix<double> finite_diff(const std::function<double(const Matrix<double>&)>& fn,
                           const Matrix<double>& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be > 0");
  Matrix<double> grad(point.rows(), point.cols());
  Matrix<double> probe = point;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double fp = fn(probe);
    probe.data()[i] = orig - step;
    const double fm = fn(probe);
    probe.data()[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff: non-finite evaluation");
    grad.data()[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

namespace {

ParamCheck compare_grads(const std::string& name, const Matrix<double>& analytic,
                         const Matrix<double>& numeric, const CheckOptions& opt) {
  ParamCheck out;
  out.name = name;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double av = analytic.data()[i];
    const double nv = numeric.data()[i];
    const double err = std::abs(av - nv);
    if (err > out.max_abs) out.max_abs = err;
    if (err > opt.abs_floor) {
      const double rel = err / std::max(std::abs(av), std::abs(nv));
      if (rel > out.max_rel) out.max_rel = rel;
    }
  }
  out.pass = out.max_rel <= opt.tolerance;
  return out;
}

Matrix<double> scalar_matrix(double v) {
  return Matrix<double>(1, 1, std::vector<double>{v});
}

Matrix<double> unit_rms_input(Rng& rng, std::size_t n, std::size_t c) {
  Matrix<double> x = random_feature_map<double>(rng, n, c);
  const double rms =
      frobenius_norm(x) / std::sqrt(static_cast<double>(x.size()));
  if (rms > 0.0)
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] /= rms;
  return x;
}

}  // namespace

GradCheckReport check_nl_gradients(std::size_t n, std::size_t c,
                                   std::uint64_t seed, const CheckOptions& opt) {
  Rng rng(seed);
  Matrix<double> x = unit_rms_input(rng, n, c);
  NlParams<double> p = init_nl_params<double>(rng, c);
  Matrix<double> upstream = random_matrix<double>(rng, n, c, -1.0, 1.0);

  NlGrads g = nl_backward(p, x, upstream);
  if (opt.perturb != 0.0) g.d_x(0, 0) += opt.perturb;

  auto loss_x = [&](const Matrix<double>& xv) {
    return inner(upstream, residual_nl(p, xv));
  };
  auto loss_wf = [&](const Matrix<double>& w) {
    return inner(upstream, residual_nl(NlParams<double>(w, p.wg), x));
  };
  auto loss_wg = [&](const Matrix<double>& w) {
    return inner(upstream, residual_nl(NlParams<double>(p.wf, w), x));
  };

  GradCheckReport rep;
  rep.params.push_back(
      compare_grads("x", g.d_x, finite_diff(loss_x, x, opt.step), opt));
  rep.params.push_back(
      compare_grads("wf", g.d_wf, finite_diff(loss_wf, p.wf, opt.step), opt));
  rep.params.push_back(
      compare_grads("wg", g.d_wg, finite_diff(loss_wg, p.wg, opt.step), opt));
  rep.pass = true;
  for (const ParamCheck& pc : rep.params) rep.pass = rep.pass && pc.pass;
  return rep;
}

GradCheckReport check_polynl_gradients(std::size_t n, std::size_t c,
                                       std::uint64_t seed,
                                       const CheckOptions& opt) {
  Rng rng(seed);
  Matrix<double> x = unit_rms_input(rng, n, c);
  Matrix<double> w1 = random_weights<double>(rng, c);
  Matrix<double> w2 = random_weights<double>(rng, c);
  Matrix<double> w3 = random_weights<double>(rng, c);
  // Nonzero mixing scalars so the weight gradients are informative.
  const double alpha = rng.uniform(0.5, 1.5);
  const double beta = rng.uniform(0.5, 1.5);
  PolyNlParams<double> p(w1, w2, w3, alpha, beta);
  Matrix<double> upstream = random_matrix<double>(rng, n, c, -1.0, 1.0);

  PolyNlGrads g = polynl_backward(p, x, upstream);
  if (opt.perturb != 0.0) g.d_x(0, 0) += opt.perturb;

  auto with = [&](Matrix<double> a, Matrix<double> b, Matrix<double> cc,
                  double al, double be) {
    return PolyNlParams<double>(std::move(a), std::move(b), std::move(cc), al, be);
  };
  auto loss_x = [&](const Matrix<double>& xv) {
    return inner(upstream, residual_polynl(p, xv));
  };
  auto loss_w1 = [&](const Matrix<double>& w) {
    return inner(upstream, residual_polynl(with(w, p.w2, p.w3, alpha, beta), x));
  };
  auto loss_w2 = [&](const Matrix<double>& w) {
    return inner(upstream, residual_polynl(with(p.w1, w, p.w3, alpha, beta), x));
  };
  auto loss_w3 = [&](const Matrix<double>& w) {
    return inner(upstream, residual_polynl(with(p.w1, p.w2, w, alpha, beta), x));
  };
  auto loss_alpha = [&](const Matrix<double>& v) {
    return inner(upstream, residual_polynl(with(p.w1, p.w2, p.w3, v(0, 0), beta), x));
  };
  auto loss_beta = [&](const Matrix<double>& v) {
    return inner(upstream, residual_polynl(with(p.w1, p.w2, p.w3, alpha, v(0, 0)), x));
  };

  GradCheckReport rep;
  rep.params.push_back(
      compare_grads("x", g.d_x, finite_diff(loss_x, x, opt.step), opt));
  rep.params.push_back(
      compare_grads("w1", g.d_w1, finite_diff(loss_w1, p.w1, opt.step), opt));
  rep.params.push_back(
      compare_grads("w2", g.d_w2, finite_diff(loss_w2, p.w2, opt.step), opt));
  rep.params.push_back(
      compare_grads("w3", g.d_w3, finite_diff(loss_w3, p.w3, opt.step), opt));
  rep.params.push_back(compare_grads(
      "alpha", scalar_matrix(g.d_alpha),
      finite_diff(loss_alpha, scalar_matrix(alpha), opt.step), opt));
  rep.params.push_back(compare_grads(
      "beta", scalar_matrix(g.d_beta),
      finite_diff(loss_beta, scalar_matrix(beta), opt.step), opt));
  rep.pass = true;
  for (const ParamCheck& pc : rep.params) rep.pass = rep.pass && pc.pass;
  return rep;
}

}  // namespace polynl
