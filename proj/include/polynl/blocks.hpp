#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "polynl/errors.hpp"
#include "polynl/kernels.hpp"
#include "polynl/matrix.hpp"
#include "polynl/rng.hpp"

namespace polynl {

// Non-local block weights. wf is stored pre-multiplied (W_theta * W_phi^T);
// use from_embeddings to build it from the embedding pair.
template <typename T>
struct NlParams {
  Matrix<T> wf;
  Matrix<T> wg;

  NlParams(Matrix<T> wf_in, Matrix<T> wg_in)
      : wf(std::move(wf_in)), wg(std::move(wg_in)) {
    if (wf.rows() != wf.cols() || wg.rows() != wg.cols() ||
        wf.rows() != wg.rows())
      throw ShapeError("NlParams: weights must be square with a shared dim");
    wf.require_finite("NlParams.wf");
    wg.require_finite("NlParams.wg");
  }

  static NlParams from_embeddings(const Matrix<T>& w_theta,
                                  const Matrix<T>& w_phi, Matrix<T> wg_in) {
    return NlParams(matmul(w_theta, transpose(w_phi)), std::move(wg_in));
  }

  std::size_t dim() const { return wf.rows(); }
};

// Poly-NL block weights plus the residual mixing scalars.
template <typename T>
struct PolyNlParams {
  Matrix<T> w1;
  Matrix<T> w2;
  Matrix<T> w3;
  T alpha;
  T beta;

  PolyNlParams(Matrix<T> w1_in, Matrix<T> w2_in, Matrix<T> w3_in, T alpha_in,
               T beta_in)
      : w1(std::move(w1_in)),
        w2(std::move(w2_in)),
        w3(std::move(w3_in)),
        alpha(alpha_in),
        beta(beta_in) {
    if (w1.rows() != w1.cols() || w2.rows() != w2.cols() ||
        w3.rows() != w3.cols() || w1.rows() != w2.rows() ||
        w1.rows() != w3.rows())
      throw ShapeError("PolyNlParams: weights must be square with a shared dim");
    w1.require_finite("PolyNlParams.w1");
    w2.require_finite("PolyNlParams.w2");
    w3.require_finite("PolyNlParams.w3");
    if (!std::isfinite(static_cast<double>(alpha)) ||
        !std::isfinite(static_cast<double>(beta)))
      throw NumericError("PolyNlParams: non-finite scalar");
  }

  std::size_t dim() const { return w1.rows(); }
};

// Latent-space block weights: channel encoder/decoder projections (C x d)
// and the d x d latent mixing matrix.
template <typename T>
struct LatentGnnParams {
  Matrix<T> w_enc;
  Matrix<T> g;
  Matrix<T> w_dec;

  LatentGnnParams(Matrix<T> w_enc_in, Matrix<T> g_in, Matrix<T> w_dec_in)
      : w_enc(std::move(w_enc_in)), g(std::move(g_in)), w_dec(std::move(w_dec_in)) {
    if (g.rows() != g.cols()) throw ShapeError("LatentGnnParams: g must be square");
    if (w_enc.cols() != g.rows() || w_dec.cols() != g.rows() ||
        w_enc.rows() != w_dec.rows() || g.rows() == 0)
      throw ShapeError("LatentGnnParams: encoder/decoder must be C x d");
    w_enc.require_finite("LatentGnnParams.w_enc");
    g.require_finite("LatentGnnParams.g");
    w_dec.require_finite("LatentGnnParams.w_dec");
  }

  std::size_t dim() const { return w_enc.rows(); }
  std::size_t latent_dim() const { return g.rows(); }
};

namespace detail {
template <typename T>
void check_block_input(const Matrix<T>& x, std::size_t c, const char* what) {
  if (x.rows() == 0 || x.cols() == 0)
    throw ShapeError(std::string(what) + ": empty feature map");
  if (x.cols() != c)
    throw ShapeError(std::string(what) + ": channel count " +
                     std::to_string(x.cols()) + " does not match weights (" +
                     std::to_string(c) + ")");
}
}  // namespace detail

// Quadratic baseline: Y = ((X*Wf)*X^T)*X*Wg evaluated strictly left to
// right, materializing the N x N similarity matrix.
// 4*N^2*C + 4*N*C^2 flops; largest intermediate max(N^2, N*C) elements.
template <typename T>
Matrix<T> nl_forward(const NlParams<T>& p, const Matrix<T>& x,
                     Exec ex = Exec::serial) {
  detail::check_block_input(x, p.dim(), "nl_forward");
  Matrix<T> a = matmul(x, p.wf, ex);
  Matrix<T> sim = matmul(a, transpose(x, ex), ex);  // N x N
  Matrix<T> t = matmul(sim, x, ex);
  Matrix<T> y = matmul(t, p.wg, ex);
  y.require_finite("nl_forward");
  return y;
}

// Same algebra as nl_forward, reassociated right to left so no N x N buffer
// ever exists: P = X^T*(X*Wg), Q = Wf*P, Y = X*Q.
// 6*N*C^2 + 2*C^3 flops; largest intermediate max(N*C, C^2) elements.
template <typename T>
Matrix<T> efficient_nl_forward(const NlParams<T>& p, const Matrix<T>& x,
                               Exec ex = Exec::serial) {
  detail::check_block_input(x, p.dim(), "efficient_nl_forward");
  Matrix<T> b = matmul(x, p.wg, ex);
  Matrix<T> pm = matmul(transpose(x, ex), b, ex);  // C x C
  Matrix<T> q = matmul(p.wf, pm, ex);
  Matrix<T> y = matmul(x, q, ex);
  y.require_finite("efficient_nl_forward");
  return y;
}

// Poly-NL core: Y = (pool_expand(X*W1 (.) X*W2) (.) X)*W3.
// 6*N*C^2 + 4*N*C flops; every intermediate is N*C elements.
template <typename T>
Matrix<T> polynl_core_forward(const PolyNlParams<T>& p, const Matrix<T>& x,
                              Exec ex = Exec::serial) {
  detail::check_block_input(x, p.dim(), "polynl_core_forward");
  Matrix<T> a = matmul(x, p.w1, ex);
  Matrix<T> b = matmul(x, p.w2, ex);
  Matrix<T> h = hadamard(a, b, ex);
  Matrix<T> pooled = pool_expand(h, ex);
  Matrix<T> m = hadamard(pooled, x, ex);
  Matrix<T> y = matmul(m, p.w3, ex);
  y.require_finite("polynl_core_forward");
  return y;
}

// Latent-space aggregation: E = X*w_enc, L = E^T*X, L' = g*L, D = X*w_dec,
// Y = D*L'. 8*N*d*C + 2*d^2*C flops; largest intermediate
// max(N*C, N*d, d*C) elements. No N x N buffer.
template <typename T>
Matrix<T> latentgnn_forward(const LatentGnnParams<T>& p, const Matrix<T>& x,
                            Exec ex = Exec::serial) {
  detail::check_block_input(x, p.dim(), "latentgnn_forward");
  Matrix<T> e = matmul(x, p.w_enc, ex);           // N x d
  Matrix<T> l = matmul(transpose(e, ex), x, ex);  // d x C
  Matrix<T> lmix = matmul(p.g, l, ex);            // d x C
  Matrix<T> d = matmul(x, p.w_dec, ex);           // N x d
  Matrix<T> y = matmul(d, lmix, ex);
  y.require_finite("latentgnn_forward");
  return y;
}

// Plain 1x1 convolution, the no-attention efficiency floor in the benchmark.
// 2*N*C^2 flops.
template <typename T>
Matrix<T> conv1x1_forward(const Matrix<T>& w, const Matrix<T>& x,
                          Exec ex = Exec::serial) {
  if (w.rows() != w.cols()) throw ShapeError("conv1x1_forward: weights not square");
  detail::check_block_input(x, w.rows(), "conv1x1_forward");
  Matrix<T> y = matmul(x, w, ex);
  y.require_finite("conv1x1_forward");
  return y;
}

// Z = Y + X
template <typename T>
Matrix<T> residual_nl(const NlParams<T>& p, const Matrix<T>& x,
                      Exec ex = Exec::serial) {
  return add(nl_forward(p, x, ex), x, ex);
}

// Z = alpha*X + beta*Y
template <typename T>
Matrix<T> residual_polynl(const PolyNlParams<T>& p, const Matrix<T>& x,
                          Exec ex = Exec::serial) {
  return axpby(p.alpha, x, p.beta, polynl_core_forward(p, x, ex), ex);
}

// ---- seeded construction helpers -----------------------------------------

template <typename T>
Matrix<T> random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                        double lo, double hi) {
  Matrix<T> m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<T>(rng.uniform(lo, hi));
  return m;
}

template <typename T>
Matrix<T> random_feature_map(Rng& rng, std::size_t n, std::size_t c) {
  return random_matrix<T>(rng, n, c, -1.0, 1.0);
}

// Weight entries drawn uniform in [-1/sqrt(C), 1/sqrt(C)].
template <typename T>
Matrix<T> random_weights(Rng& rng, std::size_t c) {
  const double s = 1.0 / std::sqrt(static_cast<double>(c));
  return random_matrix<T>(rng, c, c, -s, s);
}

template <typename T>
NlParams<T> init_nl_params(Rng& rng, std::size_t c) {
  Matrix<T> wf = random_weights<T>(rng, c);
  Matrix<T> wg = random_weights<T>(rng, c);
  return NlParams<T>(std::move(wf), std::move(wg));
}

// alpha = 1, beta = 0: the residual block starts as the identity.
template <typename T>
PolyNlParams<T> init_polynl_params(Rng& rng, std::size_t c) {
  Matrix<T> w1 = random_weights<T>(rng, c);
  Matrix<T> w2 = random_weights<T>(rng, c);
  Matrix<T> w3 = random_weights<T>(rng, c);
  return PolyNlParams<T>(std::move(w1), std::move(w2), std::move(w3), T(1), T(0));
}

template <typename T>
LatentGnnParams<T> init_latentgnn_params(Rng& rng, std::size_t c, std::size_t d) {
  const double s = 1.0 / std::sqrt(static_cast<double>(c));
  Matrix<T> w_enc = random_matrix<T>(rng, c, d, -s, s);
  Matrix<T> g = random_matrix<T>(rng, d, d, -s, s);
  Matrix<T> w_dec = random_matrix<T>(rng, c, d, -s, s);
  return LatentGnnParams<T>(std::move(w_enc), std::move(g), std::move(w_dec));
}

}  // namespace polynl
