#include "phasor/linalg.hpp"

#include <cmath>

#include "phasor/rng.hpp"

namespace phasor {

namespace {

constexpr uint64_t kPowerIterSeed = 0x9e1ab5ull;

}  // namespace

template <class S>
CTensor<S> cplx_matvec(const CTensor<S>& w, const CTensor<S>& v, bool adjoint) {
  PHASOR_CHECK(w.re.rank() == 2 && v.re.rank() == 1, "cplx_matvec: [m,n]·[n]");
  const int64_t m = w.re.dim(0), n = w.re.dim(1);
  const int64_t rows = adjoint ? n : m;
  const int64_t cols = adjoint ? m : n;
  PHASOR_CHECK(v.re.dim(0) == cols, "cplx_matvec: dim mismatch");
  CTensor<S> out({rows});
  for (int64_t i = 0; i < rows; ++i) {
    S ar(0), ai(0);
    for (int64_t j = 0; j < cols; ++j) {
      // adjoint applies conj(Wᵀ)
      const int64_t k = adjoint ? j * n + i : i * n + j;
      const S wr = w.re[k];
      const S wi = adjoint ? -w.im[k] : w.im[k];
      ar += wr * v.re[j] - wi * v.im[j];
      ai += wr * v.im[j] + wi * v.re[j];
    }
    out.re[i] = ar;
    out.im[i] = ai;
  }
  return out;
}

namespace {

// σ_max via power iteration on AᴴA with deterministic start.
template <class S>
S sigma_max_power(const CTensor<S>& a) {
  const int64_t n = a.re.dim(1);
  Rng rng(kPowerIterSeed);
  CTensor<S> v({n});
  for (int64_t i = 0; i < n; ++i) {
    v.re[i] = S(rng.gaussian());
    v.im[i] = S(rng.gaussian());
  }
  S sigma_prev(-1);
  for (int iter = 0; iter < 1000; ++iter) {
    const S nv = std::sqrt(cplx_sq_norm(v));
    if (!(nv > S(0))) return S(0);
    const S inv = S(1) / nv;
    for (int64_t i = 0; i < n; ++i) {
      v.re[i] *= inv;
      v.im[i] *= inv;
    }
    CTensor<S> av = cplx_matvec(a, v, false);
    const S sigma = std::sqrt(cplx_sq_norm(av));
    v = cplx_matvec(a, av, true);
    if (std::abs(double(sigma - sigma_prev)) < 1e-8) return sigma;
    sigma_prev = sigma;
  }
  return sigma_prev;
}

}  // namespace

template <class S>
S spectral_norm(const CTensor<S>& w) {
  PHASOR_CHECK(w.re.rank() == 2, "spectral_norm: matrix required");
  PHASOR_CHECK(w.re.dim(0) == w.re.dim(1), "spectral_norm: square matrix required, got ",
               shape_str(w.shape()));
  return sigma_max_power(w);
}

template <class S>
CTensor<S> hermitian_part(const CTensor<S>& w) {
  PHASOR_CHECK(w.re.rank() == 2 && w.re.dim(0) == w.re.dim(1),
               "hermitian_part: square matrix required");
  CTensor<S> adj = cplx_adjoint(w);
  return CTensor<S>(scale(add(w.re, adj.re), S(0.5)),
                    scale(add(w.im, adj.im), S(0.5)));
}

template <class S>
S hermitian_abs_eigmax(const CTensor<S>& w) {
  PHASOR_CHECK(w.re.rank() == 2 && w.re.dim(0) == w.re.dim(1),
               "hermitian_abs_eigmax: square matrix required, got ",
               shape_str(w.shape()));
  return sigma_max_power(hermitian_part(w));
}

template <class S>
Tensor<S> newton_schulz_orthogonalize(const Tensor<S>& g, int iters) {
  PHASOR_CHECK(g.rank() == 2, "newton_schulz: rank-2 tensor required");
  const S a = S(3.4445), b = S(-4.7750), c = S(2.0315);

  // Work on the orientation with rows <= cols so the Gram matrix is small.
  const bool flip = g.dim(0) > g.dim(1);
  Tensor<S> x = flip ? transpose2d(g) : g.clone();
  const int64_t m = x.dim(0);

  S fro(0);
  for (int64_t i = 0; i < x.numel(); ++i) fro += x[i] * x[i];
  fro = std::sqrt(fro);
  if (!(fro > S(0))) return Tensor<S>(g.shape());
  const S inv = S(1) / (fro + S(1e-7));
  for (int64_t i = 0; i < x.numel(); ++i) x[i] *= inv;

  for (int it = 0; it < iters; ++it) {
    Tensor<S> gram = matmul(x, x, false, true);           // [m,m]
    Tensor<S> gram2 = matmul(gram, gram);                 // [m,m]
    Tensor<S> poly({m, m});
    for (int64_t i = 0; i < m * m; ++i) poly[i] = b * gram[i] + c * gram2[i];
    Tensor<S> px = matmul(poly, x);
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = a * x[i] + px[i];
  }
  return flip ? transpose2d(x) : x;
}

#define PHASOR_INSTANTIATE_LINALG(S)                                           \
  template CTensor<S> cplx_matvec(const CTensor<S>&, const CTensor<S>&, bool); \
  template S spectral_norm(const CTensor<S>&);                                 \
  template CTensor<S> hermitian_part(const CTensor<S>&);                       \
  template S hermitian_abs_eigmax(const CTensor<S>&);                          \
  template Tensor<S> newton_schulz_orthogonalize(const Tensor<S>&, int);

PHASOR_INSTANTIATE_LINALG(float)
PHASOR_INSTANTIATE_LINALG(double)
#undef PHASOR_INSTANTIATE_LINALG

}  // namespace phasor
