#include <cmath>
#include <vector>

#include "doctest.h"
#include "phasor/linalg.hpp"
#include "phasor/rng.hpp"

using namespace phasor;

namespace {

// Oracle: cyclic Jacobi eigenvalue iteration for a real symmetric matrix.
std::vector<double> jacobi_eigenvalues(Tensor<double> m) {
  const int64_t n = m.dim(0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i + 1; j < n; ++j) off += m[i * n + j] * m[i * n + j];
    if (off < 1e-24) break;
    for (int64_t p = 0; p < n; ++p)
      for (int64_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (std::abs(apq) < 1e-18) continue;
        const double app = m[p * n + p], aqq = m[q * n + q];
        const double theta = 0.5 * std::atan2(2 * apq, aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int64_t k = 0; k < n; ++k) {
          const double mkp = m[k * n + p], mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (int64_t k = 0; k < n; ++k) {
          const double mpk = m[p * n + k], mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
      }
  }
  std::vector<double> eig(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) eig[size_t(i)] = m[i * n + i];
  return eig;
}

// Realification [[A, -B], [B, A]] of W = A + iB.
Tensor<double> realify(const CTensor<double>& w) {
  const int64_t n = w.re.dim(0), c = w.re.dim(1);
  Tensor<double> m({2 * n, 2 * c});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < c; ++j) {
      m[i * 2 * c + j] = w.re[i * c + j];
      m[i * 2 * c + c + j] = -w.im[i * c + j];
      m[(n + i) * 2 * c + j] = w.im[i * c + j];
      m[(n + i) * 2 * c + c + j] = w.re[i * c + j];
    }
  return m;
}

// Oracle for sigma_max: sqrt of the largest eigenvalue of the realified Gram.
double sigma_max_oracle(const CTensor<double>& w) {
  Tensor<double> m = realify(w);
  Tensor<double> gram = matmul(m, m, true, false);
  double best = 0;
  for (double e : jacobi_eigenvalues(gram)) best = std::max(best, e);
  return std::sqrt(best);
}

// Oracle for max |eigenvalue| of a Hermitian matrix via the realified Jacobi.
double abs_eigmax_oracle(const CTensor<double>& h) {
  double best = 0;
  for (double e : jacobi_eigenvalues(realify(h))) best = std::max(best, std::abs(e));
  return best;
}

CTensor<double> random_cmatrix(int64_t n, int64_t c, Rng& rng) {
  CTensor<double> w({n, c});
  for (int64_t i = 0; i < w.numel(); ++i) {
    w.re[i] = rng.gaussian();
    w.im[i] = rng.gaussian();
  }
  return w;
}

// Householder unitary U = I - 2 v vᴴ / ‖v‖².
CTensor<double> householder_unitary(int64_t n, Rng& rng) {
  CTensor<double> v = random_cmatrix(n, 1, rng);
  const double nv = cplx_sq_norm(v);
  CTensor<double> u({n, n});
  for (int64_t i = 0; i < n; ++i) u.re[i * n + i] = 1.0;
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) {
      // v_i * conj(v_j)
      const double pr = v.re[i] * v.re[j] + v.im[i] * v.im[j];
      const double pi = v.im[i] * v.re[j] - v.re[i] * v.im[j];
      u.re[i * n + j] -= 2.0 * pr / nv;
      u.im[i * n + j] -= 2.0 * pi / nv;
    }
  return u;
}

}  // namespace

TEST_CASE("spectral_norm: scaled identity and diagonal") {
  CTensor<double> w({4, 4});
  for (int64_t i = 0; i < 4; ++i) w.re[i * 4 + i] = 2.0;
  CHECK(spectral_norm(w) == doctest::Approx(2.0).epsilon(1e-8));

  CTensor<double> d({2, 2});
  d.re[0] = 1.0;       // diag(1, -3i)
  d.im[3] = -3.0;
  CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-8));

  CTensor<double> rect({2, 3});
  CHECK_THROWS_AS(spectral_norm(rect), Error);
}

TEST_CASE("spectral_norm random 8x8 matches realified-Gram eigen oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    CTensor<double> w = random_cmatrix(8, 8, rng);
    CHECK(std::abs(spectral_norm(w) - sigma_max_oracle(w)) < 1e-6);
  }
}

TEST_CASE("hermitian_abs_eigmax: trivial and oracle cases") {
  CTensor<double> h({2, 2});
  h.re[0] = 1.0;
  h.re[3] = -2.0;
  CHECK(hermitian_abs_eigmax(h) == doctest::Approx(2.0).epsilon(1e-8));

  // skew-Hermitian: W = -Wᴴ ⇒ Hermitian part vanishes
  Rng rng(103);
  CTensor<double> a = random_cmatrix(4, 4, rng);
  CTensor<double> adj = cplx_adjoint(a);
  CTensor<double> skew(sub(a.re, adj.re), sub(a.im, adj.im));
  CHECK(hermitian_abs_eigmax(skew) < 1e-9);

  for (int trial = 0; trial < 5; ++trial) {
    CTensor<double> w = random_cmatrix(8, 8, rng);
    const double got = hermitian_abs_eigmax(w);
    CTensor<double> weff = hermitian_part(w);
    CHECK(std::abs(got - abs_eigmax_oracle(weff)) < 1e-6);
    CHECK(got <= spectral_norm(w) + 1e-6);
  }
}

TEST_CASE("spectral quantities invariant under unitary conjugation") {
  Rng rng(107);
  for (int trial = 0; trial < 4; ++trial) {
    CTensor<double> w = random_cmatrix(6, 6, rng);
    CTensor<double> u = householder_unitary(6, rng);
    CTensor<double> uwuh = cplx_matmul(cplx_matmul(u, w), cplx_adjoint(u));
    CHECK(std::abs(spectral_norm(w) - spectral_norm(uwuh)) < 1e-5);
    CHECK(std::abs(hermitian_abs_eigmax(w) - hermitian_abs_eigmax(uwuh)) < 1e-5);
  }
}

TEST_CASE("newton_schulz drives singular values toward 1") {
  Rng rng(109);
  Tensor<double> g = Tensor<double>::randn({4, 6}, rng);
  Tensor<double> o = newton_schulz_orthogonalize(g);
  REQUIRE(o.shape() == g.shape());

  // Odd polynomial iterations preserve singular vectors, so Gᵀ·O must be
  // symmetric (V Σ f(Σ) Vᵀ) ...
  Tensor<double> gto = matmul(g, o, false, true);
  for (int64_t i = 0; i < 4; ++i)
    for (int64_t j = 0; j < 4; ++j)
      CHECK(std::abs(gto[i * 4 + j] - gto[j * 4 + i]) < 1e-8);

  // ... and the output's singular values must sit in the known convergence
  // band of the quintic iteration.
  CTensor<double> oc(o, Tensor<double>(o.shape()));
  Tensor<double> gram = matmul(o, o, false, true);
  for (double e : jacobi_eigenvalues(gram)) {
    const double sv = std::sqrt(std::max(0.0, e));
    CHECK(sv > 0.3);
    CHECK(sv < 1.35);
  }

  Tensor<double> zero({3, 3});
  Tensor<double> oz = newton_schulz_orthogonalize(zero);
  for (int64_t i = 0; i < oz.numel(); ++i) CHECK(oz[i] == 0.0);
}
