#pragma once

#include "phasor/tensor.hpp"

namespace phasor {

// Largest singular value of a complex matrix (any shape) via power iteration
// on WᴴW: deterministic fixed-seed start vector, converged when successive
// estimates differ by < 1e-8, capped at 1000 iterations.
template <class S>
S spectral_norm(const CTensor<S>& w);

// max |λ| of the Hermitian part W_eff = (W + Wᴴ)/2 of a square matrix. All
// eigenvalues of W_eff are real, so max|λ(W_eff)| = σ_max(W_eff); computed
// with the same power iteration. Always ≤ spectral_norm(W).
template <class S>
S hermitian_abs_eigmax(const CTensor<S>& w);

// Hermitian part (W + Wᴴ)/2.
template <class S>
CTensor<S> hermitian_part(const CTensor<S>& w);

// Complex matrix · vector helpers (vectors as [n] tensors).
template <class S>
CTensor<S> cplx_matvec(const CTensor<S>& w, const CTensor<S>& v, bool adjoint);

// Odd-polynomial Newton–Schulz orthogonalization used by the Muon optimizer:
// 5 iterations of X ← aX + b(XXᵀ)X + c(XXᵀ)²X on the Frobenius-normalized
// input, with (a, b, c) = (3.4445, −4.7750, 2.0315). Returns an approximate
// orthogonal factor of G (singular values driven toward 1).
template <class S>
Tensor<S> newton_schulz_orthogonalize(const Tensor<S>& g, int iters = 5);

}  // namespace phasor
