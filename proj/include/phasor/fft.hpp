#pragma once

#include <complex>
#include <vector>

#include "phasor/tensor.hpp"

namespace phasor {

// In-place complex DFT of arbitrary length: iterative radix-2 when the length
// is a power of two, Bluestein's chirp-z algorithm otherwise. Forward sign
// convention: X_k = sum_t x_t exp(-2*pi*i*k*t/N). Inverse includes the 1/N.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Real FFT over the last axis: [..., T] -> complex [..., floor(T/2)+1],
// bin c = sum_t x_t exp(-2*pi*i*c*t/T). Differentiable; see rfft_time_adjoint.
template <class S>
CTensor<S> rfft_time(const Tensor<S>& x);

// Vector-Jacobian product of rfft_time: maps cotangents on the K = floor(T/2)+1
// output bins (re and im treated as independent reals) back to the T inputs.
// This is the adjoint of the truncated DFT matrix, not the inverse transform.
template <class S>
Tensor<S> rfft_time_adjoint(const CTensor<S>& grad, int64_t t_len);

}  // namespace phasor
