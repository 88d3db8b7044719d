#include "phasor/fft.hpp"

#include <cmath>

namespace phasor {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(size_t n) { return n && (n & (n - 1)) == 0; }

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / double(n);
    for (auto& x : a) x *= inv;
  }
}

// Bluestein chirp-z: re-expresses a length-N DFT as a circular convolution of
// length M = next power of two >= 2N-1. Chirp exponents use n^2 mod 2N to keep
// the angle argument small for long inputs.
void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<std::complex<double>> chirp(n);
  for (size_t k = 0; k < n; ++k) {
    const uint64_t e = (uint64_t(k) * k) % (2 * n);
    const double ang = (inverse ? kTwoPi : -kTwoPi) * double(e) / (2.0 * double(n));
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<std::complex<double>> fa(m), fb(m);
  for (size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = {1.0, 0.0};
  for (size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);

  fft_pow2(fa, false);
  fft_pow2(fb, false);
  for (size_t k = 0; k < m; ++k) fa[k] *= fb[k];
  fft_pow2(fa, true);

  for (size_t k = 0; k < n; ++k) a[k] = fa[k] * chirp[k];
  if (inverse) {
    const double inv = 1.0 / double(n);
    for (auto& x : a) x *= inv;
  }
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size()))
    fft_pow2(a, inverse);
  else
    fft_bluestein(a, inverse);
}

template <class S>
CTensor<S> rfft_time(const Tensor<S>& x) {
  PHASOR_CHECK(x.rank() >= 1, "rfft_time: rank >= 1 required");
  const int64_t t_len = x.dim(x.rank() - 1);
  PHASOR_CHECK(t_len >= 1, "empty time axis");
  const int64_t k_len = t_len / 2 + 1;
  const int64_t rows = x.numel() / t_len;

  Shape out_shape = x.shape();
  out_shape.back() = k_len;
  CTensor<S> out(out_shape);

  std::vector<std::complex<double>> buf(static_cast<size_t>(t_len));
  for (int64_t r = 0; r < rows; ++r) {
    const S* px = x.data() + r * t_len;
    for (int64_t t = 0; t < t_len; ++t) buf[size_t(t)] = {double(px[t]), 0.0};
    fft_inplace(buf, false);
    S* pre = out.re.data() + r * k_len;
    S* pim = out.im.data() + r * k_len;
    for (int64_t c = 0; c < k_len; ++c) {
      pre[c] = S(buf[size_t(c)].real());
      pim[c] = S(buf[size_t(c)].imag());
    }
  }
  return out;
}

template <class S>
Tensor<S> rfft_time_adjoint(const CTensor<S>& grad, int64_t t_len) {
  PHASOR_CHECK(t_len >= 1, "empty time axis");
  const int64_t k_len = t_len / 2 + 1;
  PHASOR_CHECK(grad.shape().back() == k_len, "rfft_time_adjoint: bin count ",
               grad.shape().back(), " does not match time length ", t_len);
  const int64_t rows = grad.numel() / k_len;

  Shape out_shape = grad.shape();
  out_shape.back() = t_len;
  Tensor<S> out(out_shape);

  // adjoint: xbar_t = Re( sum_{c<K} (gr_c + i*gi_c) * exp(+2*pi*i*c*t/T) ),
  // realized as conj(FFT(conj(g_padded))) so one forward transform suffices.
  std::vector<std::complex<double>> buf(static_cast<size_t>(t_len));
  for (int64_t r = 0; r < rows; ++r) {
    const S* pre = grad.re.data() + r * k_len;
    const S* pim = grad.im.data() + r * k_len;
    for (int64_t c = 0; c < t_len; ++c) buf[size_t(c)] = {0.0, 0.0};
    for (int64_t c = 0; c < k_len; ++c)
      buf[size_t(c)] = {double(pre[c]), -double(pim[c])};
    fft_inplace(buf, false);
    S* po = out.data() + r * t_len;
    for (int64_t t = 0; t < t_len; ++t) po[t] = S(buf[size_t(t)].real());
  }
  return out;
}

template CTensor<float> rfft_time(const Tensor<float>&);
template CTensor<double> rfft_time(const Tensor<double>&);
template Tensor<float> rfft_time_adjoint(const CTensor<float>&, int64_t);
template Tensor<double> rfft_time_adjoint(const CTensor<double>&, int64_t);

}  // namespace phasor
