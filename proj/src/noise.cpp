#include "phasor/noise.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "phasor/common.hpp"
#include "phasor/fft.hpp"

namespace phasor {

NoiseType noise_type_from_string(const std::string& s) {
  if (s == "white") return NoiseType::white;
  if (s == "pink") return NoiseType::pink;
  if (s == "brown") return NoiseType::brown;
  if (s == "transient") return NoiseType::transient;
  fail("unknown noise type '", s,
       "' (expected white, pink, brown, or transient)");
}

namespace {

void normalize_rms(std::vector<float>& x) {
  double acc = 0;
  for (float v : x) acc += double(v) * v;
  const double rms = std::sqrt(acc / double(x.size() ? x.size() : 1));
  if (rms > 0)
    for (float& v : x) v = float(v / rms);
}

std::vector<float> colored(double alpha, int64_t n, Rng& rng) {
  // Hermitian-symmetric spectrum with |X_k| = (k/1)^{-alpha/2}, random phase;
  // the inverse transform is real with power slope exactly -3*alpha dB/octave.
  std::vector<std::complex<double>> spec(size_t(n), {0.0, 0.0});
  const int64_t half = n / 2;
  for (int64_t k = 1; k <= half; ++k) {
    const double amp = std::pow(double(k), -alpha / 2.0);
    const double ph = 2.0 * std::numbers::pi * rng.uniform();
    const std::complex<double> v = std::polar(amp, ph);
    spec[size_t(k)] = v;
    if (k != n - k) spec[size_t(n - k)] = std::conj(v);
  }
  if (n % 2 == 0 && half >= 1)
    spec[size_t(half)] = {std::abs(spec[size_t(half)]), 0.0};
  fft_inplace(spec, /*inverse=*/true);
  std::vector<float> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) out[size_t(i)] = float(spec[size_t(i)].real());
  normalize_rms(out);
  return out;
}

std::vector<float> transient(int64_t n, Rng& rng, int sr) {
  std::vector<float> out(size_t(n), 0.0f);
  const double rate_per_sample = 1.0 / double(sr);  // 1 burst per second
  const int64_t burst_len = int64_t(std::llround(0.002 * sr));
  double t = 0;
  while (true) {
    // Exponential inter-arrival times give a Poisson process.
    const double u = std::max(rng.uniform(), 1e-300);
    t += -std::log(u) / rate_per_sample;
    const int64_t start = int64_t(t);
    if (start >= n) break;
    const double amp = 0.5 + 0.5 * rng.uniform();
    const double polarity = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int64_t j = 0; j < burst_len && start + j < n; ++j) {
      const double env = std::exp(-double(j) / (0.0005 * sr));
      out[size_t(start + j)] +=
          float(amp * polarity * env * (2.0 * rng.uniform() - 1.0));
    }
  }
  normalize_rms(out);
  return out;
}

}  // namespace

std::vector<float> gen_noise(NoiseType type, int64_t n, Rng& rng,
                             int sample_rate) {
  PHASOR_CHECK(n > 0, "gen_noise: length must be positive, got ", n);
  switch (type) {
    case NoiseType::white: {
      std::vector<float> out(static_cast<size_t>(n));
      for (auto& v : out) v = float(rng.gaussian());
      normalize_rms(out);
      return out;
    }
    case NoiseType::pink:
      return colored(1.0, n, rng);
    case NoiseType::brown:
      return colored(2.0, n, rng);
    case NoiseType::transient:
      return transient(n, rng, sample_rate);
  }
  fail("gen_noise: unreachable");
}

}  // namespace phasor
