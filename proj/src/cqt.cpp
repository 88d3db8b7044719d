#include "phasor/cqt.hpp"

#include <cmath>
#include <numbers>

#include "phasor/common.hpp"

namespace phasor {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 33-tap Blackman-windowed halfband lowpass, cutoff at half the new Nyquist.
std::vector<float> decimate2(const std::vector<float>& x) {
  constexpr int kHalf = 16;
  static const std::vector<double> h = [] {
    std::vector<double> taps(2 * kHalf + 1);
    for (int j = -kHalf; j <= kHalf; ++j) {
      const double u = double(j) / kHalf;
      const double w =
          0.42 + 0.5 * std::cos(std::numbers::pi * u) +
          0.08 * std::cos(2.0 * std::numbers::pi * u);
      double s;
      if (j == 0) {
        s = 0.5;
      } else {
        const double p = 0.5 * std::numbers::pi * j;
        s = 0.5 * std::sin(p) / p;
      }
      taps[size_t(j + kHalf)] = s * w;
    }
    return taps;
  }();

  const int64_t n_in = int64_t(x.size());
  const int64_t n_out = (n_in + 1) / 2;
  std::vector<float> y(static_cast<size_t>(n_out));
  for (int64_t n = 0; n < n_out; ++n) {
    double acc = 0;
    for (int j = -kHalf; j <= kHalf; ++j) {
      const int64_t m = 2 * n + j;
      if (m >= 0 && m < n_in) acc += h[size_t(j + kHalf)] * double(x[size_t(m)]);
    }
    y[size_t(n)] = float(acc);
  }
  return y;
}

}  // namespace

CqtPlan::CqtPlan(const CqtParams& params) : params_(params) {
  PHASOR_CHECK(params_.sample_rate > 0 && params_.hop > 0 &&
                   params_.num_bins > 0 && params_.bins_per_octave > 0 &&
                   params_.f_min > 0,
               "cqt: all parameters must be positive");
  const double q =
      1.0 / (std::pow(2.0, 1.0 / params_.bins_per_octave) - 1.0);
  const int octaves =
      (params_.num_bins + params_.bins_per_octave - 1) / params_.bins_per_octave;

  // Deepest chain level whose hop stays an integer number of samples.
  int max_hop_level = 0;
  while (params_.hop % (1 << (max_hop_level + 1)) == 0) ++max_hop_level;

  kernels_.resize(size_t(params_.num_bins));
  for (int k = 0; k < params_.num_bins; ++k) {
    const double fk = bin_frequency(k);
    PHASOR_CHECK(fk < params_.sample_rate / 2.0,
                 "cqt: bin ", k, " frequency ", fk, " exceeds Nyquist");
    const int octave = k / params_.bins_per_octave;
    const int level = std::min(octaves - 1 - octave, max_hop_level);
    const double sr_loc = double(params_.sample_rate) / double(1 << level);
    const int64_t len = std::max<int64_t>(
        int64_t(std::llround(q * sr_loc / fk)), 2);

    Kernel& ker = kernels_[size_t(k)];
    ker.level = level;
    ker.len = len;
    ker.re.resize(size_t(len));
    ker.im.resize(size_t(len));
    double wsum = 0;
    for (int64_t n = 0; n < len; ++n)
      wsum += 0.5 * (1.0 - std::cos(kTwoPi * double(n) / double(len - 1)));
    const double scale = 2.0 / wsum;  // unit-amplitude tone -> |X| ~= 1
    const double w = kTwoPi * fk / sr_loc;
    for (int64_t n = 0; n < len; ++n) {
      const double win =
          0.5 * (1.0 - std::cos(kTwoPi * double(n) / double(len - 1)));
      ker.re[size_t(n)] = float(scale * win * std::cos(w * double(n)));
      ker.im[size_t(n)] = float(-scale * win * std::sin(w * double(n)));
    }
    max_level_ = std::max(max_level_, level);
    min_samples_ = std::max(min_samples_, len * int64_t(1 << level));
  }
}

double CqtPlan::bin_frequency(int bin) const {
  return params_.f_min *
         std::pow(2.0, double(bin) / double(params_.bins_per_octave));
}

CTensor<float> CqtPlan::complex_cqt(const std::vector<float>& x) const {
  const int64_t n = int64_t(x.size());
  PHASOR_CHECK(n >= min_samples_, "cqt: audio too short: ", n,
               " samples < minimum ", min_samples_,
               " (longest analysis window)");
  const int64_t t_frames = num_frames(n);

  // Decimation chain: chain[l] holds the signal at rate sample_rate / 2^l.
  std::vector<std::vector<float>> chain(size_t(max_level_) + 1);
  chain[0] = x;
  for (int l = 1; l <= max_level_; ++l) chain[size_t(l)] = decimate2(chain[size_t(l - 1)]);

  CTensor<float> out({int64_t(params_.num_bins), t_frames});
  for (int k = 0; k < params_.num_bins; ++k) {
    const Kernel& ker = kernels_[size_t(k)];
    const std::vector<float>& sig = chain[size_t(ker.level)];
    const int64_t sig_len = int64_t(sig.size());
    const int64_t hop_loc = params_.hop >> ker.level;
    for (int64_t t = 0; t < t_frames; ++t) {
      const int64_t start = t * hop_loc;
      const int64_t m = std::min(ker.len, sig_len - start);
      double re = 0, im = 0;
      for (int64_t i = 0; i < m; ++i) {
        const double s = sig[size_t(start + i)];
        re += s * ker.re[size_t(i)];
        im += s * ker.im[size_t(i)];
      }
      out.re[k * t_frames + t] = float(re);
      out.im[k * t_frames + t] = float(im);
    }
  }
  return out;
}

Tensor<float> CqtPlan::magnitude_of(const CTensor<float>& coeffs) {
  Tensor<float> mags(coeffs.re.shape());
  for (int64_t i = 0; i < mags.numel(); ++i)
    mags[i] = std::hypot(coeffs.re[i], coeffs.im[i]);
  return mags;
}

Tensor<float> CqtPlan::magnitude(const std::vector<float>& x) const {
  return magnitude_of(complex_cqt(x));
}

Tensor<float> CqtPlan::magnitude(const AudioBuffer& audio) const {
  PHASOR_CHECK(audio.sample_rate == params_.sample_rate,
               "cqt: audio at ", audio.sample_rate, " Hz, plan expects ",
               params_.sample_rate);
  return magnitude(audio.samples);
}

const CqtPlan& default_cqt() {
  static const CqtPlan plan{CqtParams{}};
  return plan;
}

}  // namespace phasor
