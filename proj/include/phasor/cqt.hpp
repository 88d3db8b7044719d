#pragma once

#include <cstdint>
#include <vector>

#include "phasor/audio.hpp"
#include "phasor/tensor.hpp"

namespace phasor {

struct CqtParams {
  int sample_rate = 16000;
  double f_min = 32.70319566257483;  // C1
  int bins_per_octave = 12;
  int num_bins = 84;  // 7 octaves
  int hop = 160;      // 10 ms
};

// Constant-Q analysis bank: Hann-windowed complex kernels, one per bin, each
// spanning Q ~= 16.8 cycles, evaluated per octave on a power-of-two
// decimation chain so low bins correlate at a low rate. Frames are
// left-aligned: frame t covers input samples [t*hop, t*hop + window_t).
class CqtPlan {
 public:
  explicit CqtPlan(const CqtParams& params = {});

  const CqtParams& params() const { return params_; }
  // Longest analysis window in input samples = the minimum analyzable length.
  int64_t min_samples() const { return min_samples_; }
  int64_t num_frames(int64_t num_samples) const {
    return num_samples / params_.hop;
  }
  double bin_frequency(int bin) const;

  // Complex coefficients [num_bins, T]; linear in the input signal.
  CTensor<float> complex_cqt(const std::vector<float>& x) const;
  // |complex_cqt|, the model input. [num_bins, T], nonnegative.
  Tensor<float> magnitude(const std::vector<float>& x) const;
  Tensor<float> magnitude(const AudioBuffer& audio) const;

  static Tensor<float> magnitude_of(const CTensor<float>& coeffs);

 private:
  struct Kernel {
    int level;             // decimation-chain level, rate = sr / 2^level
    int64_t len;           // taps at the decimated rate
    std::vector<float> re, im;
  };

  CqtParams params_;
  std::vector<Kernel> kernels_;  // one per bin
  int max_level_ = 0;
  int64_t min_samples_ = 0;
};

// Shared immutable plan with default parameters.
const CqtPlan& default_cqt();

}  // namespace phasor
