#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasor/rng.hpp"

namespace phasor {

enum class NoiseType { white, pink, brown, transient };

NoiseType noise_type_from_string(const std::string& s);

// Deterministic noise generator, unit RMS. Colored types are synthesized in
// the frequency domain (amplitude f^{-alpha/2}, random phases) so the
// spectral slope is exact: white 0, pink -3 dB/octave, brown -6 dB/octave.
// Transient noise is a Poisson train (rate 1/s) of 2 ms decaying bursts,
// also normalized to unit RMS.
std::vector<float> gen_noise(NoiseType type, int64_t n, Rng& rng,
                             int sample_rate = 16000);

}  // namespace phasor
