#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phasor {

// Mono audio at a known sample rate; the canonical in-memory form after
// ingestion is 16 kHz mono with samples in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavFormat { pcm16, pcm24, float32 };

// Decodes a RIFF/WAVE blob (PCM 16/24-bit or IEEE float32, 1-2 channels, any
// rate): downmixes to mono by channel mean, resamples to 16 kHz, and
// peak-normalizes only when the peak exceeds 1. Malformed input raises a
// validation error that names the byte offset; unrecognized codecs raise an
// explicit unsupported-format error.
AudioBuffer decode_wav(const std::vector<uint8_t>& bytes);
AudioBuffer load_wav(const std::string& path);

std::vector<uint8_t> encode_wav(const AudioBuffer& buf, WavFormat fmt);
void save_wav(const std::string& path, const AudioBuffer& buf,
              WavFormat fmt = WavFormat::pcm16);

// Windowed-sinc resampler: 32 taps, Blackman window, zero-padded edges.
// Output length is round(n * sr_out / sr_in).
std::vector<float> resample(const std::vector<float>& x, double sr_in,
                            double sr_out);

}  // namespace phasor
