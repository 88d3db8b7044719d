#include "phasor/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "phasor/common.hpp"

namespace phasor {

namespace {

uint32_t rd_u32(const std::vector<uint8_t>& b, size_t off) {
  if (off + 4 > b.size())
    fail("wav: truncated while reading 4 bytes at byte ", off);
  return uint32_t(b[off]) | uint32_t(b[off + 1]) << 8 |
         uint32_t(b[off + 2]) << 16 | uint32_t(b[off + 3]) << 24;
}

uint16_t rd_u16(const std::vector<uint8_t>& b, size_t off) {
  if (off + 2 > b.size())
    fail("wav: truncated while reading 2 bytes at byte ", off);
  return uint16_t(b[off]) | uint16_t(uint16_t(b[off + 1]) << 8);
}

bool tag_is(const std::vector<uint8_t>& b, size_t off, const char* tag) {
  return off + 4 <= b.size() && std::memcmp(b.data() + off, tag, 4) == 0;
}

double blackman(double u) {  // u in [-1, 1]
  return 0.42 + 0.5 * std::cos(std::numbers::pi * u) +
         0.08 * std::cos(2.0 * std::numbers::pi * u);
}

double sinc(double v) {
  if (std::abs(v) < 1e-12) return 1.0;
  const double pv = std::numbers::pi * v;
  return std::sin(pv) / pv;
}

void wr_u32(std::vector<uint8_t>& b, uint32_t v) {
  b.push_back(uint8_t(v & 0xff));
  b.push_back(uint8_t(v >> 8 & 0xff));
  b.push_back(uint8_t(v >> 16 & 0xff));
  b.push_back(uint8_t(v >> 24 & 0xff));
}

void wr_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v & 0xff));
  b.push_back(uint8_t(v >> 8 & 0xff));
}

void wr_tag(std::vector<uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer decode_wav(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 12) fail("wav: file shorter than RIFF header (12 bytes)");
  if (!tag_is(bytes, 0, "RIFF")) fail("wav: missing RIFF tag at byte 0");
  if (!tag_is(bytes, 8, "WAVE")) fail("wav: missing WAVE tag at byte 8");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_size = 0;
  bool have_data = false;

  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const size_t id_off = off;
    const uint32_t chunk_size = rd_u32(bytes, off + 4);
    const size_t body = off + 8;
    if (body + chunk_size > bytes.size())
      fail("wav: chunk at byte ", id_off, " overruns file (size ", chunk_size,
           ")");
    if (tag_is(bytes, id_off, "fmt ")) {
      if (chunk_size < 16)
        fail("wav: fmt chunk at byte ", id_off, " shorter than 16 bytes");
      format = rd_u16(bytes, body);
      channels = rd_u16(bytes, body + 2);
      rate = rd_u32(bytes, body + 4);
      bits = rd_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, id_off, "data")) {
      data_off = body;
      data_size = chunk_size;
      have_data = true;
    }
    off = body + chunk_size + (chunk_size & 1);
  }
  if (off != bytes.size() && off + 8 > bytes.size() && off < bytes.size())
    fail("wav: trailing garbage at byte ", off);
  if (!have_fmt) fail("wav: missing fmt chunk");
  if (!have_data) fail("wav: missing data chunk");
  if (data_size == 0) fail("wav: zero-length data chunk at byte ", data_off);
  if (rate == 0) fail("wav: sample rate is zero");
  if (channels < 1 || channels > 2)
    fail("wav: unsupported channel count ", channels, " (only 1-2 supported)");

  const bool pcm16 = format == 1 && bits == 16;
  const bool pcm24 = format == 1 && bits == 24;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !pcm24 && !f32)
    fail("wav: unsupported format tag ", format, " with ", bits,
         " bits (supported: PCM 16/24-bit, IEEE float32)");

  const size_t frame_bytes = size_t(channels) * bits / 8;
  if (data_size % frame_bytes != 0)
    fail("wav: data chunk at byte ", data_off, " (", data_size,
         " bytes) is not a whole number of ", frame_bytes, "-byte frames");
  const size_t frames = data_size / frame_bytes;

  std::vector<float> mono(frames);
  const uint8_t* d = bytes.data() + data_off;
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* s = d + i * frame_bytes + size_t(c) * bits / 8;
      if (pcm16) {
        const int16_t v = int16_t(uint16_t(s[0]) | uint16_t(s[1]) << 8);
        acc += double(v) / 32768.0;
      } else if (pcm24) {
        int32_t v = int32_t(s[0]) | int32_t(s[1]) << 8 | int32_t(s[2]) << 16;
        if (v & 0x800000) v |= ~0xffffff;
        acc += double(v) / 8388608.0;
      } else {
        float f;
        std::memcpy(&f, s, 4);
        acc += double(f);
      }
    }
    mono[i] = float(acc / channels);
  }

  AudioBuffer out;
  out.sample_rate = 16000;
  out.samples = rate == 16000 ? std::move(mono)
                              : resample(mono, double(rate), 16000.0);

  float peak = 0;
  for (float v : out.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0f)
    for (float& v : out.samples) v /= peak;
  return out;
}

AudioBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open ", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    fail(path, ": ", e.what());
  }
}

std::vector<uint8_t> encode_wav(const AudioBuffer& buf, WavFormat fmt) {
  const int bits = fmt == WavFormat::pcm16 ? 16
                   : fmt == WavFormat::pcm24 ? 24
                                             : 32;
  const uint16_t tag = fmt == WavFormat::float32 ? 3 : 1;
  const uint32_t n = uint32_t(buf.samples.size());
  const uint32_t data_size = n * uint32_t(bits / 8);
  const bool ieee = fmt == WavFormat::float32;
  const uint32_t fmt_size = ieee ? 18 : 16;
  // RIFF(4+4) WAVE(4) fmt(8+fmt_size) [fact(8+4)] data(8+data_size)
  const uint32_t riff_size =
      4 + 8 + fmt_size + (ieee ? 12 : 0) + 8 + data_size;

  std::vector<uint8_t> b;
  b.reserve(riff_size + 8);
  wr_tag(b, "RIFF");
  wr_u32(b, riff_size);
  wr_tag(b, "WAVE");
  wr_tag(b, "fmt ");
  wr_u32(b, fmt_size);
  wr_u16(b, tag);
  wr_u16(b, 1);  // mono
  wr_u32(b, uint32_t(buf.sample_rate));
  wr_u32(b, uint32_t(buf.sample_rate) * uint32_t(bits / 8));
  wr_u16(b, uint16_t(bits / 8));
  wr_u16(b, uint16_t(bits));
  if (ieee) {
    wr_u16(b, 0);  // cbSize
    wr_tag(b, "fact");
    wr_u32(b, 4);
    wr_u32(b, n);
  }
  wr_tag(b, "data");
  wr_u32(b, data_size);
  for (float v : buf.samples) {
    const float c = std::clamp(v, -1.0f, 1.0f);
    if (fmt == WavFormat::pcm16) {
      // Same scale as the decoder (1/32768) so round-trip error stays within
      // half an LSB; +1.0 saturates to the max positive code.
      const long q = std::clamp(std::lround(double(c) * 32768.0), -32768l, 32767l);
      wr_u16(b, uint16_t(int16_t(q)));
    } else if (fmt == WavFormat::pcm24) {
      const int32_t q = int32_t(std::clamp(
          std::lround(double(c) * 8388608.0), -8388608l, 8388607l));
      b.push_back(uint8_t(q & 0xff));
      b.push_back(uint8_t(q >> 8 & 0xff));
      b.push_back(uint8_t(q >> 16 & 0xff));
    } else {
      uint32_t u;
      std::memcpy(&u, &v, 4);
      wr_u32(b, u);
    }
  }
  return b;
}

void save_wav(const std::string& path, const AudioBuffer& buf, WavFormat fmt) {
  const std::vector<uint8_t> bytes = encode_wav(buf, fmt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open ", path, " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) fail("write failed: ", path);
}

std::vector<float> resample(const std::vector<float>& x, double sr_in,
                            double sr_out) {
  PHASOR_CHECK(sr_in > 0 && sr_out > 0, "resample: rates must be positive");
  if (sr_in == sr_out) return x;
  const double ratio = sr_out / sr_in;
  const int64_t out_len = int64_t(std::llround(double(x.size()) * ratio));
  const double cutoff = std::min(1.0, ratio);  // fraction of input Nyquist
  constexpr int kHalf = 16;                    // 32 taps
  const int64_t n_in = int64_t(x.size());

  std::vector<float> y(static_cast<size_t>(out_len));
  for (int64_t n = 0; n < out_len; ++n) {
    const double t = double(n) / ratio;
    const int64_t base = int64_t(std::floor(t));
    double acc = 0;
    for (int64_t m = base - kHalf + 1; m <= base + kHalf; ++m) {
      if (m < 0 || m >= n_in) continue;
      const double d = double(m) - t;
      acc += double(x[size_t(m)]) * cutoff * sinc(cutoff * d) *
             blackman(d / kHalf);
    }
    y[size_t(n)] = float(acc);
  }
  return y;
}

}  // namespace phasor
