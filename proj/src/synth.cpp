#include "phasor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phasor/common.hpp"
#include "phasor/rng.hpp"

namespace phasor {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double pc_freq(int pitch_class, double octave_base_hz) {
  return octave_base_hz * std::pow(2.0, double(pitch_class % 12) / 12.0);
}

struct ChordDegree {
  int root_offset;  // semitones above the key
  bool minor;
};
// I vi IV V, the four-bar loop every stem follows.
constexpr ChordDegree kProgression[4] = {
    {0, false}, {9, true}, {5, false}, {7, false}};

constexpr int kMajorScale[7] = {0, 2, 4, 5, 7, 9, 11};

void add_partial(std::vector<float>& buf, int sr, int64_t start, double dur_s,
                 double freq, double amp, double attack_s, double decay_tau) {
  const int64_t n = std::min<int64_t>(int64_t(std::llround(dur_s * sr)),
                                      int64_t(buf.size()) - start);
  const double w = kTwoPi * freq / sr;
  for (int64_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    double env = std::exp(-t / decay_tau);
    if (t < attack_s) env *= t / attack_s;
    // Short release ramp so note ends click-free.
    const double remain = dur_s - t;
    if (remain < 0.005) env *= std::max(remain, 0.0) / 0.005;
    buf[size_t(start + i)] += float(amp * env * std::sin(w * double(i)));
  }
}

void add_click(std::vector<float>& buf, int sr, int64_t start, double amp) {
  // 5 ms burst of 1 kHz with a 1 ms exponential decay.
  const int64_t n =
      std::min<int64_t>(int64_t(std::llround(0.005 * sr)),
                        int64_t(buf.size()) - start);
  const double w = kTwoPi * 1000.0 / sr;
  for (int64_t i = 0; i < n; ++i) {
    const double env = std::exp(-double(i) / (0.001 * sr));
    buf[size_t(start + i)] += float(amp * env * std::sin(w * double(i)));
  }
}

void add_kick(std::vector<float>& buf, int sr, int64_t start, double amp) {
  const int64_t n = std::min<int64_t>(int64_t(std::llround(0.25 * sr)),
                                      int64_t(buf.size()) - start);
  double phase = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double f = 45.0 + 65.0 * std::exp(-t / 0.04);  // pitch drop
    phase += kTwoPi * f / sr;
    const double env = std::exp(-t / 0.11);
    buf[size_t(start + i)] += float(amp * env * std::sin(phase));
  }
}

void add_snare(std::vector<float>& buf, int sr, int64_t start, double amp,
               Rng& rng) {
  const int64_t n = std::min<int64_t>(int64_t(std::llround(0.18 * sr)),
                                      int64_t(buf.size()) - start);
  const double w = kTwoPi * 185.0 / sr;
  for (int64_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double body = 0.45 * std::exp(-t / 0.05) * std::sin(w * double(i));
    const double rattle =
        0.55 * std::exp(-t / 0.045) * (2.0 * rng.uniform() - 1.0);
    buf[size_t(start + i)] += float(amp * (body + rattle));
  }
}

void add_hat(std::vector<float>& buf, int sr, int64_t start, double amp,
             Rng& rng) {
  const int64_t n = std::min<int64_t>(int64_t(std::llround(0.06 * sr)),
                                      int64_t(buf.size()) - start);
  double prev = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double cur = 2.0 * rng.uniform() - 1.0;
    // First difference tilts the noise toward high frequencies.
    buf[size_t(start + i)] += float(amp * std::exp(-t / 0.02) * (cur - prev));
    prev = cur;
  }
}

int64_t grid_sample(double t_s, int sr) {
  return int64_t(std::llround(t_s * sr));
}

AudioBuffer click_track_at(const std::vector<double>& click_times,
                           const std::vector<double>& amps, double duration_s,
                           int sr) {
  AudioBuffer out;
  out.sample_rate = sr;
  out.samples.assign(size_t(std::llround(duration_s * sr)), 0.0f);
  for (size_t i = 0; i < click_times.size(); ++i) {
    const int64_t at = grid_sample(click_times[i], sr);
    if (at >= 0 && at < int64_t(out.samples.size()))
      add_click(out.samples, sr, at, amps[i]);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& stem_names() {
  static const std::vector<std::string> kNames = {"drums", "bass", "chords",
                                                  "lead"};
  return kNames;
}

SyntheticSong make_song(int64_t song_id, uint64_t corpus_seed) {
  Rng s = Rng(corpus_seed).derive("song", uint64_t(song_id));
  SyntheticSong song;
  song.song_id = song_id;
  song.tempo_bpm = s.uniform(60.0, 180.0);
  song.key = int(s.uniform_int(12));
  song.bars = 16;
  song.seed = s.next_u64();
  song.duration_s = song.bars * 4.0 * 60.0 / song.tempo_bpm;
  return song;
}

RenderedSong render_song(const SyntheticSong& spec, int sr) {
  PHASOR_CHECK(spec.tempo_bpm > 0, "render_song: tempo must be positive");
  PHASOR_CHECK(spec.bars > 0, "render_song: bars must be positive");
  PHASOR_CHECK(spec.key >= 0 && spec.key < 12,
               "render_song: key must be a pitch class 0..11, got ", spec.key);

  const double spb = 60.0 / spec.tempo_bpm;  // seconds per beat
  const double duration = spec.bars * 4.0 * spb;
  const int64_t len = int64_t(std::llround(duration * sr));
  Rng root(spec.seed);

  RenderedSong out;
  for (const std::string& name : stem_names()) {
    AudioBuffer b;
    b.sample_rate = sr;
    b.samples.assign(size_t(len), 0.0f);
    out.stems.emplace(name, std::move(b));
    out.onsets.emplace(name, std::vector<double>{});
  }
  for (int64_t beat = 0; beat < spec.bars * 4; ++beat)
    out.beat_times.push_back(double(beat) * spb);

  // Drums: kick on 1 and 3, snare on 2 and 4, hats on eighths.
  {
    Rng rng = root.derive("drums");
    std::vector<float>& buf = out.stems["drums"].samples;
    std::vector<double>& ons = out.onsets["drums"];
    for (int bar = 0; bar < spec.bars; ++bar)
      for (int q = 0; q < 4; ++q) {
        const double beat_t = (bar * 4 + q) * spb;
        const double vel = 0.85 + 0.15 * rng.uniform();
        if (q == 0 || q == 2) {
          add_kick(buf, sr, grid_sample(beat_t, sr), 0.95 * vel);
          ons.push_back(beat_t);
        } else {
          add_snare(buf, sr, grid_sample(beat_t, sr), 0.55 * vel, rng);
          ons.push_back(beat_t);
        }
        const double off_t = beat_t + 0.5 * spb;
        add_hat(buf, sr, grid_sample(beat_t, sr), 0.22 * vel, rng);
        add_hat(buf, sr, grid_sample(off_t, sr),
                0.16 * (0.85 + 0.15 * rng.uniform()), rng);
        ons.push_back(off_t);
      }
    std::sort(ons.begin(), ons.end());
    ons.erase(std::unique(ons.begin(), ons.end()), ons.end());
  }

  // Bass: chord root (octave 2) every beat, occasionally the fifth.
  {
    Rng rng = root.derive("bass");
    std::vector<float>& buf = out.stems["bass"].samples;
    std::vector<double>& ons = out.onsets["bass"];
    for (int bar = 0; bar < spec.bars; ++bar) {
      const ChordDegree chord = kProgression[bar % 4];
      for (int q = 0; q < 4; ++q) {
        const double t = (bar * 4 + q) * spb;
        int pc = (spec.key + chord.root_offset) % 12;
        if (q == 3 && rng.uniform() < 0.5) pc = (pc + 7) % 12;  // walk to V
        const double f = pc_freq(pc, 65.40639132514966);
        const double vel = 0.8 + 0.2 * rng.uniform();
        const double gate = 0.85 * spb;
        add_partial(buf, sr, grid_sample(t, sr), gate, f, 0.62 * vel, 0.005,
                    0.6 * spb);
        add_partial(buf, sr, grid_sample(t, sr), gate, 2.0 * f, 0.16 * vel,
                    0.005, 0.45 * spb);
        ons.push_back(t);
      }
    }
  }

  // Chords: one sustained triad per bar (octave 4).
  {
    Rng rng = root.derive("chords");
    std::vector<float>& buf = out.stems["chords"].samples;
    std::vector<double>& ons = out.onsets["chords"];
    for (int bar = 0; bar < spec.bars; ++bar) {
      const ChordDegree chord = kProgression[bar % 4];
      const double t = bar * 4.0 * spb;
      const double gate = 3.9 * spb;
      const int intervals[3] = {0, chord.minor ? 3 : 4, 7};
      for (int v = 0; v < 3; ++v) {
        const int pc = (spec.key + chord.root_offset + intervals[v]) % 12;
        const double detune = 1.0 + 0.0015 * (rng.uniform() - 0.5);
        const double f = pc_freq(pc, 261.6255653005986) * detune;
        add_partial(buf, sr, grid_sample(t, sr), gate, f, 0.14, 0.03,
                    2.5 * spb);
        add_partial(buf, sr, grid_sample(t, sr), gate, 2.0 * f, 0.04, 0.03,
                    1.8 * spb);
      }
      ons.push_back(t);
    }
  }

  // Lead: eighth-note random walk on the major scale (octave 5), with rests.
  {
    Rng rng = root.derive("lead");
    std::vector<float>& buf = out.stems["lead"].samples;
    std::vector<double>& ons = out.onsets["lead"];
    int degree = int(rng.uniform_int(7));
    for (int64_t e = 0; e < int64_t(spec.bars) * 8; ++e) {
      const double t = double(e) * 0.5 * spb;
      degree = std::clamp(degree + int(rng.uniform_int(5)) - 2, 0, 6);
      if (rng.uniform() < 0.3) continue;  // rest
      const int pc = (spec.key + kMajorScale[degree]) % 12;
      const double f = pc_freq(pc, 523.2511306011972);
      const double vel = 0.75 + 0.25 * rng.uniform();
      const double gate = 0.8 * 0.5 * spb;
      add_partial(buf, sr, grid_sample(t, sr), gate, f, 0.4 * vel, 0.003,
                  0.5 * gate);
      add_partial(buf, sr, grid_sample(t, sr), gate, 3.0 * f, 0.08 * vel,
                  0.003, 0.35 * gate);
      ons.push_back(t);
    }
  }

  // Keep the full mixdown inside [-1, 1] by scaling every stem together, so
  // relative stem levels and time alignment are untouched.
  std::vector<double> mix(size_t(len), 0.0);
  for (const auto& [name, stem] : out.stems)
    for (int64_t i = 0; i < len; ++i) mix[size_t(i)] += stem.samples[size_t(i)];
  double peak = 0;
  for (double v : mix) peak = std::max(peak, std::abs(v));
  if (peak > 0.9) {
    const float g = float(0.9 / peak);
    for (auto& [name, stem] : out.stems)
      for (float& v : stem.samples) v *= g;
  }
  return out;
}

AudioBuffer mix_stems(const std::vector<const AudioBuffer*>& stems,
                      const std::vector<float>& gains) {
  PHASOR_CHECK(!stems.empty(), "mix_stems: need at least one stem");
  PHASOR_CHECK(stems.size() == gains.size(),
               "mix_stems: ", stems.size(), " stems vs ", gains.size(),
               " gains");
  AudioBuffer out;
  out.sample_rate = stems[0]->sample_rate;
  out.samples.assign(stems[0]->samples.size(), 0.0f);
  for (size_t s = 0; s < stems.size(); ++s) {
    PHASOR_CHECK(stems[s]->samples.size() == out.samples.size(),
                 "mix_stems: stem ", s, " length mismatch");
    PHASOR_CHECK(stems[s]->sample_rate == out.sample_rate,
                 "mix_stems: stem ", s, " sample rate mismatch");
    for (size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] += gains[s] * stems[s]->samples[i];
  }
  return out;
}

AudioBuffer mixdown(const RenderedSong& song) {
  std::vector<const AudioBuffer*> ptrs;
  for (const std::string& name : stem_names())
    ptrs.push_back(&song.stems.at(name));
  return mix_stems(ptrs, std::vector<float>(ptrs.size(), 1.0f));
}

AudioBuffer synth_metronome(double bpm, double duration_s, int sr) {
  PHASOR_CHECK(bpm >= 30.0 && bpm <= 240.0,
               "synth_metronome: bpm must be in [30, 240], got ", bpm);
  PHASOR_CHECK(duration_s > 0, "synth_metronome: duration must be positive");
  std::vector<double> times, amps;
  const double period = 60.0 / bpm;
  for (double t = 0; t < duration_s; t += period) {
    times.push_back(t);
    amps.push_back(0.8);
  }
  return click_track_at(times, amps, duration_s, sr);
}

AudioBuffer synth_meter_metronome(double bpm, int beats_per_bar,
                                  double duration_s, int sr) {
  PHASOR_CHECK(bpm >= 30.0 && bpm <= 240.0,
               "synth_meter_metronome: bpm must be in [30, 240], got ", bpm);
  PHASOR_CHECK(beats_per_bar >= 1, "synth_meter_metronome: beats_per_bar");
  std::vector<double> times, amps;
  const double period = 60.0 / bpm;
  int64_t beat = 0;
  for (double t = 0; t < duration_s; t += period, ++beat) {
    times.push_back(t);
    amps.push_back(beat % beats_per_bar == 0 ? 0.9 : 0.45);
  }
  return click_track_at(times, amps, duration_s, sr);
}

AudioBuffer synth_tempo_ramp(double bpm_start, double bpm_end,
                             double duration_s, int sr) {
  PHASOR_CHECK(bpm_start >= 30.0 && bpm_start <= 240.0 && bpm_end >= 30.0 &&
                   bpm_end <= 240.0,
               "synth_tempo_ramp: bpm must be in [30, 240]");
  std::vector<double> times, amps;
  double t = 0;
  while (t < duration_s) {
    times.push_back(t);
    amps.push_back(0.8);
    const double frac = t / duration_s;
    const double bpm = bpm_start + (bpm_end - bpm_start) * frac;
    t += 60.0 / bpm;  // instantaneous period at the current tempo
  }
  return click_track_at(times, amps, duration_s, sr);
}

AudioBuffer synth_chord(int chord_class, double duration_s, uint64_t seed,
                        int sr) {
  PHASOR_CHECK(chord_class >= 0 && chord_class < 25,
               "synth_chord: class must be 0..24, got ", chord_class);
  PHASOR_CHECK(duration_s > 0, "synth_chord: duration must be positive");
  AudioBuffer out;
  out.sample_rate = sr;
  const int64_t len = int64_t(std::llround(duration_s * sr));
  out.samples.assign(size_t(len), 0.0f);
  Rng rng(seed);
  if (chord_class == 24) {  // no-chord: faint noise floor
    for (float& v : out.samples) v = float(1e-4 * (2.0 * rng.uniform() - 1.0));
    return out;
  }
  const int root = chord_class % 12;
  const bool minor = chord_class >= 12;
  const int intervals[3] = {0, minor ? 3 : 4, 7};
  // Voicing varies with the seed: octave doubling and level jitter.
  const double base = rng.uniform() < 0.5 ? 130.8127826502993   // octave 3
                                          : 261.6255653005986;  // octave 4
  for (int v = 0; v < 3; ++v) {
    const int pc = (root + intervals[v]) % 12;
    const double detune = 1.0 + 0.002 * (rng.uniform() - 0.5);
    const double f = pc_freq(pc, base) * detune;
    const double amp = 0.16 + 0.06 * rng.uniform();
    add_partial(out.samples, sr, 0, duration_s, f, amp, 0.02, duration_s);
    add_partial(out.samples, sr, 0, duration_s, 2.0 * f, 0.3 * amp, 0.02,
                duration_s);
    if (rng.uniform() < 0.5)
      add_partial(out.samples, sr, 0, duration_s, 4.0 * f, 0.1 * amp, 0.02,
                  duration_s);
  }
  return out;
}

}  // namespace phasor
