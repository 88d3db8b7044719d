#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phasor/audio.hpp"

namespace phasor {

// A procedurally generated multitrack song: four stems (drums, bass, chords,
// lead) rendered from one tempo/key grid so all onsets are bar-aligned and
// the stems form time-aligned, instrument-disjoint layers.
struct SyntheticSong {
  int64_t song_id = 0;
  uint64_t seed = 0;
  double tempo_bpm = 120.0;  // drawn from [60, 180]
  int key = 0;               // pitch class 0..11
  int bars = 16;             // loop length
  double duration_s = 0.0;   // bars * 4 beats * 60 / tempo_bpm
};

// Deterministic song parameters for `song_id` under a corpus seed.
SyntheticSong make_song(int64_t song_id, uint64_t corpus_seed);

struct RenderedSong {
  std::map<std::string, AudioBuffer> stems;
  // Ground-truth event onsets in seconds per stem, exactly on the tempo grid.
  std::map<std::string, std::vector<double>> onsets;
  std::vector<double> beat_times;  // every beat, 4 per bar
};

// Pure function of the spec: two calls produce bit-identical buffers. All
// stems have equal length and the full mixdown has peak <= 1.
RenderedSong render_song(const SyntheticSong& spec, int sample_rate = 16000);

const std::vector<std::string>& stem_names();  // drums, bass, chords, lead

// Sample-wise sum of equally long buffers, scaled per stem.
AudioBuffer mix_stems(const std::vector<const AudioBuffer*>& stems,
                      const std::vector<float>& gains);
AudioBuffer mixdown(const RenderedSong& song);

// Click track: 5 ms exponentially decaying 1 kHz bursts every 60/bpm seconds,
// first click at t = 0. Requires 30 <= bpm <= 240.
AudioBuffer synth_metronome(double bpm, double duration_s,
                            int sample_rate = 16000);

// Accented click track: `beats_per_bar` clicks per bar with beat 1 louder
// (periodic non-isochronous accent pattern at a fixed beat period).
AudioBuffer synth_meter_metronome(double bpm, int beats_per_bar,
                                  double duration_s, int sample_rate = 16000);

// Click track whose instantaneous tempo ramps linearly bpm_start -> bpm_end.
AudioBuffer synth_tempo_ramp(double bpm_start, double bpm_end,
                             double duration_s, int sample_rate = 16000);

// 25-class chord vocabulary: class 0..11 major triads by root pitch class,
// 12..23 minor triads, 24 no-chord (near-silence). Deterministic per seed;
// voicing and level vary with the seed.
AudioBuffer synth_chord(int chord_class, double duration_s, uint64_t seed,
                        int sample_rate = 16000);

}  // namespace phasor
