// Copyright 2026 The dsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dsynth {

inline constexpr int kCanonicalSampleRate = 22050;
inline constexpr double kDefaultTurnGapSeconds = 0.3;

// Mono PCM-16.
struct AudioSegment {
  std::vector<std::int16_t> samples;
  int sample_rate = kCanonicalSampleRate;
  // Set for floor-length silence emitted for utterances with no speakable text.
  bool silent_minimum = false;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  bool operator==(const AudioSegment&) const = default;
};

struct TurnSpan {
  std::size_t utterance_index = 0;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;  // exclusive

  double start_seconds(int rate) const { return static_cast<double>(start_sample) / rate; }
  double end_seconds(int rate) const { return static_cast<double>(end_sample) / rate; }
};

struct DialogueAudio {
  std::vector<std::int16_t> waveform;
  int sample_rate = kCanonicalSampleRate;
  std::size_t gap_samples = 0;
  std::vector<TurnSpan> turn_map;
};

// RIFF/WAVE, PCM 16-bit, mono or stereo; stereo is averaged to mono.
// Throws FormatError with header diagnostics.
AudioSegment decode_wav(std::span<const std::uint8_t> bytes);

// Canonical 44-byte header, PCM-16 mono, no extra chunks.
std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples,
                                     int sample_rate);
inline std::vector<std::uint8_t> encode_wav(const AudioSegment& segment) {
  return encode_wav(segment.samples, segment.sample_rate);
}

// Output length of a linear resample: ceil(length * target / source).
std::size_t resampled_length(std::size_t length, int source_rate, int target_rate);

// Linear interpolation resampler. The serial version is the reference; the
// default dispatches to an OpenMP loop for long inputs. Both produce identical
// samples. Throws ResampleError on zero-length output.
AudioSegment resample_linear(const AudioSegment& segment, int target_rate);
AudioSegment resample_linear_serial(const AudioSegment& segment, int target_rate);

// Samples of silence inserted per gap: floor(gap * rate), so the assembled
// length never exceeds the analytic duration by more than one sample per turn.
std::size_t gap_sample_count(double gap_seconds, int rate);

// Resamples every segment to target_rate and concatenates them with
// `gap_seconds` of digital silence between consecutive turns.
DialogueAudio assemble_dialogue(std::span<const AudioSegment> segments,
                                double gap_seconds,
                                int target_rate = kCanonicalSampleRate);

double total_duration(const DialogueAudio& audio);

// Silence of `seconds` (rounded to nearest sample, at least one sample).
AudioSegment make_silence(double seconds, int sample_rate);

}  // namespace dsynth
