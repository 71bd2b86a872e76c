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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dsynth/error.hpp"
#include "dsynth/audio.hpp"
#include "dsynth/rng.hpp"

namespace dsynth {
namespace {

// Builds a WAV container by hand so the decoder is checked against an
// independent writer.
std::vector<std::uint8_t> wav_bytes(const std::vector<std::int16_t>& interleaved, int channels,
                                    int rate, bool extra_chunk = false, int bits = 16,
                                    int format = 1) {
  std::vector<std::uint8_t> out;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  tag("RIFF");
  u32(36 + data_bytes + (extra_chunk ? 14 : 0));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(static_cast<std::uint16_t>(format));
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(static_cast<std::uint16_t>(bits));
  if (extra_chunk) {
    tag("LIST");
    u32(5);
    out.insert(out.end(), {'I', 'N', 'F', 'O', 'x', 0});
  }
  tag("data");
  u32(data_bytes);
  for (std::int16_t s : interleaved) u16(static_cast<std::uint16_t>(s));
  return out;
}

TEST(DecodeWav, OneSecondOfSilence) {
  const auto seg = decode_wav(wav_bytes(std::vector<std::int16_t>(22050, 0), 1, 22050));
  EXPECT_EQ(seg.samples.size(), 22050u);
  EXPECT_EQ(seg.sample_rate, 22050);
  EXPECT_DOUBLE_EQ(seg.duration(), 1.0);
}

TEST(DecodeWav, StereoCancellation) {
  std::vector<std::int16_t> st;
  for (int i = 0; i < 500; ++i) {
    const auto v = static_cast<std::int16_t>((i * 37) % 20000 - 10000);
    st.push_back(v);
    st.push_back(static_cast<std::int16_t>(-v));
  }
  const auto seg = decode_wav(wav_bytes(st, 2, 16000));
  ASSERT_EQ(seg.samples.size(), 500u);
  for (auto s : seg.samples) ASSERT_EQ(s, 0);
}

TEST(DecodeWav, SkipsUnknownChunks) {
  const auto seg = decode_wav(wav_bytes({1, 2, 3}, 1, 8000, true));
  EXPECT_EQ(seg.samples, (std::vector<std::int16_t>{1, 2, 3}));
}

TEST(DecodeWav, Malformed) {
  const auto good = wav_bytes({1, 2, 3}, 1, 8000);
  EXPECT_THROW(decode_wav(std::span(good).first(20)), FormatError);
  std::vector<std::uint8_t> not_riff = good;
  std::memcpy(not_riff.data(), "RIFX", 4);
  EXPECT_THROW(decode_wav(not_riff), FormatError);
  EXPECT_THROW(decode_wav(wav_bytes({1, 2, 3, 4}, 1, 8000, false, 16, 3)), FormatError);
  EXPECT_THROW(decode_wav(wav_bytes({1, 2, 3, 4}, 1, 8000, false, 8)), FormatError);
  EXPECT_THROW(decode_wav(wav_bytes({1, 2, 3}, 3, 8000)), FormatError);
  EXPECT_THROW(decode_wav(std::vector<std::uint8_t>{}), FormatError);
}

TEST(EncodeWav, CanonicalHeaderAndIdentity) {
  Rng rng(3);
  std::vector<std::int16_t> pcm(1001);
  for (auto& s : pcm) s = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(65536)) - 32768);
  const auto bytes = encode_wav(pcm, 24000);
  EXPECT_EQ(bytes.size(), 44u + 2 * pcm.size());
  EXPECT_EQ(bytes, wav_bytes(pcm, 1, 24000));
  const auto back = decode_wav(bytes);
  EXPECT_EQ(back.samples, pcm);
  EXPECT_EQ(back.sample_rate, 24000);
}

AudioSegment seg(std::size_t n, int rate, std::int16_t value = 100) {
  AudioSegment s;
  s.samples.assign(n, value);
  s.sample_rate = rate;
  return s;
}

TEST(Resample, LengthFormulaAndIdentity) {
  EXPECT_EQ(resampled_length(16000, 16000, 22050), 22050u);
  EXPECT_EQ(resampled_length(1, 16000, 22050), 2u);
  EXPECT_EQ(resampled_length(3, 44100, 22050), 2u);
  const auto s = seg(777, 22050);
  EXPECT_EQ(resample_linear(s, 22050), s);
  EXPECT_THROW(resample_linear(seg(0, 16000), 22050), ResampleError);
}

TEST(Resample, LinearInterpolationValues) {
  AudioSegment ramp;
  ramp.sample_rate = 10;
  ramp.samples = {0, 100, 200, 300};
  const auto up = resample_linear_serial(ramp, 20);
  EXPECT_EQ(up.samples, (std::vector<std::int16_t>{0, 50, 100, 150, 200, 250, 300, 300}));
}

TEST(Resample, ParallelMatchesSerial) {
  Rng rng(11);
  for (int rate : {8000, 16000, 24000, 44100, 48000}) {
    AudioSegment s;
    s.sample_rate = rate;
    s.samples.resize(70000 + rng.below(5000));
    for (auto& x : s.samples) x = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(20000)) - 10000);
    EXPECT_EQ(resample_linear(s, 22050), resample_linear_serial(s, 22050)) << rate;
  }
}

TEST(Assemble, ThreeOneSecondSegments) {
  const AudioSegment one = seg(22050, 22050);
  const auto d = assemble_dialogue(std::vector<AudioSegment>{one, one, one}, 0.3, 22050);
  EXPECT_NEAR(total_duration(d), 3.6, 1.0 / 22050);
  ASSERT_EQ(d.turn_map.size(), 3u);
  EXPECT_DOUBLE_EQ(d.turn_map[0].start_seconds(22050), 0.0);
  EXPECT_NEAR(d.turn_map[1].start_seconds(22050), 1.3, 1.0 / 22050);
  EXPECT_NEAR(d.turn_map[2].start_seconds(22050), 2.6, 2.0 / 22050);
  // Gap samples are silent.
  for (std::size_t i = d.turn_map[0].end_sample; i < d.turn_map[1].start_sample; ++i) {
    ASSERT_EQ(d.waveform[i], 0);
  }
}

TEST(Assemble, SingleSegmentHasNoGap) {
  const auto d = assemble_dialogue(std::vector<AudioSegment>{seg(4410, 22050)}, 5.0, 22050);
  EXPECT_DOUBLE_EQ(total_duration(d), 0.2);
  ASSERT_EQ(d.turn_map.size(), 1u);
  EXPECT_EQ(d.turn_map[0].start_sample, 0u);
  EXPECT_EQ(d.turn_map[0].end_sample, 4410u);
}

TEST(Assemble, MixedRatesWithinOneSample) {
  const auto d = assemble_dialogue(std::vector<AudioSegment>{seg(22050, 22050), seg(16000, 16000)},
                                   0.0, 22050);
  EXPECT_LE(std::abs(total_duration(d) - 2.0), 1.0 / 22050);
}

TEST(Assemble, LinearInK) {
  const auto base = seg(3333, 22050);
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto d = assemble_dialogue(std::vector<AudioSegment>(k, base), 0.0, 22050);
    EXPECT_EQ(d.waveform.size(), 3333 * k);
    EXPECT_DOUBLE_EQ(total_duration(d), static_cast<double>(k) * base.duration());
  }
}

TEST(Assemble, RejectsEmptyAndNegativeGap) {
  EXPECT_THROW(assemble_dialogue(std::vector<AudioSegment>{}, 0.3, 22050), Error);
  EXPECT_THROW(assemble_dialogue(std::vector<AudioSegment>{seg(10, 22050)}, -0.1, 22050), Error);
}

TEST(AudioProperties, DurationConservationAndGapExactness) {
  Rng rng(2026);
  const int rates[] = {8000, 11025, 16000, 22050, 24000, 44100, 48000};
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 1 + rng.below(8);
    const int target = rates[rng.below(std::size(rates))];
    const double gap = static_cast<double>(rng.below(1000)) / 1000.0;
    std::vector<AudioSegment> segs;
    double analytic = gap * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      segs.push_back(seg(1 + rng.below(30000), rates[rng.below(std::size(rates))]));
      analytic += segs.back().duration();
    }
    const auto d = assemble_dialogue(segs, gap, target);
    ASSERT_LE(std::abs(total_duration(d) - analytic), static_cast<double>(n) / target + 1e-12);
    ASSERT_EQ(d.turn_map.size(), n);
    EXPECT_EQ(d.turn_map.front().start_sample, 0u);
    EXPECT_EQ(d.turn_map.back().end_sample, d.waveform.size());
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ASSERT_EQ(d.turn_map[i].end_sample + d.gap_samples, d.turn_map[i + 1].start_sample);
      ASSERT_LT(d.turn_map[i].start_sample, d.turn_map[i].end_sample);
    }
    EXPECT_EQ(d.gap_samples, gap_sample_count(gap, target));
  }
}

TEST(Silence, RoundsToNearestSample) {
  EXPECT_EQ(make_silence(0.2, 22050).samples.size(), 4410u);
  EXPECT_EQ(make_silence(0.0, 22050).samples.size(), 1u);
}

}  // namespace
}  // namespace dsynth
