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

#include "dsynth/audio.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "dsynth/error.hpp"

namespace dsynth {

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioSegment decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) {
    throw FormatError("WAV too short for RIFF header (" +
                      std::to_string(bytes.size()) + " bytes)");
  }
  if (!tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw FormatError("not a RIFF/WAVE container");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (tag_is(bytes, pos, "data")) {
        throw FormatError("data chunk declares " + std::to_string(size) +
                          " bytes but only " + std::to_string(bytes.size() - body) +
                          " remain");
      }
      throw FormatError("truncated chunk at offset " + std::to_string(pos));
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw FormatError("fmt chunk too small: " + std::to_string(size));
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (!have_data) throw FormatError("missing data chunk");
  if (format != kFormatPcm) {
    throw FormatError("unsupported encoding: format tag " + std::to_string(format));
  }
  if (bits != 16) {
    throw FormatError("unsupported bit depth: " + std::to_string(bits));
  }
  if (channels != 1 && channels != 2) {
    throw FormatError("unsupported channel count: " + std::to_string(channels));
  }
  if (rate == 0) throw FormatError("sample rate is zero");

  AudioSegment seg;
  seg.sample_rate = static_cast<int>(rate);
  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data.size() / frame_bytes;
  seg.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto left = static_cast<std::int16_t>(read_u16(data, f * frame_bytes));
    if (channels == 1) {
      seg.samples[f] = left;
    } else {
      const auto right = static_cast<std::int16_t>(read_u16(data, f * frame_bytes + 2));
      seg.samples[f] = static_cast<std::int16_t>((int{left} + int{right}) / 2);
    }
  }
  return seg;
}

std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples,
                                     int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (std::int16_t s : samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::size_t resampled_length(std::size_t length, int source_rate, int target_rate) {
  const auto num = static_cast<unsigned __int128>(length) * static_cast<unsigned>(target_rate);
  const auto den = static_cast<unsigned>(source_rate);
  return static_cast<std::size_t>((num + den - 1) / den);
}

namespace {

// Sample k of the output sits at source position k * source / target.
inline std::int16_t interpolate(const std::vector<std::int16_t>& in, std::size_t k,
                                std::uint64_t source, std::uint64_t target) {
  const std::uint64_t pos = k * source;
  const std::size_t i = pos / target;
  const std::uint64_t rem = pos % target;
  if (i + 1 >= in.size() || rem == 0) return in[std::min(i, in.size() - 1)];
  const double frac = static_cast<double>(rem) / static_cast<double>(target);
  const double y = in[i] + (in[i + 1] - in[i]) * frac;
  return static_cast<std::int16_t>(std::lround(y));
}

AudioSegment prepare_resample(const AudioSegment& segment, int target_rate,
                              std::size_t& out_len) {
  if (segment.sample_rate <= 0 || target_rate <= 0) {
    throw ResampleError("sample rates must be positive");
  }
  out_len = resampled_length(segment.samples.size(), segment.sample_rate, target_rate);
  if (out_len == 0) throw ResampleError("segment is empty after resampling");
  AudioSegment out;
  out.sample_rate = target_rate;
  out.silent_minimum = segment.silent_minimum;
  out.samples.resize(out_len);
  return out;
}

constexpr std::size_t kParallelThreshold = 1 << 16;

}  // namespace

AudioSegment resample_linear_serial(const AudioSegment& segment, int target_rate) {
  std::size_t n = 0;
  AudioSegment out = prepare_resample(segment, target_rate, n);
  if (segment.sample_rate == target_rate) {
    out.samples = segment.samples;
    return out;
  }
  const auto src = static_cast<std::uint64_t>(segment.sample_rate);
  const auto dst = static_cast<std::uint64_t>(target_rate);
  for (std::size_t k = 0; k < n; ++k) {
    out.samples[k] = interpolate(segment.samples, k, src, dst);
  }
  return out;
}

AudioSegment resample_linear(const AudioSegment& segment, int target_rate) {
  std::size_t n = 0;
  AudioSegment out = prepare_resample(segment, target_rate, n);
  if (segment.sample_rate == target_rate) {
    out.samples = segment.samples;
    return out;
  }
  const auto src = static_cast<std::uint64_t>(segment.sample_rate);
  const auto dst = static_cast<std::uint64_t>(target_rate);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::int64_t k = 0; k < count; ++k) {
    out.samples[static_cast<std::size_t>(k)] =
        interpolate(segment.samples, static_cast<std::size_t>(k), src, dst);
  }
  return out;
}

std::size_t gap_sample_count(double gap_seconds, int rate) {
  if (gap_seconds <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(gap_seconds * rate + 1e-9));
}

DialogueAudio assemble_dialogue(std::span<const AudioSegment> segments,
                                double gap_seconds, int target_rate) {
  if (segments.empty()) throw ResampleError("no segments to assemble");
  if (gap_seconds < 0.0) throw ResampleError("gap must be non-negative");
  DialogueAudio out;
  out.sample_rate = target_rate;
  out.gap_samples = gap_sample_count(gap_seconds, target_rate);

  std::vector<AudioSegment> resampled;
  resampled.reserve(segments.size());
  std::size_t total = out.gap_samples * (segments.size() - 1);
  for (const AudioSegment& seg : segments) {
    resampled.push_back(resample_linear(seg, target_rate));
    total += resampled.back().samples.size();
  }
  out.waveform.reserve(total);
  for (std::size_t i = 0; i < resampled.size(); ++i) {
    if (i > 0) out.waveform.insert(out.waveform.end(), out.gap_samples, 0);
    TurnSpan span;
    span.utterance_index = i;
    span.start_sample = out.waveform.size();
    out.waveform.insert(out.waveform.end(), resampled[i].samples.begin(),
                        resampled[i].samples.end());
    span.end_sample = out.waveform.size();
    out.turn_map.push_back(span);
  }
  return out;
}

double total_duration(const DialogueAudio& audio) {
  return static_cast<double>(audio.waveform.size()) / audio.sample_rate;
}

AudioSegment make_silence(double seconds, int sample_rate) {
  AudioSegment seg;
  seg.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  seg.samples.assign(std::max<std::size_t>(n, 1), 0);
  return seg;
}

}  // namespace dsynth
