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

// Serial reference vs OpenMP kernel, side by side.
//   ./bench_kernels --benchmark_filter=Resample

#include <benchmark/benchmark.h>

#include "dsynth/audio.hpp"
#include "dsynth/character_pool.hpp"
#include "dsynth/evaluation.hpp"
#include "dsynth/mock_backends.hpp"
#include "dsynth/orchestrator.hpp"
#include "dsynth/rng.hpp"

namespace {

using namespace dsynth;

AudioSegment noise(std::size_t n, int rate) {
  Rng rng(9);
  AudioSegment s;
  s.sample_rate = rate;
  s.samples.resize(n);
  for (auto& x : s.samples) x = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(20000)) - 10000);
  return s;
}

void BM_ResampleSerial(benchmark::State& state) {
  const AudioSegment s = noise(static_cast<std::size_t>(state.range(0)), 16000);
  for (auto _ : state) benchmark::DoNotOptimize(resample_linear_serial(s, 22050));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
void BM_ResampleParallel(benchmark::State& state) {
  const AudioSegment s = noise(static_cast<std::size_t>(state.range(0)), 16000);
  for (auto _ : state) benchmark::DoNotOptimize(resample_linear(s, 22050));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResampleSerial)->Arg(16000)->Arg(16000 * 60);
BENCHMARK(BM_ResampleParallel)->Arg(16000)->Arg(16000 * 60);

std::vector<TranscriptPair> transcripts(std::size_t n) {
  static const char* words[] = {"we", "should", "go", "hiking", "this", "weekend", "maybe", "not"};
  Rng rng(4);
  std::vector<TranscriptPair> out(n);
  for (auto& p : out) {
    for (int w = 0; w < 40; ++w) {
      p.reference += std::string(w ? " " : "") + words[rng.below(8)];
      p.hypothesis += std::string(w ? " " : "") + words[rng.below(8)];
    }
  }
  return out;
}

void BM_ErrorRateSerial(benchmark::State& state) {
  const auto pairs = transcripts(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corpus_error_rate_serial(pairs));
}
void BM_ErrorRateParallel(benchmark::State& state) {
  const auto pairs = transcripts(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corpus_error_rate(pairs));
}
BENCHMARK(BM_ErrorRateSerial)->Arg(2000);
BENCHMARK(BM_ErrorRateParallel)->Arg(2000);

// Mock backends, so this measures orchestration and synthesis bookkeeping.
void BM_Batch(benchmark::State& state) {
  const CharacterPool pool = load_pool(DSYNTH_SOURCE_DIR "/data/pool/pool.json");
  PipelineConfig config;
  config.variant = PipelineVariant::critic_loop(2);
  MockWriter writer;
  MockSynthesizer synth;
  MockCritic critic;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_batch(pool, config, 30, 42, static_cast<int>(state.range(0)), {writer, synth, critic}));
  }
}
BENCHMARK(BM_Batch)->ArgName("parallelism")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
