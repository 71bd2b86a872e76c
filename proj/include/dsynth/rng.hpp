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
#include <random>
#include <vector>

namespace dsynth {

// SplitMix64 finalizer. Used for every seed derivation so that derived seeds
// are identical across platforms and standard libraries.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of the run at `ordinal` in a batch seeded with `master`:
//   splitmix64(splitmix64(master) + ordinal)
constexpr std::uint64_t derive_run_seed(std::uint64_t master,
                                        std::uint64_t ordinal) {
  return splitmix64(splitmix64(master) + ordinal);
}

// Sub-stream seed for a named purpose within one run.
constexpr std::uint64_t derive_stream_seed(std::uint64_t run_seed,
                                           std::uint64_t stream) {
  return splitmix64(run_seed ^ splitmix64(stream));
}

// Deterministic RNG. std::mt19937_64's output sequence is fixed by the
// standard, but the std distributions are not, so draws are reduced by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t value;
    do {
      value = engine_();
    } while (value >= limit);
    return value % bound;
  }

  // Uniform real in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsynth
