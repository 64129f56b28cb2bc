/*
 * Copyright 2026 The trex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TREX_RANDOM_H_
#define TREX_RANDOM_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace trex {

// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent child seed from a parent seed and a stream id.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// FNV-1a over raw bytes; used to key per-call streams on argument values.
std::uint64_t hash_bytes(std::span<const std::byte> bytes,
                         std::uint64_t basis = 0xcbf29ce484222325ULL);

// The single pseudo-random generator used everywhere in the library.
//
// State advance is SplitMix64 (Steele, Lea & Flood): the state moves by the
// golden-ratio increment and each output is mix64(state). Uniform doubles
// take the top 53 bits. Gaussians use the Box-Muller transform and cache the
// second variate of each pair, so the stream of normals is a pure function of
// the seed and is straightforward to reproduce in other languages:
//
//   u1 = 1 - uniform(), u2 = uniform()
//   r = sqrt(-2 ln u1)
//   z0 = r cos(2 pi u2), z1 = r sin(2 pi u2)
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform on [0, 1).
  double uniform();
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal variate.
  double gaussian();

  // Fisher-Yates shuffle driven by uniform_index.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// 0..n-1 in a seeded random order.
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace trex

#endif  // TREX_RANDOM_H_
