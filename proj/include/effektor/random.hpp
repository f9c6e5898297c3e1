/*
 * Copyright 2026 The Effektor Authors.
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

#ifndef EFFEKTOR_RANDOM_HPP_
#define EFFEKTOR_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace effektor {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t MixBits(std::uint64_t x);

// Stable 64-bit FNV-1a hash of a string. Used for role tags in seed paths so
// that seed derivation never depends on std::hash.
constexpr std::uint64_t HashTag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a child seed from a master seed and a path of integers (repetition
// index, role tag hash, ...). The result depends only on the arguments, never
// on scheduling order.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path);

inline Rng MakeRng(std::uint64_t seed) { return Rng(MixBits(seed)); }

}  // namespace effektor

#endif  // EFFEKTOR_RANDOM_HPP_
