// Copyright 2026 The histmut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HISTMUT_RNG_H_
#define HISTMUT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace histmut {

// Seeded pseudo-random stream. State can be saved and restored as text so a
// campaign can be resumed bit-exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform index in [0, n). n must be positive.
  size_t Below(size_t n) { return static_cast<size_t>(engine_() % n); }

  std::string SaveState() const;
  void RestoreState(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent seed for stream `index` of `master`.
uint64_t SplitSeed(uint64_t master, uint64_t index);

}  // namespace histmut

#endif  // HISTMUT_RNG_H_
