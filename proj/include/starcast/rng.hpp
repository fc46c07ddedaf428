// Copyright 2026 The StarCast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <mutex>
#include <span>

#include "starcast/bytes.hpp"

namespace starcast {

/// Source of uniformly random bytes.
class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// OpenSSL's CSPRNG. Thread-safe.
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible byte stream: block i is SHA-256(seed || be64(i)). Used for
/// golden vectors and scripted scenarios; not for production keys.
class DeterministicRng final : public Rng {
 public:
  explicit DeterministicRng(std::uint64_t seed);
  explicit DeterministicRng(ByteView seed);

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  std::mutex mu_;
  Bytes seed_;
  std::uint64_t counter_ = 0;
  std::uint8_t block_[32] = {};
  std::size_t used_ = sizeof(block_);
};

}  // namespace starcast
