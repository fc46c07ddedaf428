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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "starcast/policy.hpp"

namespace starcast::testing {

inline constexpr std::string_view kExamplePolicy = R"("Alpha" AND ("Leader" OR ("Blue" AND "Member")))";

// Plain recursive evaluation, kept apart from PolicyAst::evaluate.
inline bool brute_evaluate(const PolicyNode& n, const AttributeSet& s) {
  switch (n.kind) {
    case PolicyNode::Kind::kLeaf: return s.contains(n.attribute);
    case PolicyNode::Kind::kAnd: return brute_evaluate(*n.left, s) && brute_evaluate(*n.right, s);
    case PolicyNode::Kind::kOr: return brute_evaluate(*n.left, s) || brute_evaluate(*n.right, s);
  }
  return false;
}

// Random formula with exactly `leaves` leaves drawn from a pool of `pool`
// names, so repeated attributes occur.
inline PolicyAst random_policy(std::mt19937_64& rng, std::size_t leaves, std::size_t pool) {
  std::function<PolicyAst(std::size_t)> build = [&](std::size_t n) -> PolicyAst {
    if (n == 1) {
      return PolicyAst::leaf("a" + std::to_string(std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng)));
    }
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    PolicyAst l = build(k), r = build(n - k);
    return (rng() & 1) ? PolicyAst::conj(l, r) : PolicyAst::disj(l, r);
  };
  return build(leaves);
}

inline std::vector<std::string> distinct_leaves(const PolicyAst& ast) {
  std::vector<std::string> v = ast.leaves();
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline AttributeSet subset(const std::vector<std::string>& names, std::uint64_t mask) {
  AttributeSet s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (mask >> i & 1) s.insert(names[i]);
  }
  return s;
}

// Exact check of sum_i gamma_i * M_i == (1, 0, ..., 0) over Z_p.
inline bool reconstruction_hits_target(const Msp& msp, const Reconstruction& rec) {
  for (std::size_t j = 0; j < msp.cols; ++j) {
    Scalar acc;
    for (std::size_t k = 0; k < rec.rows.size(); ++k) {
      acc += rec.coefficients[k] * Scalar::from_int(msp.at(rec.rows[k], j));
    }
    if (!(acc == Scalar::from_u64(j == 0 ? 1 : 0))) return false;
  }
  return true;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("starcast-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace starcast::testing
