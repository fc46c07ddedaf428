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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "starcast/bytes.hpp"
#include "starcast/groups.hpp"

namespace starcast {

/// Attribute names are UTF-8, 1-255 bytes, and may not start with 0x00.
void validate_attribute_name(std::string_view name);

/// Duplicate-free set of validated attribute names.
class AttributeSet {
 public:
  AttributeSet() = default;
  AttributeSet(std::initializer_list<std::string_view> names);
  /// Rejects invalid and duplicated names.
  static AttributeSet from_list(const std::vector<std::string>& names);
  /// Comma-separated list, surrounding whitespace trimmed.
  static AttributeSet parse_csv(std::string_view csv);

  bool contains(std::string_view name) const { return names_.find(std::string(name)) != names_.end(); }
  void insert(std::string_view name);
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  auto begin() const { return names_.begin(); }
  auto end() const { return names_.end(); }
  std::string to_csv() const;
  bool operator==(const AttributeSet&) const = default;

 private:
  std::set<std::string> names_;
};

/// Monotone boolean formula over attribute leaves.
struct PolicyNode {
  enum class Kind { kLeaf, kAnd, kOr };

  Kind kind = Kind::kLeaf;
  std::string attribute;
  std::shared_ptr<const PolicyNode> left, right;
};

class PolicyAst {
 public:
  explicit PolicyAst(std::shared_ptr<const PolicyNode> root);

  static PolicyAst leaf(std::string_view attribute);
  static PolicyAst conj(const PolicyAst& l, const PolicyAst& r);
  static PolicyAst disj(const PolicyAst& l, const PolicyAst& r);

  const PolicyNode& root() const { return *root_; }
  std::shared_ptr<const PolicyNode> root_ptr() const { return root_; }

  /// Leaves in left-to-right order (duplicates kept).
  std::vector<std::string> leaves() const;
  std::size_t and_gates() const;
  bool evaluate(const AttributeSet& attrs) const;
  /// Fully parenthesized, quoted attributes: ("A" AND ("B" OR "C")).
  std::string render() const;
  /// Structural equality.
  bool operator==(const PolicyAst& o) const;

 private:
  std::shared_ptr<const PolicyNode> root_;
};

/// Grammar: expr := term (OR term)* ; term := atom (AND atom)* ;
/// atom := "quoted" | identifier | ( expr ). Keywords are case-insensitive.
/// Throws kPolicySyntax with the byte offset of the offending token.
PolicyAst parse_policy(std::string_view text);

/// Monotone span program: n1 x n2 matrix over {-1, 0, 1} plus a row labeling.
struct Msp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> entries;  // row-major
  std::vector<std::string> row_attribute;
  std::string policy;

  std::int8_t at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

/// Lewko-Waters labeling; width is (#AND gates + 1).
Msp to_msp(const PolicyAst& ast);

/// n1, n2 (be32), entries (signed bytes), then u8-length-prefixed row labels.
Bytes serialize_msp(const Msp& msp);
Msp deserialize_msp(ByteView bytes);
std::array<std::uint8_t, 32> msp_digest(const Msp& msp);

struct Reconstruction {
  std::vector<std::size_t> rows;  // I, ascending, zero coefficients dropped
  std::vector<Scalar> coefficients;
};

/// Solves sum_i gamma_i M_i = (1,0,...,0) over the rows labeled by attrs.
/// Reduced row echelon form, lowest-index pivots, free variables zero.
std::optional<Reconstruction> reconstruct(const Msp& msp, const AttributeSet& attrs);
bool accepts(const Msp& msp, const AttributeSet& attrs);

}  // namespace starcast
