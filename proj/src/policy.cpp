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

#include "starcast/policy.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <functional>

#include "starcast/error.hpp"

namespace starcast {
namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = cp << 6 | (cc & 0x3f);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += extra + 1;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// ---- tokenizer / recursive-descent parser ----

struct Token {
  enum class Kind { kAttr, kAnd, kOr, kLParen, kRParen, kEnd };
  Kind kind;
  std::string text;
  std::size_t pos;
};

bool is_ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-' || c == '.' || c == ':' || c == '@' || u >= 0x80;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void syntax_error(std::size_t pos, const std::string& what) {
  fail(ErrorCode::kPolicySyntax, "policy syntax error at offset " + std::to_string(pos) + ": " + what);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::kLParen, "(", i++});
    } else if (c == ')') {
      out.push_back({Token::Kind::kRParen, ")", i++});
    } else if (c == '"') {
      std::size_t start = i++;
      std::string value;
      for (;;) {
        if (i >= text.size()) syntax_error(start, "unterminated quoted attribute");
        char d = text[i++];
        if (d == '"') break;
        if (d == '\\') {
          if (i >= text.size()) syntax_error(start, "unterminated quoted attribute");
          d = text[i++];
          if (d != '"' && d != '\\') syntax_error(i - 2, "unknown escape sequence");
        }
        value.push_back(d);
      }
      out.push_back({Token::Kind::kAttr, std::move(value), start});
    } else if (is_ident_char(c)) {
      std::size_t start = i;
      while (i < text.size() && is_ident_char(text[i])) ++i;
      std::string word(text.substr(start, i - start));
      std::string kw = upper(word);
      if (kw == "AND") {
        out.push_back({Token::Kind::kAnd, word, start});
      } else if (kw == "OR") {
        out.push_back({Token::Kind::kOr, word, start});
      } else {
        out.push_back({Token::Kind::kAttr, std::move(word), start});
      }
    } else {
      syntax_error(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::kEnd, "", text.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  PolicyAst parse() {
    PolicyAst ast = expr();
    if (peek().kind != Token::Kind::kEnd) syntax_error(peek().pos, "unexpected '" + peek().text + "'");
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  PolicyAst expr() {
    PolicyAst lhs = term();
    while (peek().kind == Token::Kind::kOr) {
      next();
      lhs = PolicyAst::disj(lhs, term());
    }
    return lhs;
  }

  PolicyAst term() {
    PolicyAst lhs = atom();
    while (peek().kind == Token::Kind::kAnd) {
      next();
      lhs = PolicyAst::conj(lhs, atom());
    }
    return lhs;
  }

  PolicyAst atom() {
    const Token& t = next();
    switch (t.kind) {
      case Token::Kind::kAttr:
        try {
          validate_attribute_name(t.text);
        } catch (const Error& e) {
          syntax_error(t.pos, e.what());
        }
        return PolicyAst::leaf(t.text);
      case Token::Kind::kLParen: {
        PolicyAst inner = expr();
        if (peek().kind != Token::Kind::kRParen) syntax_error(peek().pos, "expected ')'");
        next();
        return inner;
      }
      case Token::Kind::kEnd:
        syntax_error(t.pos, "unexpected end of policy");
      default:
        syntax_error(t.pos, "expected attribute or '(' but found '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void validate_attribute_name(std::string_view name) {
  if (name.empty()) fail(ErrorCode::kInvalidArgument, "attribute name is empty");
  if (name.size() > 255) fail(ErrorCode::kInvalidArgument, "attribute name exceeds 255 bytes");
  if (name.front() == '\0') {
    fail(ErrorCode::kInvalidArgument, "attribute name may not begin with a 0x00 byte");
  }
  if (!valid_utf8(name)) fail(ErrorCode::kInvalidArgument, "attribute name is not valid UTF-8");
}

// ---- AttributeSet ----

AttributeSet::AttributeSet(std::initializer_list<std::string_view> names) {
  for (auto n : names) insert(n);
}

AttributeSet AttributeSet::from_list(const std::vector<std::string>& names) {
  AttributeSet out;
  for (const auto& n : names) {
    if (out.contains(n)) fail(ErrorCode::kInvalidArgument, "duplicate attribute '" + n + "'");
    out.insert(n);
  }
  return out;
}

AttributeSet AttributeSet::parse_csv(std::string_view csv) {
  std::vector<std::string> names;
  if (trim(csv).empty()) return {};
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = csv.find(',', start);
    names.emplace_back(trim(csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return from_list(names);
}

void AttributeSet::insert(std::string_view name) {
  validate_attribute_name(name);
  names_.emplace(name);
}

std::string AttributeSet::to_csv() const {
  std::string out;
  for (const auto& n : names_) {
    if (!out.empty()) out.push_back(',');
    out += n;
  }
  return out;
}

// ---- PolicyAst ----

PolicyAst::PolicyAst(std::shared_ptr<const PolicyNode> root) : root_(std::move(root)) {
  if (!root_) fail(ErrorCode::kInvalidArgument, "empty policy");
}

PolicyAst PolicyAst::leaf(std::string_view attribute) {
  validate_attribute_name(attribute);
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::kLeaf;
  n->attribute = std::string(attribute);
  return PolicyAst(std::move(n));
}

PolicyAst PolicyAst::conj(const PolicyAst& l, const PolicyAst& r) {
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::kAnd;
  n->left = l.root_;
  n->right = r.root_;
  return PolicyAst(std::move(n));
}

PolicyAst PolicyAst::disj(const PolicyAst& l, const PolicyAst& r) {
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::kOr;
  n->left = l.root_;
  n->right = r.root_;
  return PolicyAst(std::move(n));
}

std::vector<std::string> PolicyAst::leaves() const {
  std::vector<std::string> out;
  std::function<void(const PolicyNode&)> walk = [&](const PolicyNode& n) {
    if (n.kind == PolicyNode::Kind::kLeaf) {
      out.push_back(n.attribute);
    } else {
      walk(*n.left);
      walk(*n.right);
    }
  };
  walk(*root_);
  return out;
}

std::size_t PolicyAst::and_gates() const {
  std::function<std::size_t(const PolicyNode&)> count = [&](const PolicyNode& n) -> std::size_t {
    if (n.kind == PolicyNode::Kind::kLeaf) return 0;
    return (n.kind == PolicyNode::Kind::kAnd ? 1 : 0) + count(*n.left) + count(*n.right);
  };
  return count(*root_);
}

bool PolicyAst::evaluate(const AttributeSet& attrs) const {
  std::function<bool(const PolicyNode&)> eval = [&](const PolicyNode& n) {
    switch (n.kind) {
      case PolicyNode::Kind::kLeaf: return attrs.contains(n.attribute);
      case PolicyNode::Kind::kAnd: return eval(*n.left) && eval(*n.right);
      case PolicyNode::Kind::kOr: return eval(*n.left) || eval(*n.right);
    }
    return false;
  };
  return eval(*root_);
}

std::string PolicyAst::render() const {
  std::function<std::string(const PolicyNode&)> show = [&](const PolicyNode& n) -> std::string {
    if (n.kind == PolicyNode::Kind::kLeaf) return quote(n.attribute);
    const char* op = n.kind == PolicyNode::Kind::kAnd ? " AND " : " OR ";
    return "(" + show(*n.left) + op + show(*n.right) + ")";
  };
  return show(*root_);
}

bool PolicyAst::operator==(const PolicyAst& o) const {
  std::function<bool(const PolicyNode&, const PolicyNode&)> eq = [&](const PolicyNode& a,
                                                                     const PolicyNode& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == PolicyNode::Kind::kLeaf) return a.attribute == b.attribute;
    return eq(*a.left, *b.left) && eq(*a.right, *b.right);
  };
  return eq(*root_, *o.root_);
}

PolicyAst parse_policy(std::string_view text) {
  if (trim(text).empty()) fail(ErrorCode::kPolicySyntax, "policy syntax error at offset 0: empty policy");
  return Parser(tokenize(text)).parse();
}

// ---- MSP ----

Msp to_msp(const PolicyAst& ast) {
  std::vector<std::vector<std::int8_t>> rows;
  std::vector<std::string> labels;
  std::size_t counter = 1;

  std::function<void(const PolicyNode&, std::vector<std::int8_t>)> label =
      [&](const PolicyNode& n, std::vector<std::int8_t> v) {
        switch (n.kind) {
          case PolicyNode::Kind::kLeaf:
            rows.push_back(std::move(v));
            labels.push_back(n.attribute);
            return;
          case PolicyNode::Kind::kOr:
            label(*n.left, v);
            label(*n.right, std::move(v));
            return;
          case PolicyNode::Kind::kAnd: {
            std::vector<std::int8_t> left = v;
            left.resize(counter, 0);
            left.push_back(1);
            std::vector<std::int8_t> right(counter, 0);
            right.push_back(-1);
            ++counter;
            label(*n.left, std::move(left));
            label(*n.right, std::move(right));
            return;
          }
        }
      };
  label(ast.root(), {1});

  Msp msp;
  msp.rows = rows.size();
  msp.cols = counter;
  msp.entries.assign(msp.rows * msp.cols, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), msp.entries.begin() + static_cast<std::ptrdiff_t>(i * msp.cols));
  }
  msp.row_attribute = std::move(labels);
  msp.policy = ast.render();
  return msp;
}

Bytes serialize_msp(const Msp& msp) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(msp.rows));
  w.u32(static_cast<std::uint32_t>(msp.cols));
  for (auto e : msp.entries) w.u8(static_cast<std::uint8_t>(e));
  for (const auto& a : msp.row_attribute) {
    w.u8(static_cast<std::uint8_t>(a.size()));
    w.raw(a);
  }
  return std::move(w).bytes();
}

Msp deserialize_msp(ByteView bytes) {
  ByteReader r(bytes);
  Msp msp;
  msp.rows = r.u32();
  msp.cols = r.u32();
  if (msp.rows == 0 || msp.cols == 0) r.malformed("empty span program");
  if (msp.rows * msp.cols > r.remaining()) r.malformed("matrix larger than input");
  msp.entries.reserve(msp.rows * msp.cols);
  for (std::size_t k = 0; k < msp.rows * msp.cols; ++k) {
    auto e = static_cast<std::int8_t>(r.u8());
    if (e < -1 || e > 1) r.malformed("matrix entry outside {-1,0,1}");
    msp.entries.push_back(e);
  }
  for (std::size_t i = 0; i < msp.rows; ++i) {
    std::size_t n = r.u8();
    auto b = r.take(n);
    std::string name(b.begin(), b.end());
    try {
      validate_attribute_name(name);
    } catch (const Error& e) {
      r.malformed(e.what());
    }
    msp.row_attribute.push_back(std::move(name));
  }
  r.expect_end();
  return msp;
}

std::array<std::uint8_t, 32> msp_digest(const Msp& msp) {
  Bytes b = serialize_msp(msp);
  std::array<std::uint8_t, 32> out;
  SHA256(b.data(), b.size(), out.data());
  return out;
}

std::optional<Reconstruction> reconstruct(const Msp& msp, const AttributeSet& attrs) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < msp.rows; ++i) {
    if (attrs.contains(msp.row_attribute[i])) usable.push_back(i);
  }
  if (usable.empty()) return std::nullopt;

  // Augmented system A * gamma = e1 with A[j][k] = M[usable[k]][j].
  const std::size_t eqs = msp.cols, vars = usable.size();
  std::vector<std::vector<Scalar>> a(eqs, std::vector<Scalar>(vars + 1));
  for (std::size_t j = 0; j < eqs; ++j) {
    for (std::size_t k = 0; k < vars; ++k) a[j][k] = Scalar::from_int(msp.at(usable[k], j));
    a[j][vars] = Scalar::from_u64(j == 0 ? 1 : 0);
  }

  std::vector<std::size_t> pivot_col_of_row;
  std::size_t r = 0;
  for (std::size_t c = 0; c < vars && r < eqs; ++c) {
    std::size_t p = r;
    while (p < eqs && a[p][c].is_zero()) ++p;
    if (p == eqs) continue;
    std::swap(a[p], a[r]);
    Scalar inv = a[r][c].inverse();
    for (auto& x : a[r]) x *= inv;
    for (std::size_t q = 0; q < eqs; ++q) {
      if (q == r || a[q][c].is_zero()) continue;
      Scalar f = a[q][c];
      for (std::size_t k = c; k <= vars; ++k) a[q][k] = a[q][k] - f * a[r][k];
    }
    pivot_col_of_row.push_back(c);
    ++r;
  }
  for (std::size_t q = r; q < eqs; ++q) {
    if (!a[q][vars].is_zero()) return std::nullopt;
  }

  std::vector<Scalar> gamma(vars);
  for (std::size_t q = 0; q < r; ++q) gamma[pivot_col_of_row[q]] = a[q][vars];

  Reconstruction rec;
  for (std::size_t k = 0; k < vars; ++k) {
    if (gamma[k].is_zero()) continue;
    rec.rows.push_back(usable[k]);
    rec.coefficients.push_back(gamma[k]);
  }
  return rec;
}

bool accepts(const Msp& msp, const AttributeSet& attrs) { return reconstruct(msp, attrs).has_value(); }

}  // namespace starcast
