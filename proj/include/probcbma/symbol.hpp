// Copyright 2026 The probcbma Authors
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

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace probcbma {

// Interned constant. Ids are process-wide and dense, starting at 0.
class Symbol {
 public:
  Symbol() = default;

  static Symbol intern(std::string_view text);
  // Returns an invalid symbol if `text` was never interned.
  static Symbol lookup(std::string_view text);
  static Symbol from_id(std::uint32_t id) { return Symbol(id); }
  // Number of symbols interned so far.
  static std::uint32_t count();

  const std::string& str() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != kInvalid; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend auto operator<=>(Symbol a, Symbol b) { return a.id_ <=> b.id_; }

 private:
  static constexpr std::uint32_t kInvalid = 0xffffffffu;
  explicit Symbol(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = kInvalid;
};

// Orders symbols by their text rather than by interning order.
struct SymbolTextLess {
  bool operator()(Symbol a, Symbol b) const { return a.str() < b.str(); }
};

}  // namespace probcbma

template <>
struct std::hash<probcbma::Symbol> {
  std::size_t operator()(probcbma::Symbol s) const noexcept { return std::hash<std::uint32_t>{}(s.id()); }
};
