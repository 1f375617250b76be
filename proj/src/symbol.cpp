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

#include "probcbma/symbol.hpp"

#include <deque>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace probcbma {
namespace {

struct Interner {
  std::shared_mutex mu;
  std::deque<std::string> texts;
  std::unordered_map<std::string_view, std::uint32_t> ids;
};

Interner& interner() {
  static Interner* instance = new Interner();
  return *instance;
}

}  // namespace

Symbol Symbol::intern(std::string_view text) {
  auto& in = interner();
  {
    std::shared_lock lock(in.mu);
    if (auto it = in.ids.find(text); it != in.ids.end()) return Symbol(it->second);
  }
  std::unique_lock lock(in.mu);
  if (auto it = in.ids.find(text); it != in.ids.end()) return Symbol(it->second);
  if (in.texts.size() >= kInvalid) throw std::length_error("symbol table exhausted");
  auto id = static_cast<std::uint32_t>(in.texts.size());
  in.texts.emplace_back(text);
  in.ids.emplace(in.texts.back(), id);
  return Symbol(id);
}

Symbol Symbol::lookup(std::string_view text) {
  auto& in = interner();
  std::shared_lock lock(in.mu);
  if (auto it = in.ids.find(text); it != in.ids.end()) return Symbol(it->second);
  return Symbol();
}

std::uint32_t Symbol::count() {
  auto& in = interner();
  std::shared_lock lock(in.mu);
  return static_cast<std::uint32_t>(in.texts.size());
}

const std::string& Symbol::str() const {
  static const std::string invalid = "<invalid>";
  if (!valid()) return invalid;
  auto& in = interner();
  std::shared_lock lock(in.mu);
  return in.texts[id_];
}

}  // namespace probcbma
