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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "probcbma/sim.hpp"

namespace probcbma {

struct ConfigValue {
  std::string text;
  int line = 0;
};

// `key = value` lines; `#` starts a comment. Throws ParseError on malformed
// lines and repeated keys.
std::map<std::string, ConfigValue> parse_key_values(std::string_view text, const std::string& file = {});

// Whitespace-separated numbers.
std::vector<double> read_numbers(const std::string& path);

// Applies `values` on top of `base`. Paths in mu_file and sigma_file are
// relative to `base_dir`.
sim::GenConfig apply_gen_config(sim::GenConfig base, const std::map<std::string, ConfigValue>& values,
                                const std::string& file = {}, const std::string& base_dir = ".");
sim::GenConfig load_gen_config(const std::string& path, sim::GenConfig base = {});

}  // namespace probcbma
