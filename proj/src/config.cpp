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

#include "probcbma/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "probcbma/error.hpp"

namespace probcbma {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(const std::string& key, const ConfigValue& v, const std::string& file) {
  T out{};
  std::string_view s = v.text;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("bad value '" + v.text + "' for " + key, v.line, 0, file);
  return out;
}

}  // namespace

std::map<std::string, ConfigValue> parse_key_values(std::string_view text, const std::string& file) {
  std::map<std::string, ConfigValue> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no, 0, file);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError("empty key", line_no, 0, file);
    if (!out.emplace(key, ConfigValue{value, line_no}).second)
      throw ParseError("key " + key + " given twice", line_no, 0, file);
  }
  return out;
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path, 0, 0, path);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    double x = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      throw DataError("bad number '" + token + "'", 0, 0, path);
    out.push_back(x);
  }
  return out;
}

sim::GenConfig apply_gen_config(sim::GenConfig cfg, const std::map<std::string, ConfigValue>& values,
                                const std::string& file, const std::string& base_dir) {
  namespace fs = std::filesystem;
  for (const auto& [key, v] : values) {
    if (key == "n_studies") cfg.n_studies = parse_number<std::size_t>(key, v, file);
    else if (key == "n_terms") cfg.n_terms = parse_number<std::size_t>(key, v, file);
    else if (key == "n_voxels") cfg.n_voxels = parse_number<std::size_t>(key, v, file);
    else if (key == "active_fraction") cfg.active_fraction = parse_number<double>(key, v, file);
    else if (key == "tau") cfg.tau = parse_number<double>(key, v, file);
    else if (key == "alpha") cfg.alpha = parse_number<double>(key, v, file);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v, file);
    else if (key == "base_rate") cfg.base_rate = parse_number<double>(key, v, file);
    else if (key == "link_strength") cfg.link_strength = parse_number<double>(key, v, file);
    else if (key == "coef_scale") cfg.coef_scale = parse_number<double>(key, v, file);
    else if (key == "max_rejections") cfg.max_rejections = parse_number<std::size_t>(key, v, file);
    else if (key == "term_sd") cfg.term_sd = parse_number<double>(key, v, file);
    else if (key == "term_corr") cfg.term_corr = parse_number<double>(key, v, file);
    else if (key == "term_groups") cfg.term_groups = parse_number<std::size_t>(key, v, file);
    else if (key == "presence_cutoff") cfg.presence_cutoff = parse_number<double>(key, v, file);
    else if (key == "query") {
      auto comma = v.text.find(',');
      if (comma == std::string::npos) throw ParseError("query expects two term indices 'a, b'", v.line, 0, file);
      cfg.query.first = parse_number<std::size_t>(key, ConfigValue{std::string(trim(v.text.substr(0, comma))), v.line}, file);
      cfg.query.second =
          parse_number<std::size_t>(key, ConfigValue{std::string(trim(v.text.substr(comma + 1))), v.line}, file);
    } else if (key == "mu_file") {
      cfg.mu = read_numbers((fs::path(base_dir) / v.text).string());
    } else if (key == "sigma_file") {
      cfg.sigma = read_numbers((fs::path(base_dir) / v.text).string());
    } else {
      throw ParseError("unknown key " + key, v.line, 0, file);
    }
  }
  cfg.validate();
  return cfg;
}

sim::GenConfig load_gen_config(const std::string& path, sim::GenConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path, 0, 0, path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path().string();
  return apply_gen_config(std::move(base), parse_key_values(buf.str(), path), path, dir.empty() ? "." : dir);
}

}  // namespace probcbma
