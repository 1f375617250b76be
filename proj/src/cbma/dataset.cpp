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

#include "probcbma/cbma/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "probcbma/error.hpp"

namespace probcbma::cbma {
namespace {

std::unordered_map<Symbol, std::uint32_t> index_of(const std::vector<Symbol>& ids, const char* what) {
  std::unordered_map<Symbol, std::uint32_t> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!out.emplace(ids[i], static_cast<std::uint32_t>(i)).second)
      throw DataError(std::string("duplicate ") + what + " id " + ids[i].str(), 0);
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

class TsvReader {
 public:
  TsvReader(const std::string& path, std::vector<std::string> columns) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path, 0, 0, path);
    std::string header;
    if (!next_line(header)) throw DataError("missing header", 1, 0, path);
    auto fields = split_tabs(header);
    for (const auto& c : columns) {
      auto it = std::find(fields.begin(), fields.end(), c);
      if (it == fields.end()) throw DataError("header lacks column " + c, line_, 0, path);
      positions_.push_back(static_cast<std::size_t>(it - fields.begin()));
    }
    width_ = fields.size();
  }

  // Fields of the next data row in the requested column order.
  bool next(std::vector<std::string_view>& out) {
    while (next_line(line_text_)) {
      if (line_text_.empty()) continue;
      auto fields = split_tabs(line_text_);
      if (fields.size() != width_)
        throw DataError("expected " + std::to_string(width_) + " fields, got " + std::to_string(fields.size()), line_,
                        0, path_);
      out.clear();
      for (auto p : positions_) out.push_back(fields[p]);
      return true;
    }
    return false;
  }

  int line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  bool next_line(std::string& s) {
    if (!std::getline(in_, s)) return false;
    ++line_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return true;
  }

  std::string path_;
  std::ifstream in_;
  std::vector<std::size_t> positions_;
  std::size_t width_ = 0;
  int line_ = 0;
  std::string line_text_;
};

std::uint32_t intern_into(std::string_view id, std::vector<Symbol>& ids, std::unordered_map<Symbol, std::uint32_t>& seen) {
  Symbol s = Symbol::intern(id);
  auto [it, inserted] = seen.emplace(s, static_cast<std::uint32_t>(ids.size()));
  if (inserted) ids.push_back(s);
  return it->second;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

CbmaDataset::CbmaDataset(std::vector<Symbol> studies, std::vector<Symbol> terms, std::vector<Symbol> voxels,
                         std::vector<FeatureEntry> features, std::vector<ActivationEntry> activations)
    : studies_(std::move(studies)), terms_(std::move(terms)), voxels_(std::move(voxels)) {
  if (studies_.empty() || terms_.empty() || voxels_.empty())
    throw DataError("a dataset needs at least one study, term and voxel", 0);
  study_lookup_ = index_of(studies_, "study");
  term_lookup_ = index_of(terms_, "term");
  index_of(voxels_, "voxel");

  x_offsets_.assign(terms_.size() + 1, 0);
  for (const auto& f : features) {
    if (f.study >= studies_.size() || f.term >= terms_.size()) throw DataError("feature index out of range", 0);
    if (!std::isfinite(f.tfidf) || f.tfidf < 0.0)
      throw DataError("tfidf must be finite and non-negative, got " + format_double(f.tfidf) + " for " +
                          studies_[f.study].str() + "/" + terms_[f.term].str(),
                      0);
    if (f.tfidf > 0.0) ++x_offsets_[f.term + 1];
  }
  for (std::size_t j = 0; j < terms_.size(); ++j) x_offsets_[j + 1] += x_offsets_[j];
  x_values_.resize(x_offsets_.back());
  {
    std::vector<std::uint32_t> fill(x_offsets_.begin(), x_offsets_.end() - 1);
    for (const auto& f : features)
      if (f.tfidf > 0.0) x_values_[fill[f.term]++] = Feature{f.study, f.tfidf};
  }
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    auto first = x_values_.begin() + x_offsets_[j], last = x_values_.begin() + x_offsets_[j + 1];
    std::sort(first, last, [](const Feature& a, const Feature& b) { return a.study < b.study; });
    if (std::adjacent_find(first, last, [](const Feature& a, const Feature& b) { return a.study == b.study; }) != last)
      throw DataError("duplicate feature for term " + terms_[j].str(), 0);
  }

  y_offsets_.assign(studies_.size() + 1, 0);
  for (const auto& a : activations) {
    if (a.study >= studies_.size() || a.voxel >= voxels_.size()) throw DataError("activation index out of range", 0);
    ++y_offsets_[a.study + 1];
  }
  for (std::size_t i = 0; i < studies_.size(); ++i) y_offsets_[i + 1] += y_offsets_[i];
  y_voxels_.resize(y_offsets_.back());
  {
    std::vector<std::uint32_t> fill(y_offsets_.begin(), y_offsets_.end() - 1);
    for (const auto& a : activations) y_voxels_[fill[a.study]++] = a.voxel;
  }
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    auto first = y_voxels_.begin() + y_offsets_[i], last = y_voxels_.begin() + y_offsets_[i + 1];
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) throw DataError("duplicate activation in study " + studies_[i].str(), 0);
  }
}

std::optional<std::uint32_t> CbmaDataset::term_index(std::string_view name) const {
  Symbol s = Symbol::lookup(name);
  if (!s.valid()) return std::nullopt;
  auto it = term_lookup_.find(s);
  if (it == term_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> CbmaDataset::study_index(std::string_view name) const {
  Symbol s = Symbol::lookup(name);
  if (!s.valid()) return std::nullopt;
  auto it = study_lookup_.find(s);
  if (it == study_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const Feature> CbmaDataset::term_column(std::uint32_t term) const {
  return {x_values_.data() + x_offsets_[term], x_offsets_[term + 1] - x_offsets_[term]};
}

double CbmaDataset::tfidf(std::uint32_t study, std::uint32_t term) const {
  auto col = term_column(term);
  auto it = std::lower_bound(col.begin(), col.end(), study, [](const Feature& f, std::uint32_t s) { return f.study < s; });
  return it != col.end() && it->study == study ? it->tfidf : 0.0;
}

std::span<const std::uint32_t> CbmaDataset::reported(std::uint32_t study) const {
  return {y_voxels_.data() + y_offsets_[study], y_offsets_[study + 1] - y_offsets_[study]};
}

CbmaDataset CbmaDataset::subset(std::span<const std::uint32_t> studies) const {
  std::vector<Symbol> ids;
  std::vector<std::uint32_t> remap(studies_.size(), UINT32_MAX);
  for (auto s : studies) {
    if (s >= studies_.size()) throw DataError("study index out of range in subset", 0);
    remap[s] = static_cast<std::uint32_t>(ids.size());
    ids.push_back(studies_[s]);
  }
  std::vector<FeatureEntry> features;
  for (std::uint32_t j = 0; j < terms_.size(); ++j)
    for (const auto& f : term_column(j))
      if (remap[f.study] != UINT32_MAX) features.push_back({remap[f.study], j, f.tfidf});
  std::vector<ActivationEntry> activations;
  for (auto s : studies)
    for (auto v : reported(s)) activations.push_back({remap[s], v});
  return CbmaDataset(std::move(ids), terms_, voxels_, std::move(features), std::move(activations));
}

CbmaDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<Symbol> studies, terms, voxels;
  std::unordered_map<Symbol, std::uint32_t> study_seen, term_seen, voxel_seen;
  std::vector<FeatureEntry> features;
  std::vector<ActivationEntry> activations;
  std::vector<std::string_view> row;

  TsvReader fr((fs::path(dir) / "features.tsv").string(), {"study_id", "term", "tfidf"});
  while (fr.next(row)) {
    double x = 0;
    auto res = std::from_chars(row[2].data(), row[2].data() + row[2].size(), x);
    if (res.ec != std::errc() || res.ptr != row[2].data() + row[2].size())
      throw DataError("bad tfidf value '" + std::string(row[2]) + "'", fr.line(), 0, fr.path());
    if (!std::isfinite(x) || x < 0) throw DataError("tfidf must be finite and non-negative", fr.line(), 0, fr.path());
    features.push_back({intern_into(row[0], studies, study_seen), intern_into(row[1], terms, term_seen), x});
  }

  TsvReader ar((fs::path(dir) / "activations.tsv").string(), {"study_id", "voxel_id"});
  while (ar.next(row))
    activations.push_back({intern_into(row[0], studies, study_seen), intern_into(row[1], voxels, voxel_seen)});

  const auto voxel_file = fs::path(dir) / "voxels.tsv";
  if (fs::exists(voxel_file)) {
    TsvReader vr(voxel_file.string(), {"voxel_id"});
    while (vr.next(row)) intern_into(row[0], voxels, voxel_seen);
  }
  return CbmaDataset(std::move(studies), std::move(terms), std::move(voxels), std::move(features),
                     std::move(activations));
}

void save_dataset(const CbmaDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<FeatureEntry> features;
  for (std::uint32_t j = 0; j < ds.n_terms(); ++j)
    for (const auto& f : ds.term_column(j)) features.push_back({f.study, j, f.tfidf});
  std::sort(features.begin(), features.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) { return std::tie(a.study, a.term) < std::tie(b.study, b.term); });

  std::ofstream f(fs::path(dir) / "features.tsv");
  f << "study_id\tterm\ttfidf\n";
  for (const auto& e : features)
    f << ds.studies()[e.study].str() << '\t' << ds.terms()[e.term].str() << '\t' << format_double(e.tfidf) << '\n';

  std::ofstream a(fs::path(dir) / "activations.tsv");
  a << "study_id\tvoxel_id\n";
  for (std::uint32_t i = 0; i < ds.n_studies(); ++i)
    for (auto v : ds.reported(i)) a << ds.studies()[i].str() << '\t' << ds.voxels()[v].str() << '\n';

  std::ofstream v(fs::path(dir) / "voxels.tsv");
  v << "voxel_id\n";
  for (const auto& id : ds.voxels()) v << id.str() << '\n';
  if (!f || !a || !v) throw Error("failed to write dataset to " + dir);
}

}  // namespace probcbma::cbma
