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

#include "probcbma/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "probcbma/error.hpp"

namespace probcbma::stats {
namespace {

double xlogx_over(double o, double e) { return o > 0.0 ? o * std::log(o / e) : 0.0; }

// Series for the lower regularized gamma P(a, x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), good for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (a == 0.5) return std::erfc(std::sqrt(x));
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

GTestResult g_test(const Contingency2x2& t) {
  if (t.n11 < 0 || t.n10 < 0 || t.n01 < 0 || t.n00 < 0) throw Error("contingency counts must be non-negative");
  const double n = t.total();
  if (!(n > 0.0)) throw Error("contingency table is empty");
  const double r1 = t.n11 + t.n10, r0 = t.n01 + t.n00;
  const double c1 = t.n11 + t.n01, c0 = t.n10 + t.n00;
  GTestResult out;
  if (r1 <= 0.0 || r0 <= 0.0 || c1 <= 0.0 || c0 <= 0.0) {
    out.degenerate = true;
    return out;
  }
  double g = xlogx_over(t.n11, r1 * c1 / n) + xlogx_over(t.n10, r1 * c0 / n) + xlogx_over(t.n01, r0 * c1 / n) +
             xlogx_over(t.n00, r0 * c0 / n);
  out.g = std::max(0.0, 2.0 * g);
  out.p = chi_square_sf(out.g, 1.0);
  return out;
}

std::vector<std::uint8_t> bonferroni(std::span<const double> p_values, double base) {
  if (p_values.empty()) throw Error("bonferroni needs at least one p-value");
  const double threshold = base / static_cast<double>(p_values.size());
  std::vector<std::uint8_t> out(p_values.size());
  for (std::size_t k = 0; k < p_values.size(); ++k) out[k] = p_values[k] < threshold;
  return out;
}

double f1_score(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) throw Error("f1_score needs vectors of equal length");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (predicted[k] && truth[k]) ++tp;
    else if (predicted[k]) ++fp;
    else if (truth[k]) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

double consistency(const std::vector<std::vector<std::uint8_t>>& maps) {
  if (maps.empty() || maps.front().empty()) throw Error("consistency needs at least one sub-sample and one voxel");
  const std::size_t k = maps.front().size();
  std::vector<double> ones(k, 0.0);
  for (const auto& row : maps) {
    if (row.size() != k) throw Error("consistency needs maps of equal length");
    for (std::size_t j = 0; j < k; ++j) ones[j] += row[j] ? 1.0 : 0.0;
  }
  double c = 0.0;
  const double m = static_cast<double>(maps.size());
  for (double o : ones) c += 2.0 * std::abs(o / m - 0.5);
  return c / static_cast<double>(k);
}

}  // namespace probcbma::stats
