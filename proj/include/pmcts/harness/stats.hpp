// Copyright 2026 The PMCTS Authors
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


// Summary statistics used by the experiment harness.

#ifndef PMCTS_HARNESS_STATS_HPP_
#define PMCTS_HARNESS_STATS_HPP_

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "pmcts/errors.hpp"

namespace pmcts {

struct Summary {
  long n = 0;
  double mean = 0.0;
  double sd = 0.0;   // sample standard deviation
  double sem = 0.0;  // sd / sqrt(n)
  double lo = 0.0;   // mean - 2 sem
  double hi = 0.0;   // mean + 2 sem
};

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("summarize: no samples");
  Summary s;
  s.n = static_cast<long>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.sem = s.sd / std::sqrt(static_cast<double>(s.n));
  }
  s.lo = s.mean - 2.0 * s.sem;
  s.hi = s.mean + 2.0 * s.sem;
  return s;
}

// (mean_a - mean_b) / sqrt(sem_a^2 + sem_b^2). Zero spread gives +-inf for a
// nonzero difference and 0 otherwise.
inline double welch_z(const Summary& a, const Summary& b) {
  const double diff = a.mean - b.mean;
  const double se = std::sqrt(a.sem * a.sem + b.sem * b.sem);
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
}

// Mean and standard error of paired differences a[i] - b[i].
inline Summary paired_difference(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("paired_difference: samples differ in size");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return summarize(d);
}

inline constexpr double kOneSided95 = 1.6448536269514722;
inline constexpr double kTwoSided95 = 1.959963984540054;

}  // namespace pmcts

#endif  // PMCTS_HARNESS_STATS_HPP_
