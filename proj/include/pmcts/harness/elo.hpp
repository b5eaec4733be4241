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


// Bradley-Terry ratings on the Elo scale, fitted by minorization-maximization.
// Draws count as half a win for each side.

#ifndef PMCTS_HARNESS_ELO_HPP_
#define PMCTS_HARNESS_ELO_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pmcts/errors.hpp"
#include "pmcts/harness/stats.hpp"

namespace pmcts {

struct GameCounts {
  long wins = 0;  // for the first player
  long draws = 0;
  long losses = 0;
  long total() const { return wins + draws + losses; }
};

// results[i][j] counts games agent i started against agent j.
struct WinMatrix {
  std::vector<std::string> agents;
  std::vector<std::vector<GameCounts>> results;

  explicit WinMatrix(std::vector<std::string> labels = {})
      : agents(std::move(labels)),
        results(agents.size(), std::vector<GameCounts>(agents.size())) {}

  std::size_t size() const { return agents.size(); }

  // Games between i and j in either order.
  long games(std::size_t i, std::size_t j) const {
    return results[i][j].total() + results[j][i].total();
  }
  // Points of i against j, draws counting one half.
  double score(std::size_t i, std::size_t j) const {
    return static_cast<double>(results[i][j].wins + results[j][i].losses) +
           0.5 * static_cast<double>(results[i][j].draws + results[j][i].draws);
  }
  long decisive() const {
    long n = 0;
    for (const auto& row : results)
      for (const auto& c : row) n += c.wins + c.losses;
    return n;
  }
};

inline constexpr double kEloPerNat = 400.0 / 2.302585092994046;

struct EloFit {
  std::vector<double> ratings;      // agent 0 is 0
  std::vector<double> half_widths;  // 95%
  long iterations = 0;
  std::vector<std::string> warnings;
};

inline double elo_expected_score(double diff) {
  return 1.0 / (1.0 + std::pow(10.0, -diff / 400.0));
}

namespace detail {

// Inverse of a small symmetric positive definite matrix (Gauss-Jordan).
inline std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    if (std::abs(a[pivot][c]) < 1e-300) {
      throw EstimationError("information matrix is singular");
    }
    std::swap(a[c], a[pivot]);
    std::swap(inv[c], inv[pivot]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

inline std::vector<std::vector<std::size_t>> components(const WinMatrix& m) {
  const std::size_t n = m.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    out.push_back({});
    std::vector<std::size_t> stack = {s};
    comp[s] = static_cast<int>(out.size() - 1);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      out.back().push_back(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (comp[j] < 0 && m.games(i, j) > 0) {
          comp[j] = comp[s];
          stack.push_back(j);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

}  // namespace detail

inline EloFit fit_bayes_elo(const WinMatrix& m, double tol = 1e-10,
                            long max_iters = 100000) {
  const std::size_t n = m.size();
  if (n < 2) throw ValidationError("fit_bayes_elo: need at least two agents");
  for (const auto& row : m.results) {
    if (row.size() != n) throw ValidationError("fit_bayes_elo: ragged matrix");
    for (const auto& c : row) {
      if (c.wins < 0 || c.draws < 0 || c.losses < 0) {
        throw ValidationError("fit_bayes_elo: negative game count");
      }
    }
  }
  auto comps = detail::components(m);
  if (comps.size() > 1) {
    std::string msg = "match graph is disconnected:";
    for (const auto& c : comps) {
      msg += " {";
      for (std::size_t k = 0; k < c.size(); ++k) {
        msg += (k ? ", " : "") + m.agents[c[k]];
      }
      msg += "}";
    }
    throw EstimationError(msg);
  }
  EloFit fit;
  fit.ratings.assign(n, 0.0);
  fit.half_widths.assign(n, 0.0);
  if (m.decisive() == 0) {
    fit.warnings.push_back("all games drawn; ratings are degenerate and set to 0");
    return fit;
  }
  std::vector<double> points(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) points[i] += m.score(i, j);
    }
    double played = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) played += static_cast<double>(m.games(i, j));
    }
    if (points[i] <= 0.0 || points[i] >= played) {
      throw EstimationError("agent '" + m.agents[i] +
                            "' won or lost every game; its rating is unbounded");
    }
  }

  // gamma_i <- W_i / sum_j n_ij / (gamma_i + gamma_j)
  std::vector<double> gamma(n, 1.0);
  for (fit.iterations = 1; fit.iterations <= max_iters; ++fit.iterations) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        denom += static_cast<double>(m.games(i, j)) / (gamma[i] + gamma[j]);
      }
      const double next = points[i] / denom;
      change = std::max(change, std::abs(next - gamma[i]) / gamma[i]);
      gamma[i] = next;
    }
    const double g0 = gamma[0];
    for (double& g : gamma) g /= g0;
    if (change < tol) break;
  }
  if (fit.iterations > max_iters) {
    fit.iterations = max_iters;
    fit.warnings.push_back("fit did not reach tolerance");
  }
  for (std::size_t i = 0; i < n; ++i) {
    fit.ratings[i] = kEloPerNat * std::log(gamma[i]);
  }

  // Observed information in the natural-log strengths, agent 0 held fixed.
  if (n > 1) {
    std::vector<std::vector<double>> info(n - 1, std::vector<double>(n - 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = gamma[i] / (gamma[i] + gamma[j]);
        const double h = static_cast<double>(m.games(i, j)) * p * (1.0 - p);
        if (i > 0) info[i - 1][i - 1] += h;
        if (j > 0) info[j - 1][j - 1] += h;
        if (i > 0 && j > 0) {
          info[i - 1][j - 1] -= h;
          info[j - 1][i - 1] -= h;
        }
      }
    }
    auto cov = detail::invert(info);
    for (std::size_t i = 1; i < n; ++i) {
      fit.half_widths[i] = kTwoSided95 * kEloPerNat * std::sqrt(cov[i - 1][i - 1]);
    }
  }
  return fit;
}

}  // namespace pmcts

#endif  // PMCTS_HARNESS_ELO_HPP_
