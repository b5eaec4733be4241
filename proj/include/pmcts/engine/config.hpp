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

#ifndef PMCTS_ENGINE_CONFIG_HPP_
#define PMCTS_ENGINE_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pmcts/errors.hpp"
#include "pmcts/policies.hpp"

namespace pmcts {

enum class Algorithm {
  kGumbelMcts,
  kPuctVirtualLosses,
  kPuctVirtualMeans,
  kSimplePmcts,
  kPmcts,
  kRootParallelGumbel,
};

enum class Estimator { kSelfNormalized, kUnnormalized };

enum class Aggregation { kMeanPolicy, kMeanQ, kVote };

struct SearchConfig {
  Algorithm algorithm = Algorithm::kPmcts;
  int simulations = 32;  // M, iterations
  int particles = 16;    // N, trajectories per iteration
  double eta = 1.0;      // proposal temperature
  Estimator estimator = Estimator::kSelfNormalized;

  // Particle-weighting features; only read by kPmcts.
  bool dedup = false;
  bool ess_weighting = false;
  // Multiply weights by pi / pi_hat. With this off a tempered proposal is
  // used without correcting for it.
  bool weight_correction = false;
  bool retrospective = false;
  bool per_depth_weights = false;

  // Draw a separate leaf evaluation for every particle instead of one per
  // unique new leaf. The node keeps the mean of its particles' draws.
  bool independent_leaf_draws = false;

  // Sequential halving at the root over the top-K prior actions; 0 disables
  // it for the particle algorithms. kGumbelMcts always uses it (default 16).
  int sh_top_k = 0;
  double gumbel_scale = 0.0;

  std::uint64_t seed = 0;
  BetaConstants beta;
  PuctConstants puct;
  std::optional<RootSelection> root_selection;
  Aggregation aggregation = Aggregation::kMeanPolicy;
  int workers = 1;
  bool keep_tree_dump = false;

  // Full PMCTS: every feature on, eta 1.5.
  static SearchConfig pmcts_defaults() {
    SearchConfig c;
    c.algorithm = Algorithm::kPmcts;
    c.eta = 1.5;
    c.dedup = c.ess_weighting = c.weight_correction = c.retrospective = true;
    return c;
  }

  RootSelection effective_root_selection() const {
    if (root_selection) return *root_selection;
    if (algorithm == Algorithm::kPuctVirtualLosses ||
        algorithm == Algorithm::kPuctVirtualMeans) {
      return RootSelection::kMaxVisits;
    }
    return RootSelection::kArgmaxImproved;
  }
};

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kGumbelMcts: return "gumbel_mcts";
    case Algorithm::kPuctVirtualLosses: return "puct_virtual_losses";
    case Algorithm::kPuctVirtualMeans: return "puct_virtual_means";
    case Algorithm::kSimplePmcts: return "simple_pmcts";
    case Algorithm::kPmcts: return "pmcts";
    case Algorithm::kRootParallelGumbel: return "root_parallel_gumbel";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a :
       {Algorithm::kGumbelMcts, Algorithm::kPuctVirtualLosses,
        Algorithm::kPuctVirtualMeans, Algorithm::kSimplePmcts, Algorithm::kPmcts,
        Algorithm::kRootParallelGumbel}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline std::string to_string(Estimator e) {
  return e == Estimator::kSelfNormalized ? "self_normalized" : "unnormalized";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "self_normalized") return Estimator::kSelfNormalized;
  if (s == "unnormalized") return Estimator::kUnnormalized;
  throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

inline std::string to_string(RootSelection r) {
  switch (r) {
    case RootSelection::kArgmaxImproved: return "argmax_improved";
    case RootSelection::kSampleRestricted: return "sample_restricted";
    case RootSelection::kMaxVisits: return "max_visits";
  }
  return "unknown";
}

inline RootSelection parse_root_selection(std::string_view s) {
  if (s == "argmax_improved") return RootSelection::kArgmaxImproved;
  if (s == "sample_restricted") return RootSelection::kSampleRestricted;
  if (s == "max_visits") return RootSelection::kMaxVisits;
  throw ConfigError("unknown root selection '" + std::string(s) + "'");
}

inline std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kMeanPolicy: return "mean_policy";
    case Aggregation::kMeanQ: return "mean_q";
    case Aggregation::kVote: return "vote";
  }
  return "unknown";
}

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean_policy") return Aggregation::kMeanPolicy;
  if (s == "mean_q") return Aggregation::kMeanQ;
  if (s == "vote") return Aggregation::kVote;
  throw ConfigError("unknown aggregation '" + std::string(s) + "'");
}

inline void validate(const SearchConfig& c) {
  if (c.simulations < 1) throw ValidationError("simulations must be >= 1");
  if (c.particles < 1) throw ValidationError("particles must be >= 1");
  if (!(c.eta > 0.0)) throw ValidationError("eta must be > 0");
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  if (c.sh_top_k < 0) throw ValidationError("sh_top_k must be >= 0");
  if (!(c.gumbel_scale >= 0.0)) {
    throw ValidationError("gumbel_scale must be >= 0");
  }
  if (c.algorithm == Algorithm::kGumbelMcts && c.particles != 1) {
    throw ValidationError("gumbel_mcts is sequential and requires particles = 1");
  }
  if (c.retrospective && c.algorithm != Algorithm::kPmcts) {
    throw ValidationError("retrospective reweighting requires algorithm pmcts");
  }
  if (!(c.beta.c_scale >= 0.0) || !(c.puct.c_base > 0.0)) {
    throw ValidationError("invalid beta or puct constants");
  }
}

}  // namespace pmcts

#endif  // PMCTS_ENGINE_CONFIG_HPP_
