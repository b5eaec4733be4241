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

// Selection rules: the regularized improved policy, its tempered proposal,
// PUCT with virtual visits, and the sequential-halving budget schedule.
//
// Ties are always broken towards the lowest action index.

#ifndef PMCTS_POLICIES_HPP_
#define PMCTS_POLICIES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pmcts/errors.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/tree.hpp"

namespace pmcts {

struct BetaConstants {
  double c_visit = 50.0;
  double c_scale = 0.1;
};

struct PuctConstants {
  double c_base = 19652.0;
  double c_init = 1.25;
};

// Written as a division by 1 / c_scale so that decimal constants give the
// correctly rounded decimal product (53 * 0.1 would give 5.300000000000001).
inline double beta(double max_child_mass, const BetaConstants& c) {
  if (c.c_scale == 0.0) return 0.0;
  return (c.c_visit + max_child_mass) / (1.0 / c.c_scale);
}

namespace detail {

inline std::vector<double> softmax_logits(std::vector<double> logits) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logits) top = std::max(top, l);
  if (!std::isfinite(top)) {
    throw ValidationError("distribution has no mass");
  }
  double sum = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    sum += l;
  }
  for (double& l : logits) l /= sum;
  return logits;
}

}  // namespace detail

// pi(a) proportional to prior(a) exp(beta q(a)).
inline std::vector<double> improved_policy(std::span<const double> prior,
                                           std::span<const double> q,
                                           double beta_value) {
  if (prior.size() != q.size()) {
    throw ValidationError("improved_policy: prior and q differ in size");
  }
  std::vector<double> logits(prior.size());
  for (std::size_t a = 0; a < prior.size(); ++a) {
    if (!std::isfinite(q[a])) {
      throw ValidationError("improved_policy: non-finite q for action " +
                            std::to_string(a));
    }
    logits[a] = prior[a] > 0.0 ? std::log(prior[a]) + beta_value * q[a]
                               : -std::numeric_limits<double>::infinity();
  }
  return detail::softmax_logits(std::move(logits));
}

// Statistics of one node as seen by a selecting particle.
struct SelectionContext {
  std::vector<double> prior;
  std::vector<double> completed_q;
  std::vector<double> visits;
  std::vector<double> virtual_visits;
  BetaConstants beta;
  double eta = 1.0;
};

inline SelectionContext make_context(const SearchTree& tree, int node,
                                     const BetaConstants& constants,
                                     double eta = 1.0) {
  SelectionContext ctx;
  ctx.prior = tree.node(node).prior;
  ctx.completed_q = completed_q(tree, node);
  ctx.visits = tree.child_masses(node);
  ctx.virtual_visits.assign(ctx.prior.size(), 0.0);
  ctx.beta = constants;
  ctx.eta = eta;
  return ctx;
}

inline std::vector<double> improved_policy(const SelectionContext& ctx) {
  double max_visits = 0.0;
  for (double m : ctx.visits) max_visits = std::max(max_visits, m);
  return improved_policy(ctx.prior, ctx.completed_q, beta(max_visits, ctx.beta));
}

// Improved policy at a tree node from its current statistics.
inline std::vector<double> node_policy(const SearchTree& tree, int node,
                                       const BetaConstants& constants) {
  const Node& n = tree.node(node);
  return improved_policy(n.prior, completed_q(tree, node),
                         beta(tree.max_child_mass(node), constants));
}

// pi_hat(a) proportional to target(a)^(1/eta). eta = 1 returns the target
// unchanged (bit for bit).
inline std::vector<double> proposal_policy(std::span<const double> target,
                                           double eta) {
  if (!(eta > 0.0)) throw ValidationError("proposal_policy: eta must be > 0");
  if (eta == 1.0) return {target.begin(), target.end()};
  std::vector<double> logits(target.size());
  for (std::size_t a = 0; a < target.size(); ++a) {
    logits[a] = target[a] > 0.0 ? std::log(target[a]) / eta
                                : -std::numeric_limits<double>::infinity();
  }
  return detail::softmax_logits(std::move(logits));
}

inline double importance_ratio(double target_prob, double proposal_prob,
                               double prev_weight) {
  if (!(proposal_prob > 0.0)) {
    throw ImportanceSupportError(
        "importance_ratio: action sampled with zero proposal probability");
  }
  return prev_weight * target_prob / proposal_prob;
}

enum class VirtualMode { kLosses, kMeans };

// Node statistics for PUCT with virtual visits. q is read only where
// visits > 0.
struct PuctInput {
  std::vector<double> prior;
  std::vector<double> q;
  std::vector<double> visits;
  std::vector<double> virtual_visits;
  double value = 0.0;        // v_phi(s), used to complete unvisited actions
  double node_visits = 0.0;  // M(s)
  double node_virtual = 0.0;
};

inline double puct_c(double node_visits, const PuctConstants& c) {
  return std::log((1.0 + node_visits + c.c_base) / c.c_base) + c.c_init;
}

// Normalized q per action: virtual visits are folded in (as -1 returns in
// losses mode), unvisited actions are completed with v_phi, everything is
// min-max normalized over {v_phi} and the visited actions, and unvisited
// actions are then set to 0.
inline std::vector<double> puct_normalized_q(const PuctInput& in,
                                             VirtualMode mode) {
  const std::size_t k = in.prior.size();
  std::vector<double> q(k, in.value);
  std::vector<char> seen(k, 0);
  double lo = in.value, hi = in.value;
  for (std::size_t a = 0; a < k; ++a) {
    const double m = in.visits[a];
    const double mv = in.virtual_visits[a];
    if (mode == VirtualMode::kLosses && m + mv > 0.0) {
      q[a] = (in.q[a] * m - mv) / (m + mv);
      if (m == 0.0) q[a] = -1.0;
      seen[a] = 1;
    } else if (m > 0.0) {
      q[a] = in.q[a];
      seen[a] = 1;
    }
    if (seen[a]) {
      lo = std::min(lo, q[a]);
      hi = std::max(hi, q[a]);
    }
  }
  const double span = std::max(hi - lo, 1e-8);
  for (std::size_t a = 0; a < k; ++a) {
    q[a] = seen[a] ? (q[a] - lo) / span : 0.0;
  }
  return q;
}

inline std::vector<double> puct_scores(const PuctInput& in, VirtualMode mode,
                                       const PuctConstants& constants) {
  const std::vector<double> q = puct_normalized_q(in, mode);
  const double c = puct_c(in.node_visits, constants);
  const double root = std::sqrt(in.node_visits + in.node_virtual);
  std::vector<double> s(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) {
    s[a] = q[a] + in.prior[a] * c * root /
                      (1.0 + in.visits[a] + in.virtual_visits[a]);
  }
  return s;
}

inline ActionId argmax_first(std::span<const double> v) {
  if (v.empty()) throw ValidationError("argmax of an empty vector");
  return static_cast<ActionId>(std::max_element(v.begin(), v.end()) -
                               v.begin());
}

inline ActionId puct_virtual(const PuctInput& in, VirtualMode mode,
                             const PuctConstants& constants = {}) {
  return argmax_first(puct_scores(in, mode, constants));
}

struct ShPhase {
  int actions = 0;      // surviving actions K_i
  long per_action = 0;  // simulations per surviving action in this phase
};

struct ShSchedule {
  std::vector<ShPhase> phases;
  long total = 0;      // M * N
  long allocated = 0;  // sum over phases of actions * per_action
};

inline bool is_power_of_two(long k) { return k > 0 && (k & (k - 1)) == 0; }

inline int log2_exact(long k) {
  int l = 0;
  while ((1L << l) < k) ++l;
  return l;
}

// Budget B = floor(M N / log2 K) per phase, floor(B / K_i) per action; what
// is left after all phases is spread over the final phase's actions.
inline ShSchedule sh_schedule(long simulations, long particles, int top_k) {
  if (simulations < 1 || particles < 1) {
    throw ValidationError("sh_schedule: simulations and particles must be >= 1");
  }
  if (top_k < 2 || !is_power_of_two(top_k)) {
    throw ValidationError("sh_schedule: top_k must be a power of two >= 2");
  }
  const long total = simulations * particles;
  const int rounds = log2_exact(top_k);
  if (total < static_cast<long>(top_k) * rounds) {
    throw ValidationError("sh_schedule: budget " + std::to_string(total) +
                          " below K log2 K = " +
                          std::to_string(static_cast<long>(top_k) * rounds));
  }
  ShSchedule s;
  s.total = total;
  const long budget = total / rounds;
  int k = top_k;
  for (int i = 0; i < rounds; ++i, k /= 2) {
    s.phases.push_back({k, budget / k});
    s.allocated += static_cast<long>(k) * (budget / k);
  }
  ShPhase& last = s.phases.back();
  const long extra = (total - s.allocated) / last.actions;
  last.per_action += extra;
  s.allocated += extra * last.actions;
  return s;
}

enum class RootSelection { kArgmaxImproved, kSampleRestricted, kMaxVisits };

struct RootDecision {
  ActionId action = -1;
  std::vector<double> pi_search;  // improved policy at the root
  std::vector<double> pi_bar;     // restricted to visited actions
  double v_search = 0.0;
};

// `u` is the uniform draw used by kSampleRestricted.
inline RootDecision root_action_selection(const SearchTree& tree,
                                          RootSelection mode,
                                          const BetaConstants& constants,
                                          double u = 0.0) {
  const int root = tree.root();
  const Node& r = tree.node(root);
  RootDecision d;
  bool any = false;
  for (int c : r.children) any |= c != kNoNode;
  if (!any) throw SearchFailure("search finished with no visited root action");
  d.pi_search = node_policy(tree, root, constants);
  d.pi_bar.assign(d.pi_search.size(), 0.0);
  double mass = 0.0;
  for (std::size_t a = 0; a < d.pi_bar.size(); ++a) {
    if (r.children[a] != kNoNode) {
      d.pi_bar[a] = d.pi_search[a];
      mass += d.pi_search[a];
    }
  }
  for (std::size_t a = 0; a < d.pi_bar.size(); ++a) {
    d.pi_bar[a] /= mass;
    if (r.children[a] != kNoNode) {
      d.v_search += d.pi_bar[a] * tree.q(root, static_cast<ActionId>(a));
    }
  }
  switch (mode) {
    case RootSelection::kArgmaxImproved:
      d.action = argmax_first(d.pi_bar);
      break;
    case RootSelection::kSampleRestricted:
      d.action = sample_categorical(d.pi_bar, u);
      break;
    case RootSelection::kMaxVisits:
      d.action = argmax_first(tree.child_masses(root));
      break;
  }
  return d;
}

}  // namespace pmcts

#endif  // PMCTS_POLICIES_HPP_
