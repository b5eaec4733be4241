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

#ifndef PMCTS_ENGINE_RUN_HPP_
#define PMCTS_ENGINE_RUN_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "pmcts/engine/config.hpp"
#include "pmcts/engine/search.hpp"
#include "pmcts/errors.hpp"
#include "pmcts/parallel.hpp"
#include "pmcts/random.hpp"

namespace pmcts {

template <DecisionProcess M, Evaluator E>
SearchResult run_gumbel_baseline(const M& model, const E& evaluator,
                                 StateId root_state, SearchConfig config,
                                 WorkerPool* pool = nullptr) {
  config.algorithm = Algorithm::kGumbelMcts;
  Search<M, E> search(model, evaluator, root_state, config, pool);
  return search.run();
}

// Combines independent searches of the same root. Actions never visited by
// any tree cannot be chosen.
inline SearchResult aggregate_root_parallel(std::span<const SearchResult> trees,
                                            Aggregation mode) {
  if (trees.empty()) throw ValidationError("no searches to aggregate");
  const std::size_t k = trees.front().pi_search.size();
  const double n = static_cast<double>(trees.size());
  SearchResult out;
  out.algorithm = Algorithm::kRootParallelGumbel;
  out.pi_search.assign(k, 0.0);
  out.root_q.assign(k, 0.0);
  out.root_visits.assign(k, 0.0);
  std::vector<double> votes(k, 0.0);
  for (const auto& t : trees) {
    if (t.pi_search.size() != k) {
      throw ValidationError("aggregated searches disagree on action count");
    }
    for (std::size_t a = 0; a < k; ++a) {
      out.pi_search[a] += t.pi_search[a] / n;
      out.root_q[a] += t.root_q[a] / n;
      out.root_visits[a] += t.root_visits[a];
    }
    votes[static_cast<std::size_t>(t.action)] += 1.0;
    out.v_search += t.v_search / n;
    out.root_value += t.root_value / n;
    out.tree_size += t.tree_size;
    const auto& d = t.diagnostics;
    out.diagnostics.select_ms += d.select_ms;
    out.diagnostics.expand_ms += d.expand_ms;
    out.diagnostics.backprop_ms += d.backprop_ms;
    out.diagnostics.evaluations += d.evaluations;
    out.diagnostics.skipped_nodes += d.skipped_nodes;
    auto& its = out.diagnostics.iterations;
    if (its.size() < d.iterations.size()) its.resize(d.iterations.size());
    for (std::size_t i = 0; i < d.iterations.size(); ++i) {
      its[i].iteration = static_cast<int>(i);
      its[i].unique_leaves += d.iterations[i].unique_leaves;
      its[i].new_nodes += d.iterations[i].new_nodes;
      its[i].root_ess += d.iterations[i].root_ess;
      its[i].select_ms += d.iterations[i].select_ms;
      its[i].expand_ms += d.iterations[i].expand_ms;
      its[i].backprop_ms += d.iterations[i].backprop_ms;
    }
  }
  if (mode == Aggregation::kVote) {
    for (std::size_t a = 0; a < k; ++a) out.pi_search[a] = votes[a] / n;
  }
  out.pi_bar.assign(k, 0.0);
  double mass = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    if (out.root_visits[a] > 0.0) {
      out.pi_bar[a] = out.pi_search[a];
      mass += out.pi_search[a];
    }
  }
  if (!(mass > 0.0)) {
    throw SearchFailure("aggregated search has no visited root action");
  }
  for (double& p : out.pi_bar) p /= mass;
  std::vector<double> score;
  switch (mode) {
    case Aggregation::kMeanPolicy:
      score = out.pi_bar;
      break;
    case Aggregation::kMeanQ:
      score = out.root_q;
      for (std::size_t a = 0; a < k; ++a) {
        if (out.root_visits[a] == 0.0) score[a] = -1e300;
      }
      break;
    case Aggregation::kVote:
      score = votes;
      break;
  }
  out.action = argmax_first(score);
  return out;
}

// N independent single-particle Gumbel searches with distinct sub-seeds,
// spread over the pool's workers.
template <DecisionProcess M, Evaluator E>
SearchResult run_root_parallel_baseline(const M& model, const E& evaluator,
                                        StateId root_state,
                                        const SearchConfig& config,
                                        WorkerPool* pool = nullptr) {
  validate(config);
  std::unique_ptr<WorkerPool> own;
  if (pool == nullptr) {
    own = std::make_unique<WorkerPool>(config.workers);
    pool = own.get();
  }
  const auto n = static_cast<std::size_t>(config.particles);
  std::vector<SearchResult> trees(n);
  pool->parallel_for(n, [&](std::size_t i) {
    SearchConfig sub = config;
    sub.algorithm = Algorithm::kGumbelMcts;
    sub.particles = 1;
    sub.workers = 1;
    sub.keep_tree_dump = false;
    sub.seed = n == 1 ? config.seed
                      : hash_key({config.seed, 0x7375626b, static_cast<std::uint64_t>(i)});
    Search<M, E> search(model, evaluator, root_state, sub);
    trees[i] = search.run();
  });
  if (n == 1) {
    SearchResult r = trees.front();
    r.algorithm = Algorithm::kRootParallelGumbel;
    return r;
  }
  return aggregate_root_parallel(trees, config.aggregation);
}

template <DecisionProcess M, Evaluator E>
SearchResult run_search(const M& model, const E& evaluator, StateId root_state,
                        const SearchConfig& config, WorkerPool* pool = nullptr) {
  validate(config);
  if (config.algorithm == Algorithm::kRootParallelGumbel) {
    return run_root_parallel_baseline(model, evaluator, root_state, config, pool);
  }
  Search<M, E> search(model, evaluator, root_state, config, pool);
  return search.run();
}

}  // namespace pmcts

#endif  // PMCTS_ENGINE_RUN_HPP_
