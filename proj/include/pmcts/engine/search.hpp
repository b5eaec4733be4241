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

// Synchronous batch search loop shared by all single-tree algorithms.
//
// Every iteration runs three barrier-separated phases:
//   select     N particles descend the read-only tree independently
//              (sequentially for the virtual-visit baselines, which need
//              to see each other's virtual counts);
//   expand     one evaluator batch for the unique new leaves, nodes linked
//              in ascending order of the first particle reaching them;
//   backprop   optional retrospective reweighting and merging, per-particle
//              returns computed in parallel, then one ordered reduction.
//
// All randomness comes from streams keyed by (seed, iteration, particle), so
// results do not depend on the number of workers.

#ifndef PMCTS_ENGINE_SEARCH_HPP_
#define PMCTS_ENGINE_SEARCH_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pmcts/engine/config.hpp"
#include "pmcts/engine/particles.hpp"
#include "pmcts/errors.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/mdp.hpp"
#include "pmcts/parallel.hpp"
#include "pmcts/policies.hpp"
#include "pmcts/random.hpp"
#include "pmcts/tree.hpp"

namespace pmcts {

struct IterationRecord {
  int iteration = 0;
  int unique_leaves = 0;
  int new_nodes = 0;
  double root_nu = 0.0;  // root estimate fed to the update this iteration
  double root_ess = 0.0;
  double root_increment = 0.0;
  double ess_mean = 0.0;  // over nodes updated this iteration
  double ess_min = 0.0;
  int skipped_nodes = 0;
  double select_ms = 0.0;
  double expand_ms = 0.0;
  double backprop_ms = 0.0;
};

struct SearchDiagnostics {
  std::vector<IterationRecord> iterations;
  double select_ms = 0.0;
  double expand_ms = 0.0;
  double backprop_ms = 0.0;
  int skipped_nodes = 0;
  long evaluations = 0;

  double unique_trajectory_mean() const {
    if (iterations.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : iterations) s += r.unique_leaves;
    return s / static_cast<double>(iterations.size());
  }
  double ess_root_mean() const {
    if (iterations.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : iterations) s += r.root_ess;
    return s / static_cast<double>(iterations.size());
  }
};

struct SearchResult {
  Algorithm algorithm = Algorithm::kPmcts;
  ActionId action = -1;
  std::vector<double> pi_search;
  std::vector<double> pi_bar;
  double v_search = 0.0;
  std::vector<double> root_visits;
  std::vector<double> root_q;  // completed q
  double root_value = 0.0;
  int tree_size = 0;
  SearchDiagnostics diagnostics;
  std::string tree_dump;
};

// Canonical text form, exact to the bit (hex floats). Wall-clock fields are
// left out unless asked for.
inline std::string serialize(const SearchResult& r, bool with_timings = false) {
  std::string out;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%a ", x);
    out += buf;
  };
  auto vec = [&](const char* name, const std::vector<double>& v) {
    out += name;
    out += ' ';
    for (double x : v) num(x);
    out += '\n';
  };
  out += "algorithm " + to_string(r.algorithm) + "\n";
  out += "action " + std::to_string(r.action) + "\n";
  vec("pi_search", r.pi_search);
  vec("pi_bar", r.pi_bar);
  out += "v_search ";
  num(r.v_search);
  out += "\nroot_value ";
  num(r.root_value);
  out += "\n";
  vec("root_visits", r.root_visits);
  vec("root_q", r.root_q);
  out += "tree_size " + std::to_string(r.tree_size) + "\n";
  out += "evaluations " + std::to_string(r.diagnostics.evaluations) + "\n";
  for (const auto& it : r.diagnostics.iterations) {
    out += "iter " + std::to_string(it.iteration) + " " +
           std::to_string(it.unique_leaves) + " " +
           std::to_string(it.new_nodes) + " " +
           std::to_string(it.skipped_nodes) + " ";
    num(it.root_nu);
    num(it.root_ess);
    num(it.root_increment);
    num(it.ess_mean);
    num(it.ess_min);
    if (with_timings) {
      num(it.select_ms);
      num(it.expand_ms);
      num(it.backprop_ms);
    }
    out += "\n";
  }
  out += r.tree_dump;
  return out;
}

namespace detail {

inline constexpr std::uint64_t kSelectSalt = 0x73656c;
inline constexpr std::uint64_t kLeafSalt = 0x6c656166;
inline constexpr std::uint64_t kRootSalt = 0x726f6f74;
inline constexpr std::uint64_t kActSalt = 0x616374;
inline constexpr std::uint64_t kGumbelSalt = 0x67756d;

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - since)
      .count();
}

inline bool is_particle_algorithm(Algorithm a) {
  return a == Algorithm::kSimplePmcts || a == Algorithm::kPmcts;
}

inline bool is_puct(Algorithm a) {
  return a == Algorithm::kPuctVirtualLosses ||
         a == Algorithm::kPuctVirtualMeans;
}

// One contribution of a particle to a node's update.
struct Contribution {
  int node;
  int particle;
  double weight;
  double nu;
  int multiplicity;
  bool alive;
};

}  // namespace detail

template <DecisionProcess M, Evaluator E>
class Search {
 public:
  Search(const M& model, const E& evaluator, StateId root_state,
         SearchConfig config, WorkerPool* pool = nullptr)
      : model_(model),
        evaluator_(evaluator),
        config_(std::move(config)),
        tree_(capacity_for(config_), continuation(model)) {
    validate(config_);
    if (config_.algorithm == Algorithm::kRootParallelGumbel) {
      throw ValidationError("root_parallel_gumbel runs several trees; use "
                            "run_search");
    }
    if (model_.is_terminal(root_state)) {
      throw ValidationError("search root is terminal");
    }
    if (pool == nullptr) {
      own_pool_ = std::make_unique<WorkerPool>(config_.workers);
      pool_ = own_pool_.get();
    } else {
      pool_ = pool;
    }
    Evaluation e = evaluator_.evaluate(
        root_state, hash_key({config_.seed, detail::kRootSalt}));
    ++evaluations_;
    tree_.add_root(root_state, std::move(e.prior), e.value, false);
    if (tree_.action_count(tree_.root()) < 1) {
      throw ValidationError("search root has no legal actions");
    }
    setup_root_plan();
  }

  static std::size_t capacity_for(const SearchConfig& c) {
    return static_cast<std::size_t>(c.simulations) *
               static_cast<std::size_t>(c.particles) +
           1;
  }

  const SearchTree& tree() const { return tree_; }
  SearchTree& tree() { return tree_; }
  const SearchConfig& config() const { return config_; }
  const SearchDiagnostics& diagnostics() const { return diag_; }
  int iterations_done() const { return iteration_; }

  // --- Phase 1 -------------------------------------------------------------

  ParticleBatch select_particles(int iteration) {
    rank_root_phases(iteration);
    ParticleBatch batch;
    const auto n = static_cast<std::size_t>(config_.particles);
    batch.particles.resize(n);
    if (detail::is_puct(config_.algorithm)) {
      select_virtual(batch);
    } else {
      pool_->parallel_for(n, [&](std::size_t i) {
        batch.particles[i] = select_one(iteration, static_cast<int>(i));
      });
    }
    return batch;
  }

  // --- Phase 2 -------------------------------------------------------------

  // Returns the number of nodes created.
  int expand_batch(ParticleBatch& batch, int iteration) {
    struct Edge {
      int parent;
      ActionId action;
      std::vector<std::size_t> members;
    };
    std::vector<Edge> edges;
    std::map<std::pair<int, ActionId>, std::size_t> index;
    for (std::size_t n = 0; n < batch.size(); ++n) {
      Particle& p = batch[n];
      if (!p.pending_edge()) {
        // Stopped on an existing terminal node.
        p.leaf = p.path.back();
        p.new_leaf = false;
        p.leaf_value = 0.0;
        continue;
      }
      auto key = std::make_pair(p.path.back(), p.actions.back());
      auto [it, inserted] = index.emplace(key, edges.size());
      if (inserted) edges.push_back({key.first, key.second, {}});
      edges[it->second].members.push_back(n);
    }

    // Transitions and one batched evaluation for the non-terminal leaves.
    std::vector<Transition> moves(edges.size());
    std::vector<StateId> states;
    std::vector<std::uint64_t> keys;
    std::vector<std::size_t> owner;  // edge of each evaluation request
    for (std::size_t e = 0; e < edges.size(); ++e) {
      moves[e] = model_.transition(tree_.node(edges[e].parent).state,
                                   edges[e].action);
      if (moves[e].terminal) continue;
      if (config_.independent_leaf_draws) {
        for (std::size_t n : edges[e].members) {
          states.push_back(moves[e].next);
          keys.push_back(leaf_key(iteration, n));
          owner.push_back(e);
        }
      } else {
        states.push_back(moves[e].next);
        keys.push_back(leaf_key(iteration, edges[e].members.front()));
        owner.push_back(e);
      }
    }
    std::vector<Evaluation> evals = evaluate_batch(states, keys);

    std::vector<std::vector<double>> draws(edges.size());
    std::vector<std::vector<double>> priors(edges.size());
    for (std::size_t k = 0; k < evals.size(); ++k) {
      draws[owner[k]].push_back(evals[k].value);
      if (priors[owner[k]].empty()) priors[owner[k]] = std::move(evals[k].prior);
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      double evaluation = 0.0;
      if (!draws[e].empty()) {
        double s = 0.0;
        for (double d : draws[e]) s += d;
        evaluation = s / static_cast<double>(draws[e].size());
      }
      const int node = tree_.add_child(edges[e].parent, edges[e].action,
                                       moves[e].next, moves[e].reward,
                                       moves[e].terminal, std::move(priors[e]),
                                       evaluation);
      for (std::size_t j = 0; j < edges[e].members.size(); ++j) {
        Particle& p = batch[edges[e].members[j]];
        p.path.push_back(node);
        p.leaf = node;
        p.new_leaf = true;
        p.leaf_value = moves[e].terminal        ? 0.0
                       : config_.independent_leaf_draws ? draws[e][j]
                                                        : evaluation;
      }
    }
    return static_cast<int>(edges.size());
  }

  // --- Phase 3 -------------------------------------------------------------

  // Replaces each particle's last-step target probability pi_i by pi_{i+1},
  // the parent's policy after this iteration's new children are linked.
  void retrospective_reweight(ParticleBatch& batch) {
    std::map<int, std::vector<double>> next_policy;
    for (auto& p : batch.particles) {
      if (p.actions.empty() || p.last_forced) continue;
      const int parent = p.path[p.actions.size() - 1];
      auto it = next_policy.find(parent);
      if (it == next_policy.end()) {
        it = next_policy.emplace(parent, node_policy(tree_, parent,
                                                     config_.beta))
                 .first;
      }
      const double factor =
          it->second[static_cast<std::size_t>(p.actions.back())] /
          p.last_target;
      p.ratios.back() *= factor;
      p.weight *= factor;
      rebuild_depth_weights(p);
    }
  }

  void backprop(ParticleBatch& batch, IterationRecord& record) {
    const double c = tree_.continuation();
    const bool weighted = config_.algorithm == Algorithm::kPmcts;
    const bool per_depth = weighted && config_.per_depth_weights;

    // Per-particle contributions, computed independently.
    std::vector<std::vector<detail::Contribution>> parts(batch.size());
    pool_->parallel_for(batch.size(), [&](std::size_t n) {
      const Particle& p = batch[n];
      const std::size_t last = p.path.size() - 1;
      std::vector<double> g(p.path.size());
      g[last] = p.leaf_value;
      for (std::size_t t = last; t > 0; --t) {
        g[t - 1] = tree_.node(p.path[t]).reward + c * g[t];
      }
      const std::size_t upto = p.new_leaf ? last : last + 1;
      auto& out = parts[n];
      out.reserve(upto);
      for (std::size_t t = 0; t < upto; ++t) {
        const double w = !weighted ? 1.0
                         : per_depth ? p.depth_weights[t]
                                     : p.weight;
        out.push_back({p.path[t], static_cast<int>(n), w, g[t],
                       p.multiplicity, p.alive});
      }
    });

    std::vector<detail::Contribution> all;
    for (auto& v : parts) all.insert(all.end(), v.begin(), v.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) {
                       return a.node != b.node ? a.node < b.node
                                               : a.particle < b.particle;
                     });

    double ess_sum = 0.0;
    int ess_count = 0;
    record.ess_min = 0.0;
    for (std::size_t lo = 0; lo < all.size();) {
      std::size_t hi = lo;
      double w_sum = 0.0, wnu = 0.0, w2 = 0.0;
      double count = 0.0, unique = 0.0;
      while (hi < all.size() && all[hi].node == all[lo].node) {
        const auto& k = all[hi];
        count += k.multiplicity;
        if (k.alive) {
          unique += 1.0;
          w_sum += k.weight;
          wnu += k.weight * k.nu;
          w2 += k.weight * k.weight;
        }
        ++hi;
      }
      const int node = all[lo].node;
      lo = hi;
      if (!(w_sum > 0.0)) {
        ++record.skipped_nodes;
        continue;
      }
      const double ess = w_sum * w_sum / w2;
      double nu, increment;
      if (!weighted) {
        nu = wnu / w_sum;
        increment = count;
      } else {
        nu = config_.estimator == Estimator::kSelfNormalized ? wnu / w_sum
                                                             : wnu / count;
        increment = config_.ess_weighting ? ess
                    : config_.dedup       ? unique
                                          : count;
      }
      Node& target = tree_.node(node);
      auto [v, m] =
          stable_weighted_update(target.value, target.mass, nu, increment);
      target.value = v;
      target.mass = m;
      if (node == tree_.root()) {
        record.root_nu = nu;
        record.root_ess = ess;
        record.root_increment = increment;
      }
      ess_sum += ess;
      record.ess_min = ess_count == 0 ? ess : std::min(record.ess_min, ess);
      ++ess_count;
    }
    record.ess_mean = ess_count > 0 ? ess_sum / ess_count : 0.0;
  }

  IterationRecord run_iteration() {
    IterationRecord rec;
    rec.iteration = iteration_;
    auto t0 = std::chrono::steady_clock::now();
    ParticleBatch batch = select_particles(iteration_);
    rec.select_ms = detail::elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    rec.new_nodes = expand_batch(batch, iteration_);
    rec.expand_ms = detail::elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<int> leaves;
    for (const auto& p : batch.particles) leaves.push_back(p.leaf);
    std::sort(leaves.begin(), leaves.end());
    rec.unique_leaves = static_cast<int>(
        std::unique(leaves.begin(), leaves.end()) - leaves.begin());
    if (config_.algorithm == Algorithm::kPmcts) {
      if (config_.retrospective) retrospective_reweight(batch);
      if (config_.dedup) dedup_merge(batch);
    }
    backprop(batch, rec);
    rec.backprop_ms = detail::elapsed_ms(t0);

    diag_.select_ms += rec.select_ms;
    diag_.expand_ms += rec.expand_ms;
    diag_.backprop_ms += rec.backprop_ms;
    diag_.skipped_nodes += rec.skipped_nodes;
    diag_.iterations.push_back(rec);
    ++iteration_;
    return rec;
  }

  SearchResult run() {
    while (iteration_ < config_.simulations) run_iteration();
    return result();
  }

  SearchResult result() const {
    SearchResult r;
    r.algorithm = config_.algorithm;
    Stream act({config_.seed, detail::kActSalt});
    RootDecision d = root_action_selection(
        tree_, config_.effective_root_selection(), config_.beta, act.uniform());
    r.action = d.action;
    r.pi_search = std::move(d.pi_search);
    r.pi_bar = std::move(d.pi_bar);
    r.v_search = d.v_search;
    r.root_visits = tree_.child_masses(tree_.root());
    r.root_q = completed_q(tree_, tree_.root());
    r.root_value = tree_.node(tree_.root()).value;
    r.tree_size = tree_.size();
    r.diagnostics = diag_;
    r.diagnostics.evaluations = evaluations_;
    if (config_.keep_tree_dump) r.tree_dump = tree_.dump();
    return r;
  }

 private:
  std::uint64_t leaf_key(int iteration, std::size_t particle) const {
    return hash_key({config_.seed, detail::kLeafSalt,
                     static_cast<std::uint64_t>(iteration),
                     static_cast<std::uint64_t>(particle)});
  }

  std::vector<Evaluation> evaluate_batch(const std::vector<StateId>& states,
                                         const std::vector<std::uint64_t>& keys) {
    if (states.empty()) return {};
    evaluations_ += static_cast<long>(states.size());
    if constexpr (requires {
                    evaluator_.batch_evaluate(std::span<const StateId>(states),
                                              std::span<const std::uint64_t>(keys));
                  }) {
      return evaluator_.batch_evaluate(std::span<const StateId>(states),
                                       std::span<const std::uint64_t>(keys));
    } else {
      std::vector<Evaluation> out;
      for (std::size_t i = 0; i < states.size(); ++i) {
        out.push_back(evaluator_.evaluate(states[i], keys[i]));
      }
      return out;
    }
  }

  // --- Root sequential halving ----------------------------------------------

  void setup_root_plan() {
    const bool gumbel = config_.algorithm == Algorithm::kGumbelMcts;
    int requested = gumbel ? (config_.sh_top_k > 0 ? config_.sh_top_k : 16)
                           : config_.sh_top_k;
    if (requested <= 0 || detail::is_puct(config_.algorithm)) return;
    const int legal = tree_.action_count(tree_.root());
    int k = 1;
    while (k * 2 <= std::min(requested, legal)) k *= 2;
    const long total = static_cast<long>(config_.simulations) * config_.particles;
    while (k >= 2 && total < static_cast<long>(k) * log2_exact(k)) k /= 2;

    plan_active_ = true;
    gumbel_.assign(static_cast<std::size_t>(legal), 0.0);
    if (config_.gumbel_scale > 0.0) {
      for (int a = 0; a < legal; ++a) {
        Stream g({config_.seed, detail::kGumbelSalt, static_cast<std::uint64_t>(a)});
        gumbel_[static_cast<std::size_t>(a)] = config_.gumbel_scale * g.gumbel();
      }
    }
    if (k >= 2) {
      ShSchedule s = sh_schedule(config_.simulations, config_.particles, k);
      long start = 0;
      for (const auto& ph : s.phases) {
        phases_.push_back({ph.actions, start});
        start += static_cast<long>(ph.actions) * ph.per_action;
      }
      // Left-over simulations go to the best remaining action.
      if (start < total) phases_.push_back({1, start});
    } else {
      phases_.push_back({1, 0});
    }
    survivors_.resize(phases_.size());
  }

  std::vector<ActionId> ranked_root_actions(const std::vector<ActionId>& from,
                                            bool with_q) const {
    const Node& root = tree_.node(tree_.root());
    std::vector<double> q;
    double b = 0.0;
    if (with_q) {
      q = completed_q(tree_, tree_.root());
      b = beta(tree_.max_child_mass(tree_.root()), config_.beta);
    }
    std::vector<std::pair<double, ActionId>> scored;
    for (ActionId a : from) {
      const auto i = static_cast<std::size_t>(a);
      double s = gumbel_[i] + std::log(std::max(root.prior[i], 1e-300));
      if (with_q) s += b * q[i];
      scored.push_back({s, a});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
      return x.first > y.first;
    });
    std::vector<ActionId> out;
    for (const auto& s : scored) out.push_back(s.second);
    return out;
  }

  void rank_root_phases(int iteration) {
    if (!plan_active_) return;
    const long end = static_cast<long>(iteration + 1) * config_.particles;
    for (std::size_t p = 0; p < phases_.size(); ++p) {
      if (!survivors_[p].empty() || phases_[p].start >= end) continue;
      std::vector<ActionId> ranked;
      if (p == 0) {
        std::vector<ActionId> all(
            static_cast<std::size_t>(tree_.action_count(tree_.root())));
        std::iota(all.begin(), all.end(), 0);
        ranked = ranked_root_actions(all, false);
      } else {
        ranked = ranked_root_actions(survivors_[p - 1], true);
      }
      ranked.resize(static_cast<std::size_t>(phases_[p].actions));
      survivors_[p] = std::move(ranked);
    }
  }

  ActionId planned_root_action(int iteration, int particle) const {
    const long pos = static_cast<long>(iteration) * config_.particles + particle;
    std::size_t p = 0;
    while (p + 1 < phases_.size() && phases_[p + 1].start <= pos) ++p;
    const auto& s = survivors_[p];
    return s[static_cast<std::size_t>((pos - phases_[p].start) %
                                      static_cast<long>(s.size()))];
  }

  // --- Selection rules -------------------------------------------------------

  Particle select_one(int iteration, int n) const {
    Particle p;
    Stream rng({config_.seed, detail::kSelectSalt,
                static_cast<std::uint64_t>(iteration),
                static_cast<std::uint64_t>(n)});
    const bool weighted = config_.algorithm == Algorithm::kPmcts;
    const bool gumbel = config_.algorithm == Algorithm::kGumbelMcts;
    int cur = tree_.root();
    p.path.push_back(cur);
    for (;;) {
      const Node& node = tree_.node(cur);
      if (node.terminal) break;
      ActionId a;
      double ratio = 1.0;
      if (cur == tree_.root() && plan_active_) {
        a = planned_root_action(iteration, n);
        p.last_target = 1.0;
        p.last_forced = true;
      } else {
        std::vector<double> pi = node_policy(tree_, cur, config_.beta);
        p.last_forced = false;
        if (gumbel) {
          const double total = 1.0 + [&] {
            double s = 0.0;
            for (double m : tree_.child_masses(cur)) s += m;
            return s;
          }();
          std::vector<double> score(pi.size());
          for (std::size_t b = 0; b < pi.size(); ++b) {
            score[b] = pi[b] - tree_.child_mass(cur, static_cast<ActionId>(b)) / total;
          }
          a = argmax_first(score);
        } else if (weighted) {
          std::vector<double> proposal = proposal_policy(pi, config_.eta);
          a = sample_categorical(proposal, rng.uniform());
          const auto i = static_cast<std::size_t>(a);
          if (config_.weight_correction) {
            ratio = importance_ratio(pi[i], proposal[i], 1.0);
          }
        } else {
          a = sample_categorical(pi, rng.uniform());
        }
        p.last_target = pi[static_cast<std::size_t>(a)];
      }
      p.actions.push_back(a);
      p.ratios.push_back(ratio);
      p.weight *= ratio;
      const int child = node.children[static_cast<std::size_t>(a)];
      if (child == kNoNode) break;
      cur = child;
      p.path.push_back(cur);
    }
    rebuild_depth_weights(p);
    return p;
  }

  // Particles choose one after another, each seeing the virtual visits left
  // by the ones before it.
  void select_virtual(ParticleBatch& batch) const {
    const VirtualMode mode = config_.algorithm == Algorithm::kPuctVirtualLosses
                                 ? VirtualMode::kLosses
                                 : VirtualMode::kMeans;
    std::vector<std::vector<double>> virt(static_cast<std::size_t>(tree_.size()));
    PuctInput in;
    for (auto& p : batch.particles) {
      int cur = tree_.root();
      p.path.push_back(cur);
      for (;;) {
        const Node& node = tree_.node(cur);
        if (node.terminal) break;
        const std::size_t k = node.children.size();
        auto& v = virt[static_cast<std::size_t>(cur)];
        if (v.empty()) v.assign(k, 0.0);
        in.prior = node.prior;
        in.visits = tree_.child_masses(cur);
        in.q.assign(k, 0.0);
        for (std::size_t b = 0; b < k; ++b) {
          if (node.children[b] != kNoNode) {
            in.q[b] = tree_.q(cur, static_cast<ActionId>(b));
          }
        }
        in.virtual_visits = v;
        in.value = node.evaluation;
        in.node_visits = node.mass;
        in.node_virtual = std::accumulate(v.begin(), v.end(), 0.0);
        const ActionId a = puct_virtual(in, mode, config_.puct);
        v[static_cast<std::size_t>(a)] += 1.0;
        p.actions.push_back(a);
        p.ratios.push_back(1.0);
        const int child = node.children[static_cast<std::size_t>(a)];
        if (child == kNoNode) break;
        cur = child;
        p.path.push_back(cur);
      }
      rebuild_depth_weights(p);
    }
  }

  struct Phase {
    int actions;
    long start;
  };

  const M& model_;
  const E& evaluator_;
  SearchConfig config_;
  SearchTree tree_;
  std::unique_ptr<WorkerPool> own_pool_;
  WorkerPool* pool_ = nullptr;
  SearchDiagnostics diag_;
  long evaluations_ = 0;
  int iteration_ = 0;

  bool plan_active_ = false;
  std::vector<double> gumbel_;
  std::vector<Phase> phases_;
  std::vector<std::vector<ActionId>> survivors_;
};

}  // namespace pmcts

#endif  // PMCTS_ENGINE_SEARCH_HPP_
