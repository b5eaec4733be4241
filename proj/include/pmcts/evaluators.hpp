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

// Prior-policy / leaf-value sources used by the search.
//
// Each stochastic draw is keyed by a caller-supplied 64-bit draw key, so the
// engine decides which draws are fresh and which are shared, and results do
// not depend on call order or thread interleaving.

#ifndef PMCTS_EVALUATORS_HPP_
#define PMCTS_EVALUATORS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmcts/errors.hpp"
#include "pmcts/mdp.hpp"
#include "pmcts/oracle.hpp"
#include "pmcts/random.hpp"

namespace pmcts {

enum class EvaluatorKind { kExact, kNoisyUnbiased, kDeterministicBiased, kRollout };

inline std::string to_string(EvaluatorKind k) {
  switch (k) {
    case EvaluatorKind::kExact: return "exact";
    case EvaluatorKind::kNoisyUnbiased: return "noisy_unbiased";
    case EvaluatorKind::kDeterministicBiased: return "deterministic_biased";
    case EvaluatorKind::kRollout: return "rollout";
  }
  return "unknown";
}

struct Evaluation {
  std::vector<double> prior;
  double value = 0.0;
};

template <class E>
concept Evaluator = requires(const E& e, StateId s, std::uint64_t key) {
  { e.evaluate(s, key) } -> std::same_as<Evaluation>;
  { e.kind() } -> std::same_as<EvaluatorKind>;
};

// Shared call counters; copies of an evaluator report into the same counters.
struct EvaluatorCounters {
  std::atomic<long> evaluations{0};
  std::atomic<long> batches{0};
};

// Evaluator backed by a prior table and reference values V^{pi_theta}:
//   exact                 value = V(s)
//   noisy_unbiased        value = V(s) + clip(N(0, sigma^2), +-6 sigma),
//                         fresh for every draw key
//   deterministic_biased  value = V(s) + offset(s), offset a fixed hash of
//                         (seed, s) in [-bias_scale, bias_scale]
class TabularEvaluator {
 public:
  TabularEvaluator(EvaluatorKind kind, std::shared_ptr<const TabularPolicy> prior,
                   std::vector<double> reference, double sigma,
                   double bias_scale, std::uint64_t seed,
                   std::uint64_t evaluator_id = 0)
      : kind_(kind),
        prior_(std::move(prior)),
        reference_(std::move(reference)),
        sigma_(sigma),
        bias_scale_(bias_scale),
        seed_(seed),
        id_(evaluator_id),
        counters_(std::make_shared<EvaluatorCounters>()) {
    if (kind_ == EvaluatorKind::kRollout) {
      throw ValidationError("TabularEvaluator cannot be a rollout evaluator");
    }
    if (!(sigma_ >= 0.0)) throw ValidationError("sigma must be >= 0");
    if (!(bias_scale_ >= 0.0)) throw ValidationError("bias_scale must be >= 0");
    if (!prior_ || prior_->size() != reference_.size()) {
      throw ValidationError("prior and reference values differ in size");
    }
  }

  EvaluatorKind kind() const { return kind_; }

  const std::vector<double>& prior(StateId s) const { return prior_->row(s); }

  double reference_value(StateId s) const {
    return reference_.at(static_cast<std::size_t>(s));
  }

  double offset(StateId s) const {
    if (kind_ != EvaluatorKind::kDeterministicBiased || bias_scale_ == 0.0) {
      return 0.0;
    }
    const double u =
        to_unit(hash_key({seed_, id_, kOffsetSalt, static_cast<std::uint64_t>(s)}));
    return (2.0 * u - 1.0) * bias_scale_;
  }

  double value(StateId s, std::uint64_t draw_key) const {
    const double v = reference_value(s);
    switch (kind_) {
      case EvaluatorKind::kExact:
        return v;
      case EvaluatorKind::kDeterministicBiased:
        return v + offset(s);
      case EvaluatorKind::kNoisyUnbiased: {
        if (sigma_ == 0.0) return v;
        Stream rng({seed_, id_, kNoiseSalt, draw_key});
        const double z = std::clamp(rng.normal(), -6.0, 6.0);
        return v + sigma_ * z;
      }
      case EvaluatorKind::kRollout:
        break;
    }
    return v;
  }

  // Draw with an internally generated key (one fresh key per call).
  double value(StateId s) const {
    return value(s, kAutoKeyBase + static_cast<std::uint64_t>(
                                       auto_key_->fetch_add(1)));
  }

  Evaluation evaluate(StateId s, std::uint64_t draw_key) const {
    counters_->evaluations.fetch_add(1, std::memory_order_relaxed);
    return {prior(s), value(s, draw_key)};
  }

  std::vector<Evaluation> batch_evaluate(
      std::span<const StateId> states,
      std::span<const std::uint64_t> keys) const {
    if (states.size() != keys.size()) {
      throw ValidationError("batch_evaluate: states and keys differ in size");
    }
    counters_->batches.fetch_add(1, std::memory_order_relaxed);
    std::vector<Evaluation> out;
    out.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      out.push_back(evaluate(states[i], keys[i]));
    }
    return out;
  }

  double sigma() const { return sigma_; }
  double bias_scale() const { return bias_scale_; }
  std::uint64_t seed() const { return seed_; }
  long evaluation_count() const { return counters_->evaluations.load(); }
  long batch_count() const { return counters_->batches.load(); }

 private:
  static constexpr std::uint64_t kOffsetSalt = 0x6f6666;
  static constexpr std::uint64_t kNoiseSalt = 0x6e6f6973;
  static constexpr std::uint64_t kAutoKeyBase = std::uint64_t{1} << 62;

  EvaluatorKind kind_;
  std::shared_ptr<const TabularPolicy> prior_;
  std::vector<double> reference_;
  double sigma_;
  double bias_scale_;
  std::uint64_t seed_;
  std::uint64_t id_;
  std::shared_ptr<EvaluatorCounters> counters_;
  std::shared_ptr<std::atomic<long>> auto_key_ =
      std::make_shared<std::atomic<long>>(0);
};

namespace detail {

template <DecisionProcess M>
void require_full_support(const M& model, const TabularPolicy& prior) {
  validate_policy(model, prior);
  for (std::size_t s = 0; s < prior.size(); ++s) {
    for (double p : prior.probabilities[s]) {
      if (!(p > 0.0)) {
        throw ValidationError("prior row " + std::to_string(s) +
                              " lacks full support");
      }
    }
  }
}

}  // namespace detail

template <DecisionProcess M>
TabularEvaluator make_exact_evaluator(const M& model, TabularPolicy prior) {
  detail::require_full_support(model, prior);
  auto ref = policy_evaluation(model, prior).v;
  return TabularEvaluator(EvaluatorKind::kExact,
                          std::make_shared<const TabularPolicy>(std::move(prior)),
                          std::move(ref), 0.0, 0.0, 0);
}

template <DecisionProcess M>
TabularEvaluator make_noisy_evaluator(const M& model, TabularPolicy prior,
                                      double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
  detail::require_full_support(model, prior);
  auto ref = policy_evaluation(model, prior).v;
  return TabularEvaluator(EvaluatorKind::kNoisyUnbiased,
                          std::make_shared<const TabularPolicy>(std::move(prior)),
                          std::move(ref), sigma, 0.0, seed);
}

template <DecisionProcess M>
TabularEvaluator make_biased_evaluator(const M& model, TabularPolicy prior,
                                       double bias_scale, std::uint64_t seed) {
  if (!(bias_scale >= 0.0)) throw ValidationError("bias_scale must be >= 0");
  detail::require_full_support(model, prior);
  auto ref = policy_evaluation(model, prior).v;
  return TabularEvaluator(EvaluatorKind::kDeterministicBiased,
                          std::make_shared<const TabularPolicy>(std::move(prior)),
                          std::move(ref), 0.0, bias_scale, seed);
}

// Softmax prior with hashed Gaussian logits scaled by `spread`; spread 0 gives
// the uniform prior. Always full support.
template <DecisionProcess M>
TabularPolicy make_random_prior(const M& model, double spread,
                                std::uint64_t seed) {
  TabularPolicy p = uniform_policy(model);
  if (spread == 0.0) return p;
  for (std::size_t s = 0; s < p.size(); ++s) {
    auto& row = p.probabilities[s];
    if (row.empty()) continue;
    std::vector<double> logits(row.size());
    for (std::size_t a = 0; a < row.size(); ++a) {
      Stream rng({seed, 0x7072696f72, s, a});
      logits[a] = spread * rng.normal();
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) {
      row[a] = std::exp(logits[a] - top);
      sum += row[a];
    }
    for (double& x : row) x /= sum;
  }
  return p;
}

// Softmax of the optimal action values at `temperature`, plus the same hashed
// Gaussian logits as make_random_prior. Stands in for a trained policy that is
// informative but not optimal.
template <DecisionProcess M>
TabularPolicy make_value_prior(const M& model, double temperature, double spread,
                               std::uint64_t seed) {
  if (!(temperature > 0.0)) {
    throw ValidationError("prior temperature must be > 0");
  }
  const ExactValues opt = value_iteration(model);
  TabularPolicy p = uniform_policy(model);
  for (std::size_t s = 0; s < p.size(); ++s) {
    auto& row = p.probabilities[s];
    if (row.empty()) continue;
    std::vector<double> logits(row.size());
    for (std::size_t a = 0; a < row.size(); ++a) {
      logits[a] = opt.q[s][a] / temperature;
      if (spread != 0.0) {
        Stream rng({seed, 0x7072696f72, s, a});
        logits[a] += spread * rng.normal();
      }
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) {
      row[a] = std::exp(logits[a] - top);
      sum += row[a];
    }
    for (double& x : row) x /= sum;
  }
  return p;
}

// Samples index i with probability probs[i] given one uniform u in [0, 1),
// by inverse CDF over the fixed index order. Zero-probability entries are
// never returned.
inline int sample_categorical(std::span<const double> probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = u * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (target < acc) return static_cast<int>(i);
  }
  if (last_positive < 0) {
    throw ValidationError("sample_categorical: distribution has no mass");
  }
  return last_positive;
}

// Leaf values from K i.i.d. rollouts under a rollout policy, truncated at
// max_rollout_depth with zero bootstrap. Priors come from a separate table.
template <DecisionProcess M>
class RolloutEvaluator {
 public:
  RolloutEvaluator(M model, std::shared_ptr<const TabularPolicy> prior,
                   std::shared_ptr<const TabularPolicy> rollout_policy,
                   int rollouts_per_leaf, int max_rollout_depth,
                   std::uint64_t seed)
      : model_(std::move(model)),
        prior_(std::move(prior)),
        rollout_policy_(std::move(rollout_policy)),
        k_(rollouts_per_leaf),
        max_depth_(max_rollout_depth),
        seed_(seed),
        counters_(std::make_shared<EvaluatorCounters>()) {
    if (k_ < 1) throw ValidationError("rollouts_per_leaf must be >= 1");
    if (max_depth_ < 0) throw ValidationError("max_rollout_depth must be >= 0");
    if (!prior_ || !rollout_policy_) throw ValidationError("missing policy");
  }

  EvaluatorKind kind() const { return EvaluatorKind::kRollout; }
  const std::vector<double>& prior(StateId s) const { return prior_->row(s); }
  int rollouts_per_leaf() const { return k_; }
  int max_rollout_depth() const { return max_depth_; }

  double value(StateId s, std::uint64_t draw_key) const {
    if (model_.is_terminal(s)) return 0.0;
    const double c = continuation(model_);
    double total = 0.0;
    for (int k = 0; k < k_; ++k) {
      Stream rng({seed_, 0x726f6c6c, draw_key, static_cast<std::uint64_t>(k)});
      double g = 0.0;
      double scale = 1.0;
      StateId cur = s;
      for (int d = 0; d < max_depth_ && !model_.is_terminal(cur); ++d) {
        const ActionId a = sample_categorical(rollout_policy_->row(cur),
                                              rng.uniform());
        const Transition t = model_.transition(cur, a);
        g += scale * t.reward;
        scale *= c;
        cur = t.next;
      }
      total += g;
    }
    return total / static_cast<double>(k_);
  }

  Evaluation evaluate(StateId s, std::uint64_t draw_key) const {
    counters_->evaluations.fetch_add(1, std::memory_order_relaxed);
    return {prior(s), value(s, draw_key)};
  }

  std::vector<Evaluation> batch_evaluate(
      std::span<const StateId> states,
      std::span<const std::uint64_t> keys) const {
    counters_->batches.fetch_add(1, std::memory_order_relaxed);
    std::vector<Evaluation> out;
    out.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      out.push_back(evaluate(states[i], keys[i]));
    }
    return out;
  }

  long evaluation_count() const { return counters_->evaluations.load(); }

 private:
  M model_;
  std::shared_ptr<const TabularPolicy> prior_;
  std::shared_ptr<const TabularPolicy> rollout_policy_;
  int k_;
  int max_depth_;
  std::uint64_t seed_;
  std::shared_ptr<EvaluatorCounters> counters_;
};

template <DecisionProcess M>
double rollout_value(const M& model, const RolloutEvaluator<M>& evaluator,
                     StateId state, std::uint64_t seed) {
  (void)model;
  return evaluator.value(state, seed);
}

}  // namespace pmcts

#endif  // PMCTS_EVALUATORS_HPP_
