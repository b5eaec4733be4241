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

// Decision-process abstraction shared by the environments, the exact solvers
// and the search engine.

#ifndef PMCTS_MDP_HPP_
#define PMCTS_MDP_HPP_

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmcts/errors.hpp"

namespace pmcts {

using StateId = std::int64_t;
using ActionId = int;

struct Transition {
  StateId next = 0;
  double reward = 0.0;
  // True when `next` is a terminal state; its value is zero by definition.
  bool terminal = false;
};

// A deterministic, lazily queried decision process with dense integer state
// and action identifiers. Legal actions of a state are 0..action_count(s)-1;
// terminal states have no legal actions.
//
// Two-player zero-sum games set alternating() and report rewards from the
// perspective of the player who moved. Values are always stored from the
// perspective of the player to move, so the value of a successor enters its
// parent with a factor of -discount (see continuation()).
//
// Implementations must be safe to call concurrently (pure functions).
template <class M>
concept DecisionProcess = requires(const M& m, StateId s, ActionId a) {
  { m.state_count() } -> std::convertible_to<std::size_t>;
  { m.action_count(s) } -> std::convertible_to<int>;
  { m.transition(s, a) } -> std::same_as<Transition>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.discount() } -> std::convertible_to<double>;
  { m.initial_state() } -> std::convertible_to<StateId>;
  { m.reward_bound() } -> std::convertible_to<double>;
  { m.alternating() } -> std::convertible_to<bool>;
  { m.max_episode_length() } -> std::convertible_to<int>;
  { m.name() } -> std::convertible_to<std::string>;
};

// Factor applied to a successor's value when folding it into its parent.
template <DecisionProcess M>
double continuation(const M& model) {
  return model.discount() * (model.alternating() ? -1.0 : 1.0);
}

struct Step {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  StateId leaf_state = 0;

  std::size_t depth() const { return steps.size(); }
};

// Rolls `actions` forward from `start`. Stops early if a terminal state is
// reached; the remaining actions are ignored.
template <DecisionProcess M>
Trajectory make_trajectory(const M& model, StateId start,
                           std::span<const ActionId> actions) {
  Trajectory traj;
  traj.leaf_state = start;
  for (ActionId a : actions) {
    if (model.is_terminal(traj.leaf_state)) break;
    Transition t = model.transition(traj.leaf_state, a);
    traj.steps.push_back({traj.leaf_state, a, t.reward});
    traj.leaf_state = t.next;
  }
  return traj;
}

// Sum_k (discount * perspective)^k reward_k + (discount * perspective)^depth
// * bootstrap. `perspective` is -1 for alternating two-player games.
inline double discounted_return(const Trajectory& traj, double bootstrap,
                                double discount, double perspective = 1.0) {
  const double c = discount * perspective;
  double g = bootstrap;
  for (auto it = traj.steps.rbegin(); it != traj.steps.rend(); ++it) {
    g = it->reward + c * g;
  }
  return g;
}

// Return of the suffix of `traj` that starts at `from_depth`.
inline double suffix_return(const Trajectory& traj, std::size_t from_depth,
                            double bootstrap, double discount,
                            double perspective = 1.0) {
  if (from_depth > traj.depth()) {
    throw RangeError("suffix_return: from_depth " + std::to_string(from_depth) +
                     " exceeds trajectory depth " +
                     std::to_string(traj.depth()));
  }
  const double c = discount * perspective;
  double g = bootstrap;
  for (std::size_t k = traj.depth(); k > from_depth; --k) {
    g = traj.steps[k - 1].reward + c * g;
  }
  return g;
}

// True if every consecutive pair of steps is consistent with the model.
template <DecisionProcess M>
bool is_consistent(const M& model, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.depth(); ++k) {
    const Step& step = traj.steps[k];
    Transition t = model.transition(step.state, step.action);
    StateId expected_next =
        k + 1 < traj.depth() ? traj.steps[k + 1].state : traj.leaf_state;
    if (t.next != expected_next || t.reward != step.reward) return false;
  }
  return true;
}

}  // namespace pmcts

#endif  // PMCTS_MDP_HPP_
