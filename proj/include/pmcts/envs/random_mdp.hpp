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

#ifndef PMCTS_ENVS_RANDOM_MDP_HPP_
#define PMCTS_ENVS_RANDOM_MDP_HPP_

#include <cstdint>
#include <string>

#include "pmcts/errors.hpp"
#include "pmcts/mdp.hpp"
#include "pmcts/random.hpp"

namespace pmcts {

// Procedurally generated deterministic MDP. Nothing is stored: transitions,
// rewards and the terminal set are hashes of (seed, state, action), so two
// instances with equal parameters are bit-identical.
//
// Action 0 always moves to (s + 1) mod state_count, which makes every state
// reachable from state 0 within state_count steps. Other actions jump to a
// hashed successor. State 0 is never terminal.
class RandomMdp {
 public:
  struct Params {
    std::uint64_t seed = 7;
    int state_count = 20;
    int action_count = 3;
    double reward_scale = 1.0;
    double terminal_fraction = 0.0;
    double discount = 0.9;
    int max_episode_length = 20;
  };

  explicit RandomMdp(Params params) : p_(params) {
    if (p_.state_count < 1 || p_.action_count < 1) {
      throw ValidationError(
          "random_mdp: state_count and action_count must be positive");
    }
    if (!(p_.terminal_fraction >= 0.0 && p_.terminal_fraction < 1.0)) {
      throw ValidationError("random_mdp: terminal_fraction must be in [0, 1)");
    }
    if (!(p_.discount > 0.0 && p_.discount <= 1.0)) {
      throw ValidationError("random_mdp: discount must be in (0, 1]");
    }
    if (p_.reward_scale < 0.0) {
      throw ValidationError("random_mdp: reward_scale must be non-negative");
    }
    if (p_.max_episode_length < 1) {
      throw ValidationError("random_mdp: max_episode_length must be >= 1");
    }
  }

  std::size_t state_count() const {
    return static_cast<std::size_t>(p_.state_count);
  }
  int action_count(StateId s) const {
    return is_terminal(s) ? 0 : p_.action_count;
  }
  bool is_terminal(StateId s) const {
    if (s == 0 || p_.terminal_fraction == 0.0) return false;
    return to_unit(hash_key({p_.seed, kTerminalSalt,
                             static_cast<std::uint64_t>(s)})) <
           p_.terminal_fraction;
  }
  double discount() const { return p_.discount; }
  StateId initial_state() const { return 0; }
  bool alternating() const { return false; }
  int max_episode_length() const { return p_.max_episode_length; }
  double reward_bound() const { return p_.reward_scale; }
  std::string name() const { return "random_mdp"; }

  Transition transition(StateId s, ActionId a) const {
    if (is_terminal(s)) return {s, 0.0, true};
    if (a < 0 || a >= p_.action_count) {
      throw RangeError("random_mdp: action " + std::to_string(a) +
                       " out of range");
    }
    const auto su = static_cast<std::uint64_t>(s);
    const auto au = static_cast<std::uint64_t>(a);
    StateId next;
    if (a == 0) {
      next = (s + 1) % p_.state_count;
    } else {
      next = static_cast<StateId>(hash_key({p_.seed, kNextSalt, su, au}) %
                                  static_cast<std::uint64_t>(p_.state_count));
    }
    const double u = to_unit(hash_key({p_.seed, kRewardSalt, su, au}));
    const double reward = (2.0 * u - 1.0) * p_.reward_scale;
    return {next, reward, is_terminal(next)};
  }

  const Params& params() const { return p_; }

 private:
  static constexpr std::uint64_t kTerminalSalt = 0x7465726d;
  static constexpr std::uint64_t kNextSalt = 0x6e657874;
  static constexpr std::uint64_t kRewardSalt = 0x72657764;

  Params p_;
};

}  // namespace pmcts

#endif  // PMCTS_ENVS_RANDOM_MDP_HPP_
