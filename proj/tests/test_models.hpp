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

// Small explicit models for tests.

#ifndef PMCTS_TESTS_TEST_MODELS_HPP_
#define PMCTS_TESTS_TEST_MODELS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "pmcts/mdp.hpp"

namespace pmcts::testing {

// rows[s][a] is the transition of action a in state s; a state with no rows
// is terminal.
struct TableMdp {
  std::vector<std::vector<Transition>> rows;
  double gamma = 1.0;
  StateId start = 0;
  bool two_player = false;
  int horizon = 50;

  std::size_t state_count() const { return rows.size(); }
  int action_count(StateId s) const {
    return static_cast<int>(rows.at(static_cast<std::size_t>(s)).size());
  }
  Transition transition(StateId s, ActionId a) const {
    return rows.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a));
  }
  bool is_terminal(StateId s) const { return action_count(s) == 0; }
  double discount() const { return gamma; }
  StateId initial_state() const { return start; }
  double reward_bound() const {
    double b = 0.0;
    for (const auto& r : rows)
      for (const auto& t : r) b = std::max(b, std::abs(t.reward));
    return b;
  }
  bool alternating() const { return two_player; }
  int max_episode_length() const { return horizon; }
  std::string name() const { return "table"; }
};

// Root 0 with `k` actions, each leading to its own terminal-free sink state
// 1..k that loops on itself with zero reward; action a pays reward[a].
inline TableMdp bandit(const std::vector<double>& reward, double gamma = 0.9) {
  TableMdp m;
  m.gamma = gamma;
  const int k = static_cast<int>(reward.size());
  m.rows.resize(static_cast<std::size_t>(k) + 1);
  for (int a = 0; a < k; ++a) {
    m.rows[0].push_back({a + 1, reward[static_cast<std::size_t>(a)], false});
    m.rows[static_cast<std::size_t>(a) + 1].push_back({a + 1, 0.0, false});
  }
  return m;
}

}  // namespace pmcts::testing

#endif  // PMCTS_TESTS_TEST_MODELS_HPP_
