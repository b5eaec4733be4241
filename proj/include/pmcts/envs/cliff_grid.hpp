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

#ifndef PMCTS_ENVS_CLIFF_GRID_HPP_
#define PMCTS_ENVS_CLIFF_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "pmcts/errors.hpp"
#include "pmcts/mdp.hpp"

namespace pmcts {

// Gridworld with a cliff. Cells are indexed y * width + x, y = 0 is the top
// row. Entering a cliff cell or the goal ends the episode. Moves into a wall
// leave the agent in place (and still cost step_reward).
class CliffGrid {
 public:
  enum Move : ActionId { kUp = 0, kRight = 1, kDown = 2, kLeft = 3 };
  static constexpr int kNumActions = 4;

  struct Params {
    int width = 5;
    int height = 3;
    std::set<int> cliff_cells;
    int goal_cell = -1;
    int start_cell = -1;
    double step_reward = -0.05;
    double cliff_reward = -1.0;
    double goal_reward = 1.0;
    double discount = 1.0;
    int max_episode_length = 30;
  };

  // Classic layout: start bottom-left, goal bottom-right, cliff in between.
  static Params classic(int width, int height) {
    Params p;
    p.width = width;
    p.height = height;
    const int bottom = (height - 1) * width;
    p.start_cell = bottom;
    p.goal_cell = bottom + width - 1;
    for (int x = 1; x + 1 < width; ++x) p.cliff_cells.insert(bottom + x);
    return p;
  }

  explicit CliffGrid(Params params) : p_(std::move(params)) {
    if (p_.width < 1 || p_.height < 1) {
      throw ValidationError("cliff_grid: width and height must be positive");
    }
    const int cells = p_.width * p_.height;
    auto in_bounds = [cells](int c) { return c >= 0 && c < cells; };
    if (!in_bounds(p_.goal_cell)) {
      throw ValidationError("cliff_grid: goal cell out of bounds");
    }
    if (!in_bounds(p_.start_cell)) {
      throw ValidationError("cliff_grid: start cell out of bounds");
    }
    for (int c : p_.cliff_cells) {
      if (!in_bounds(c)) {
        throw ValidationError("cliff_grid: cliff cell out of bounds");
      }
    }
    if (p_.cliff_cells.contains(p_.goal_cell)) {
      throw ValidationError("cliff_grid: goal and cliff cells overlap");
    }
    if (p_.cliff_cells.contains(p_.start_cell) ||
        p_.start_cell == p_.goal_cell) {
      throw ValidationError("cliff_grid: start cell is terminal");
    }
    if (!(p_.discount > 0.0 && p_.discount <= 1.0)) {
      throw ValidationError("cliff_grid: discount must be in (0, 1]");
    }
    if (p_.max_episode_length < 1) {
      throw ValidationError("cliff_grid: max_episode_length must be >= 1");
    }
  }

  std::size_t state_count() const {
    return static_cast<std::size_t>(p_.width * p_.height);
  }
  int action_count(StateId s) const { return is_terminal(s) ? 0 : kNumActions; }
  bool is_terminal(StateId s) const {
    const int c = static_cast<int>(s);
    return c == p_.goal_cell || p_.cliff_cells.contains(c);
  }
  double discount() const { return p_.discount; }
  StateId initial_state() const { return p_.start_cell; }
  bool alternating() const { return false; }
  int max_episode_length() const { return p_.max_episode_length; }
  std::string name() const { return "cliff_grid"; }
  double reward_bound() const {
    return std::max({std::abs(p_.step_reward), std::abs(p_.cliff_reward),
                     std::abs(p_.goal_reward)});
  }

  Transition transition(StateId s, ActionId a) const {
    if (is_terminal(s)) return {s, 0.0, true};
    int x = static_cast<int>(s) % p_.width;
    int y = static_cast<int>(s) / p_.width;
    switch (a) {
      case kUp: y = std::max(0, y - 1); break;
      case kRight: x = std::min(p_.width - 1, x + 1); break;
      case kDown: y = std::min(p_.height - 1, y + 1); break;
      case kLeft: x = std::max(0, x - 1); break;
      default:
        throw RangeError("cliff_grid: action " + std::to_string(a) +
                         " out of range");
    }
    const int next = y * p_.width + x;
    if (next == p_.goal_cell) return {next, p_.goal_reward, true};
    if (p_.cliff_cells.contains(next)) return {next, p_.cliff_reward, true};
    return {next, p_.step_reward, false};
  }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

}  // namespace pmcts

#endif  // PMCTS_ENVS_CLIFF_GRID_HPP_
