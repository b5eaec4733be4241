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

// Builds environments from JSON descriptors such as
//   {"name": "cliff_grid", "width": 5, "height": 3}
// Keys not listed for the named environment are rejected.

#ifndef PMCTS_ENVS_REGISTRY_HPP_
#define PMCTS_ENVS_REGISTRY_HPP_

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pmcts/envs/cliff_grid.hpp"
#include "pmcts/envs/random_mdp.hpp"
#include "pmcts/envs/tic_tac_toe.hpp"
#include "pmcts/errors.hpp"

namespace pmcts {

using AnyEnv = std::variant<CliffGrid, RandomMdp, TicTacToe>;

inline std::vector<std::string> env_names() {
  return {"cliff_grid", "random_mdp", "tic_tac_toe"};
}

// Default descriptor of a registered environment, listing every key.
inline nlohmann::json default_env_spec(const std::string& name) {
  using nlohmann::json;
  if (name == "cliff_grid") {
    CliffGrid::Params p;
    return json{{"name", name},
                {"width", p.width},
                {"height", p.height},
                {"cliff_cells", nullptr},
                {"goal_cell", nullptr},
                {"start_cell", nullptr},
                {"step_reward", p.step_reward},
                {"cliff_reward", p.cliff_reward},
                {"goal_reward", p.goal_reward},
                {"discount", p.discount},
                {"max_episode_length", p.max_episode_length}};
  }
  if (name == "random_mdp") {
    RandomMdp::Params p;
    return json{{"name", name},
                {"seed", p.seed},
                {"state_count", p.state_count},
                {"action_count", p.action_count},
                {"reward_scale", p.reward_scale},
                {"terminal_fraction", p.terminal_fraction},
                {"discount", p.discount},
                {"max_episode_length", p.max_episode_length}};
  }
  if (name == "tic_tac_toe") return json{{"name", name}};
  throw ConfigError("unknown environment '" + name + "'");
}

namespace detail {

template <class T>
T env_field(const nlohmann::json& spec, const char* key, T fallback) {
  if (!spec.contains(key) || spec.at(key).is_null()) return fallback;
  try {
    return spec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("environment key '") + key +
                      "' has the wrong type");
  }
}

}  // namespace detail

inline AnyEnv make_env(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("name") || !spec.at("name").is_string()) {
    throw ConfigError("environment descriptor needs a string 'name'");
  }
  const std::string name = spec.at("name").get<std::string>();
  const nlohmann::json defaults = default_env_spec(name);
  for (const auto& [key, value] : spec.items()) {
    if (!defaults.contains(key)) {
      throw ConfigError("unknown key '" + key + "' for environment '" + name +
                        "'");
    }
  }
  if (name == "cliff_grid") {
    const int w = detail::env_field(spec, "width", 5);
    const int h = detail::env_field(spec, "height", 3);
    if (w < 1 || h < 1) {
      throw ValidationError("cliff_grid: width and height must be positive");
    }
    CliffGrid::Params p = CliffGrid::classic(w, h);
    if (spec.contains("cliff_cells") && !spec.at("cliff_cells").is_null()) {
      p.cliff_cells = detail::env_field(spec, "cliff_cells", std::set<int>{});
    }
    p.goal_cell = detail::env_field(spec, "goal_cell", p.goal_cell);
    p.start_cell = detail::env_field(spec, "start_cell", p.start_cell);
    p.step_reward = detail::env_field(spec, "step_reward", p.step_reward);
    p.cliff_reward = detail::env_field(spec, "cliff_reward", p.cliff_reward);
    p.goal_reward = detail::env_field(spec, "goal_reward", p.goal_reward);
    p.discount = detail::env_field(spec, "discount", p.discount);
    p.max_episode_length =
        detail::env_field(spec, "max_episode_length", p.max_episode_length);
    return CliffGrid(p);
  }
  if (name == "random_mdp") {
    RandomMdp::Params p;
    p.seed = detail::env_field(spec, "seed", p.seed);
    p.state_count = detail::env_field(spec, "state_count", p.state_count);
    p.action_count = detail::env_field(spec, "action_count", p.action_count);
    p.reward_scale = detail::env_field(spec, "reward_scale", p.reward_scale);
    p.terminal_fraction =
        detail::env_field(spec, "terminal_fraction", p.terminal_fraction);
    p.discount = detail::env_field(spec, "discount", p.discount);
    p.max_episode_length =
        detail::env_field(spec, "max_episode_length", p.max_episode_length);
    return RandomMdp(p);
  }
  return TicTacToe{};
}

}  // namespace pmcts

#endif  // PMCTS_ENVS_REGISTRY_HPP_
