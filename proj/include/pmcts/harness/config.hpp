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


// JSON configuration shared by the command-line tool.
//
// A configuration file is merged over default_config(); every key must
// already exist in the defaults, except inside "env" whose keys depend on
// the environment name. Overrides use dotted paths ("search.seed=3"); a bare
// key names a top-level entry if one exists and the "search" section
// otherwise.

#ifndef PMCTS_HARNESS_CONFIG_HPP_
#define PMCTS_HARNESS_CONFIG_HPP_

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmcts/engine/config.hpp"
#include "pmcts/envs/registry.hpp"
#include "pmcts/errors.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/harness/experiment.hpp"

namespace pmcts {

using nlohmann::json;

inline json default_search_json() {
  const SearchConfig c;
  return json{{"algorithm", to_string(c.algorithm)},
              {"simulations", c.simulations},
              {"particles", c.particles},
              {"eta", c.eta},
              {"estimator", to_string(c.estimator)},
              {"dedup", c.dedup},
              {"ess_weighting", c.ess_weighting},
              {"weight_correction", c.weight_correction},
              {"retrospective", c.retrospective},
              {"per_depth_weights", c.per_depth_weights},
              {"independent_leaf_draws", c.independent_leaf_draws},
              {"sh_top_k", c.sh_top_k},
              {"gumbel_scale", c.gumbel_scale},
              {"seed", c.seed},
              {"c_visit", c.beta.c_visit},
              {"c_scale", c.beta.c_scale},
              {"c_base", c.puct.c_base},
              {"c_init", c.puct.c_init},
              {"root_selection", "default"},
              {"aggregation", to_string(c.aggregation)},
              {"workers", c.workers},
              {"keep_tree_dump", c.keep_tree_dump}};
}

inline json default_config() {
  return json{
      {"env", default_env_spec("cliff_grid")},
      {"evaluator",
       {{"kind", "noisy_unbiased"},
        {"sigma", 0.5},
        {"bias_scale", 0.2},
        {"prior_spread", 0.0},
        {"prior_seed", 0},
        {"prior_temperature", 0.0},
        {"seed", 0},
        {"rollouts", 4},
        {"rollout_depth", 50}}},
      {"search", default_search_json()},
      {"experiment",
       {{"episodes", 16}, {"seed", 0}, {"workers", 1}, {"format", "csv"}}},
      {"agents", json::array()},
      {"ablate", {{"eta", 1.5}}},
      {"sweep",
       {{"particles", {1, 4, 16}}, {"simulations", {8, 32}}, {"eta", {1.0}}}},
      {"tournament",
       {{"openings", 10},
        {"plies", 2},
        {"window_lo", -0.3},
        {"window_hi", 0.3},
        {"book_seed", 0}}}};
}

namespace detail {

inline bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Integers may not silently become reals.
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

inline void merge_checked(json& into, const json& from, const std::string& path) {
  if (!from.is_object()) {
    throw ConfigError("'" + path + "' must be an object");
  }
  for (const auto& [key, value] : from.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (here == "env") {
      if (!value.is_object() || !value.contains("name")) {
        throw ConfigError("'env' must be an object with a 'name'");
      }
      json env = default_env_spec(value.at("name").get<std::string>());
      for (const auto& [k, v] : value.items()) {
        if (!env.contains(k)) {
          throw ConfigError("unknown config key 'env." + k + "'");
        }
        env[k] = v;
      }
      into["env"] = env;
      continue;
    }
    if (here == "agents") {
      if (!value.is_array()) throw ConfigError("'agents' must be a list");
      into["agents"] = value;
      continue;
    }
    if (!into.contains(key)) {
      throw ConfigError("unknown config key '" + here + "'");
    }
    json& slot = into[key];
    if (slot.is_object()) {
      merge_checked(slot, value, here);
    } else if (slot.is_null() || value.is_null() || same_kind(slot, value)) {
      slot = value;
    } else {
      throw ConfigError("config key '" + here + "' has the wrong type");
    }
  }
}

}  // namespace detail

inline json merge_config(const json& user) {
  json cfg = default_config();
  detail::merge_checked(cfg, user, "");
  return cfg;
}

inline json load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

// Applies "dotted.key=value". The value is read as JSON when it parses,
// otherwise as a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (key.find('.') == std::string::npos && !cfg.contains(key)) {
    key = "search." + key;
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.front() == "env" && parts.size() == 2) {
    json env = parts[1] == "name" ? json::object() : cfg["env"];
    env[parts[1]] = value;
    detail::merge_checked(cfg, json{{"env", env}}, "");
    return;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    patch = json{{*it, patch}};
  }
  detail::merge_checked(cfg, patch, "");
}

// "key = default" lines for every leaf of the default configuration.
inline std::vector<std::string> config_key_listing() {
  std::vector<std::string> out;
  // Arrays are listed whole rather than per element.
  auto walk = [&out](auto& self, const json& j, const std::string& prefix) -> void {
    for (const auto& [k, v] : j.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object()) {
        self(self, v, key);
      } else {
        out.push_back(key + " = " + v.dump());
      }
    }
  };
  walk(walk, default_config(), "");
  return out;
}

namespace detail {

template <class T>
T read(const json& section, const char* key, const std::string& where) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' is missing or has the wrong type");
  }
}

// Parses a string field, naming the key in any error.
template <class F>
auto parse_field(const json& section, const char* key, const std::string& where,
                 F parse) {
  const auto text = read<std::string>(section, key, where);
  try {
    return parse(text);
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + where + "." + key + "': " + e.what());
  }
}

}  // namespace detail

inline SearchConfig search_config_from(const json& s, const std::string& where = "search") {
  SearchConfig c;
  using detail::read;
  c.algorithm = detail::parse_field(s, "algorithm", where, [](const std::string& v) {
    return parse_algorithm(v);
  });
  c.simulations = read<int>(s, "simulations", where);
  c.particles = read<int>(s, "particles", where);
  c.eta = read<double>(s, "eta", where);
  c.estimator = detail::parse_field(s, "estimator", where, [](const std::string& v) {
    return parse_estimator(v);
  });
  c.dedup = read<bool>(s, "dedup", where);
  c.ess_weighting = read<bool>(s, "ess_weighting", where);
  c.weight_correction = read<bool>(s, "weight_correction", where);
  c.retrospective = read<bool>(s, "retrospective", where);
  c.per_depth_weights = read<bool>(s, "per_depth_weights", where);
  c.independent_leaf_draws = read<bool>(s, "independent_leaf_draws", where);
  c.sh_top_k = read<int>(s, "sh_top_k", where);
  c.gumbel_scale = read<double>(s, "gumbel_scale", where);
  c.seed = read<std::uint64_t>(s, "seed", where);
  c.beta.c_visit = read<double>(s, "c_visit", where);
  c.beta.c_scale = read<double>(s, "c_scale", where);
  c.puct.c_base = read<double>(s, "c_base", where);
  c.puct.c_init = read<double>(s, "c_init", where);
  c.root_selection = detail::parse_field(
      s, "root_selection", where,
      [](const std::string& v) -> std::optional<RootSelection> {
        if (v == "default") return std::nullopt;
        return parse_root_selection(v);
      });
  c.aggregation = detail::parse_field(s, "aggregation", where, [](const std::string& v) {
    return parse_aggregation(v);
  });
  c.workers = read<int>(s, "workers", where);
  c.keep_tree_dump = read<bool>(s, "keep_tree_dump", where);
  try {
    validate(c);
  } catch (const ValidationError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

// Agents from the "agents" list; each entry is
//   {"label": ..., "kind": "search" | "random" | "oracle", "search": {...}}
// with "search" overriding keys of the top-level search section. An empty
// list gives one agent built from the search section.
inline std::vector<AgentSpec> agents_from(const json& cfg) {
  std::vector<AgentSpec> out;
  const json& list = cfg.at("agents");
  if (list.empty()) {
    const SearchConfig c = search_config_from(cfg.at("search"));
    out.push_back({to_string(c.algorithm), AgentKind::kSearch, c});
    return out;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& a = list[i];
    const std::string where = "agents[" + std::to_string(i) + "]";
    if (!a.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : a.items()) {
      if (k != "label" && k != "kind" && k != "search") {
        throw ConfigError("unknown config key '" + where + "." + k + "'");
      }
    }
    json search = cfg.at("search");
    if (a.contains("search")) detail::merge_checked(search, a.at("search"), where + ".search");
    AgentSpec spec;
    spec.kind = parse_agent_kind(a.value("kind", std::string("search")));
    spec.config = search_config_from(search, where + ".search");
    spec.label = a.value("label", spec.kind == AgentKind::kSearch
                                      ? to_string(spec.config.algorithm)
                                      : to_string(spec.kind));
    out.push_back(std::move(spec));
  }
  return out;
}

template <DecisionProcess M>
using AnyEvaluator = std::variant<TabularEvaluator, RolloutEvaluator<M>>;

// Evaluator from the "evaluator" section. The prior is a random softmax
// table (uniform when prior_spread is 0), or with prior_temperature > 0 a
// softmax of the optimal action values with the random logits added.
// Rollouts follow the same table.
template <DecisionProcess M>
AnyEvaluator<M> make_evaluator(const M& model, const json& e) {
  using detail::read;
  const auto kind = read<std::string>(e, "kind", "evaluator");
  const auto spread = read<double>(e, "prior_spread", "evaluator");
  const auto prior_seed = read<std::uint64_t>(e, "prior_seed", "evaluator");
  const auto temperature = read<double>(e, "prior_temperature", "evaluator");
  if (temperature < 0.0) {
    throw ConfigError("evaluator.prior_temperature must be >= 0");
  }
  TabularPolicy prior =
      temperature > 0.0 ? make_value_prior(model, temperature, spread, prior_seed)
                        : make_random_prior(model, spread, prior_seed);
  const auto seed = read<std::uint64_t>(e, "seed", "evaluator");
  if (kind == "exact") return make_exact_evaluator(model, std::move(prior));
  if (kind == "noisy_unbiased") {
    return make_noisy_evaluator(model, std::move(prior),
                                read<double>(e, "sigma", "evaluator"), seed);
  }
  if (kind == "deterministic_biased") {
    return make_biased_evaluator(model, std::move(prior),
                                 read<double>(e, "bias_scale", "evaluator"), seed);
  }
  if (kind == "rollout") {
    auto table = std::make_shared<const TabularPolicy>(std::move(prior));
    return RolloutEvaluator<M>(model, table, table,
                               read<int>(e, "rollouts", "evaluator"),
                               read<int>(e, "rollout_depth", "evaluator"), seed);
  }
  throw ConfigError("unknown evaluator kind '" + kind + "' (key 'evaluator.kind')");
}

}  // namespace pmcts

#endif  // PMCTS_HARNESS_CONFIG_HPP_
