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


// Episodes, tournaments, opening books and result files.
//
// Every episode or game owns its seeds, which are derived from the
// experiment seed and its position in the schedule, so the records do not
// depend on how the work is spread over workers. Agents share the seeds of
// an episode index, which pairs their samples.

#ifndef PMCTS_HARNESS_EXPERIMENT_HPP_
#define PMCTS_HARNESS_EXPERIMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmcts/engine/config.hpp"
#include "pmcts/engine/run.hpp"
#include "pmcts/errors.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/harness/elo.hpp"
#include "pmcts/harness/stats.hpp"
#include "pmcts/mdp.hpp"
#include "pmcts/oracle.hpp"
#include "pmcts/parallel.hpp"
#include "pmcts/random.hpp"

namespace pmcts {

enum class AgentKind { kSearch, kRandom, kOracle };

inline std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::kSearch: return "search";
    case AgentKind::kRandom: return "random";
    case AgentKind::kOracle: return "oracle";
  }
  return "unknown";
}

inline AgentKind parse_agent_kind(std::string_view s) {
  if (s == "search") return AgentKind::kSearch;
  if (s == "random") return AgentKind::kRandom;
  if (s == "oracle") return AgentKind::kOracle;
  throw ConfigError("unknown agent kind '" + std::string(s) + "'");
}

struct AgentSpec {
  std::string label;
  AgentKind kind = AgentKind::kSearch;
  SearchConfig config;
};

// One row of the results file.
struct EpisodeRecord {
  std::string agent;
  std::string env;
  int particles = 0;    // N
  int simulations = 0;  // M
  std::uint64_t seed = 0;
  int episode = 0;
  double ret = 0.0;
  double select_ms = 0.0;
  double expand_ms = 0.0;
  double backprop_ms = 0.0;
  double unique_trajectory_mean = 0.0;
  double ess_root_mean = 0.0;
  bool truncated = false;  // not written to files

  bool operator==(const EpisodeRecord&) const = default;
};

namespace detail {

inline constexpr std::uint64_t kEpisodeSalt = 0x657069;
inline constexpr std::uint64_t kGameSalt = 0x67616d65;
inline constexpr std::uint64_t kBookSalt = 0x626f6f6b;

struct StepStats {
  double select_ms = 0.0, expand_ms = 0.0, backprop_ms = 0.0;
  double unique = 0.0, ess = 0.0;
  int searches = 0;
};

template <DecisionProcess M, Evaluator E>
ActionId choose_action(const M& model, const E& evaluator, const AgentSpec& agent,
                       const ExactValues* optimal, StateId state,
                       std::uint64_t key, StepStats& stats) {
  switch (agent.kind) {
    case AgentKind::kRandom: {
      Stream rng({key, 0x726e64});
      const int k = model.action_count(state);
      return static_cast<ActionId>(std::min<double>(k - 1, rng.uniform() * k));
    }
    case AgentKind::kOracle: {
      const auto& q = optimal->q.at(static_cast<std::size_t>(state));
      return static_cast<ActionId>(std::max_element(q.begin(), q.end()) -
                                   q.begin());
    }
    case AgentKind::kSearch:
      break;
  }
  SearchConfig c = agent.config;
  c.seed = hash_key({agent.config.seed, key});
  c.workers = 1;
  c.keep_tree_dump = false;
  SearchResult r = run_search(model, evaluator, state, c);
  const auto& d = r.diagnostics;
  stats.select_ms += d.select_ms;
  stats.expand_ms += d.expand_ms;
  stats.backprop_ms += d.backprop_ms;
  stats.unique += d.unique_trajectory_mean();
  stats.ess += d.ess_root_mean();
  ++stats.searches;
  return r.action;
}

template <DecisionProcess M>
std::unique_ptr<ExactValues> optimal_if_needed(const M& model,
                                               std::span<const AgentSpec> agents) {
  for (const auto& a : agents) {
    if (a.kind == AgentKind::kOracle) {
      return std::make_unique<ExactValues>(value_iteration(model));
    }
  }
  return nullptr;
}

}  // namespace detail

// Plays `episodes` episodes per agent from the initial state. An episode
// still running after max_episode_length steps is cut there and its return
// bootstrapped with the evaluator's value of the last state.
template <DecisionProcess M, Evaluator E>
std::vector<EpisodeRecord> run_episodes(const M& model, const E& evaluator,
                                        std::span<const AgentSpec> agents,
                                        int episodes, std::uint64_t seed,
                                        int workers = 1) {
  if (agents.empty()) throw ValidationError("run_episodes: no agents");
  if (episodes < 1) throw ValidationError("run_episodes: episodes must be >= 1");
  if (model.alternating()) {
    throw ValidationError("run_episodes needs a single-agent environment");
  }
  for (const auto& a : agents) validate(a.config);
  auto optimal = detail::optimal_if_needed(model, agents);
  const std::size_t per = static_cast<std::size_t>(episodes);
  std::vector<EpisodeRecord> out(agents.size() * per);
  WorkerPool pool(workers);
  pool.parallel_for(out.size(), [&](std::size_t task) {
    const AgentSpec& agent = agents[task / per];
    const int episode = static_cast<int>(task % per);
    detail::StepStats stats;
    StateId s = model.initial_state();
    double g = 0.0, discount = 1.0;
    bool truncated = true;
    for (int t = 0; t < model.max_episode_length(); ++t) {
      if (model.is_terminal(s)) {
        truncated = false;
        break;
      }
      const std::uint64_t key =
          hash_key({seed, detail::kEpisodeSalt, static_cast<std::uint64_t>(episode),
                    static_cast<std::uint64_t>(t)});
      const ActionId a = detail::choose_action(model, evaluator, agent,
                                               optimal.get(), s, key, stats);
      const Transition tr = model.transition(s, a);
      g += discount * tr.reward;
      discount *= model.discount();
      s = tr.next;
    }
    if (model.is_terminal(s)) truncated = false;
    if (truncated) {
      const std::uint64_t key = hash_key(
          {seed, detail::kEpisodeSalt, static_cast<std::uint64_t>(episode), ~0ULL});
      g += discount * evaluator.evaluate(s, key).value;
    }
    EpisodeRecord& r = out[task];
    r.agent = agent.label;
    r.env = model.name();
    r.particles = agent.config.particles;
    r.simulations = agent.config.simulations;
    r.seed = seed;
    r.episode = episode;
    r.ret = g;
    r.truncated = truncated;
    r.select_ms = stats.select_ms;
    r.expand_ms = stats.expand_ms;
    r.backprop_ms = stats.backprop_ms;
    if (stats.searches > 0) {
      r.unique_trajectory_mean = stats.unique / stats.searches;
      r.ess_root_mean = stats.ess / stats.searches;
    }
  });
  return out;
}

struct AgentSummary {
  std::string agent;
  Summary returns;
  long truncated = 0;
};

// Per-agent return statistics, agents in order of first appearance.
inline std::vector<AgentSummary> summarize_by_agent(
    std::span<const EpisodeRecord> records) {
  std::vector<AgentSummary> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& s) { return s.agent == r.agent; });
    std::size_t i = static_cast<std::size_t>(it - out.begin());
    if (it == out.end()) {
      out.push_back({r.agent, {}, 0});
      values.emplace_back();
    }
    values[i].push_back(r.ret);
    out[i].truncated += r.truncated ? 1 : 0;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].returns = summarize(values[i]);
  return out;
}

inline std::vector<double> returns_of(std::span<const EpisodeRecord> records,
                                      const std::string& agent) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.agent == agent) out.push_back(r.ret);
  }
  return out;
}

// --- Two-player games -------------------------------------------------------

struct GameRecord {
  std::size_t first = 0;
  std::size_t second = 0;
  int opening = 0;
  int outcome = 0;  // +1 first player won, 0 draw, -1 second player won
  int plies = 0;
};

struct TournamentResult {
  WinMatrix matrix;
  std::vector<GameRecord> games;
};

// Plays one game from `start`; the first player moves first. The winner is
// read from the sign of the final reward; reaching the length limit is a draw.
template <DecisionProcess M, Evaluator E>
GameRecord play_game(const M& model, const E& evaluator, const AgentSpec& first,
                     const AgentSpec& second, const ExactValues* optimal,
                     StateId start, std::uint64_t key) {
  GameRecord g;
  StateId s = start;
  detail::StepStats unused;
  for (int ply = 0; ply < model.max_episode_length(); ++ply) {
    if (model.is_terminal(s)) break;
    const AgentSpec& mover = ply % 2 == 0 ? first : second;
    const ActionId a = detail::choose_action(
        model, evaluator, mover, optimal, s,
        hash_key({key, static_cast<std::uint64_t>(ply)}), unused);
    const Transition t = model.transition(s, a);
    g.plies = ply + 1;
    if (t.terminal) {
      const int sign = t.reward > 0.0 ? 1 : t.reward < 0.0 ? -1 : 0;
      g.outcome = ply % 2 == 0 ? sign : -sign;
      break;
    }
    s = t.next;
  }
  return g;
}

// Every pair of distinct agents plays every opening twice, once from each
// side.
template <DecisionProcess M, Evaluator E>
TournamentResult run_tournament(const M& model, const E& evaluator,
                                std::span<const AgentSpec> agents,
                                std::span<const StateId> openings,
                                std::uint64_t seed, int workers = 1) {
  if (!model.alternating()) {
    throw ValidationError("run_tournament needs a two-player environment");
  }
  if (agents.size() < 2) throw ValidationError("run_tournament needs two agents");
  if (openings.empty()) throw ValidationError("opening book is empty");
  for (StateId s : openings) {
    if (model.is_terminal(s)) throw ValidationError("opening is a finished game");
  }
  for (const auto& a : agents) validate(a.config);
  auto optimal = detail::optimal_if_needed(model, agents);

  std::vector<GameRecord> games;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      for (std::size_t o = 0; o < openings.size(); ++o) {
        games.push_back({i, j, static_cast<int>(o), 0, 0});
        games.push_back({j, i, static_cast<int>(o), 0, 0});
      }
    }
  }
  WorkerPool pool(workers);
  pool.parallel_for(games.size(), [&](std::size_t n) {
    GameRecord& g = games[n];
    const std::uint64_t key =
        hash_key({seed, detail::kGameSalt, std::min(g.first, g.second),
                  std::max(g.first, g.second), static_cast<std::uint64_t>(g.opening),
                  g.first < g.second ? 0ULL : 1ULL});
    GameRecord played =
        play_game(model, evaluator, agents[g.first], agents[g.second],
                  optimal.get(), openings[static_cast<std::size_t>(g.opening)], key);
    g.outcome = played.outcome;
    g.plies = played.plies;
  });

  TournamentResult out;
  std::vector<std::string> labels;
  for (const auto& a : agents) labels.push_back(a.label);
  out.matrix = WinMatrix(labels);
  for (const auto& g : games) {
    GameCounts& c = out.matrix.results[g.first][g.second];
    if (g.outcome > 0) ++c.wins;
    else if (g.outcome < 0) ++c.losses;
    else ++c.draws;
  }
  out.games = std::move(games);
  return out;
}

struct OpeningBook {
  std::vector<StateId> states;
  std::vector<std::string> warnings;
};

// Distinct non-terminal states reached by exactly `plies` legal moves from
// the initial state whose value (for the player to move) lies in [lo, hi].
// All qualifying states are found, then `count` of them are drawn by a seeded
// shuffle.
template <DecisionProcess M>
OpeningBook generate_opening_book(const M& model, std::span<const double> values,
                                  int plies, double lo, double hi,
                                  std::size_t count, std::uint64_t seed) {
  if (!model.alternating()) {
    throw ValidationError("opening books need a two-player environment");
  }
  if (plies < 0) throw ValidationError("plies must be >= 0");
  if (lo > hi) throw ValidationError("empty value window");
  std::set<StateId> frontier = {model.initial_state()};
  for (int k = 0; k < plies; ++k) {
    std::set<StateId> next;
    for (StateId s : frontier) {
      for (ActionId a = 0; a < model.action_count(s); ++a) {
        const Transition t = model.transition(s, a);
        if (!t.terminal) next.insert(t.next);
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::pair<std::uint64_t, StateId>> keyed;
  for (StateId s : frontier) {
    const double v = values[static_cast<std::size_t>(s)];
    if (v >= lo && v <= hi) {
      keyed.push_back({hash_key({seed, detail::kBookSalt,
                                 static_cast<std::uint64_t>(s)}),
                       s});
    }
  }
  std::sort(keyed.begin(), keyed.end());
  OpeningBook book;
  for (std::size_t i = 0; i < keyed.size() && i < count; ++i) {
    book.states.push_back(keyed[i].second);
  }
  if (book.states.size() < count) {
    book.warnings.push_back("only " + std::to_string(book.states.size()) +
                            " positions qualify; book is partial");
  }
  return book;
}

// --- Ladders and grids ------------------------------------------------------

// S, +D (dedup mass), +E (ESS mass), +T (temperature), +C (weight
// correction), PMCTS (+ retrospective reweighting).
inline std::vector<AgentSpec> ablation_ladder(const SearchConfig& base,
                                              double eta = 1.5) {
  SearchConfig c = base;
  c.dedup = c.ess_weighting = c.weight_correction = c.retrospective = false;
  c.per_depth_weights = false;
  c.eta = 1.0;
  std::vector<AgentSpec> out;
  c.algorithm = Algorithm::kSimplePmcts;
  out.push_back({"S", AgentKind::kSearch, c});
  c.algorithm = Algorithm::kPmcts;
  c.dedup = true;
  out.push_back({"+D", AgentKind::kSearch, c});
  c.ess_weighting = true;
  out.push_back({"+E", AgentKind::kSearch, c});
  c.eta = eta;
  out.push_back({"+T", AgentKind::kSearch, c});
  c.weight_correction = true;
  out.push_back({"+C", AgentKind::kSearch, c});
  c.retrospective = true;
  out.push_back({"PMCTS", AgentKind::kSearch, c});
  return out;
}

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

// One agent per (agent, N, M, eta) cell; labels get " N=.. M=.. eta=..".
inline std::vector<AgentSpec> sweep_grid(std::span<const AgentSpec> agents,
                                         std::span<const int> particles,
                                         std::span<const int> simulations,
                                         std::span<const double> etas) {
  std::vector<AgentSpec> out;
  for (const auto& a : agents) {
    for (int n : particles) {
      for (int m : simulations) {
        for (double eta : etas) {
          AgentSpec s = a;
          s.config.particles = n;
          s.config.simulations = m;
          s.config.eta = eta;
          s.label = a.label + " N=" + std::to_string(n) +
                    " M=" + std::to_string(m) + " eta=" + format_number(eta);
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

// --- Result files -------------------------------------------------------------

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "agent", "env", "N", "M", "seed", "episode", "return",
      "wallclock_select_ms", "wallclock_expand_ms", "wallclock_backprop_ms",
      "unique_trajectory_mean", "ess_root_mean"};
  return columns;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace detail

inline void write_csv(std::span<const EpisodeRecord> records, std::ostream& os) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : records) {
    os << detail::csv_field(r.agent) << ',' << detail::csv_field(r.env) << ','
       << r.particles << ',' << r.simulations << ',' << r.seed << ','
       << r.episode << ',' << detail::exact(r.ret) << ','
       << detail::exact(r.select_ms) << ',' << detail::exact(r.expand_ms) << ','
       << detail::exact(r.backprop_ms) << ','
       << detail::exact(r.unique_trajectory_mean) << ','
       << detail::exact(r.ess_root_mean) << '\n';
  }
}

inline std::vector<EpisodeRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("results file is empty");
  if (detail::split_csv_line(line) != csv_columns()) {
    throw ValidationError("results file has an unexpected header");
  }
  std::vector<EpisodeRecord> out;
  long row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != csv_columns().size()) {
      throw ValidationError("results row " + std::to_string(row) +
                            " has the wrong number of fields");
    }
    EpisodeRecord r;
    try {
      r.agent = f[0];
      r.env = f[1];
      r.particles = std::stoi(f[2]);
      r.simulations = std::stoi(f[3]);
      r.seed = std::stoull(f[4]);
      r.episode = std::stoi(f[5]);
      r.ret = std::stod(f[6]);
      r.select_ms = std::stod(f[7]);
      r.expand_ms = std::stod(f[8]);
      r.backprop_ms = std::stod(f[9]);
      r.unique_trajectory_mean = std::stod(f[10]);
      r.ess_root_mean = std::stod(f[11]);
    } catch (const std::exception&) {
      throw ValidationError("results row " + std::to_string(row) +
                            " has a malformed number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(std::span<const EpisodeRecord> records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) {
    out.push_back({{"agent", r.agent},
                   {"env", r.env},
                   {"N", r.particles},
                   {"M", r.simulations},
                   {"seed", r.seed},
                   {"episode", r.episode},
                   {"return", r.ret},
                   {"wallclock_select_ms", r.select_ms},
                   {"wallclock_expand_ms", r.expand_ms},
                   {"wallclock_backprop_ms", r.backprop_ms},
                   {"unique_trajectory_mean", r.unique_trajectory_mean},
                   {"ess_root_mean", r.ess_root_mean}});
  }
  return out;
}

enum class ResultFormat { kCsv, kJson };

inline ResultFormat parse_result_format(std::string_view s) {
  if (s == "csv") return ResultFormat::kCsv;
  if (s == "json") return ResultFormat::kJson;
  throw ConfigError("unknown result format '" + std::string(s) + "'");
}

inline void emit_results(std::span<const EpisodeRecord> records,
                         ResultFormat format, std::ostream& os) {
  if (format == ResultFormat::kCsv) {
    write_csv(records, os);
  } else {
    os << to_json(records).dump(2) << '\n';
  }
}

inline void emit_results(std::span<const EpisodeRecord> records,
                         ResultFormat format, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_results(records, format, os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace pmcts

#endif  // PMCTS_HARNESS_EXPERIMENT_HPP_
