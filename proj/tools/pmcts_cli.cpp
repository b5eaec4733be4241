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


// Command-line front end.
//
//   pmcts search     one search from the environment's initial state
//   pmcts evaluate   episodes for every configured agent
//   pmcts ablate     episodes for the six-rung feature ladder
//   pmcts sweep      episodes over an (N, M, eta) grid
//   pmcts tournament round robin on an opening book, with Elo ratings
//   pmcts book       prints an opening book
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmcts/engine/run.hpp"
#include "pmcts/envs/registry.hpp"
#include "pmcts/harness/config.hpp"
#include "pmcts/harness/elo.hpp"
#include "pmcts/harness/experiment.hpp"
#include "pmcts/oracle.hpp"

namespace {

using pmcts::json;

struct Options {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  int workers = 0;
  bool verbose = false;
  bool tree = false;
};

// Stage of a run: failures while building the configuration exit with 2.
class ConfigStage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string resolve_config_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::exists(path)) return path;
  const char* dir = std::getenv("PMCTS_CONFIG_DIR");
  if (dir != nullptr && fs::path(path).is_relative()) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

json build_config(const Options& o) {
  json cfg = pmcts::default_config();
  if (!o.config_path.empty()) {
    cfg = pmcts::merge_config(pmcts::load_config_file(resolve_config_path(o.config_path)));
  }
  for (const auto& a : o.overrides) pmcts::apply_override(cfg, a);
  if (o.workers > 0) {
    cfg["experiment"]["workers"] = o.workers;
    cfg["search"]["workers"] = o.workers;
  }
  return cfg;
}

std::string vec(const std::vector<double>& v) {
  std::string out;
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%s%.6g", out.empty() ? "" : " ", x);
    out += buf;
  }
  return out;
}

// Writes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

template <class M, class E>
int cmd_search(const Options& o, const json& cfg, const M& model, const E& evaluator) {
  const pmcts::SearchConfig c = pmcts::search_config_from(cfg.at("search"));
  pmcts::SearchConfig run = c;
  run.keep_tree_dump = c.keep_tree_dump || o.tree;
  const pmcts::StateId root = model.initial_state();
  const pmcts::SearchResult r = pmcts::run_search(model, evaluator, root, run);
  Sink sink(o.output);
  std::ostream& os = sink.get();
  const auto& d = r.diagnostics;
  char buf[64];
  os << "algorithm " << pmcts::to_string(r.algorithm) << "\n";
  os << "env " << model.name() << " root " << root << "\n";
  os << "M " << c.simulations << " N " << c.particles << " seed " << c.seed << "\n";
  os << "action " << r.action << "\n";
  std::snprintf(buf, sizeof(buf), "%.6g", r.v_search);
  os << "v_search " << buf << "\n";
  os << "pi_search " << vec(r.pi_search) << "\n";
  os << "root_visits " << vec(r.root_visits) << "\n";
  os << "root_q " << vec(r.root_q) << "\n";
  os << "tree_size " << r.tree_size << "\n";
  os << "evaluations " << d.evaluations << "\n";
  std::snprintf(buf, sizeof(buf), "%.6g", d.unique_trajectory_mean());
  os << "unique_trajectory_mean " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6g", d.ess_root_mean());
  os << "ess_root_mean " << buf << "\n";
  os << "skipped_nodes " << d.skipped_nodes << "\n";
  if (o.verbose) {
    std::snprintf(buf, sizeof(buf), "%.3f %.3f %.3f", d.select_ms, d.expand_ms,
                  d.backprop_ms);
    os << "phase_ms " << buf << "\n";
  }
  if (run.keep_tree_dump) os << "tree\n" << r.tree_dump;
  return 0;
}

template <class M, class E>
int emit_episodes(const Options& o, const json& cfg, const M& model,
                  const E& evaluator, const std::vector<pmcts::AgentSpec>& agents) {
  const json& x = cfg.at("experiment");
  const auto format = pmcts::parse_result_format(x.at("format").get<std::string>());
  const auto records = pmcts::run_episodes(
      model, evaluator, agents, x.at("episodes").get<int>(),
      x.at("seed").get<std::uint64_t>(), x.at("workers").get<int>());
  Sink sink(o.output);
  pmcts::emit_results(records, format, sink.get());
  for (const auto& s : pmcts::summarize_by_agent(records)) {
    std::fprintf(stderr, "%-28s mean %.4f  +-2sem %.4f  n %ld%s\n", s.agent.c_str(),
                 s.returns.mean, 2.0 * s.returns.sem, s.returns.n,
                 s.truncated ? ("  truncated " + std::to_string(s.truncated)).c_str()
                             : "");
  }
  return 0;
}

template <class M>
pmcts::OpeningBook make_book(const json& cfg, const M& model,
                             const pmcts::ExactValues& optimal) {
  const json& t = cfg.at("tournament");
  return pmcts::generate_opening_book(
      model, optimal.v, t.at("plies").get<int>(), t.at("window_lo").get<double>(),
      t.at("window_hi").get<double>(), t.at("openings").get<std::size_t>(),
      t.at("book_seed").get<std::uint64_t>());
}

template <class M, class E>
int cmd_tournament(const Options& o, const json& cfg, const M& model,
                   const E& evaluator, const std::vector<pmcts::AgentSpec>& agents) {
  const pmcts::ExactValues optimal = pmcts::value_iteration(model);
  const pmcts::OpeningBook book = make_book(cfg, model, optimal);
  for (const auto& w : book.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const json& x = cfg.at("experiment");
  const auto t = pmcts::run_tournament(model, evaluator, agents, book.states,
                                       x.at("seed").get<std::uint64_t>(),
                                       x.at("workers").get<int>());
  json out;
  out["agents"] = t.matrix.agents;
  json matrix = json::array();
  for (std::size_t i = 0; i < t.matrix.size(); ++i) {
    for (std::size_t j = 0; j < t.matrix.size(); ++j) {
      const auto& c = t.matrix.results[i][j];
      if (c.total() == 0) continue;
      matrix.push_back({{"first", t.matrix.agents[i]},
                        {"second", t.matrix.agents[j]},
                        {"wins", c.wins},
                        {"draws", c.draws},
                        {"losses", c.losses}});
    }
  }
  out["games"] = matrix;
  try {
    const pmcts::EloFit fit = pmcts::fit_bayes_elo(t.matrix);
    out["elo"] = fit.ratings;
    out["elo_half_width"] = fit.half_widths;
    for (const auto& w : fit.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  } catch (const pmcts::EstimationError& e) {
    std::fprintf(stderr, "warning: no Elo fit: %s\n", e.what());
    out["elo"] = nullptr;
  }
  Sink sink(o.output);
  sink.get() << out.dump(2) << "\n";
  return 0;
}

template <class M>
int cmd_book(const Options& o, const json& cfg, const M& model) {
  const pmcts::ExactValues optimal = pmcts::value_iteration(model);
  const pmcts::OpeningBook book = make_book(cfg, model, optimal);
  for (const auto& w : book.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  Sink sink(o.output);
  for (pmcts::StateId s : book.states) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", optimal.v[static_cast<std::size_t>(s)]);
    sink.get() << s << " " << buf << "\n";
  }
  return 0;
}

template <class M, class E>
int dispatch(const Options& o, const json& cfg, const M& model, const E& evaluator) {
  std::vector<pmcts::AgentSpec> agents;
  try {
    if (o.command != "search" && o.command != "book") agents = pmcts::agents_from(cfg);
    if (o.command == "search") pmcts::search_config_from(cfg.at("search"));
    if (o.command == "ablate") {
      agents = pmcts::ablation_ladder(pmcts::search_config_from(cfg.at("search")),
                                      cfg.at("ablate").at("eta").get<double>());
    }
    if (o.command == "sweep") {
      const json& s = cfg.at("sweep");
      const auto n = s.at("particles").get<std::vector<int>>();
      const auto m = s.at("simulations").get<std::vector<int>>();
      const auto eta = s.at("eta").get<std::vector<double>>();
      agents = pmcts::sweep_grid(agents, n, m, eta);
      for (const auto& a : agents) pmcts::validate(a.config);
    }
    if (o.command == "tournament") {
      if (!model.alternating()) {
        throw pmcts::ConfigError("tournament needs a two-player environment");
      }
      if (agents.size() < 2) {
        throw pmcts::ConfigError("tournament needs at least two entries in 'agents'");
      }
    }
    pmcts::parse_result_format(cfg.at("experiment").at("format").get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigStage(e.what());
  }
  if (o.command == "search") return cmd_search(o, cfg, model, evaluator);
  if (o.command == "tournament") return cmd_tournament(o, cfg, model, evaluator, agents);
  if (o.command == "book") return cmd_book(o, cfg, model);
  return emit_episodes(o, cfg, model, evaluator, agents);
}

int run(const Options& o) {
  json cfg;
  std::optional<pmcts::AnyEnv> env;
  try {
    cfg = build_config(o);
    env.emplace(pmcts::make_env(cfg.at("env")));
  } catch (const std::exception& e) {
    throw ConfigStage(e.what());
  }
  return std::visit(
      [&](const auto& model) -> int {
        using M = std::decay_t<decltype(model)>;
        pmcts::AnyEvaluator<M> evaluator = [&] {
          try {
            return pmcts::make_evaluator(model, cfg.at("evaluator"));
          } catch (const std::exception& e) {
            throw ConfigStage(e.what());
          }
        }();
        return std::visit(
            [&](const auto& ev) { return dispatch(o, cfg, model, ev); }, evaluator);
      },
      *env);
}

std::string key_listing() {
  std::string out = "Configuration keys (defaults):\n";
  for (const auto& line : pmcts::config_key_listing()) out += "  " + line + "\n";
  out +=
      "\nOverrides are key=value arguments or --set key=value; bare keys refer to\n"
      "the search section. Relative --config paths are also looked up in\n"
      "$PMCTS_CONFIG_DIR.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle Monte Carlo tree search experiments"};
  app.require_subcommand(1);
  app.footer(key_listing());
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"search", "Run one search from the initial state and print the result"},
      {"evaluate", "Run episodes for each configured agent and emit records"},
      {"ablate", "Run the S, +D, +E, +T, +C, PMCTS ladder and emit records"},
      {"sweep", "Run agents over the (N, M, eta) grid and emit records"},
      {"tournament", "Play a round robin on an opening book and fit Elo ratings"},
      {"book", "Print an opening book (state id and value)"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->footer(key_listing());
    sub->add_option("-c,--config", o.config_path, "JSON configuration file");
    // Kept as raw strings: list values such as agents=[...] must not be split.
    sub->add_option_function<std::string>(
           "--set", [&o](const std::string& s) { o.overrides.push_back(s); },
           "Override key=value (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->trigger_on_parse();
    sub->allow_extras();
    sub->add_option("-o,--output", o.output, "Output path (default stdout)");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", o.verbose, "Also print wall-clock timings");
    if (name == "search") sub->add_flag("--tree", o.tree, "Print the search tree");
    sub->callback([&o, sub, name = name] {
      o.command = name;
      for (const auto& extra : sub->remaining()) {
        if (extra.rfind("-", 0) == 0 || extra.find('=') == std::string::npos) {
          throw CLI::ExtrasError({extra});
        }
        o.overrides.push_back(extra);
      }
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run(o);
  } catch (const ConfigStage& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const pmcts::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
