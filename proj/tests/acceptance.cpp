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


// Acceptance checks. Each criterion prints one PASS or FAIL line with the
// measured numbers; `--criterion all` runs every one in order.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "pmcts/engine/run.hpp"
#include "pmcts/envs/cliff_grid.hpp"
#include "pmcts/envs/random_mdp.hpp"
#include "pmcts/envs/tic_tac_toe.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/harness/elo.hpp"
#include "pmcts/harness/experiment.hpp"
#include "pmcts/harness/stats.hpp"
#include "pmcts/oracle.hpp"
#include "test_models.hpp"

namespace pmcts {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --- Formulas ----------------------------------------------------------------

constexpr double kRelTol = 1e-10;

struct Tally {
  int cases = 0;
  int bad = 0;
  double worst = 0.0;

  void check(double got, double want) {
    const double err = got == want ? 0.0 : std::abs(got - want) / std::abs(want);
    worst = std::max(worst, err);
    if (!(err <= kRelTol)) ++bad;
  }
};

std::vector<double> random_simplex(Stream& rng, int k) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double s = 0.0;
  for (double& x : p) s += x = 0.05 + rng.uniform();
  for (double& x : p) x /= s;
  return p;
}

Outcome formulas() {
  constexpr int kCases = 12;
  std::map<std::string, Tally> t;
  Stream rng({2026, 1});

  for (int c = 0; c < kCases; ++c) {
    const int k = 2 + c % 5;
    const auto prior = random_simplex(rng, k);
    std::vector<double> q(static_cast<std::size_t>(k));
    for (double& x : q) x = 2.0 * rng.uniform() - 1.0;
    const double b = 10.0 * rng.uniform();
    const auto got = improved_policy(prior, q, b);
    long double z = 0.0L;
    for (int a = 0; a < k; ++a) z += prior[a] * std::exp(static_cast<long double>(b) * q[a]);
    auto& tp = t["improved_policy"];
    ++tp.cases;
    for (int a = 0; a < k; ++a) {
      tp.check(got[a], static_cast<double>(prior[a] * std::exp(static_cast<long double>(b) * q[a]) / z));
    }
  }

  for (int c = 0; c < kCases; ++c) {
    const int k = 2 + c % 4;
    const auto target = random_simplex(rng, k);
    const double eta = 0.5 + 2.5 * rng.uniform();
    const auto got = proposal_policy(target, eta);
    long double z = 0.0L;
    for (double p : target) z += std::pow(static_cast<long double>(p), 1.0L / eta);
    auto& tp = t["proposal_policy"];
    ++tp.cases;
    for (int a = 0; a < k; ++a) {
      tp.check(got[a], static_cast<double>(
                           std::pow(static_cast<long double>(target[a]), 1.0L / eta) / z));
    }
  }

  for (int c = 0; c < kCases; ++c) {
    const double pi = 0.01 + rng.uniform(), hat = 0.01 + rng.uniform();
    const double prev = 0.1 + 3.0 * rng.uniform();
    auto& tp = t["importance_ratio"];
    ++tp.cases;
    tp.check(importance_ratio(pi, hat, prev),
             static_cast<double>(static_cast<long double>(prev) * pi / hat));
  }

  for (int c = 0; c < kCases; ++c) {
    const int k = 2 + c % 5;
    const auto prior = random_simplex(rng, k);
    std::vector<double> q(static_cast<std::size_t>(k)), n(q.size());
    for (int a = 0; a < k; ++a) {
      q[a] = 2.0 * rng.uniform() - 1.0;
      n[a] = (a + c) % 3 == 0 ? 0.0 : std::floor(1.0 + 9.0 * rng.uniform()) * 0.5;
    }
    const double v = 2.0 * rng.uniform() - 1.0;
    const auto got = completed_q(prior, q, n, v);
    long double sum_n = 0.0L, sum_pi = 0.0L, sum_piq = 0.0L;
    for (int a = 0; a < k; ++a) {
      if (n[a] == 0.0) continue;
      sum_n += n[a];
      sum_pi += prior[a];
      sum_piq += static_cast<long double>(prior[a]) * q[a];
    }
    const long double mix =
        sum_n > 0 ? (v + sum_n * (sum_piq / sum_pi)) / (1.0L + sum_n) : v;
    auto& tp = t["completed_q"];
    ++tp.cases;
    for (int a = 0; a < k; ++a) {
      tp.check(got[a], n[a] > 0.0 ? q[a] : static_cast<double>(mix));
    }
  }

  // ESS through the engine's own backup of hand-weighted particles.
  for (int c = 0; c < kCases; ++c) {
    const int k = 2 + c % 5;
    std::vector<double> w(static_cast<std::size_t>(k));
    if (c == 0) {
      w = {0.5, 0.25, 0.25};
    } else {
      for (double& x : w) x = 0.05 + rng.uniform();
    }
    const int arms = static_cast<int>(w.size());
    testing::TableMdp m = testing::bandit(std::vector<double>(arms, 0.0));
    TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
    SearchConfig cfg;
    cfg.simulations = 1;
    cfg.particles = arms;
    cfg.ess_weighting = true;
    Search<testing::TableMdp, TabularEvaluator> s(m, e, 0, cfg);
    ParticleBatch batch;
    for (int a = 0; a < arms; ++a) {
      Particle p;
      p.path = {0};
      p.actions = {a};
      p.ratios = {w[a]};
      p.weight = w[a];
      rebuild_depth_weights(p);
      batch.particles.push_back(p);
    }
    s.expand_batch(batch, 0);
    IterationRecord rec;
    s.backprop(batch, rec);
    long double sw = 0.0L, sw2 = 0.0L;
    for (double x : w) {
      sw += x;
      sw2 += static_cast<long double>(x) * x;
    }
    auto& tp = t["ess"];
    ++tp.cases;
    tp.check(rec.root_ess, static_cast<double>(sw * sw / sw2));
    if (c == 0) tp.check(rec.root_ess, 8.0 / 3.0);
  }

  for (int c = 0; c < kCases; ++c) {
    const double v = 2.0 * rng.uniform() - 1.0, nu = 2.0 * rng.uniform() - 1.0;
    const double m = 1.0 + 20.0 * rng.uniform(), n = 0.5 + 8.0 * rng.uniform();
    const auto [got_v, got_m] = stable_weighted_update(v, m, nu, n);
    auto& tp = t["stable_weighted_update"];
    ++tp.cases;
    tp.check(got_v, static_cast<double>((static_cast<long double>(v) * m +
                                         static_cast<long double>(nu) * n) /
                                        (static_cast<long double>(m) + n)));
    tp.check(got_m, m + n);
  }

  // Halving schedules worked out by hand: {M, N, K, phases, allocated}.
  struct Golden {
    long m, n;
    int k;
    std::vector<std::pair<int, long>> phases;
    long allocated;
  };
  const std::vector<Golden> golden = {
      {8, 1, 4, {{4, 1}, {2, 2}}, 8},
      {16, 1, 4, {{4, 2}, {2, 4}}, 16},
      {64, 1, 8, {{8, 2}, {4, 5}, {2, 14}}, 64},
      {10, 1, 2, {{2, 5}}, 10},
      {32, 16, 16, {{16, 8}, {8, 16}, {4, 32}, {2, 64}}, 512},
      {9, 3, 4, {{4, 3}, {2, 7}}, 26},
      {100, 1, 16, {{16, 1}, {8, 3}, {4, 6}, {2, 18}}, 100},
      {24, 1, 8, {{8, 1}, {4, 2}, {2, 4}}, 24},
      {7, 5, 2, {{2, 17}}, 34},
      {80, 2, 32, {{32, 1}, {16, 2}, {8, 4}, {4, 8}, {2, 16}}, 160},
      {12, 1, 4, {{4, 1}, {2, 4}}, 12},
  };
  for (const auto& g : golden) {
    const ShSchedule s = sh_schedule(g.m, g.n, g.k);
    auto& tp = t["sh_schedule"];
    ++tp.cases;
    bool same = s.phases.size() == g.phases.size() && s.allocated == g.allocated &&
                s.total == g.m * g.n;
    for (std::size_t i = 0; same && i < g.phases.size(); ++i) {
      same = s.phases[i].actions == g.phases[i].first &&
             s.phases[i].per_action == g.phases[i].second;
    }
    if (!same) ++tp.bad;
  }

  const double b = beta(3.0, BetaConstants{50.0, 0.1});
  bool ok = b == 5.3;
  std::string detail = fmt("beta=%.17g", b);
  for (const auto& [name, tp] : t) {
    ok = ok && tp.cases >= 10 && tp.bad == 0;
    detail += fmt(" %s=%d/%d(max rel %.1e)", name.c_str(), tp.cases - tp.bad,
                  tp.cases, tp.worst);
  }
  return {ok, detail};
}

// --- Equivalence ---------------------------------------------------------------

Outcome equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  RandomMdp m({.seed = 11});
  TabularEvaluator e =
      make_noisy_evaluator(m, make_random_prior(m, 1.0, 11), 0.5, 11);
  int same = 0;
  constexpr int kSeeds = 100;
  for (int seed = 0; seed < kSeeds; ++seed) {
    SearchConfig simple;
    simple.algorithm = Algorithm::kSimplePmcts;
    simple.simulations = 16;
    simple.particles = 8;
    simple.seed = static_cast<std::uint64_t>(seed);
    simple.keep_tree_dump = true;
    SearchConfig full = simple;
    full.algorithm = Algorithm::kPmcts;
    SearchResult a = run_search(m, e, 0, simple);
    SearchResult b = run_search(m, e, 0, full);
    b.algorithm = a.algorithm;
    same += serialize(a) == serialize(b);
  }
  const double secs = seconds_since(t0);
  return {same == kSeeds && secs < 10.0,
          fmt("%d/%d byte-identical, %.2f s (limit 10 s)", same, kSeeds, secs)};
}

// --- Unbiasedness ----------------------------------------------------------------

struct Estimate {
  Summary s;
  double var = 0.0;
};

// First-iteration root estimate of `config` over `reps` seeds.
template <class M, class E>
Estimate first_iteration(const M& m, const E& e, SearchConfig config, int reps) {
  std::vector<double> nu(static_cast<std::size_t>(reps));
  config.simulations = 1;
  for (int r = 0; r < reps; ++r) {
    config.seed = hash_key({0x756e62, static_cast<std::uint64_t>(r)});
    Search<M, E> s(m, e, m.initial_state(), config);
    nu[static_cast<std::size_t>(r)] = s.run_iteration().root_nu;
  }
  Estimate out{summarize(nu)};
  out.var = out.s.sd * out.s.sd;
  return out;
}

double z_against(const Summary& s, double truth) { return (s.mean - truth) / s.sem; }

Outcome unbiased_classical() {
  const auto t0 = std::chrono::steady_clock::now();
  RandomMdp m({.seed = 21, .state_count = 6});
  TabularPolicy prior = make_random_prior(m, 1.0, 21);
  TabularEvaluator e = make_noisy_evaluator(m, prior, 0.5, 21);
  // The first iteration samples root actions from the prior (no child has
  // been visited) and bootstraps with values of the prior.
  const double truth = policy_evaluation(m, prior).v[0];
  constexpr int kReps = 20000;
  SearchConfig c;
  c.algorithm = Algorithm::kSimplePmcts;
  c.independent_leaf_draws = true;
  c.particles = 1;
  const Estimate one = first_iteration(m, e, c, kReps);
  c.particles = 16;
  const Estimate sixteen = first_iteration(m, e, c, kReps);
  const double z1 = z_against(one.s, truth), z16 = z_against(sixteen.s, truth);
  const double ratio = one.var / sixteen.var;
  const double secs = seconds_since(t0);
  const bool ok = std::abs(z1) <= 4.0 && std::abs(z16) <= 4.0 && ratio >= 12.8 &&
                  ratio <= 20.0 && secs < 120.0;
  return {ok, fmt("V=%.6f mean(N=1)=%.6f z=%.2f mean(N=16)=%.6f z=%.2f "
                  "var ratio=%.2f (band [12.8, 20]), %.1f s",
                  truth, one.s.mean, z1, sixteen.s.mean, z16, ratio, secs)};
}

Outcome unbiased_relaxed() {
  const auto t0 = std::chrono::steady_clock::now();
  RandomMdp m({.seed = 21, .state_count = 6});
  // One dominant root action, so most of the 16 particles share a leaf and
  // that leaf's single evaluation.
  TabularPolicy prior = make_random_prior(m, 1.0, 21);
  prior.row(0) = {0.9, 0.05, 0.05};
  TabularEvaluator e = make_noisy_evaluator(m, prior, 0.5, 21);
  const double truth = policy_evaluation(m, prior).v[0];
  constexpr int kReps = 20000;

  SearchConfig simple;
  simple.algorithm = Algorithm::kSimplePmcts;
  simple.particles = 16;
  const Estimate s = first_iteration(m, e, simple, kReps);

  SearchConfig full = SearchConfig::pmcts_defaults();
  full.retrospective = false;
  full.estimator = Estimator::kUnnormalized;
  full.particles = 16;
  const Estimate p = first_iteration(m, e, full, kReps);

  const double zs = z_against(s.s, truth), zp = z_against(p.s, truth);
  const double secs = seconds_since(t0);
  const bool simple_biased = std::abs(zs) > 4.0;
  const bool pmcts_unbiased = std::abs(zp) <= 4.0;
  return {simple_biased && pmcts_unbiased && secs < 120.0,
          fmt("V=%.6f simple mean=%.6f z=%.2f (needs |z|>4) pmcts-unnormalized "
              "mean=%.6f z=%.2f (needs |z|<=4), %.1f s",
              truth, s.s.mean, zs, p.s.mean, zp, secs)};
}

// --- Policy improvement --------------------------------------------------------

Outcome policy_improvement() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kSeeds = 50;
  bool ok = true;
  std::string detail;
  for (int n : {1, 8}) {
    std::vector<double> all, gapped;
    int strict = 0;
    for (int seed = 0; seed < kSeeds; ++seed) {
      RandomMdp m({.seed = static_cast<std::uint64_t>(100 + seed)});
      TabularPolicy prior = make_random_prior(m, 1.0, static_cast<std::uint64_t>(seed));
      TabularEvaluator e = make_exact_evaluator(m, prior);
      SearchConfig c = SearchConfig::pmcts_defaults();
      c.simulations = 16;
      c.particles = n;
      c.seed = static_cast<std::uint64_t>(seed);
      const SearchResult r = run_search(m, e, 0, c);
      const ExactValues base = policy_evaluation(m, prior);
      const double improved =
          policy_evaluation(m, with_row(prior, 0, r.pi_search)).v[0];
      const double diff = improved - base.v[0];
      all.push_back(diff);
      const auto& q = base.q[0];
      if (*std::max_element(q.begin(), q.end()) - *std::min_element(q.begin(), q.end()) >=
          0.1) {
        gapped.push_back(diff);
        strict += diff > 0.0;
      }
    }
    const Summary a = summarize(all);
    const bool nonneg = a.mean + kOneSided95 * a.sem >= 0.0;
    bool strict_ok = true;
    if (gapped.size() >= 2) {
      const Summary g = summarize(gapped);
      strict_ok = g.mean - kOneSided95 * g.sem > 0.0;
      detail += fmt("N=%d mean=%.5f sem=%.5f gap>=0.1: %zu instances mean=%.5f "
                    "lower95=%.5f strictly positive %d; ",
                    n, a.mean, a.sem, gapped.size(), g.mean,
                    g.mean - kOneSided95 * g.sem, strict);
    } else {
      detail += fmt("N=%d mean=%.5f sem=%.5f (fewer than 2 gapped instances); ", n,
                    a.mean, a.sem);
    }
    ok = ok && nonneg && strict_ok;
  }
  const double secs = seconds_since(t0);
  detail += fmt("%.1f s", secs);
  return {ok && secs < 60.0, detail};
}

// --- Ablation and scaling ------------------------------------------------------

// The CliffGrid setting used for the ladder and the scaling curve: value prior
// at temperature 1, noisy values with sigma 0.25.
CliffGrid cliff() { return CliffGrid(CliffGrid::classic(5, 3)); }

TabularEvaluator cliff_evaluator(const CliffGrid& g) {
  return make_noisy_evaluator(g, make_value_prior(g, 1.0, 0.0, 1), 0.25, 3);
}

// Ordered means, each allowed to tie its predecessor within the two-sided 95%
// interval, and the last strictly above the first at one-sided 95%.
Outcome ordered(const std::vector<EpisodeRecord>& records,
                const std::vector<std::string>& labels) {
  const auto sums = summarize_by_agent(records);
  auto find = [&](const std::string& l) {
    return std::find_if(sums.begin(), sums.end(),
                        [&](const auto& s) { return s.agent == l; })
        ->returns;
  };
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Summary s = find(labels[i]);
    detail += fmt("%s=%.4f+-%.4f", labels[i].c_str(), s.mean, s.sem);
    if (i > 0) {
      const double z = welch_z(s, find(labels[i - 1]));
      detail += fmt("(z=%.2f)", z);
      ok = ok && z > -kTwoSided95;
    }
    detail += " ";
  }
  const double z = welch_z(find(labels.back()), find(labels.front()));
  detail += fmt("last-vs-first z=%.2f", z);
  return {ok && z > kOneSided95, detail};
}

Outcome ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  const CliffGrid g = cliff();
  const TabularEvaluator e = cliff_evaluator(g);
  SearchConfig base;
  base.simulations = 32;
  base.particles = 16;
  const auto agents = ablation_ladder(base, 1.5);
  const auto records = run_episodes(g, e, agents, 200, 0, 1);
  Outcome o = ordered(records, {"S", "+D", "+E", "+T", "+C", "PMCTS"});
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 600.0;
  o.detail += fmt(", %.1f s", secs);
  return o;
}

template <class M, class E>
Outcome scaling_on(const M& m, const E& e) {
  std::vector<AgentSpec> agents;
  std::vector<std::string> labels;
  for (int n : {1, 4, 16}) {
    SearchConfig c = SearchConfig::pmcts_defaults();
    c.simulations = 32;
    c.particles = n;
    labels.push_back("N=" + std::to_string(n));
    agents.push_back({labels.back(), AgentKind::kSearch, c});
  }
  return ordered(run_episodes(m, e, agents, 200, 0, 1), labels);
}

Outcome scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const CliffGrid g = cliff();
  const Outcome a = scaling_on(g, cliff_evaluator(g));
  RandomMdp m({.seed = 7});
  const Outcome b =
      scaling_on(m, make_noisy_evaluator(m, make_random_prior(m, 1.0, 1), 0.5, 3));
  const double secs = seconds_since(t0);
  return {a.pass && b.pass && secs < 600.0,
          "cliff_grid: " + a.detail + "; random_mdp: " + b.detail +
              fmt("; %.1f s", secs)};
}

// --- Virtual visits --------------------------------------------------------------

bool puct_hand_trace(std::string& detail) {
  // a0 visited twice (q 0.6) with one particle in flight, a1 once (q 0.4),
  // a2 never; v = 0.5, M(s) = 4.
  PuctInput in;
  in.prior = {0.5, 0.3, 0.2};
  in.q = {0.6, 0.4, 0.0};
  in.visits = {2.0, 1.0, 0.0};
  in.virtual_visits = {1.0, 0.0, 0.0};
  in.value = 0.5;
  in.node_visits = 4.0;
  in.node_virtual = 1.0;
  const double c = std::log((1.0 + 4.0 + 19652.0) / 19652.0) + 1.25;
  const double u = c * std::sqrt(5.0);
  // Losses: a0 counts the in-flight particle as a -1 return.
  const double q0 = (0.6 * 2.0 - 1.0) / 3.0;
  const double losses[3] = {0.0 + 0.5 * u / 4.0, (0.4 - q0) / (0.5 - q0) + 0.3 * u / 2.0,
                            0.2 * u};
  // Means: q unchanged, normalized over {0.4, 0.5, 0.6}.
  const double means[3] = {1.0 + 0.5 * u / 4.0, 0.0 + 0.3 * u / 2.0, 0.2 * u};
  const ActionId want_l = static_cast<ActionId>(std::max_element(losses, losses + 3) - losses);
  const ActionId want_m = static_cast<ActionId>(std::max_element(means, means + 3) - means);
  const ActionId got_l = puct_virtual(in, VirtualMode::kLosses);
  const ActionId got_m = puct_virtual(in, VirtualMode::kMeans);
  detail += fmt("hand trace losses=%d (expect %d) means=%d (expect %d); ", got_l,
                want_l, got_m, want_m);
  return got_l == want_l && got_m == want_m && want_l != want_m;
}

// Median selection time per iteration over a few searches.
template <class M, class E>
double select_ms_per_iteration(const M& m, const E& e, SearchConfig c) {
  std::vector<double> t;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    const SearchResult r = run_search(m, e, 0, c);
    t.push_back(r.diagnostics.select_ms / c.simulations);
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome virtual_visits() {
  std::string detail;
  const bool trace = puct_hand_trace(detail);
  RandomMdp m({.seed = 5, .state_count = 500, .action_count = 4});
  TabularEvaluator e = make_exact_evaluator(m, make_random_prior(m, 1.0, 5));
  SearchConfig puct;
  puct.algorithm = Algorithm::kPuctVirtualLosses;
  puct.simulations = 64;
  puct.particles = 1;
  const double p1 = select_ms_per_iteration(m, e, puct);
  puct.particles = 16;
  const double p16 = select_ms_per_iteration(m, e, puct);
  SearchConfig pm = SearchConfig::pmcts_defaults();
  pm.simulations = 64;
  pm.particles = 1;
  pm.workers = 8;
  const double q1 = select_ms_per_iteration(m, e, pm);
  pm.particles = 16;
  const double q16 = select_ms_per_iteration(m, e, pm);
  detail += fmt("puct select ms/iter N=1 %.4f N=16 %.4f; pmcts (8 workers) "
                "N=1 %.4f N=16 %.4f ratio %.2f (limit 2); %u hardware threads",
                p1, p16, q1, q16, q16 / q1, std::thread::hardware_concurrency());
  return {trace && p16 > p1 && q16 <= 2.0 * q1, detail};
}

// --- Determinism -----------------------------------------------------------------

template <class M, class E>
int search_mismatches(const M& m, const E& e, std::string& detail) {
  int bad = 0;
  for (Algorithm alg :
       {Algorithm::kPmcts, Algorithm::kSimplePmcts, Algorithm::kGumbelMcts,
        Algorithm::kPuctVirtualLosses, Algorithm::kPuctVirtualMeans,
        Algorithm::kRootParallelGumbel}) {
    SearchConfig c = SearchConfig::pmcts_defaults();
    c.algorithm = alg;
    c.retrospective = alg == Algorithm::kPmcts;
    c.simulations = 16;
    c.particles = alg == Algorithm::kGumbelMcts ? 1 : 8;
    c.keep_tree_dump = true;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      c.seed = seed;
      std::string first;
      for (int w : {1, 2, 8, 1}) {
        c.workers = w;
        const std::string out = serialize(run_search(m, e, m.initial_state(), c));
        if (first.empty()) first = out;
        if (out != first) {
          ++bad;
          detail += m.name() + "/" + to_string(alg) + " ";
        }
      }
    }
  }
  return bad;
}

std::vector<EpisodeRecord> untimed(std::vector<EpisodeRecord> r) {
  for (auto& x : r) x.select_ms = x.expand_ms = x.backprop_ms = 0.0;
  return r;
}

Outcome determinism() {
  std::string detail;
  int bad = 0;
  const CliffGrid g = cliff();
  const TabularEvaluator ge = cliff_evaluator(g);
  bad += search_mismatches(g, ge, detail);
  RandomMdp m({.seed = 3});
  const TabularEvaluator me = make_noisy_evaluator(m, make_random_prior(m, 1.0, 3), 0.5, 3);
  bad += search_mismatches(m, me, detail);
  TicTacToe ttt;
  const TabularEvaluator te = make_exact_evaluator(ttt, uniform_policy(ttt));
  bad += search_mismatches(ttt, te, detail);

  SearchConfig base;
  base.simulations = 8;
  base.particles = 4;
  auto agents = ablation_ladder(base, 1.5);
  agents.push_back({"random", AgentKind::kRandom, base});
  std::vector<EpisodeRecord> first;
  for (int w : {1, 2, 8, 1}) {
    auto r = untimed(run_episodes(g, ge, agents, 6, 17, w));
    if (first.empty()) first = r;
    if (r != first) {
      ++bad;
      detail += fmt("episodes workers=%d ", w);
    }
  }

  std::vector<AgentSpec> players = {{"pmcts", AgentKind::kSearch, base},
                                    {"random", AgentKind::kRandom, base}};
  players[0].config.algorithm = Algorithm::kPmcts;
  const ExactValues optimal = value_iteration(ttt);
  const auto book = generate_opening_book(ttt, optimal.v, 2, -0.3, 0.3, 6, 0);
  std::vector<GameRecord> games;
  for (int w : {1, 2, 8, 1}) {
    const auto t = run_tournament(ttt, te, players, book.states, 5, w);
    bool same = games.empty() || t.games.size() == games.size();
    for (std::size_t i = 0; same && !games.empty() && i < games.size(); ++i) {
      same = t.games[i].outcome == games[i].outcome && t.games[i].plies == games[i].plies;
    }
    if (games.empty()) games = t.games;
    if (!same) {
      ++bad;
      detail += fmt("tournament workers=%d ", w);
    }
  }
  return {bad == 0, fmt("%d mismatches over searches (3 envs x 6 algorithms x 3 "
                        "seeds), episodes and a tournament at workers 1, 2, 8 "
                        "and a rerun %s",
                        bad, detail.c_str())};
}

// --- Bayes Elo -------------------------------------------------------------------

Outcome bayes_elo() {
  const std::vector<double> truth = {0.0, 100.0, 200.0};
  WinMatrix mat({"a", "b", "c"});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double p = elo_expected_score(truth[i] - truth[j]);
      for (int game = 0; game < 1000; ++game) {
        Stream rng({0x656c6f, i, j, static_cast<std::uint64_t>(game)});
        // Alternate who is listed first; results are symmetric.
        GameCounts& c = game % 2 == 0 ? mat.results[i][j] : mat.results[j][i];
        const bool i_wins = rng.uniform() < p;
        if ((game % 2 == 0) == i_wins) ++c.wins;
        else ++c.losses;
      }
    }
  }
  const EloFit fit = fit_bayes_elo(mat);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 1; k < 3; ++k) {
    const double err = fit.ratings[k] - truth[k];
    ok = ok && std::abs(err) <= fit.half_widths[k];
    detail += fmt("r%zu=%.1f+-%.1f (true %.0f) ", k, fit.ratings[k], fit.half_widths[k],
                  truth[k]);
  }
  WinMatrix pair({"strong", "weak"});
  pair.results[0][1] = {760, 0, 240};
  const EloFit p = fit_bayes_elo(pair);
  const double diff = p.ratings[0] - p.ratings[1];
  ok = ok && std::abs(diff - 200.0) <= 15.0;
  detail += fmt("0.76 pair diff=%.2f (200 +- 15)", diff);
  return {ok, detail};
}

}  // namespace
}  // namespace pmcts

int main(int argc, char** argv) {
  using pmcts::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"formulas", pmcts::formulas},
      {"equivalence", pmcts::equivalence},
      {"unbiased_classical", pmcts::unbiased_classical},
      {"unbiased_relaxed", pmcts::unbiased_relaxed},
      {"policy_improvement", pmcts::policy_improvement},
      {"ablation", pmcts::ablation},
      {"scaling", pmcts::scaling},
      {"virtual_visits", pmcts::virtual_visits},
      {"determinism", pmcts::determinism},
      {"bayes_elo", pmcts::bayes_elo},
  };
  CLI::App app{"Acceptance checks"};
  std::string which = "all";
  std::vector<std::string> names = {"all"};
  for (const auto& c : criteria) names.push_back(c.first);
  app.add_option("--criterion", which, "Criterion to run")
      ->check(CLI::IsMember(names));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& [name, run] : criteria) {
    if (which != "all" && which != name) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
