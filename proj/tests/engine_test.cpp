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


#include "pmcts/engine/search.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pmcts/engine/run.hpp"
#include "pmcts/envs/cliff_grid.hpp"
#include "pmcts/envs/random_mdp.hpp"
#include "pmcts/oracle.hpp"
#include "test_models.hpp"

namespace pmcts {
namespace {

using testing::TableMdp;

// Root with two actions ending the episode with rewards 1 and 0.
TableMdp two_arm() {
  TableMdp m;
  m.rows = {{{1, 1.0, true}, {2, 0.0, true}}, {}, {}};
  return m;
}

SearchConfig simple(int m, int n, std::uint64_t seed) {
  SearchConfig c;
  c.algorithm = Algorithm::kSimplePmcts;
  c.simulations = m;
  c.particles = n;
  c.seed = seed;
  c.keep_tree_dump = true;
  return c;
}

TEST(SearchTest, FirstIterationRootUpdateByHand) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  Search<TableMdp, TabularEvaluator> s(m, e, 0, simple(1, 4, 3));
  EXPECT_EQ(s.tree().node(0).value, 0.5);
  ParticleBatch b = s.select_particles(0);
  double sum = 0.0;
  std::set<ActionId> arms;
  for (const auto& p : b.particles) {
    ASSERT_EQ(p.actions.size(), 1u);
    sum += p.actions[0] == 0 ? 1.0 : 0.0;
    arms.insert(p.actions[0]);
  }
  EXPECT_EQ(s.expand_batch(b, 0), static_cast<int>(arms.size()));
  IterationRecord rec;
  s.backprop(b, rec);
  EXPECT_DOUBLE_EQ(s.tree().node(0).value, (0.5 + sum) / 5.0);
  EXPECT_EQ(s.tree().node(0).mass, 5.0);
  EXPECT_EQ(rec.root_increment, 4.0);
}

TEST(SearchTest, WeightedFirstIterationByHand) {
  TableMdp m = two_arm();
  TabularPolicy prior = uniform_policy(m);
  prior.probabilities[0] = {0.8, 0.2};
  TabularEvaluator e = make_exact_evaluator(m, prior);
  SearchConfig c = simple(1, 8, 5);
  c.algorithm = Algorithm::kPmcts;
  c.eta = 2.0;
  c.weight_correction = true;
  c.ess_weighting = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  const double v0 = s.tree().node(0).value;
  ParticleBatch b = s.select_particles(0);
  s.expand_batch(b, 0);
  // Target at the root is the prior (no visits yet); proposal is its square
  // root, normalized: 2/3, 1/3.
  const double w[2] = {0.8 / (2.0 / 3.0), 0.2 / (1.0 / 3.0)};
  double ws = 0.0, wr = 0.0, w2 = 0.0;
  for (const auto& p : b.particles) {
    const double wi = w[p.actions[0]];
    EXPECT_NEAR(p.weight, wi, 1e-12);
    ws += wi;
    w2 += wi * wi;
    wr += wi * (p.actions[0] == 0 ? 1.0 : 0.0);
  }
  IterationRecord rec;
  s.backprop(b, rec);
  const double ess = ws * ws / w2;
  const double nu = wr / ws;
  EXPECT_NEAR(rec.root_ess, ess, 1e-12);
  EXPECT_NEAR(s.tree().node(0).mass, 1.0 + ess, 1e-12);
  EXPECT_NEAR(s.tree().node(0).value, v0 + (nu - v0) * ess / (1.0 + ess), 1e-12);
}

TEST(SearchTest, UnnormalizedDividesByParticleCount) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 6, 9);
  c.algorithm = Algorithm::kPmcts;
  c.estimator = Estimator::kUnnormalized;
  c.eta = 3.0;
  c.weight_correction = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b = s.select_particles(0);
  s.expand_batch(b, 0);
  double wr = 0.0;
  for (const auto& p : b.particles) wr += p.weight * (p.actions[0] == 0 ? 1.0 : 0.0);
  IterationRecord rec;
  s.backprop(b, rec);
  EXPECT_NEAR(rec.root_nu, wr / 6.0, 1e-12);
}

TEST(SearchTest, DedupMergesSameLeaf) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 8, 1);
  c.algorithm = Algorithm::kPmcts;
  c.dedup = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  IterationRecord rec = s.run_iteration();
  EXPECT_EQ(rec.root_increment, static_cast<double>(rec.unique_leaves));
  EXPECT_LE(rec.unique_leaves, 2);
}

TEST(SearchTest, ExistingTerminalDoesNotGrowTree) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  Search<TableMdp, TabularEvaluator> s(m, e, 0, simple(20, 4, 2));
  SearchResult r = s.run();
  EXPECT_EQ(r.tree_size, 3);
  // Every particle passes the root: mass 1 + M N.
  EXPECT_EQ(s.tree().node(0).mass, 81.0);
  EXPECT_TRUE(s.tree().links_consistent());
}

TEST(SearchTest, EtaOneFlagsOffMatchesSimpleBytes) {
  RandomMdp m({.seed = 4});
  TabularEvaluator e = make_noisy_evaluator(m, make_random_prior(m, 1.0, 4), 0.3, 2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SearchConfig a = simple(8, 4, seed);
    SearchConfig b = a;
    b.algorithm = Algorithm::kPmcts;
    SearchResult ra = run_search(m, e, 0, a);
    SearchResult rb = run_search(m, e, 0, b);
    ra.algorithm = rb.algorithm;
    EXPECT_EQ(serialize(ra), serialize(rb));
  }
}

TEST(SearchTest, SameBytesAcrossWorkerCounts) {
  CliffGrid g(CliffGrid::classic(5, 3));
  TabularEvaluator e = make_noisy_evaluator(g, uniform_policy(g), 0.2, 1);
  for (Algorithm alg : {Algorithm::kPmcts, Algorithm::kSimplePmcts,
                        Algorithm::kPuctVirtualLosses, Algorithm::kRootParallelGumbel}) {
    SearchConfig c = SearchConfig::pmcts_defaults();
    c.algorithm = alg;
    if (alg != Algorithm::kPmcts) c.retrospective = false;
    c.simulations = 8;
    c.particles = 8;
    c.seed = 11;
    c.keep_tree_dump = true;
    std::string first;
    for (int w : {1, 2, 8}) {
      c.workers = w;
      const std::string out = serialize(run_search(g, e, g.initial_state(), c));
      if (first.empty()) first = out;
      EXPECT_EQ(out, first) << to_string(alg) << " workers " << w;
    }
  }
}

TEST(SearchTest, TreeNeverExceedsCapacity) {
  RandomMdp m({.seed = 2, .state_count = 50, .terminal_fraction = 0.3});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = SearchConfig::pmcts_defaults();
  c.simulations = 10;
  c.particles = 7;
  Search<RandomMdp, TabularEvaluator> s(m, e, 0, c);
  SearchResult r = s.run();
  EXPECT_LE(r.tree_size, 71);
  EXPECT_TRUE(s.tree().links_consistent());
  for (int i = 0; i < s.tree().size(); ++i) {
    EXPECT_GE(s.tree().node(i).mass, 1.0 - 1e-12);
    EXPECT_TRUE(std::isfinite(s.tree().node(i).value));
  }
}

TEST(SearchTest, RetrospectiveUsesPostExpansionPolicy) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 4, 6);
  c.algorithm = Algorithm::kPmcts;
  c.retrospective = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b = s.select_particles(0);
  s.expand_batch(b, 0);
  s.retrospective_reweight(b);
  const auto pi = node_policy(s.tree(), 0, c.beta);
  for (const auto& p : b.particles) {
    EXPECT_NEAR(p.weight, pi[p.actions[0]] / 0.5, 1e-12);
  }
}

TEST(SearchTest, RejectsTerminalRootAndBadConfig) {
  TableMdp m = two_arm();
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  EXPECT_THROW((Search<TableMdp, TabularEvaluator>(m, e, 1, simple(1, 1, 0))),
               ValidationError);
  SearchConfig c = simple(1, 1, 0);
  c.particles = 0;
  EXPECT_THROW(run_search(m, e, 0, c), ValidationError);
  c = simple(1, 2, 0);
  c.retrospective = true;
  EXPECT_THROW(run_search(m, e, 0, c), ValidationError);
}

TEST(SearchTest, RootSequentialHalvingSpreadsFirstPhase) {
  TableMdp m = testing::bandit({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(8, 8, 0);
  c.algorithm = Algorithm::kPmcts;
  c.sh_top_k = 8;
  SearchResult r = run_search(m, e, 0, c);
  for (double v : r.root_visits) EXPECT_GE(v, 2.0);
  EXPECT_EQ(r.action, 7);
}

// A chain of `length` states with one action each, reward 0.1 per step.
TableMdp chain(int length) {
  TableMdp m;
  for (int i = 0; i < length; ++i) m.rows.push_back({{i + 1, 0.1, false}});
  m.rows.push_back({{length, 0.0, false}});
  return m;
}

Particle forced(ActionId a, double weight) {
  Particle p;
  p.path = {0};
  p.actions = {a};
  p.ratios = {weight};
  p.weight = weight;
  p.last_target = 0.5;
  rebuild_depth_weights(p);
  return p;
}

TEST(DedupTest, IdenticalTrajectoriesKeepSum) {
  ParticleBatch b;
  for (double w : {0.2, 0.3, 0.5}) {
    Particle p = forced(0, w);
    p.leaf = 4;
    b.particles.push_back(p);
  }
  dedup_merge(b);
  EXPECT_EQ(b[0].weight, 1.0);
  EXPECT_EQ(b[1].weight, 0.0);
  EXPECT_EQ(b[2].weight, 0.0);
  EXPECT_EQ(b[0].multiplicity, 3);
  EXPECT_FALSE(b[1].alive);
}

TEST(DedupTest, GroupsSumSeparately) {
  ParticleBatch b;
  const int leaves[3] = {7, 9, 7};
  const double w[3] = {0.4, 0.1, 0.6};
  for (int i = 0; i < 3; ++i) {
    Particle p = forced(0, w[i]);
    p.leaf = leaves[i];
    b.particles.push_back(p);
  }
  const double before = b.total_weight();
  dedup_merge(b);
  EXPECT_EQ(b[0].weight, 1.0);
  EXPECT_EQ(b[1].weight, 0.1);
  EXPECT_EQ(b[2].weight, 0.0);
  EXPECT_EQ(b.total_weight(), before);
}

TEST(DedupTest, AllUniqueUnchanged) {
  ParticleBatch b;
  for (int i = 0; i < 3; ++i) {
    Particle p = forced(0, 0.1 * (i + 1));
    p.leaf = i;
    b.particles.push_back(p);
  }
  dedup_merge(b);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(b[i].weight, 0.1 * (i + 1));
    EXPECT_TRUE(b[i].alive);
  }
}

TEST(SearchTest, EssOfHandWeights) {
  TableMdp m = testing::bandit({0.0, 1.0, 2.0});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 3, 0);
  c.algorithm = Algorithm::kPmcts;
  c.ess_weighting = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b;
  const double w[3] = {0.5, 0.25, 0.25};
  for (int a = 0; a < 3; ++a) b.particles.push_back(forced(a, w[a]));
  s.expand_batch(b, 0);
  const double v0 = s.tree().node(0).value;
  IterationRecord rec;
  s.backprop(b, rec);
  EXPECT_NEAR(rec.root_ess, 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(rec.root_increment, 8.0 / 3.0, 1e-12);
  // Suffix returns: reward a plus the discounted sink value 0.
  const double nu = 0.5 * 0.0 + 0.25 * 1.0 + 0.25 * 2.0;
  EXPECT_NEAR(rec.root_nu, nu, 1e-12);
  EXPECT_NEAR(s.tree().node(0).value,
              v0 + (nu - v0) * (8.0 / 3.0) / (1.0 + 8.0 / 3.0), 1e-12);
}

TEST(SearchTest, SharedLeavesShareEvaluations) {
  TableMdp m = testing::bandit({0.0, 1.0});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 3, 0);
  c.algorithm = Algorithm::kPmcts;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b;
  for (ActionId a : {0, 1, 0}) b.particles.push_back(forced(a, 1.0));
  EXPECT_EQ(s.expand_batch(b, 0), 2);
  // One evaluation for the root, one per new leaf.
  EXPECT_EQ(s.result().diagnostics.evaluations, 1 + 2);
  EXPECT_EQ(s.tree().size(), 3);
  EXPECT_EQ(b[0].leaf, b[2].leaf);
  EXPECT_NE(b[0].leaf, b[1].leaf);
}

// Root with a catastrophic arm (-1) and a neutral arm (0); one particle on
// each. The expected root update is worked out from the formulas directly.
TEST(SearchTest, RetrospectiveTwoParticleRootUpdate) {
  TableMdp m = testing::bandit({-1.0, 0.0});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 2, 0);
  c.algorithm = Algorithm::kPmcts;
  c.retrospective = true;
  c.ess_weighting = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  const double v0 = s.tree().node(0).value;
  EXPECT_DOUBLE_EQ(v0, -0.5);
  ParticleBatch b;
  b.particles = {forced(0, 1.0), forced(1, 1.0)};
  s.expand_batch(b, 0);
  s.retrospective_reweight(b);

  // Both children have mass 1, so beta = (50 + 1) * 0.1 and q = [-1, 0].
  const double beta = 5.1;
  const double z = 0.5 * std::exp(-beta) + 0.5;
  const double p0 = 0.5 * std::exp(-beta) / z, p1 = 0.5 / z;
  EXPECT_NEAR(b[0].weight, p0 / 0.5, 1e-12);
  EXPECT_NEAR(b[1].weight, p1 / 0.5, 1e-12);
  EXPECT_LT(b[0].weight, 1.0);

  IterationRecord rec;
  s.backprop(b, rec);
  const double nu = (p0 * -1.0 + p1 * 0.0) / (p0 + p1);
  const double ess = (p0 + p1) * (p0 + p1) / (p0 * p0 + p1 * p1);
  EXPECT_NEAR(rec.root_nu, nu, 1e-12);
  EXPECT_NEAR(rec.root_ess, ess, 1e-12);
  EXPECT_NEAR(s.tree().node(0).value, v0 + (nu - v0) * ess / (1.0 + ess), 1e-12);
  EXPECT_NEAR(s.tree().node(0).mass, 1.0 + ess, 1e-12);
}

TEST(SearchTest, RetrospectiveKeepsConfirmedPrior) {
  TableMdp m = testing::bandit({0.0, 0.0});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(1, 2, 0);
  c.algorithm = Algorithm::kPmcts;
  c.retrospective = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b;
  b.particles = {forced(0, 1.0), forced(1, 1.0)};
  s.expand_batch(b, 0);
  s.retrospective_reweight(b);
  EXPECT_DOUBLE_EQ(b[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(b[1].weight, 1.0);
}

TEST(SearchTest, TemperedProposalFrequency) {
  TableMdp m = testing::bandit({0.0, 0.0});
  TabularPolicy prior = uniform_policy(m);
  prior.probabilities[0] = {0.9, 0.1};
  TabularEvaluator e = make_exact_evaluator(m, prior);
  SearchConfig c = simple(1, 10000, 21);
  c.algorithm = Algorithm::kPmcts;
  c.eta = 4.0;
  c.weight_correction = true;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  ParticleBatch b = s.select_particles(0);
  const double r0 = std::pow(0.9, 0.25), r1 = std::pow(0.1, 0.25);
  const double q0 = r0 / (r0 + r1), q1 = r1 / (r0 + r1);
  double n0 = 0.0;
  for (const auto& p : b.particles) {
    const bool first = p.actions[0] == 0;
    n0 += first;
    EXPECT_NEAR(p.weight, first ? 0.9 / q0 : 0.1 / q1, 1e-12);
  }
  const double n = 10000.0;
  const double chi2 = (n0 - n * q0) * (n0 - n * q0) / (n * q0) +
                      (n0 - n * q0) * (n0 - n * q0) / (n * q1);
  EXPECT_LT(chi2, 10.83);  // 1 degree of freedom, p = 0.001
}

TEST(SearchTest, EtaOneGivesUnitWeights) {
  RandomMdp m({.seed = 8});
  TabularEvaluator e = make_exact_evaluator(m, make_random_prior(m, 1.0, 3));
  SearchConfig c = simple(4, 8, 2);
  c.algorithm = Algorithm::kPmcts;
  c.weight_correction = true;
  Search<RandomMdp, TabularEvaluator> s(m, e, 0, c);
  for (int i = 0; i < 3; ++i) {
    ParticleBatch b = s.select_particles(i);
    for (const auto& p : b.particles) EXPECT_EQ(p.weight, 1.0);
    s.expand_batch(b, i);
    IterationRecord rec;
    s.backprop(b, rec);
  }
}

TEST(SearchTest, SingleActionRootGivesIdenticalParticles) {
  TableMdp m = chain(30);
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  Search<TableMdp, TabularEvaluator> s(m, e, 0, simple(1, 8, 0));
  ParticleBatch b = s.select_particles(0);
  for (const auto& p : b.particles) EXPECT_EQ(p.actions, b[0].actions);
}

TEST(SearchTest, GumbelSingleActionExtendsOneLine) {
  TableMdp m = chain(30);
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(10, 1, 0);
  c.algorithm = Algorithm::kGumbelMcts;
  Search<TableMdp, TabularEvaluator> s(m, e, 0, c);
  SearchResult r = s.run();
  EXPECT_EQ(r.tree_size, 11);
  int node = 0, depth = 0;
  while (s.tree().node(node).children[0] != kNoNode) {
    node = s.tree().node(node).children[0];
    ++depth;
  }
  EXPECT_EQ(depth, 10);
}

TEST(SearchTest, GumbelFollowsHalvingScheduleAtKLogK) {
  TableMdp m = testing::bandit({0.4, 0.1, 0.3, 0.2});
  TabularEvaluator e = make_exact_evaluator(m, uniform_policy(m));
  SearchConfig c = simple(8, 1, 0);
  c.algorithm = Algorithm::kGumbelMcts;
  c.sh_top_k = 4;
  SearchResult r = run_gumbel_baseline(m, e, 0, c);
  ShSchedule plan = sh_schedule(8, 1, 4);
  ASSERT_EQ(plan.phases.size(), 2u);
  // Phase 1 gives every arm its share; the two best arms (0 and 2) survive.
  std::vector<double> expect(4, static_cast<double>(plan.phases[0].per_action));
  expect[0] += static_cast<double>(plan.phases[1].per_action);
  expect[2] += static_cast<double>(plan.phases[1].per_action);
  EXPECT_EQ(r.root_visits, expect);
}

TEST(SearchTest, MassIncrementsWithinParticleCount) {
  RandomMdp m({.seed = 12, .state_count = 40});
  TabularEvaluator e = make_noisy_evaluator(m, make_random_prior(m, 1.0, 5), 0.4, 3);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    SearchConfig c = SearchConfig::pmcts_defaults();
    c.simulations = 12;
    c.particles = 6;
    c.seed = seed;
    Search<RandomMdp, TabularEvaluator> s(m, e, 0, c);
    for (int i = 0; i < c.simulations; ++i) {
      IterationRecord rec = s.run_iteration();
      EXPECT_GE(rec.root_increment, 1.0 - 1e-12);
      EXPECT_LE(rec.root_increment, 6.0 + 1e-12);
    }
    for (int i = 0; i < s.tree().size(); ++i) {
      EXPECT_GE(s.tree().node(i).mass, 1.0 - 1e-12);
      EXPECT_LE(s.tree().node(i).mass, 1.0 + 12 * 6 + 1e-9);
    }
  }
}

}  // namespace
}  // namespace pmcts
