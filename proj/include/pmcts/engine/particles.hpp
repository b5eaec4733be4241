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

#ifndef PMCTS_ENGINE_PARTICLES_HPP_
#define PMCTS_ENGINE_PARTICLES_HPP_

#include <cstddef>
#include <map>
#include <vector>

#include "pmcts/mdp.hpp"
#include "pmcts/tree.hpp"

namespace pmcts {

// One selection trajectory. path[0] is the root; after expansion path.back()
// is the leaf node. actions[t] is taken at path[t].
struct Particle {
  std::vector<int> path;
  std::vector<ActionId> actions;
  // Per-step factors pi / pi_hat (1 where no correction applies).
  std::vector<double> ratios;
  double weight = 1.0;
  // depth_weights[t] = product of ratios[t..]; the weight of the sub-path
  // below path[t].
  std::vector<double> depth_weights;
  // pi_i(a_T | s_T) at the last step, kept for retrospective reweighting.
  double last_target = 1.0;
  // The last action was dictated by the root schedule, not sampled.
  bool last_forced = false;

  // Set by expansion.
  int leaf = kNoNode;
  bool new_leaf = false;  // leaf was created in this iteration
  double leaf_value = 0.0;

  int multiplicity = 1;  // particles merged into this one
  bool alive = true;     // false once merged into another particle

  bool pending_edge() const { return path.size() == actions.size(); }
};

struct ParticleBatch {
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  Particle& operator[](std::size_t i) { return particles[i]; }
  const Particle& operator[](std::size_t i) const { return particles[i]; }

  double total_weight() const {
    double w = 0.0;
    for (const auto& p : particles) w += p.weight;
    return w;
  }
};

inline void rebuild_depth_weights(Particle& p) {
  p.depth_weights.assign(p.ratios.size() + 1, 1.0);
  for (std::size_t t = p.ratios.size(); t > 0; --t) {
    p.depth_weights[t - 1] = p.depth_weights[t] * p.ratios[t - 1];
  }
}

// Groups particles by leaf node. The lowest-index member of each group keeps
// the summed weight, depth weights and multiplicity; the others are zeroed
// and marked dead. The survivor's leaf value becomes the weight-averaged
// value of the group (identical values unless leaf draws are per particle).
inline void dedup_merge(ParticleBatch& batch) {
  std::map<int, std::size_t> first;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    Particle& p = batch[n];
    if (!p.alive) continue;
    auto [it, inserted] = first.emplace(p.leaf, n);
    if (inserted) continue;
    Particle& s = batch[it->second];
    const double w = s.weight + p.weight;
    if (s.leaf_value != p.leaf_value) {
      s.leaf_value = w > 0.0 ? (s.leaf_value * s.weight + p.leaf_value * p.weight) / w
                             : 0.5 * (s.leaf_value + p.leaf_value);
    }
    s.weight = w;
    for (std::size_t t = 0; t < s.depth_weights.size() && t < p.depth_weights.size();
         ++t) {
      s.depth_weights[t] += p.depth_weights[t];
    }
    s.multiplicity += p.multiplicity;
    p.weight = 0.0;
    for (double& d : p.depth_weights) d = 0.0;
    p.multiplicity = 0;
    p.alive = false;
  }
}

}  // namespace pmcts

#endif  // PMCTS_ENGINE_PARTICLES_HPP_
