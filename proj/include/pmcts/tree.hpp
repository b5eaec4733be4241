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

#ifndef PMCTS_TREE_HPP_
#define PMCTS_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmcts/errors.hpp"
#include "pmcts/evaluators.hpp"
#include "pmcts/mdp.hpp"

namespace pmcts {

inline constexpr int kNoNode = -1;

struct Node {
  StateId state = 0;
  int parent = kNoNode;
  ActionId action = -1;  // action taken at the parent to reach this node
  int depth = 0;
  bool terminal = false;
  double reward = 0.0;      // reward on the edge parent -> node
  double evaluation = 0.0;  // v_phi(s) at creation; 0 for terminals
  double value = 0.0;
  double mass = 0.0;
  std::vector<double> prior;
  std::vector<int> children;  // kNoNode for unvisited actions
};

// Arena-allocated tree. Storage is reserved up front and never grows past
// capacity, so node indices (and references obtained between insertions)
// stay valid for the lifetime of a search.
//
// q(s, a) is not stored: it is always r(child) + continuation * v(child).
class SearchTree {
 public:
  SearchTree(std::size_t capacity, double continuation)
      : capacity_(capacity), continuation_(continuation) {
    if (capacity_ < 1) throw ValidationError("tree capacity must be >= 1");
    nodes_.reserve(capacity_);
  }

  int add_root(StateId state, std::vector<double> prior, double evaluation,
               bool terminal) {
    if (!nodes_.empty()) throw InternalError("tree already has a root");
    Node n;
    n.state = state;
    n.terminal = terminal;
    n.evaluation = terminal ? 0.0 : evaluation;
    n.value = n.evaluation;
    n.mass = 1.0;
    n.children.assign(prior.size(), kNoNode);
    n.prior = std::move(prior);
    nodes_.push_back(std::move(n));
    return 0;
  }

  // Links a new node under (parent, action). New nodes start with mass 1 and
  // value equal to their evaluation (zero for terminals).
  int add_child(int parent, ActionId action, StateId state, double reward,
                bool terminal, std::vector<double> prior, double evaluation) {
    if (nodes_.size() >= capacity_) {
      throw InternalError("tree capacity " + std::to_string(capacity_) +
                          " exceeded");
    }
    Node& p = nodes_.at(static_cast<std::size_t>(parent));
    if (action < 0 || static_cast<std::size_t>(action) >= p.children.size()) {
      throw RangeError("add_child: action out of range");
    }
    if (p.children[static_cast<std::size_t>(action)] != kNoNode) {
      throw InternalError("add_child: edge already expanded");
    }
    const int index = static_cast<int>(nodes_.size());
    p.children[static_cast<std::size_t>(action)] = index;
    const int depth = p.depth + 1;
    Node n;
    n.state = state;
    n.parent = parent;
    n.action = action;
    n.depth = depth;
    n.terminal = terminal;
    n.reward = reward;
    n.evaluation = terminal ? 0.0 : evaluation;
    n.value = n.evaluation;
    n.mass = 1.0;
    if (terminal) prior.clear();
    n.children.assign(prior.size(), kNoNode);
    n.prior = std::move(prior);
    nodes_.push_back(std::move(n));
    return index;
  }

  const Node& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  Node& node(int i) { return nodes_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(nodes_.size()); }
  std::size_t capacity() const { return capacity_; }
  double continuation() const { return continuation_; }
  int root() const { return 0; }

  int action_count(int i) const {
    return static_cast<int>(node(i).children.size());
  }
  int child(int i, ActionId a) const {
    return node(i).children.at(static_cast<std::size_t>(a));
  }
  bool visited(int i, ActionId a) const { return child(i, a) != kNoNode; }

  double child_mass(int i, ActionId a) const {
    const int c = child(i, a);
    return c == kNoNode ? 0.0 : node(c).mass;
  }

  std::vector<double> child_masses(int i) const {
    std::vector<double> m(node(i).children.size());
    for (std::size_t a = 0; a < m.size(); ++a) {
      m[a] = child_mass(i, static_cast<ActionId>(a));
    }
    return m;
  }

  double max_child_mass(int i) const {
    double m = 0.0;
    for (int c : node(i).children) {
      if (c != kNoNode) m = std::max(m, node(c).mass);
    }
    return m;
  }

  // Value of a visited action from the perspective of the mover at node i.
  double q(int i, ActionId a) const {
    const int c = child(i, a);
    if (c == kNoNode) {
      throw RangeError("q requested for unvisited action " + std::to_string(a));
    }
    return node(c).reward + continuation_ * node(c).value;
  }

  // True if every child link points back to its parent and depths agree.
  bool links_consistent() const {
    for (int i = 0; i < size(); ++i) {
      const Node& n = node(i);
      for (std::size_t a = 0; a < n.children.size(); ++a) {
        const int c = n.children[a];
        if (c == kNoNode) continue;
        if (c <= i || c >= size()) return false;
        const Node& ch = node(c);
        if (ch.parent != i || ch.action != static_cast<ActionId>(a) ||
            ch.depth != n.depth + 1) {
          return false;
        }
      }
    }
    return true;
  }

  // One line per node: index parent action mass value reward.
  std::string dump() const {
    std::string out;
    char line[160];
    for (int i = 0; i < size(); ++i) {
      const Node& n = node(i);
      std::snprintf(line, sizeof(line), "%d %d %d %.17g %.17g %.17g\n", i,
                    n.parent, n.action, n.mass, n.value, n.reward);
      out += line;
    }
    return out;
  }

 private:
  std::size_t capacity_;
  double continuation_;
  std::vector<Node> nodes_;
};

template <DecisionProcess M, Evaluator E>
SearchTree init_tree(const M& model, const E& evaluator, StateId root_state,
                     std::size_t capacity, std::uint64_t draw_key = 0) {
  if (capacity < 1) throw ValidationError("tree capacity must be >= 1");
  SearchTree tree(capacity, continuation(model));
  if (model.is_terminal(root_state)) {
    tree.add_root(root_state, {}, 0.0, true);
    return tree;
  }
  Evaluation e = evaluator.evaluate(root_state, draw_key);
  tree.add_root(root_state, std::move(e.prior), e.value, false);
  return tree;
}

// Q values with unvisited actions filled by
//   v_mix = (v_phi + (sum_b M(b) / sum_{visited} pi(b)) *
//            sum_{visited} pi(b) q(b)) / (1 + sum_b M(b)).
inline std::vector<double> completed_q(std::span<const double> prior,
                                       std::span<const double> q,
                                       std::span<const double> visits,
                                       double evaluator_value) {
  double total = 0.0, pi_visited = 0.0, weighted = 0.0;
  for (std::size_t a = 0; a < prior.size(); ++a) {
    if (visits[a] > 0.0) {
      total += visits[a];
      pi_visited += prior[a];
      weighted += prior[a] * q[a];
    }
  }
  double v_mix = evaluator_value;
  if (total > 0.0 && pi_visited > 0.0) {
    v_mix = (evaluator_value + total / pi_visited * weighted) / (1.0 + total);
  }
  std::vector<double> out(prior.size());
  for (std::size_t a = 0; a < prior.size(); ++a) {
    out[a] = visits[a] > 0.0 ? q[a] : v_mix;
  }
  return out;
}

inline std::vector<double> completed_q(const SearchTree& tree, int node,
                                       double evaluator_value) {
  const Node& n = tree.node(node);
  const std::size_t k = n.children.size();
  std::vector<double> q(k, 0.0), visits(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    if (n.children[a] == kNoNode) continue;
    q[a] = tree.q(node, static_cast<ActionId>(a));
    visits[a] = tree.node(n.children[a]).mass;
  }
  return completed_q(n.prior, q, visits, evaluator_value);
}

inline std::vector<double> completed_q(const SearchTree& tree, int node) {
  return completed_q(tree, node, tree.node(node).evaluation);
}

// Weighted running mean in the form v + (nu - v) n / (m + n).
inline std::pair<double, double> stable_weighted_update(double old_value,
                                                        double old_mass,
                                                        double new_estimate,
                                                        double new_mass) {
  if (!(old_mass >= 0.0) || !(new_mass >= 0.0)) {
    throw ValidationError("stable_weighted_update: negative mass");
  }
  const double mass = old_mass + new_mass;
  if (mass == 0.0) {
    throw ValidationError("stable_weighted_update: both masses are zero");
  }
  if (new_mass == 0.0) return {old_value, old_mass};
  if (old_mass == 0.0) return {new_estimate, new_mass};
  return {old_value + (new_estimate - old_value) * new_mass / mass, mass};
}

}  // namespace pmcts

#endif  // PMCTS_TREE_HPP_
