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

// Exact tabular dynamic programming over an enumerable DecisionProcess.
//
// These solvers are the ground truth that the search statistics are measured
// against. They enumerate every state id in [0, state_count), so they are
// only meant for desk-scale models.

#ifndef PMCTS_ORACLE_HPP_
#define PMCTS_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pmcts/errors.hpp"
#include "pmcts/mdp.hpp"

namespace pmcts {

inline constexpr std::size_t kMaxEnumerableStates = std::size_t{1} << 22;

struct TabularPolicy {
  // probabilities[s][a]; rows of terminal states are empty.
  std::vector<std::vector<double>> probabilities;

  const std::vector<double>& row(StateId s) const {
    return probabilities.at(static_cast<std::size_t>(s));
  }
  std::vector<double>& row(StateId s) {
    return probabilities.at(static_cast<std::size_t>(s));
  }
  std::size_t size() const { return probabilities.size(); }
};

struct ExactValues {
  std::vector<double> v;
  std::vector<std::vector<double>> q;
  double residual = 0.0;
  long iterations = 0;
};

struct SolverOptions {
  double tol = 1e-10;
  long max_iterations = 1'000'000;
};

namespace detail {

// Pre-enumerated transitions; avoids re-deriving them on every sweep.
struct TransitionTable {
  std::vector<std::vector<Transition>> rows;
  std::vector<char> terminal;
  double continuation = 1.0;
};

template <DecisionProcess M>
TransitionTable enumerate(const M& model) {
  const std::size_t n = model.state_count();
  if (n == 0 || n > kMaxEnumerableStates) {
    throw CapabilityError("model '" + std::string(model.name()) +
                          "' is not enumerable (" + std::to_string(n) +
                          " states)");
  }
  TransitionTable table;
  table.rows.resize(n);
  table.terminal.resize(n);
  table.continuation = continuation(model);
  for (std::size_t s = 0; s < n; ++s) {
    const auto sid = static_cast<StateId>(s);
    table.terminal[s] = model.is_terminal(sid);
    if (table.terminal[s]) continue;
    const int actions = model.action_count(sid);
    table.rows[s].reserve(static_cast<std::size_t>(actions));
    for (int a = 0; a < actions; ++a) {
      Transition t = model.transition(sid, a);
      if (t.next < 0 || static_cast<std::size_t>(t.next) >= n) {
        throw RangeError("model produced out-of-range state " +
                         std::to_string(t.next));
      }
      table.rows[s].push_back(t);
    }
  }
  return table;
}

inline double backup(const TransitionTable& table, const std::vector<double>& v,
                     const Transition& t) {
  const double next = t.terminal ? 0.0 : v[static_cast<std::size_t>(t.next)];
  return t.reward + table.continuation * next;
}

inline void fill_q(const TransitionTable& table, ExactValues& out) {
  out.q.assign(table.rows.size(), {});
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    for (const Transition& t : table.rows[s]) {
      out.q[s].push_back(backup(table, out.v, t));
    }
  }
}

// Generic in-place (Gauss-Seidel) solver. `combine(s, row_of_q)` reduces a
// state's action values to its new value.
template <class Combine>
ExactValues solve(const TransitionTable& table, const SolverOptions& opts,
                  Combine combine) {
  if (!(opts.tol > 0.0)) throw ValidationError("solver tol must be positive");
  const std::size_t n = table.rows.size();
  ExactValues out;
  out.v.assign(n, 0.0);
  std::vector<double> qrow;
  auto bellman = [&](std::size_t s) {
    qrow.clear();
    for (const Transition& t : table.rows[s]) {
      qrow.push_back(backup(table, out.v, t));
    }
    return combine(s, qrow);
  };
  for (long it = 1; it <= opts.max_iterations; ++it) {
    double delta = 0.0;
    double magnitude = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (table.terminal[s]) continue;
      const double updated = bellman(s);
      delta = std::max(delta, std::abs(updated - out.v[s]));
      magnitude = std::max(magnitude, std::abs(updated));
      out.v[s] = updated;
    }
    if (!std::isfinite(magnitude) || magnitude > 1e12) {
      throw DivergenceError("value estimates diverged after " +
                            std::to_string(it) + " sweeps");
    }
    if (delta <= opts.tol) {
      double residual = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        if (table.terminal[s]) continue;
        residual = std::max(residual, std::abs(bellman(s) - out.v[s]));
      }
      if (residual <= opts.tol) {
        out.residual = residual;
        out.iterations = it;
        fill_q(table, out);
        return out;
      }
    }
  }
  throw DivergenceError("no convergence within " +
                        std::to_string(opts.max_iterations) + " sweeps");
}

}  // namespace detail

template <DecisionProcess M>
TabularPolicy uniform_policy(const M& model) {
  TabularPolicy p;
  p.probabilities.resize(model.state_count());
  for (std::size_t s = 0; s < p.size(); ++s) {
    const int actions = model.action_count(static_cast<StateId>(s));
    p.probabilities[s].assign(static_cast<std::size_t>(actions),
                              actions > 0 ? 1.0 / actions : 0.0);
  }
  return p;
}

// Throws ValidationError unless every row matches the model's legal actions,
// is non-negative and sums to one within 1e-9.
template <DecisionProcess M>
void validate_policy(const M& model, const TabularPolicy& policy) {
  if (policy.size() != model.state_count()) {
    throw ValidationError("policy has " + std::to_string(policy.size()) +
                          " rows, model has " +
                          std::to_string(model.state_count()) + " states");
  }
  for (std::size_t s = 0; s < policy.size(); ++s) {
    const auto& row = policy.probabilities[s];
    const auto actions =
        static_cast<std::size_t>(model.action_count(static_cast<StateId>(s)));
    if (row.size() != actions) {
      throw ValidationError("policy row " + std::to_string(s) +
                            " does not match legal actions");
    }
    if (actions == 0) continue;
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) {
        throw ValidationError("policy row " + std::to_string(s) +
                              " has a negative entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("policy row " + std::to_string(s) +
                            " does not sum to 1");
    }
  }
}

// V^pi and Q^pi.
template <DecisionProcess M>
ExactValues policy_evaluation(const M& model, const TabularPolicy& policy,
                              SolverOptions opts = {}) {
  auto table = detail::enumerate(model);
  validate_policy(model, policy);
  return detail::solve(table, opts, [&](std::size_t s, const auto& q) {
    const auto& row = policy.probabilities[s];
    double v = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) v += row[a] * q[a];
    return v;
  });
}

template <DecisionProcess M>
ExactValues policy_evaluation(const M& model, const TabularPolicy& policy,
                              double tol) {
  return policy_evaluation(model, policy, SolverOptions{.tol = tol});
}

// Optimal values (negamax for alternating games, which is implied by the
// sign folded into continuation()).
template <DecisionProcess M>
ExactValues value_iteration(const M& model, SolverOptions opts = {}) {
  auto table = detail::enumerate(model);
  return detail::solve(table, opts, [](std::size_t, const auto& q) {
    return *std::max_element(q.begin(), q.end());
  });
}

// Deterministic argmax policy; ties go to the lowest action index.
inline TabularPolicy greedy_policy(const ExactValues& values) {
  TabularPolicy p;
  p.probabilities.resize(values.q.size());
  for (std::size_t s = 0; s < values.q.size(); ++s) {
    const auto& q = values.q[s];
    p.probabilities[s].assign(q.size(), 0.0);
    if (q.empty()) continue;
    auto best = std::max_element(q.begin(), q.end()) - q.begin();
    p.probabilities[s][static_cast<std::size_t>(best)] = 1.0;
  }
  return p;
}

// pi(a|s) proportional to prior(a|s) * exp(beta(s) * q(s, a)), computed with
// max subtraction. Rows of terminal states stay empty.
inline TabularPolicy improvement_operator_exact(const TabularPolicy& prior,
                                                const ExactValues& q,
                                                std::span<const double> beta) {
  if (prior.size() != q.q.size() || beta.size() != q.q.size()) {
    throw ValidationError("improvement_operator_exact: size mismatch");
  }
  TabularPolicy out;
  out.probabilities.resize(prior.size());
  for (std::size_t s = 0; s < prior.size(); ++s) {
    const auto& p = prior.probabilities[s];
    const auto& qs = q.q[s];
    if (p.size() != qs.size()) {
      throw ValidationError("improvement_operator_exact: row " +
                            std::to_string(s) + " size mismatch");
    }
    if (p.empty()) continue;
    std::vector<double> logits(p.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p.size(); ++a) {
      logits[a] = p[a] > 0.0 ? std::log(p[a]) + beta[s] * qs[a]
                             : -std::numeric_limits<double>::infinity();
      top = std::max(top, logits[a]);
    }
    if (!std::isfinite(top)) {
      throw ValidationError("improvement_operator_exact: prior row " +
                            std::to_string(s) + " has no mass");
    }
    double sum = 0.0;
    auto& row = out.probabilities[s];
    row.resize(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) {
      row[a] = std::exp(logits[a] - top);
      sum += row[a];
    }
    for (double& x : row) x /= sum;
  }
  return out;
}

// Copy of `base` whose row at `state` is replaced.
inline TabularPolicy with_row(TabularPolicy base, StateId state,
                              std::vector<double> row) {
  base.row(state) = std::move(row);
  return base;
}

struct ImprovementReport {
  double prior_value = 0.0;
  double improved_value = 0.0;
  double difference = 0.0;
  bool pass = false;
};

// Compares V^improved and V^prior at the model's initial state.
template <DecisionProcess M>
ImprovementReport verify_policy_improvement(const M& model,
                                            const TabularPolicy& prior,
                                            const TabularPolicy& improved,
                                            double tol) {
  const auto s1 = static_cast<std::size_t>(model.initial_state());
  ImprovementReport r;
  r.prior_value = policy_evaluation(model, prior).v[s1];
  r.improved_value = policy_evaluation(model, improved).v[s1];
  r.difference = r.improved_value - r.prior_value;
  r.pass = r.difference >= -tol;
  return r;
}

// Value of the mixture that draws one of `policies` uniformly at the start
// and follows it to termination. This is the mean of the members' values,
// which is not the value of the per-step averaged policy.
template <DecisionProcess M>
double mixture_policy_value(const M& model,
                            std::span<const TabularPolicy> policies,
                            StateId at_state) {
  if (policies.empty()) {
    throw ValidationError("mixture_policy_value: empty policy list");
  }
  double sum = 0.0;
  for (const auto& p : policies) {
    sum += policy_evaluation(model, p).v.at(static_cast<std::size_t>(at_state));
  }
  return sum / static_cast<double>(policies.size());
}

}  // namespace pmcts

#endif  // PMCTS_ORACLE_HPP_
