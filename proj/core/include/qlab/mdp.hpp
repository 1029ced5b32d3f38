#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/rng.hpp"

namespace qlab {

/**
Real-valued table over state-action pairs. Stored row-major by state, so the
entry for (s, a) sits at index s * n_actions + a.
*/
class ActionValueTable {
  public:
    ActionValueTable() = default;
    ActionValueTable(int n_states, int n_actions, double init = 0.0)
        : n_states_(n_states), n_actions_(n_actions),
          values_(static_cast<std::size_t>(n_states) * n_actions, init) {}

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    double operator()(int s, int a) const {
        return values_[static_cast<std::size_t>(s) * n_actions_ + a];
    }
    double& operator()(int s, int a) {
        return values_[static_cast<std::size_t>(s) * n_actions_ + a];
    }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

    bool same_shape(const ActionValueTable& other) const {
        return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
    }

    void fill(double v) { values_.assign(values_.size(), v); }

  private:
    int n_states_ = 0;
    int n_actions_ = 0;
    std::vector<double> values_;
};

/**
Finite discounted MDP: states 0..n_states-1, actions 0..n_actions-1, a
transition kernel, bounded rewards per (s, a), and a discount in [0, 1).

transitions is laid out as [(s * n_actions + a) * n_states + s'], rewards as
[s * n_actions + a]. Rows of the kernel must each sum to 1 within 1e-9; see
validate_mdp.
*/
struct FiniteMdp {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.0;
    std::vector<double> rewards;
    std::vector<double> transitions;

    static FiniteMdp zeros(int n_states, int n_actions, double gamma);

    std::size_t pair_index(int s, int a) const {
        return static_cast<std::size_t>(s) * n_actions + a;
    }
    std::size_t n_pairs() const {
        return static_cast<std::size_t>(n_states) * n_actions;
    }

    double reward(int s, int a) const { return rewards[pair_index(s, a)]; }
    double& reward(int s, int a) { return rewards[pair_index(s, a)]; }

    double transition(int s, int a, int s_next) const {
        return transitions[pair_index(s, a) * n_states + s_next];
    }
    double& transition(int s, int a, int s_next) {
        return transitions[pair_index(s, a) * n_states + s_next];
    }

    /// Max absolute reward over all pairs.
    double reward_sup_norm() const;
};

/// Absolute tolerance on kernel row sums. Rows further from 1 are rejected,
/// never renormalized.
inline constexpr double kRowSumTolerance = 1e-9;

/// Checks every structural invariant of the MDP and returns it unchanged.
/// Throws std::invalid_argument naming the first offending entry otherwise.
const FiniteMdp& validate_mdp(const FiniteMdp& m);

/**
One application of the Bellman optimality operator:

    (T q)(s, a) = r(s, a) + gamma * sum_{s'} P(s'|s, a) * max_{a'} q(s', a')

The sum over s' runs in ascending index order. Pure: q is not modified and
equal inputs give bitwise-equal outputs.
*/
ActionValueTable bellman_apply(const FiniteMdp& m, const ActionValueTable& q);

/// Sup-norm distance max_{s,a} |q1(s,a) - q2(s,a)|. Throws on shape mismatch.
double sup_distance(const ActionValueTable& q1, const ActionValueTable& q2);

/// ||r||_inf / (1 - gamma): a bound on ||q*||_inf that every solution and
/// every replay-process value layer must respect.
double theoretical_value_bound(const FiniteMdp& m);

/// Per-state argmax over actions, ties broken toward the lowest action index.
std::vector<int> greedy_policy(const ActionValueTable& q);

struct SolveReport {
    ActionValueTable q_star;
    long iterations = 0;
    /// Sup-norm of (T q - q) measured at exit.
    double residual = 0.0;
    /// Certified bound on ||q_star - q*||_inf: gamma * residual / (1 - gamma)
    /// for gamma > 0, else the residual itself.
    double error_bound = 0.0;
};

/// Thrown when value iteration hits max_iters before certifying tol. Carries
/// the last observed residual.
class MaxIterationsError : public std::runtime_error {
  public:
    MaxIterationsError(long iterations, double residual);
    double residual() const { return residual_; }

  private:
    double residual_;
};

/**
Fixed-point iteration q <- T q from q0 (all zeros unless an explicit start is
given) until the a-posteriori contraction certificate guarantees
||q - q*||_inf <= tol: the loop stops once sup_distance(T q, q) falls below
tol * (1 - gamma) / gamma (below tol directly when gamma == 0).

Throws MaxIterationsError if the certificate is not achieved in max_iters
applications.
*/
SolveReport value_iteration(const FiniteMdp& m, double tol,
                            long max_iters = 1000000,
                            const ActionValueTable* start = nullptr);

/// Parameters for random MDP generation. Each kernel row draws a support
/// (every successor kept with probability `sparsity`, at least one forced),
/// fills it with positive weights, and normalizes. Rewards are uniform in
/// [reward_min, reward_max).
struct RandomMdpParams {
    int n_states = 2;
    int n_actions = 2;
    double gamma = 0.5;
    double sparsity = 1.0;
    double reward_min = 0.0;
    double reward_max = 1.0;
};

/// Draws a validated random MDP. Deterministic given the stream state.
FiniteMdp random_mdp(const RandomMdpParams& params, RngStream& rng);

} // namespace qlab
