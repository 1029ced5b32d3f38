#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"

namespace qlab {

/// One replayable visit inside a layer: the occurrence time being replayed,
/// the probability of replaying it, and the successor recorded at that time.
struct ArpEntry {
    std::int64_t time = 0;
    double prob = 0.0;
    int s_next = 0;
};

/// Snapshot of the replay process at one layer. For each pair (s, a) it holds
/// the replay distribution over past occurrences (entries ordered by
/// increasing time), the probability of falling through every recorded visit
/// into the absorbing state, and the layer's effective reward.
struct ArpLayer {
    std::vector<std::vector<ArpEntry>> entries; // [s * n_actions + a]
    std::vector<double> absorb_mass;
    std::vector<double> effective_reward;

    double entry_prob_sum(std::size_t pair) const {
        double total = 0.0;
        for (const ArpEntry& e : entries[pair]) total += e.prob;
        return total;
    }
};

/**
Action-replay process of an MDP along a trajectory prefix.

Layer t of the process replays, for state (s, t) and action a, one of the
recorded visits of (s, a) before time t: visiting time t' is replayed with
probability alpha_{t'} times the product of (1 - alpha_tau) over later
occurrences tau in (t', t), and with the complementary product
prod_{tau in [0, t)} (1 - alpha_tau) the process drops into an absorbing,
zero-reward state. Layer 0 is entirely absorbing.

The process grows one layer per trajectory step. With keep_history (the
default, intended for desk-scale horizons) every layer snapshot is retained
so past layers can be queried exactly; without it only the newest layer is
kept, which is enough for long-horizon limit tracking.
*/
class ActionReplayProcess {
  public:
    explicit ActionReplayProcess(const FiniteMdp& m, bool keep_history = true);

    std::int64_t horizon() const { return horizon_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    bool keeps_history() const { return keep_history_; }

    std::size_t pair_index(int s, int a) const;

    /// Newest layer.
    const ArpLayer& current_layer() const { return current_; }

    /// Layer k snapshot. Requires k == horizon() unless history is kept.
    const ArpLayer& layer(std::int64_t k) const;

    std::span<const ArpEntry> entries(int s, int a) const;
    double absorb_mass(int s, int a) const;
    double effective_reward(int s, int a) const;

    /// Occurrence times of (s, a) among the steps fed so far, with the
    /// stepsizes that were applied at those times.
    const std::vector<std::int64_t>& occurrence_times(int s, int a) const;
    const std::vector<double>& occurrence_alphas(int s, int a) const;

    double reward(int s, int a) const { return rewards_[pair_index(s, a)]; }

    friend void extend_arp(ActionReplayProcess& arp, std::int64_t t,
                           const Transition& tr, double alpha);
    friend ActionReplayProcess build_arp(const FiniteMdp& m,
                                         const TrajectoryLog& log,
                                         const StepsizeSchedule& schedule,
                                         std::int64_t horizon);

  private:
    int n_states_;
    int n_actions_;
    std::vector<double> rewards_;
    bool keep_history_;
    std::int64_t horizon_ = 0;
    ArpLayer current_;
    std::vector<ArpLayer> layers_; // [0 .. horizon], only with keep_history
    std::vector<std::vector<std::int64_t>> occ_times_;
    std::vector<std::vector<double>> occ_alphas_;
};

/**
Grows the process by one layer using the recursive dynamics: the visited
pair's existing replay probabilities and absorbing mass scale by (1 - alpha),
a new entry with probability alpha is appended, and its effective reward
moves toward r(s, a) with weight alpha. Every other pair's quantities carry
over unchanged.

`t` must equal the current horizon and `tr` must be step t of the log.
*/
void extend_arp(ActionReplayProcess& arp, std::int64_t t, const Transition& tr,
                double alpha);

/**
From-definition construction: every layer k <= horizon is computed directly
from the trajectory's occurrence times and stepsizes, evaluating the
products over (t', k) in descending time order. Quadratic in the horizon and
meant as the reference implementation; extend_arp is the production path.
*/
ActionReplayProcess build_arp(const FiniteMdp& m, const TrajectoryLog& log,
                              const StepsizeSchedule& schedule,
                              std::int64_t horizon);

/// Optimal action-values of the replay process, one table per layer.
class ArpValueLayers {
  public:
    explicit ArpValueLayers(std::vector<ActionValueTable> layers)
        : layers_(std::move(layers)) {}

    std::int64_t horizon() const {
        return static_cast<std::int64_t>(layers_.size()) - 1;
    }
    const ActionValueTable& layer(std::int64_t k) const {
        return layers_[static_cast<std::size_t>(k)];
    }

  private:
    std::vector<ActionValueTable> layers_;
};

/**
Solves the replay process exactly by a single bottom-up pass over layers:

  value(s, k, a) = sum over entries (t', p, s') of layer k at (s, a) of
                   p * ( r(s, a) + gamma * max_a' value(s', t', a') )

Layer 0 and the absorbing state contribute zero, and every entry points to a
strictly earlier layer, so no fixed-point iteration is needed. Requires a
history-keeping process.
*/
ArpValueLayers solve_arp_qstar(const FiniteMdp& m,
                               const ActionReplayProcess& arp);

/// Replay probabilities of layer `k` pooled by successor state:
/// out[(s * n_actions + a) * n_states + s'] = sum of entry probs with that
/// successor. Together with the absorbing mass each pair pools to 1.
std::vector<double> aggregate_dynamics(const ActionReplayProcess& arp,
                                       std::int64_t k);

/// Effective rewards of layer `k`, per pair.
std::vector<double> aggregate_reward(const ActionReplayProcess& arp,
                                     std::int64_t k);

/**
Probability that layer `t` at (s, a) replays a visit older than t_tilde,
paired with its proven bound exp(-sum of alphas over occurrences of (s, a)
in [t_tilde, t)). The first component never exceeds the second.
*/
std::pair<double, double> escape_mass(const ActionReplayProcess& arp, int s,
                                      int a, std::int64_t t_tilde,
                                      std::int64_t t);

} // namespace qlab
