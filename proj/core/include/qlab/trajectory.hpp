#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/rng.hpp"

namespace qlab {

/// One step of the trajectory process: the visited pair and the sampled
/// successor state.
struct Transition {
    int s = 0;
    int a = 0;
    int s_next = 0;
};

/**
Finite prefix of a trajectory, with occurrence-time bookkeeping: for every
pair (s, a) the log maintains the ordered list of times t at which
(S_t, A_t) = (s, a), kept consistent with the step list as steps are appended.
*/
class TrajectoryLog {
  public:
    TrajectoryLog(int n_states, int n_actions);

    void append(const Transition& tr);

    std::int64_t size() const { return static_cast<std::int64_t>(steps_.size()); }
    const Transition& step(std::int64_t t) const { return steps_[t]; }
    const std::vector<Transition>& steps() const { return steps_; }

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    /// All occurrence times of (s, a), in increasing order.
    const std::vector<std::int64_t>& occurrences(int s, int a) const;

    /// Occurrence times of (s, a) in the half-open window [0, t).
    std::span<const std::int64_t> occurrences_before(int s, int a,
                                                     std::int64_t t) const;

    std::int64_t visit_count(int s, int a) const {
        return static_cast<std::int64_t>(occurrences(s, a).size());
    }

  private:
    std::size_t pair_index(int s, int a) const;

    int n_states_;
    int n_actions_;
    std::vector<Transition> steps_;
    std::vector<std::vector<std::int64_t>> occurrences_;
};

/// State-action visiting strategy. The trajectory law only constrains the
/// successor draw, so strategies are free to teleport between steps.
struct SamplerKind {
    enum class Kind { round_robin, uniform_iid, follow_with_restart };

    Kind kind = Kind::round_robin;
    double epsilon = 1.0;      // probability of a uniform action (vs greedy)
    double restart_prob = 0.05; // probability of teleporting to a uniform state

    static SamplerKind round_robin() { return {Kind::round_robin, 1.0, 0.0}; }
    static SamplerKind uniform_iid() { return {Kind::uniform_iid, 1.0, 0.0}; }
    static SamplerKind follow_with_restart(double epsilon = 1.0,
                                           double restart_prob = 0.05);
};

/// Inverse CDF of the kernel row P(.|s, a) over ascending successor index:
/// the smallest s' with u < P(0|s,a) + ... + P(s'|s,a).
int inverse_cdf_sample(const FiniteMdp& m, int s, int a, double u);

/// Draws S' from the kernel row P(.|s, a) by inverse CDF over ascending
/// successor index, consuming exactly one uniform variate.
int next_state_sample(const FiniteMdp& m, int s, int a, RngStream& rng);

/**
Generates a log of exactly `horizon` transitions under the given strategy.

 - round_robin: deterministic lexicographic sweep over (s, a) with period
   n_states * n_actions; only the successor draw consumes randomness.
 - uniform_iid: each step draws the pair uniformly over S x A (one bounded
   draw), then the successor.
 - follow_with_restart: step 0 starts at a uniform state; afterwards the
   state follows the previous successor except that with probability
   restart_prob it teleports to a uniform state. The action is uniform with
   probability epsilon, otherwise greedy for `greedy_ref`; when greedy_ref is
   null the action is uniform and no epsilon variate is consumed.

Variates are consumed in the order: restart test, restart target, epsilon
test, action, successor. Fixed order keeps traces bit-reproducible per seed.
*/
TrajectoryLog generate(const FiniteMdp& m, const SamplerKind& kind,
                       std::int64_t horizon, RngStream& rng,
                       const ActionValueTable* greedy_ref = nullptr);

} // namespace qlab
