#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlab/arp.hpp"
#include "qlab/mdp.hpp"
#include "qlab/qlearning.hpp"
#include "qlab/rng.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"

namespace qlab {

/// Result of one executable check. worst_violation is a signed margin
/// (left-hand side minus allowed right-hand side); the check passes exactly
/// when it does not exceed the stated tolerance. Exact identities and
/// inequalities are labeled "exact"; frozen-threshold limit and convergence
/// checks are labeled "statistical", since a statistical miss is a tuning
/// question while an exact miss is a bug.
struct CheckOutcome {
    std::string name;
    std::string category = "exact";
    bool passed = false;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    std::string witness;
};

/// Builds an outcome from a margin, keeping passed consistent with the
/// tolerance by construction.
CheckOutcome make_outcome(std::string name, double worst_violation,
                          double tolerance, std::string witness,
                          std::string category = "exact");

/// The four summands bounding |Q_t(s,a) - q*(s,a)| for a cutoff t_tilde <= t:
/// a contracted window error, the effective-reward gap, a pooled-dynamics gap
/// scaled by the value bound, and the escape residue.
struct BoundBreakdown {
    double contraction_term = 0.0;
    double reward_gap_term = 0.0;
    double dynamics_gap_term = 0.0;
    double escape_term = 0.0;
    double lhs = 0.0;

    double total() const {
        return contraction_term + reward_gap_term + dynamics_gap_term +
               escape_term;
    }
};

/// Sup-norm contraction of the Bellman operator on random table pairs:
/// d(Tq1, Tq2) <= gamma d(q1, q2) within 1e-12.
CheckOutcome check_contraction(const FiniteMdp& m, int trials, RngStream& rng);

/// ||q*||_inf <= ||r||_inf / (1 - gamma) within 1e-9, with q* from value
/// iteration at tolerance 1e-10.
CheckOutcome check_value_bound(const FiniteMdp& m);

/// Replay-process layer values against the Q-learning iterates on the same
/// log and schedule: the two independently computed tables must agree to
/// 1e-9 at every (s, a, t <= horizon).
CheckOutcome check_replay_value_identity(const FiniteMdp& m,
                                         const TrajectoryLog& log,
                                         const StepsizeSchedule& schedule,
                                         std::int64_t horizon);

/// Incremental recursion against the from-definition construction, every
/// layer and entry, within 1e-12.
CheckOutcome check_replay_recursion_equivalence(const FiniteMdp& m,
                                                const TrajectoryLog& log,
                                                const StepsizeSchedule& schedule,
                                                std::int64_t horizon);

/// absorb_mass + sum of entry probabilities = 1 within 1e-12 at every layer.
CheckOutcome check_replay_mass_conservation(const ActionReplayProcess& arp);

struct LimitGapPoint {
    std::int64_t t = 0;
    double r_gap = 0.0; // max_{s,a} |r_hat_t(s,a) - r(s,a)|
    double p_gap = 0.0; // max_{s,a,s'} |P_hat_t(s'|s,a) - P(s'|s,a)|
};

/// Effective-reward and pooled-dynamics gaps against the true MDP at the
/// requested checkpoint times (ascending). Tracks the newest layer only, so
/// memory stays flat over long horizons.
std::vector<LimitGapPoint> check_replay_limits(
    const FiniteMdp& m, const TrajectoryLog& log,
    const StepsizeSchedule& schedule,
    const std::vector<std::int64_t>& checkpoints);

/// Random (s, a, t_tilde <= t) probes of the escape mass against its
/// exponential bound, within 1e-9.
CheckOutcome check_escape_bound(const FiniteMdp& m, const TrajectoryLog& log,
                                const StepsizeSchedule& schedule, int samples,
                                RngStream& rng);

/// Random probes of the one-step error decomposition; each breakdown's
/// summands must cover |Q_t(s,a) - q*(s,a)|.
std::vector<BoundBreakdown> check_error_decomposition(
    const FiniteMdp& m, const TrajectoryLog& log,
    const StepsizeSchedule& schedule, const ActionValueTable& q_star,
    int samples, RngStream& rng);

/// Folds decomposition probes into a single outcome at tolerance 1e-9.
CheckOutcome outcome_from_breakdowns(const std::vector<BoundBreakdown>& probes);

/// Runs Q-learning once per seed and requires the final sup error to stay
/// below `threshold` for every seed, with the error trace at geometrically
/// spaced times staying below 2 * threshold from its first crossing onward.
CheckOutcome check_convergence(const FiniteMdp& m, const SamplerKind& sampler,
                               const StepsizeSchedule& schedule,
                               std::int64_t horizon,
                               const std::vector<std::uint64_t>& seeds,
                               double threshold);

/// 1, 2, 4, ... up to the horizon, with the horizon itself appended.
std::vector<std::int64_t> geometric_times(std::int64_t horizon);

/// One randomized instance of the desk-scale family: a small validated MDP
/// plus a sampler, schedule, horizon, and trajectory seed.
struct EnsembleInstance {
    FiniteMdp mdp;
    SamplerKind sampler;
    StepsizeSchedule schedule;
    std::int64_t horizon = 0;
    std::uint64_t trajectory_seed = 0;
    std::string label;

    TrajectoryLog make_log() const;
};

/// Deterministic family of mixed instances: |S| <= 5, |A| <= 3, discounts
/// cycling through {0, 0.5, 0.9}, horizons up to 500, all three samplers and
/// several schedules.
std::vector<EnsembleInstance> default_ensemble(std::uint64_t master_seed,
                                               int count);

struct VerifyConfig;

/// The frozen long-horizon instance used by the limits suite: a dense 2x2
/// MDP visited round-robin under harmonic per-visit steps.
EnsembleInstance make_limits_instance(const VerifyConfig& config);

/// Frozen configuration for the verification suites. Thresholds are fixed
/// here and in config files, never recalibrated inside a run.
struct VerifyConfig {
    std::uint64_t master_seed = 20240521;
    int ensemble_size = 20;
    int probes_per_check = 1000;

    std::int64_t limits_horizon = 20000;
    double limits_r_gap_rel = 0.1; // relative to ||r||_inf
    double limits_p_gap = 0.1;
    double limits_backslide_slack = 0.02;

    std::int64_t convergence_horizon = 1000000;
    int convergence_n_seeds = 5;
    double convergence_threshold = 0.05;
};

enum class Suite { theorem3, limits, bounds, convergence, all };

/// Parses one of: theorem3 | limits | bounds | convergence | all.
Suite parse_suite(const std::string& name);
std::string suite_name(Suite suite);

struct SuiteReport {
    std::string suite;
    std::vector<CheckOutcome> checks;
    std::vector<LimitGapPoint> limit_trace;

    bool all_passed() const;
};

SuiteReport run_suite(Suite suite, const VerifyConfig& config);

} // namespace qlab
