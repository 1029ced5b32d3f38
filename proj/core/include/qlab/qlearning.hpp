#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"

namespace qlab {

/// Partial sums of a stepsize sequence along one pair's occurrence times:
/// (sum of alpha, sum of alpha^2).
struct PairStepsizeSums {
    double sum_alpha = 0.0;
    double sum_alpha_sq = 0.0;
    std::int64_t visits = 0;
};

/// Flag thresholds for stepsize diagnostics: a pair is flagged when its
/// alpha-sum has not yet reached `min_sum_alpha` (too little divergence
/// progress) or its squared sum exceeds `max_sum_alpha_sq` (summability in
/// doubt).
struct StepsizeDiagnosticsThresholds {
    double min_sum_alpha = 1.0;
    double max_sum_alpha_sq = 10.0;
};

struct StepsizeDiagnostics {
    std::vector<PairStepsizeSums> per_pair; // indexed s * n_actions + a
    std::vector<bool> low_sum_flag;
    std::vector<bool> high_sum_sq_flag;
};

/// Exact partial sums (sum alpha, sum alpha^2) per pair over the finite log,
/// recomputed from scratch by walking the log in time order.
StepsizeDiagnostics
stepsize_diagnostics(const TrajectoryLog& log, const StepsizeSchedule& schedule,
                     const StepsizeDiagnosticsThresholds& thresholds = {});

/**
One Q-learning update at the logged pair:

    Q'(s, a) = (1 - alpha) Q(s, a) + alpha (r(s, a) + gamma max_a' Q(s', a'))

Every other entry of the returned table is bitwise-identical to the input.
*/
ActionValueTable q_step(const FiniteMdp& m, const ActionValueTable& q,
                        const Transition& tr, double alpha);

struct QCheckpoint {
    std::int64_t t = 0;
    std::optional<ActionValueTable> table;
    std::optional<double> sup_error;
};

struct QRunReport {
    std::vector<QCheckpoint> checkpoints;
    ActionValueTable final_table;
    std::optional<double> final_sup_error;
    std::vector<PairStepsizeSums> rm_partial_sums;
};

struct QLearnOptions {
    /// Reference table for sup_error at checkpoints (typically a tight
    /// value-iteration solution). Null disables error tracking.
    const ActionValueTable* q_star = nullptr;
    /// Snapshot cadence: checkpoints at t = k * checkpoint_every for k >= 1.
    /// Zero disables cadence checkpoints.
    std::int64_t checkpoint_every = 0;
    /// Additional explicit checkpoint times (ascending, in [1, horizon]).
    std::vector<std::int64_t> checkpoint_times;
    /// Store full table copies at checkpoints. Disable for long runs where
    /// only the error trace matters.
    bool snapshot_tables = true;
};

/// Runs the iterate recursion from the all-zeros table through the whole log,
/// applying the schedule's stepsizes in time order.
QRunReport run_qlearning(const FiniteMdp& m, const TrajectoryLog& log,
                         const StepsizeSchedule& schedule,
                         const QLearnOptions& options);

/// Convenience overload matching the common call shape.
QRunReport run_qlearning(const FiniteMdp& m, const TrajectoryLog& log,
                         const StepsizeSchedule& schedule,
                         const ActionValueTable* q_star,
                         std::int64_t checkpoint_every);

/**
The scalar averaging recursion X_{k+1} = (1 - beta_k) X_k + beta_k xi_k,
returned as the full trace X_0 .. X_T. Both limit quantities of the replay
process (effective rewards and pooled dynamics) follow this recursion along
a pair's occurrence subsequence, so it is exposed generically.
*/
std::vector<double> rm_average(std::span<const double> xi,
                               std::span<const double> beta, double x0);

} // namespace qlab
