#include "qlab/qlearning.hpp"

#include <algorithm>
#include <stdexcept>

namespace qlab {

namespace {

double updated_value(const FiniteMdp& m, const ActionValueTable& q,
                     const Transition& tr, double alpha) {
    double best_next = q(tr.s_next, 0);
    for (int ap = 1; ap < m.n_actions; ++ap)
        best_next = std::max(best_next, q(tr.s_next, ap));
    const double target = m.reward(tr.s, tr.a) + m.gamma * best_next;
    return (1.0 - alpha) * q(tr.s, tr.a) + alpha * target;
}

void check_indices(const FiniteMdp& m, const Transition& tr) {
    if (tr.s < 0 || tr.s >= m.n_states || tr.a < 0 || tr.a >= m.n_actions ||
        tr.s_next < 0 || tr.s_next >= m.n_states)
        throw std::out_of_range("transition indices out of range for the MDP");
}

} // namespace

StepsizeDiagnostics
stepsize_diagnostics(const TrajectoryLog& log, const StepsizeSchedule& schedule,
                     const StepsizeDiagnosticsThresholds& thresholds) {
    const std::size_t n_pairs =
        static_cast<std::size_t>(log.n_states()) * log.n_actions();
    StepsizeDiagnostics diag;
    diag.per_pair.assign(n_pairs, {});
    for (std::int64_t t = 0; t < log.size(); ++t) {
        const Transition& tr = log.step(t);
        const std::size_t pair =
            static_cast<std::size_t>(tr.s) * log.n_actions() + tr.a;
        PairStepsizeSums& sums = diag.per_pair[pair];
        const double alpha = schedule.at(t, sums.visits);
        sums.sum_alpha += alpha;
        sums.sum_alpha_sq += alpha * alpha;
        ++sums.visits;
    }
    diag.low_sum_flag.resize(n_pairs);
    diag.high_sum_sq_flag.resize(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        diag.low_sum_flag[i] =
            diag.per_pair[i].sum_alpha < thresholds.min_sum_alpha;
        diag.high_sum_sq_flag[i] =
            diag.per_pair[i].sum_alpha_sq > thresholds.max_sum_alpha_sq;
    }
    return diag;
}

ActionValueTable q_step(const FiniteMdp& m, const ActionValueTable& q,
                        const Transition& tr, double alpha) {
    if (q.n_states() != m.n_states || q.n_actions() != m.n_actions)
        throw std::invalid_argument("table shape does not match the MDP");
    check_indices(m, tr);
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("stepsize must lie in [0, 1]");

    ActionValueTable out = q;
    out(tr.s, tr.a) = updated_value(m, q, tr, alpha);
    return out;
}

QRunReport run_qlearning(const FiniteMdp& m, const TrajectoryLog& log,
                         const StepsizeSchedule& schedule,
                         const QLearnOptions& options) {
    if (log.n_states() != m.n_states || log.n_actions() != m.n_actions)
        throw std::invalid_argument("log was generated against a different MDP");
    if (options.checkpoint_every < 0)
        throw std::invalid_argument("checkpoint cadence must be nonnegative");
    if (options.q_star && (options.q_star->n_states() != m.n_states ||
                           options.q_star->n_actions() != m.n_actions))
        throw std::invalid_argument("reference table shape mismatch");

    QRunReport report;
    report.rm_partial_sums.assign(m.n_pairs(), {});

    ActionValueTable q(m.n_states, m.n_actions, 0.0);

    auto explicit_it = options.checkpoint_times.begin();
    const std::int64_t horizon = log.size();
    for (std::int64_t t = 0; t < horizon; ++t) {
        const Transition& tr = log.step(t);
        check_indices(m, tr);
        PairStepsizeSums& sums = report.rm_partial_sums[m.pair_index(tr.s, tr.a)];
        const double alpha = schedule.at(t, sums.visits);
        sums.sum_alpha += alpha;
        sums.sum_alpha_sq += alpha * alpha;
        ++sums.visits;

        // Same arithmetic as q_step, updating the single visited entry.
        q(tr.s, tr.a) = updated_value(m, q, tr, alpha);

        const std::int64_t now = t + 1;
        bool checkpoint = options.checkpoint_every > 0 &&
                          now % options.checkpoint_every == 0;
        while (explicit_it != options.checkpoint_times.end() &&
               *explicit_it <= now) {
            if (*explicit_it == now) checkpoint = true;
            ++explicit_it;
        }
        if (checkpoint) {
            QCheckpoint cp;
            cp.t = now;
            if (options.snapshot_tables) cp.table = q;
            if (options.q_star) cp.sup_error = sup_distance(q, *options.q_star);
            report.checkpoints.push_back(std::move(cp));
        }
    }

    if (options.q_star)
        report.final_sup_error = sup_distance(q, *options.q_star);
    report.final_table = std::move(q);
    return report;
}

QRunReport run_qlearning(const FiniteMdp& m, const TrajectoryLog& log,
                         const StepsizeSchedule& schedule,
                         const ActionValueTable* q_star,
                         std::int64_t checkpoint_every) {
    QLearnOptions options;
    options.q_star = q_star;
    options.checkpoint_every = checkpoint_every;
    return run_qlearning(m, log, schedule, options);
}

std::vector<double> rm_average(std::span<const double> xi,
                               std::span<const double> beta, double x0) {
    if (xi.size() != beta.size())
        throw std::invalid_argument("rm_average: sequence lengths differ");
    std::vector<double> trace;
    trace.reserve(xi.size() + 1);
    trace.push_back(x0);
    double x = x0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double b = beta[k];
        if (!(b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("rm_average: weight outside [0, 1]");
        x = (1.0 - b) * x + b * xi[k];
        trace.push_back(x);
    }
    return trace;
}

} // namespace qlab
