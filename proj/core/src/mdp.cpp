#include "qlab/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace qlab {

namespace {

std::string pair_label(int s, int a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

} // namespace

FiniteMdp FiniteMdp::zeros(int n_states, int n_actions, double gamma) {
    FiniteMdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    m.rewards.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    m.transitions.assign(
        static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
    return m;
}

double FiniteMdp::reward_sup_norm() const {
    double sup = 0.0;
    for (double r : rewards) sup = std::max(sup, std::abs(r));
    return sup;
}

const FiniteMdp& validate_mdp(const FiniteMdp& m) {
    if (m.n_states < 1)
        throw std::invalid_argument("MDP must have at least one state");
    if (m.n_actions < 1)
        throw std::invalid_argument("MDP must have at least one action");
    if (!(m.gamma >= 0.0 && m.gamma < 1.0))
        throw std::invalid_argument("discount must lie in [0, 1), got " +
                                    std::to_string(m.gamma));
    if (m.rewards.size() != m.n_pairs())
        throw std::invalid_argument("reward table has wrong size");
    if (m.transitions.size() != m.n_pairs() * m.n_states)
        throw std::invalid_argument("transition kernel has wrong size");

    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const double r = m.reward(s, a);
            if (!std::isfinite(r))
                throw std::invalid_argument("non-finite reward at " +
                                            pair_label(s, a));
            double row_sum = 0.0;
            for (int sp = 0; sp < m.n_states; ++sp) {
                const double p = m.transition(s, a, sp);
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument(
                        "transition probability out of [0, 1] at " +
                        pair_label(s, a) + " -> s'=" + std::to_string(sp));
                row_sum += p;
            }
            if (std::abs(row_sum - 1.0) > kRowSumTolerance)
                throw std::invalid_argument(
                    "kernel row at " + pair_label(s, a) + " sums to " +
                    std::to_string(row_sum) + ", expected 1");
        }
    }
    return m;
}

ActionValueTable bellman_apply(const FiniteMdp& m, const ActionValueTable& q) {
    if (q.n_states() != m.n_states || q.n_actions() != m.n_actions)
        throw std::invalid_argument(
            "action-value table shape does not match the MDP");

    ActionValueTable out(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double expected_best = 0.0;
            for (int sp = 0; sp < m.n_states; ++sp) {
                double best = q(sp, 0);
                for (int ap = 1; ap < m.n_actions; ++ap)
                    best = std::max(best, q(sp, ap));
                expected_best += m.transition(s, a, sp) * best;
            }
            out(s, a) = m.reward(s, a) + m.gamma * expected_best;
        }
    }
    return out;
}

double sup_distance(const ActionValueTable& q1, const ActionValueTable& q2) {
    if (!q1.same_shape(q2))
        throw std::invalid_argument("sup_distance: table shapes differ");
    double d = 0.0;
    const auto& x = q1.data();
    const auto& y = q2.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

double theoretical_value_bound(const FiniteMdp& m) {
    return m.reward_sup_norm() / (1.0 - m.gamma);
}

std::vector<int> greedy_policy(const ActionValueTable& q) {
    std::vector<int> policy(q.n_states(), 0);
    for (int s = 0; s < q.n_states(); ++s) {
        int best_a = 0;
        double best = q(s, 0);
        for (int a = 1; a < q.n_actions(); ++a) {
            if (q(s, a) > best) {
                best = q(s, a);
                best_a = a;
            }
        }
        policy[s] = best_a;
    }
    return policy;
}

MaxIterationsError::MaxIterationsError(long iterations, double residual)
    : std::runtime_error("value iteration did not certify the tolerance in " +
                         std::to_string(iterations) +
                         " iterations; last residual " +
                         std::to_string(residual)),
      residual_(residual) {}

SolveReport value_iteration(const FiniteMdp& m, double tol, long max_iters,
                            const ActionValueTable* start) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    ActionValueTable q =
        start ? *start : ActionValueTable(m.n_states, m.n_actions, 0.0);

    if (m.gamma == 0.0) {
        // T q is independent of q, so a single application lands on the fixed
        // point exactly and the residual of the result is zero.
        SolveReport report;
        report.q_star = bellman_apply(m, q);
        report.iterations = 1;
        report.residual = sup_distance(bellman_apply(m, report.q_star),
                                       report.q_star);
        report.error_bound = report.residual;
        return report;
    }

    const double stop = tol * (1.0 - m.gamma) / m.gamma;
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 1; it <= max_iters; ++it) {
        ActionValueTable next = bellman_apply(m, q);
        residual = sup_distance(next, q);
        q = std::move(next);
        if (residual <= stop) {
            SolveReport report;
            report.q_star = std::move(q);
            report.iterations = it;
            report.residual = residual;
            report.error_bound = m.gamma * residual / (1.0 - m.gamma);
            return report;
        }
    }
    throw MaxIterationsError(max_iters, residual);
}

FiniteMdp random_mdp(const RandomMdpParams& params, RngStream& rng) {
    if (params.n_states < 1 || params.n_actions < 1)
        throw std::invalid_argument("random_mdp: sizes must be positive");
    if (!(params.sparsity >= 0.0 && params.sparsity <= 1.0))
        throw std::invalid_argument("random_mdp: sparsity must lie in [0, 1]");
    if (!(params.reward_min <= params.reward_max))
        throw std::invalid_argument("random_mdp: empty reward range");

    FiniteMdp m = FiniteMdp::zeros(params.n_states, params.n_actions,
                                   params.gamma);
    const int n = params.n_states;
    std::vector<double> weights(n);
    std::vector<char> support(n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < params.n_actions; ++a) {
            int support_size = 0;
            for (int sp = 0; sp < n; ++sp) {
                support[sp] = rng.next_unit() < params.sparsity ? 1 : 0;
                support_size += support[sp];
            }
            if (support_size == 0)
                support[rng.next_below(static_cast<std::uint64_t>(n))] = 1;

            double total = 0.0;
            for (int sp = 0; sp < n; ++sp) {
                // 1 - u lies in (0, 1], keeping every supported weight positive.
                weights[sp] = support[sp] ? 1.0 - rng.next_unit() : 0.0;
                total += weights[sp];
            }
            for (int sp = 0; sp < n; ++sp)
                m.transition(s, a, sp) = weights[sp] / total;

            m.reward(s, a) = params.reward_min +
                             (params.reward_max - params.reward_min) *
                                 rng.next_unit();
        }
    }
    validate_mdp(m);
    return m;
}

} // namespace qlab
