#include "qlab/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace qlab {

TrajectoryLog::TrajectoryLog(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions),
      occurrences_(static_cast<std::size_t>(n_states) * n_actions) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("trajectory log needs nonempty S and A");
}

std::size_t TrajectoryLog::pair_index(int s, int a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
        throw std::out_of_range("state-action pair out of range");
    return static_cast<std::size_t>(s) * n_actions_ + a;
}

void TrajectoryLog::append(const Transition& tr) {
    const std::size_t pair = pair_index(tr.s, tr.a);
    if (tr.s_next < 0 || tr.s_next >= n_states_)
        throw std::out_of_range("successor state out of range");
    occurrences_[pair].push_back(size());
    steps_.push_back(tr);
}

const std::vector<std::int64_t>& TrajectoryLog::occurrences(int s, int a) const {
    return occurrences_[pair_index(s, a)];
}

std::span<const std::int64_t>
TrajectoryLog::occurrences_before(int s, int a, std::int64_t t) const {
    if (t < 0 || t > size())
        throw std::out_of_range("time exceeds the log length");
    const auto& occ = occurrences(s, a);
    const auto end = std::lower_bound(occ.begin(), occ.end(), t);
    return {occ.data(), static_cast<std::size_t>(end - occ.begin())};
}

SamplerKind SamplerKind::follow_with_restart(double epsilon,
                                             double restart_prob) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0) ||
        !(restart_prob >= 0.0 && restart_prob <= 1.0))
        throw std::invalid_argument("sampler probabilities must lie in [0, 1]");
    return {Kind::follow_with_restart, epsilon, restart_prob};
}

int inverse_cdf_sample(const FiniteMdp& m, int s, int a, double u) {
    double cumulative = 0.0;
    int last_positive = m.n_states - 1;
    for (int sp = 0; sp < m.n_states; ++sp) {
        const double p = m.transition(s, a, sp);
        if (p > 0.0) last_positive = sp;
        cumulative += p;
        if (u < cumulative) return sp;
    }
    // Row sums may fall short of 1 by the validation tolerance.
    return last_positive;
}

int next_state_sample(const FiniteMdp& m, int s, int a, RngStream& rng) {
    return inverse_cdf_sample(m, s, a, rng.next_unit());
}

TrajectoryLog generate(const FiniteMdp& m, const SamplerKind& kind,
                       std::int64_t horizon, RngStream& rng,
                       const ActionValueTable* greedy_ref) {
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");

    TrajectoryLog log(m.n_states, m.n_actions);
    const std::uint64_t n_pairs = m.n_pairs();

    std::vector<int> greedy;
    if (kind.kind == SamplerKind::Kind::follow_with_restart && greedy_ref)
        greedy = greedy_policy(*greedy_ref);

    int current_state = 0;
    for (std::int64_t t = 0; t < horizon; ++t) {
        int s = 0;
        int a = 0;
        switch (kind.kind) {
            case SamplerKind::Kind::round_robin: {
                const std::uint64_t idx = static_cast<std::uint64_t>(t) % n_pairs;
                s = static_cast<int>(idx / m.n_actions);
                a = static_cast<int>(idx % m.n_actions);
                break;
            }
            case SamplerKind::Kind::uniform_iid: {
                const std::uint64_t idx = rng.next_below(n_pairs);
                s = static_cast<int>(idx / m.n_actions);
                a = static_cast<int>(idx % m.n_actions);
                break;
            }
            case SamplerKind::Kind::follow_with_restart: {
                if (t == 0) {
                    s = static_cast<int>(
                        rng.next_below(static_cast<std::uint64_t>(m.n_states)));
                } else if (rng.next_unit() < kind.restart_prob) {
                    s = static_cast<int>(
                        rng.next_below(static_cast<std::uint64_t>(m.n_states)));
                } else {
                    s = current_state;
                }
                if (greedy.empty()) {
                    a = static_cast<int>(rng.next_below(
                        static_cast<std::uint64_t>(m.n_actions)));
                } else if (rng.next_unit() < kind.epsilon) {
                    a = static_cast<int>(rng.next_below(
                        static_cast<std::uint64_t>(m.n_actions)));
                } else {
                    a = greedy[s];
                }
                break;
            }
        }
        const int s_next = next_state_sample(m, s, a, rng);
        log.append({s, a, s_next});
        current_state = s_next;
    }
    return log;
}

} // namespace qlab
