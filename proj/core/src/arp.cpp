#include "qlab/arp.hpp"

#include <cmath>
#include <stdexcept>

namespace qlab {

ActionReplayProcess::ActionReplayProcess(const FiniteMdp& m, bool keep_history)
    : n_states_(m.n_states), n_actions_(m.n_actions), rewards_(m.rewards),
      keep_history_(keep_history) {
    const std::size_t n_pairs = m.n_pairs();
    current_.entries.resize(n_pairs);
    current_.absorb_mass.assign(n_pairs, 1.0);
    current_.effective_reward.assign(n_pairs, 0.0);
    occ_times_.resize(n_pairs);
    occ_alphas_.resize(n_pairs);
    if (keep_history_) layers_.push_back(current_);
}

std::size_t ActionReplayProcess::pair_index(int s, int a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
        throw std::out_of_range("state-action pair out of range");
    return static_cast<std::size_t>(s) * n_actions_ + a;
}

const ArpLayer& ActionReplayProcess::layer(std::int64_t k) const {
    if (k < 0 || k > horizon_)
        throw std::out_of_range("layer index exceeds the horizon");
    if (keep_history_) return layers_[static_cast<std::size_t>(k)];
    if (k == horizon_) return current_;
    throw std::logic_error("layer snapshots were not retained");
}

std::span<const ArpEntry> ActionReplayProcess::entries(int s, int a) const {
    const auto& e = current_.entries[pair_index(s, a)];
    return {e.data(), e.size()};
}

double ActionReplayProcess::absorb_mass(int s, int a) const {
    return current_.absorb_mass[pair_index(s, a)];
}

double ActionReplayProcess::effective_reward(int s, int a) const {
    return current_.effective_reward[pair_index(s, a)];
}

const std::vector<std::int64_t>&
ActionReplayProcess::occurrence_times(int s, int a) const {
    return occ_times_[pair_index(s, a)];
}

const std::vector<double>&
ActionReplayProcess::occurrence_alphas(int s, int a) const {
    return occ_alphas_[pair_index(s, a)];
}

void extend_arp(ActionReplayProcess& arp, std::int64_t t, const Transition& tr,
                double alpha) {
    if (t != arp.horizon_)
        throw std::invalid_argument(
            "extend_arp: step time does not match the next layer");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("extend_arp: stepsize outside [0, 1]");
    const std::size_t pair = arp.pair_index(tr.s, tr.a);
    if (tr.s_next < 0 || tr.s_next >= arp.n_states_)
        throw std::out_of_range("extend_arp: successor state out of range");

    const double keep = 1.0 - alpha;
    auto& entries = arp.current_.entries[pair];
    for (ArpEntry& e : entries) e.prob *= keep;
    entries.push_back({t, alpha, tr.s_next});
    arp.current_.absorb_mass[pair] *= keep;
    arp.current_.effective_reward[pair] =
        keep * arp.current_.effective_reward[pair] +
        alpha * arp.rewards_[pair];

    arp.occ_times_[pair].push_back(t);
    arp.occ_alphas_[pair].push_back(alpha);

    ++arp.horizon_;
    if (arp.keep_history_) arp.layers_.push_back(arp.current_);
}

ActionReplayProcess build_arp(const FiniteMdp& m, const TrajectoryLog& log,
                              const StepsizeSchedule& schedule,
                              std::int64_t horizon) {
    if (horizon < 0 || horizon > log.size())
        throw std::invalid_argument("build_arp: horizon exceeds the log");
    if (log.n_states() != m.n_states || log.n_actions() != m.n_actions)
        throw std::invalid_argument("build_arp: log/MDP shape mismatch");

    const std::vector<double> alphas = stepsizes_along(log, schedule);

    ActionReplayProcess arp(m, true);
    arp.layers_.reserve(static_cast<std::size_t>(horizon) + 1);

    for (std::int64_t k = 1; k <= horizon; ++k) {
        ArpLayer layer;
        const std::size_t n_pairs = m.n_pairs();
        layer.entries.resize(n_pairs);
        layer.absorb_mass.assign(n_pairs, 1.0);
        layer.effective_reward.assign(n_pairs, 0.0);

        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const std::size_t pair = m.pair_index(s, a);
                const auto occ = log.occurrences_before(s, a, k);
                auto& entries = layer.entries[pair];
                entries.resize(occ.size());

                // Each entry's probability is alpha_{t'} times the product of
                // (1 - alpha_tau) over later occurrences tau in (t', k); the
                // shared suffix products fall out of one descending sweep.
                double suffix = 1.0;
                for (std::size_t i = occ.size(); i-- > 0;) {
                    const double alpha = alphas[static_cast<std::size_t>(occ[i])];
                    entries[i] = {occ[i], alpha * suffix,
                                  log.step(occ[i]).s_next};
                    suffix *= 1.0 - alpha;
                }
                layer.absorb_mass[pair] = suffix;

                double prob_sum = 0.0;
                for (const ArpEntry& e : entries) prob_sum += e.prob;
                layer.effective_reward[pair] = m.reward(s, a) * prob_sum;
            }
        }
        arp.layers_.push_back(std::move(layer));
    }

    for (std::int64_t t = 0; t < horizon; ++t) {
        const Transition& tr = log.step(t);
        const std::size_t pair = m.pair_index(tr.s, tr.a);
        arp.occ_times_[pair].push_back(t);
        arp.occ_alphas_[pair].push_back(alphas[static_cast<std::size_t>(t)]);
    }

    arp.horizon_ = horizon;
    arp.current_ = arp.layers_.back();
    return arp;
}

ArpValueLayers solve_arp_qstar(const FiniteMdp& m,
                               const ActionReplayProcess& arp) {
    if (m.n_states != arp.n_states() || m.n_actions != arp.n_actions())
        throw std::invalid_argument("solve_arp_qstar: MDP shape mismatch");
    if (!arp.keeps_history())
        throw std::logic_error("solve_arp_qstar needs retained layers");

    std::vector<ActionValueTable> values;
    values.reserve(static_cast<std::size_t>(arp.horizon()) + 1);
    values.emplace_back(m.n_states, m.n_actions, 0.0);

    for (std::int64_t k = 1; k <= arp.horizon(); ++k) {
        const ArpLayer& layer = arp.layer(k);
        ActionValueTable table(m.n_states, m.n_actions, 0.0);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const std::size_t pair = m.pair_index(s, a);
                double v = 0.0;
                for (const ArpEntry& e : layer.entries[pair]) {
                    const ActionValueTable& earlier =
                        values[static_cast<std::size_t>(e.time)];
                    double best = earlier(e.s_next, 0);
                    for (int ap = 1; ap < m.n_actions; ++ap)
                        best = std::max(best, earlier(e.s_next, ap));
                    v += e.prob * (m.reward(s, a) + m.gamma * best);
                }
                table(s, a) = v;
            }
        }
        values.push_back(std::move(table));
    }
    return ArpValueLayers(std::move(values));
}

std::vector<double> aggregate_dynamics(const ActionReplayProcess& arp,
                                       std::int64_t k) {
    const ArpLayer& layer = arp.layer(k);
    const int n_states = arp.n_states();
    const std::size_t n_pairs = layer.entries.size();
    std::vector<double> pooled(n_pairs * n_states, 0.0);
    for (std::size_t pair = 0; pair < n_pairs; ++pair)
        for (const ArpEntry& e : layer.entries[pair])
            pooled[pair * n_states + e.s_next] += e.prob;
    return pooled;
}

std::vector<double> aggregate_reward(const ActionReplayProcess& arp,
                                     std::int64_t k) {
    return arp.layer(k).effective_reward;
}

std::pair<double, double> escape_mass(const ActionReplayProcess& arp, int s,
                                      int a, std::int64_t t_tilde,
                                      std::int64_t t) {
    if (t_tilde < 0 || t_tilde > t || t > arp.horizon())
        throw std::out_of_range("escape_mass: need 0 <= t_tilde <= t <= horizon");
    const ArpLayer& layer = arp.layer(t);
    const std::size_t pair = arp.pair_index(s, a);

    double mass = 0.0;
    for (const ArpEntry& e : layer.entries[pair]) {
        if (e.time >= t_tilde) break;
        mass += e.prob;
    }

    double alpha_sum = 0.0;
    const auto& times = arp.occurrence_times(s, a);
    const auto& alphas = arp.occurrence_alphas(s, a);
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_tilde && times[i] < t) alpha_sum += alphas[i];

    return {mass, std::exp(-alpha_sum)};
}

} // namespace qlab
