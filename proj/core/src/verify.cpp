#include "qlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace qlab {

namespace {

std::string pair_label(int s, int a) {
    return "s=" + std::to_string(s) + " a=" + std::to_string(a);
}

double table_sup_norm(const ActionValueTable& q) {
    double sup = 0.0;
    for (double v : q.data()) sup = std::max(sup, std::abs(v));
    return sup;
}

ActionValueTable random_table(int n_states, int n_actions, double amplitude,
                              RngStream& rng) {
    ActionValueTable q(n_states, n_actions);
    for (double& v : q.data())
        v = amplitude * (2.0 * rng.next_unit() - 1.0);
    return q;
}

/// Keeps the aggregate outcome at the worst margin seen so far.
void fold_worst(CheckOutcome& aggregate, double margin, std::string witness) {
    if (aggregate.witness.empty() || margin > aggregate.worst_violation) {
        aggregate.worst_violation = margin;
        aggregate.witness = std::move(witness);
    }
    aggregate.passed = aggregate.worst_violation <= aggregate.tolerance;
}

} // namespace

CheckOutcome make_outcome(std::string name, double worst_violation,
                          double tolerance, std::string witness,
                          std::string category) {
    CheckOutcome outcome;
    outcome.name = std::move(name);
    outcome.category = std::move(category);
    outcome.worst_violation = worst_violation;
    outcome.tolerance = tolerance;
    outcome.passed = worst_violation <= tolerance;
    outcome.witness = std::move(witness);
    return outcome;
}

CheckOutcome check_contraction(const FiniteMdp& m, int trials, RngStream& rng) {
    const double amplitude = std::max(1.0, theoretical_value_bound(m));
    double worst = -std::numeric_limits<double>::infinity();
    std::string witness = "no trials";
    for (int trial = 0; trial < trials; ++trial) {
        const ActionValueTable q1 =
            random_table(m.n_states, m.n_actions, amplitude, rng);
        const ActionValueTable q2 =
            random_table(m.n_states, m.n_actions, amplitude, rng);
        const double lhs = sup_distance(bellman_apply(m, q1), bellman_apply(m, q2));
        const double rhs = m.gamma * sup_distance(q1, q2);
        const double margin = lhs - rhs;
        if (margin > worst) {
            worst = margin;
            witness = "trial " + std::to_string(trial);
        }
    }
    return make_outcome("bellman_contraction", worst, 1e-12, witness);
}

CheckOutcome check_value_bound(const FiniteMdp& m) {
    const SolveReport solved = value_iteration(m, 1e-10);
    const double margin =
        table_sup_norm(solved.q_star) - theoretical_value_bound(m);
    return make_outcome("optimal_value_bound", margin, 1e-9,
                        "after " + std::to_string(solved.iterations) +
                            " iterations");
}

CheckOutcome check_replay_value_identity(const FiniteMdp& m,
                                         const TrajectoryLog& log,
                                         const StepsizeSchedule& schedule,
                                         std::int64_t horizon) {
    if (horizon > log.size())
        throw std::invalid_argument("horizon exceeds the log");

    const std::vector<double> alphas = stepsizes_along(log, schedule);
    ActionReplayProcess arp(m, true);
    for (std::int64_t t = 0; t < horizon; ++t)
        extend_arp(arp, t, log.step(t), alphas[static_cast<std::size_t>(t)]);
    const ArpValueLayers values = solve_arp_qstar(m, arp);

    ActionValueTable q(m.n_states, m.n_actions, 0.0);
    double worst = 0.0;
    std::string witness = "exact everywhere";
    for (std::int64_t t = 0; t <= horizon; ++t) {
        const ActionValueTable& layer = values.layer(t);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const double gap = std::abs(layer(s, a) - q(s, a));
                if (gap > worst) {
                    worst = gap;
                    witness = pair_label(s, a) + " t=" + std::to_string(t);
                }
            }
        }
        if (t < horizon)
            q = q_step(m, q, log.step(t), alphas[static_cast<std::size_t>(t)]);
    }
    return make_outcome("replay_value_identity", worst, 1e-9, witness);
}

CheckOutcome check_replay_recursion_equivalence(const FiniteMdp& m,
                                                const TrajectoryLog& log,
                                                const StepsizeSchedule& schedule,
                                                std::int64_t horizon) {
    const std::vector<double> alphas = stepsizes_along(log, schedule);
    ActionReplayProcess incremental(m, true);
    for (std::int64_t t = 0; t < horizon; ++t)
        extend_arp(incremental, t, log.step(t),
                   alphas[static_cast<std::size_t>(t)]);
    const ActionReplayProcess reference = build_arp(m, log, schedule, horizon);

    double worst = 0.0;
    std::string witness = "exact everywhere";
    const double structural = std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k <= horizon; ++k) {
        const ArpLayer& lhs = incremental.layer(k);
        const ArpLayer& rhs = reference.layer(k);
        for (std::size_t pair = 0; pair < lhs.entries.size(); ++pair) {
            const auto& le = lhs.entries[pair];
            const auto& re = rhs.entries[pair];
            if (le.size() != re.size())
                return make_outcome("replay_recursion_equivalence", structural,
                                    1e-12,
                                    "entry count mismatch at layer " +
                                        std::to_string(k));
            double gap = std::abs(lhs.absorb_mass[pair] - rhs.absorb_mass[pair]);
            gap = std::max(gap, std::abs(lhs.effective_reward[pair] -
                                         rhs.effective_reward[pair]));
            for (std::size_t i = 0; i < le.size(); ++i) {
                if (le[i].time != re[i].time || le[i].s_next != re[i].s_next)
                    return make_outcome("replay_recursion_equivalence",
                                        structural, 1e-12,
                                        "entry identity mismatch at layer " +
                                            std::to_string(k));
                gap = std::max(gap, std::abs(le[i].prob - re[i].prob));
            }
            if (gap > worst) {
                worst = gap;
                witness = "layer " + std::to_string(k) + " pair " +
                          std::to_string(pair);
            }
        }
    }
    return make_outcome("replay_recursion_equivalence", worst, 1e-12, witness);
}

CheckOutcome check_replay_mass_conservation(const ActionReplayProcess& arp) {
    if (!arp.keeps_history())
        throw std::logic_error("mass conservation needs retained layers");
    double worst = 0.0;
    std::string witness = "exact everywhere";
    for (std::int64_t k = 0; k <= arp.horizon(); ++k) {
        const ArpLayer& layer = arp.layer(k);
        for (std::size_t pair = 0; pair < layer.entries.size(); ++pair) {
            const double total =
                layer.absorb_mass[pair] + layer.entry_prob_sum(pair);
            const double gap = std::abs(total - 1.0);
            if (gap > worst) {
                worst = gap;
                witness = "layer " + std::to_string(k) + " pair " +
                          std::to_string(pair);
            }
        }
    }
    return make_outcome("replay_mass_conservation", worst, 1e-12, witness);
}

std::vector<LimitGapPoint> check_replay_limits(
    const FiniteMdp& m, const TrajectoryLog& log,
    const StepsizeSchedule& schedule,
    const std::vector<std::int64_t>& checkpoints) {
    const std::vector<double> alphas = stepsizes_along(log, schedule);
    ActionReplayProcess arp(m, false);

    std::vector<LimitGapPoint> points;
    points.reserve(checkpoints.size());
    auto next_checkpoint = checkpoints.begin();

    const auto record = [&](std::int64_t t) {
        LimitGapPoint point;
        point.t = t;
        const std::vector<double> pooled = aggregate_dynamics(arp, t);
        const std::vector<double> r_hat = aggregate_reward(arp, t);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const std::size_t pair = m.pair_index(s, a);
                point.r_gap = std::max(
                    point.r_gap, std::abs(r_hat[pair] - m.reward(s, a)));
                for (int sp = 0; sp < m.n_states; ++sp)
                    point.p_gap = std::max(
                        point.p_gap,
                        std::abs(pooled[pair * m.n_states + sp] -
                                 m.transition(s, a, sp)));
            }
        }
        points.push_back(point);
    };

    while (next_checkpoint != checkpoints.end() && *next_checkpoint == 0) {
        record(0);
        ++next_checkpoint;
    }
    for (std::int64_t t = 0; t < log.size(); ++t) {
        extend_arp(arp, t, log.step(t), alphas[static_cast<std::size_t>(t)]);
        while (next_checkpoint != checkpoints.end() &&
               *next_checkpoint == t + 1) {
            record(t + 1);
            ++next_checkpoint;
        }
    }
    return points;
}

CheckOutcome check_escape_bound(const FiniteMdp& m, const TrajectoryLog& log,
                                const StepsizeSchedule& schedule, int samples,
                                RngStream& rng) {
    const std::vector<double> alphas = stepsizes_along(log, schedule);
    ActionReplayProcess arp(m, true);
    for (std::int64_t t = 0; t < log.size(); ++t)
        extend_arp(arp, t, log.step(t), alphas[static_cast<std::size_t>(t)]);

    double worst = -std::numeric_limits<double>::infinity();
    std::string witness = "no samples";
    for (int i = 0; i < samples; ++i) {
        const auto horizon = static_cast<std::uint64_t>(arp.horizon());
        const std::int64_t t =
            static_cast<std::int64_t>(rng.next_below(horizon + 1));
        const std::int64_t t_tilde = static_cast<std::int64_t>(
            rng.next_below(static_cast<std::uint64_t>(t) + 1));
        const int s = static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(m.n_states)));
        const int a = static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(m.n_actions)));
        const auto [mass, bound] = escape_mass(arp, s, a, t_tilde, t);
        const double margin = mass - bound;
        if (margin > worst) {
            worst = margin;
            witness = pair_label(s, a) + " t_tilde=" + std::to_string(t_tilde) +
                      " t=" + std::to_string(t);
        }
    }
    return make_outcome("escape_mass_bound", worst, 1e-9, witness);
}

std::vector<BoundBreakdown> check_error_decomposition(
    const FiniteMdp& m, const TrajectoryLog& log,
    const StepsizeSchedule& schedule, const ActionValueTable& q_star,
    int samples, RngStream& rng) {
    const std::int64_t horizon = log.size();
    const std::vector<double> alphas = stepsizes_along(log, schedule);

    // Sup errors ||Q_t - q*|| for every t, via cadence-1 snapshots.
    QLearnOptions options;
    options.q_star = &q_star;
    options.checkpoint_every = 1;
    options.snapshot_tables = true;
    const QRunReport run = run_qlearning(m, log, schedule, options);

    std::vector<double> sup_err(static_cast<std::size_t>(horizon) + 1);
    sup_err[0] = table_sup_norm(q_star);
    for (const QCheckpoint& cp : run.checkpoints)
        sup_err[static_cast<std::size_t>(cp.t)] = *cp.sup_error;

    ActionReplayProcess arp(m, true);
    for (std::int64_t t = 0; t < horizon; ++t)
        extend_arp(arp, t, log.step(t), alphas[static_cast<std::size_t>(t)]);

    const double value_scale =
        m.gamma * m.reward_sup_norm() / (1.0 - m.gamma);
    const ActionValueTable zero_table(m.n_states, m.n_actions, 0.0);

    std::vector<BoundBreakdown> probes;
    probes.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const std::int64_t t = static_cast<std::int64_t>(
            rng.next_below(static_cast<std::uint64_t>(horizon) + 1));
        const std::int64_t t_tilde = static_cast<std::int64_t>(
            rng.next_below(static_cast<std::uint64_t>(t) + 1));
        const int s = static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(m.n_states)));
        const int a = static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(m.n_actions)));

        BoundBreakdown probe;

        double window = 0.0;
        for (std::int64_t tp = t_tilde; tp < t; ++tp)
            window = std::max(window, sup_err[static_cast<std::size_t>(tp)]);
        probe.contraction_term = m.gamma * window;

        const std::vector<double> r_hat = aggregate_reward(arp, t);
        double r_gap = 0.0;
        for (std::size_t pair = 0; pair < r_hat.size(); ++pair)
            r_gap = std::max(r_gap, std::abs(r_hat[pair] - m.rewards[pair]));
        probe.reward_gap_term = r_gap;

        const std::vector<double> pooled = aggregate_dynamics(arp, t);
        double p_gap = 0.0;
        for (std::size_t idx = 0; idx < pooled.size(); ++idx)
            p_gap = std::max(p_gap, std::abs(pooled[idx] - m.transitions[idx]));
        probe.dynamics_gap_term = value_scale * m.n_states * p_gap;

        double alpha_sum = 0.0;
        const auto& occ = log.occurrences(s, a);
        for (std::int64_t time : occ) {
            if (time >= t) break;
            if (time >= t_tilde)
                alpha_sum += alphas[static_cast<std::size_t>(time)];
        }
        probe.escape_term = value_scale * 2.0 * std::exp(-alpha_sum);

        const ActionValueTable& q_t =
            t == 0 ? zero_table
                   : *run.checkpoints[static_cast<std::size_t>(t) - 1].table;
        probe.lhs = std::abs(q_t(s, a) - q_star(s, a));

        probes.push_back(probe);
    }
    return probes;
}

CheckOutcome outcome_from_breakdowns(
    const std::vector<BoundBreakdown>& probes) {
    double worst = -std::numeric_limits<double>::infinity();
    std::string witness = "no samples";
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double margin = probes[i].lhs - probes[i].total();
        if (margin > worst) {
            worst = margin;
            witness = "probe " + std::to_string(i);
        }
    }
    return make_outcome("error_decomposition_bound", worst, 1e-9, witness);
}

std::vector<std::int64_t> geometric_times(std::int64_t horizon) {
    std::vector<std::int64_t> times;
    for (std::int64_t t = 1; t < horizon; t *= 2) times.push_back(t);
    if (horizon > 0) times.push_back(horizon);
    return times;
}

CheckOutcome check_convergence(const FiniteMdp& m, const SamplerKind& sampler,
                               const StepsizeSchedule& schedule,
                               std::int64_t horizon,
                               const std::vector<std::uint64_t>& seeds,
                               double threshold) {
    const SolveReport solved = value_iteration(m, 1e-10);
    const std::vector<std::int64_t> times = geometric_times(horizon);

    struct SeedResult {
        double margin;
        std::string witness;
    };

    const auto run_seed = [&](std::uint64_t seed) -> SeedResult {
        RngStream rng(seed);
        const TrajectoryLog log = generate(m, sampler, horizon, rng);
        QLearnOptions options;
        options.q_star = &solved.q_star;
        options.checkpoint_times = times;
        options.snapshot_tables = false;
        const QRunReport report = run_qlearning(m, log, schedule, options);

        double margin = *report.final_sup_error - threshold;
        std::string witness = "seed " + std::to_string(seed) + " final error " +
                              std::to_string(*report.final_sup_error);

        // The trace must drop below 2 * threshold and stay there.
        const double settle = 2.0 * threshold;
        std::size_t first_below = report.checkpoints.size();
        for (std::size_t i = 0; i < report.checkpoints.size(); ++i) {
            if (*report.checkpoints[i].sup_error <= settle) {
                first_below = i;
                break;
            }
        }
        if (first_below == report.checkpoints.size()) {
            margin = std::max(margin, 1.0);
            witness += "; trace never settled";
        } else {
            for (std::size_t i = first_below; i < report.checkpoints.size();
                 ++i) {
                const double late =
                    *report.checkpoints[i].sup_error - settle;
                if (late > margin) {
                    margin = late;
                    witness = "seed " + std::to_string(seed) +
                              " post-settle error " +
                              std::to_string(*report.checkpoints[i].sup_error) +
                              " at t=" +
                              std::to_string(report.checkpoints[i].t);
                }
            }
        }
        return {margin, witness};
    };

    std::vector<std::future<SeedResult>> futures;
    futures.reserve(seeds.size());
    for (std::uint64_t seed : seeds)
        futures.push_back(
            std::async(std::launch::async, [&run_seed, seed] { return run_seed(seed); }));

    double worst = -std::numeric_limits<double>::infinity();
    std::string witness = "no seeds";
    for (auto& future : futures) {
        const SeedResult result = future.get();
        if (result.margin > worst) {
            worst = result.margin;
            witness = result.witness;
        }
    }
    return make_outcome("qlearning_convergence", worst, 0.0, witness,
                        "statistical");
}

TrajectoryLog EnsembleInstance::make_log() const {
    RngStream rng(trajectory_seed);
    return generate(mdp, sampler, horizon, rng);
}

std::vector<EnsembleInstance> default_ensemble(std::uint64_t master_seed,
                                               int count) {
    const double gammas[] = {0.0, 0.5, 0.9};
    const std::int64_t horizons[] = {60, 150, 240, 380, 500};

    std::vector<EnsembleInstance> instances;
    instances.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        RngStream gen(master_seed, "ensemble-" + std::to_string(i));
        RandomMdpParams params;
        params.n_states = 1 + static_cast<int>(gen.next_below(5));
        params.n_actions = 1 + static_cast<int>(gen.next_below(3));
        params.gamma = gammas[i % 3];
        params.sparsity = 0.4 + 0.6 * gen.next_unit();
        params.reward_min = -1.0;
        params.reward_max = 1.0;

        EnsembleInstance instance{
            random_mdp(params, gen),
            SamplerKind::round_robin(),
            StepsizeSchedule::per_visit_polynomial(1.0, 1.0),
            horizons[i % 5],
            gen.next_u64(),
            "instance " + std::to_string(i),
        };
        switch (i % 3) {
            case 0: instance.sampler = SamplerKind::round_robin(); break;
            case 1: instance.sampler = SamplerKind::uniform_iid(); break;
            case 2:
                instance.sampler = SamplerKind::follow_with_restart(1.0, 0.05);
                break;
        }
        switch (i % 4) {
            case 0:
                instance.schedule = StepsizeSchedule::per_visit_polynomial(1.0, 1.0);
                break;
            case 1:
                instance.schedule = StepsizeSchedule::constant(0.1);
                break;
            case 2:
                instance.schedule = StepsizeSchedule::global_polynomial(1.0, 0.6);
                break;
            case 3:
                instance.schedule =
                    StepsizeSchedule::per_visit_polynomial(0.5, 0.8);
                break;
        }
        instances.push_back(std::move(instance));
    }
    return instances;
}

EnsembleInstance make_limits_instance(const VerifyConfig& config) {
    RngStream gen(config.master_seed, "limits-mdp");
    RandomMdpParams params;
    params.n_states = 2;
    params.n_actions = 2;
    params.gamma = 0.9;
    params.sparsity = 1.0;
    params.reward_min = -1.0;
    params.reward_max = 1.0;
    return EnsembleInstance{
        random_mdp(params, gen),
        SamplerKind::round_robin(),
        StepsizeSchedule::per_visit_polynomial(1.0, 1.0),
        config.limits_horizon,
        derive_seed(config.master_seed, "limits-trajectory"),
        "limits instance",
    };
}

Suite parse_suite(const std::string& name) {
    if (name == "theorem3") return Suite::theorem3;
    if (name == "limits") return Suite::limits;
    if (name == "bounds") return Suite::bounds;
    if (name == "convergence") return Suite::convergence;
    if (name == "all") return Suite::all;
    throw std::invalid_argument("unknown suite: " + name);
}

std::string suite_name(Suite suite) {
    switch (suite) {
        case Suite::theorem3: return "theorem3";
        case Suite::limits: return "limits";
        case Suite::bounds: return "bounds";
        case Suite::convergence: return "convergence";
        case Suite::all: return "all";
    }
    return "";
}

bool SuiteReport::all_passed() const {
    for (const CheckOutcome& check : checks)
        if (!check.passed) return false;
    return true;
}

namespace {

void run_theorem3_suite(const VerifyConfig& config, SuiteReport& report) {
    CheckOutcome identity = make_outcome("replay_value_identity", 0.0, 1e-9,
                                         "");
    CheckOutcome recursion =
        make_outcome("replay_recursion_equivalence", 0.0, 1e-12, "");
    CheckOutcome mass = make_outcome("replay_mass_conservation", 0.0, 1e-12,
                                     "");

    const auto instances =
        default_ensemble(config.master_seed, config.ensemble_size);
    for (const EnsembleInstance& instance : instances) {
        const TrajectoryLog log = instance.make_log();

        const CheckOutcome inst_identity = check_replay_value_identity(
            instance.mdp, log, instance.schedule, instance.horizon);
        fold_worst(identity, inst_identity.worst_violation,
                   instance.label + ": " + inst_identity.witness);

        const CheckOutcome inst_recursion = check_replay_recursion_equivalence(
            instance.mdp, log, instance.schedule, instance.horizon);
        fold_worst(recursion, inst_recursion.worst_violation,
                   instance.label + ": " + inst_recursion.witness);

        const std::vector<double> alphas =
            stepsizes_along(log, instance.schedule);
        ActionReplayProcess arp(instance.mdp, true);
        for (std::int64_t t = 0; t < instance.horizon; ++t)
            extend_arp(arp, t, log.step(t),
                       alphas[static_cast<std::size_t>(t)]);
        const CheckOutcome inst_mass = check_replay_mass_conservation(arp);
        fold_worst(mass, inst_mass.worst_violation,
                   instance.label + ": " + inst_mass.witness);
    }
    report.checks.push_back(std::move(identity));
    report.checks.push_back(std::move(recursion));
    report.checks.push_back(std::move(mass));
}

void run_bounds_suite(const VerifyConfig& config, SuiteReport& report) {
    const auto instances =
        default_ensemble(config.master_seed, config.ensemble_size);
    const int per_instance = std::max(
        1, config.probes_per_check / std::max(1, config.ensemble_size));

    CheckOutcome contraction = make_outcome("bellman_contraction", 0.0, 1e-12,
                                            "");
    CheckOutcome escape = make_outcome("escape_mass_bound", 0.0, 1e-9, "");
    CheckOutcome decomposition =
        make_outcome("error_decomposition_bound", 0.0, 1e-9, "");

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const EnsembleInstance& instance = instances[i];
        RngStream probe_rng(config.master_seed,
                            "bounds-probes-" + std::to_string(i));

        const CheckOutcome inst_contraction =
            check_contraction(instance.mdp, per_instance, probe_rng);
        fold_worst(contraction, inst_contraction.worst_violation,
                   instance.label + ": " + inst_contraction.witness);

        const TrajectoryLog log = instance.make_log();
        const CheckOutcome inst_escape = check_escape_bound(
            instance.mdp, log, instance.schedule, per_instance, probe_rng);
        fold_worst(escape, inst_escape.worst_violation,
                   instance.label + ": " + inst_escape.witness);

        const SolveReport solved = value_iteration(instance.mdp, 1e-10);
        const std::vector<BoundBreakdown> probes = check_error_decomposition(
            instance.mdp, log, instance.schedule, solved.q_star, per_instance,
            probe_rng);
        const CheckOutcome inst_decomposition = outcome_from_breakdowns(probes);
        fold_worst(decomposition, inst_decomposition.worst_violation,
                   instance.label + ": " + inst_decomposition.witness);
    }

    CheckOutcome value_bound = make_outcome("optimal_value_bound", 0.0, 1e-9,
                                            "");
    RngStream bound_rng(config.master_seed, "value-bound-probes");
    const double gammas[] = {0.0, 0.5, 0.9};
    for (int i = 0; i < config.probes_per_check; ++i) {
        RandomMdpParams params;
        params.n_states = 1 + static_cast<int>(bound_rng.next_below(5));
        params.n_actions = 1 + static_cast<int>(bound_rng.next_below(3));
        params.gamma = gammas[i % 3];
        params.sparsity = 0.4 + 0.6 * bound_rng.next_unit();
        params.reward_min = -2.0;
        params.reward_max = 2.0;
        const FiniteMdp mdp = random_mdp(params, bound_rng);
        const CheckOutcome probe = check_value_bound(mdp);
        fold_worst(value_bound, probe.worst_violation,
                   "probe " + std::to_string(i) + ": " + probe.witness);
    }
    report.checks.push_back(std::move(value_bound));
    report.checks.push_back(std::move(contraction));
    report.checks.push_back(std::move(escape));
    report.checks.push_back(std::move(decomposition));
}

void run_limits_suite(const VerifyConfig& config, SuiteReport& report) {
    const EnsembleInstance instance = make_limits_instance(config);
    const FiniteMdp& mdp = instance.mdp;
    const TrajectoryLog log = instance.make_log();

    const std::vector<std::int64_t> checkpoints =
        geometric_times(config.limits_horizon);
    report.limit_trace =
        check_replay_limits(mdp, log, instance.schedule, checkpoints);

    const double r_threshold = config.limits_r_gap_rel * mdp.reward_sup_norm();
    const LimitGapPoint& final_point = report.limit_trace.back();
    double margin = std::max(final_point.r_gap - r_threshold,
                             final_point.p_gap - config.limits_p_gap);
    std::string witness = "final gaps r=" + std::to_string(final_point.r_gap) +
                          " p=" + std::to_string(final_point.p_gap);

    // Both gap sequences may backslide by at most the slack once the first
    // quarter of the run is past.
    const std::int64_t settle_after = config.limits_horizon / 4;
    for (std::size_t i = 1; i < report.limit_trace.size(); ++i) {
        const LimitGapPoint& prev = report.limit_trace[i - 1];
        const LimitGapPoint& curr = report.limit_trace[i];
        if (prev.t < settle_after) continue;
        const double backslide =
            std::max(curr.r_gap - prev.r_gap, curr.p_gap - prev.p_gap) -
            config.limits_backslide_slack;
        if (backslide > margin) {
            margin = backslide;
            witness = "backslide between t=" + std::to_string(prev.t) +
                      " and t=" + std::to_string(curr.t);
        }
    }
    report.checks.push_back(
        make_outcome("replay_limit_recovery", margin, 0.0, witness,
                     "statistical"));
}

void run_convergence_suite(const VerifyConfig& config, SuiteReport& report) {
    RngStream gen(config.master_seed, "convergence-mdp");
    RandomMdpParams params;
    params.n_states = 3;
    params.n_actions = 2;
    params.gamma = 0.9;
    params.sparsity = 1.0;
    params.reward_min = 0.0;
    // With harmonic per-visit steps the error flushes like t^{gamma - 1}, so
    // the absolute threshold fixes the feasible reward scale of the frozen
    // instance: ~1.5 * ||r||_inf remains after 1e6 steps at gamma 0.9.
    params.reward_max = 0.02;
    const FiniteMdp mdp = random_mdp(params, gen);

    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(config.convergence_n_seeds));
    for (int i = 0; i < config.convergence_n_seeds; ++i)
        seeds.push_back(derive_seed(config.master_seed,
                                    "convergence-seed-" + std::to_string(i)));

    report.checks.push_back(check_convergence(
        mdp, SamplerKind::round_robin(),
        StepsizeSchedule::per_visit_polynomial(1.0, 1.0),
        config.convergence_horizon, seeds, config.convergence_threshold));
}

} // namespace

SuiteReport run_suite(Suite suite, const VerifyConfig& config) {
    SuiteReport report;
    report.suite = suite_name(suite);
    switch (suite) {
        case Suite::theorem3:
            run_theorem3_suite(config, report);
            break;
        case Suite::limits:
            run_limits_suite(config, report);
            break;
        case Suite::bounds:
            run_bounds_suite(config, report);
            break;
        case Suite::convergence:
            run_convergence_suite(config, report);
            break;
        case Suite::all:
            run_theorem3_suite(config, report);
            run_bounds_suite(config, report);
            run_limits_suite(config, report);
            run_convergence_suite(config, report);
            break;
    }
    return report;
}

} // namespace qlab
