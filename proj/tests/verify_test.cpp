#include "doctest.h"

#include <cmath>

#include "qlab/mdp.hpp"
#include "qlab/verify.hpp"

using namespace qlab;

TEST_CASE("contraction check on seeded instances") {
    RngStream mdp_rng(61);
    RandomMdpParams params;
    params.n_states = 4;
    params.n_actions = 3;
    params.gamma = 0.9;
    const FiniteMdp m = random_mdp(params, mdp_rng);

    RngStream rng(62);
    const CheckOutcome outcome = check_contraction(m, 100, rng);
    CHECK(outcome.passed);
    CHECK(outcome.worst_violation <= 1e-12);

    SUBCASE("discount zero maps every table to the same image") {
        params.gamma = 0.0;
        RngStream zero_rng(63);
        const FiniteMdp flat = random_mdp(params, zero_rng);
        RngStream probe_rng(64);
        const CheckOutcome zero_outcome = check_contraction(flat, 50, probe_rng);
        CHECK(zero_outcome.passed);
        CHECK(zero_outcome.worst_violation <= 0.0);
    }
}

TEST_CASE("value bound check") {
    SUBCASE("zero rewards sit exactly on the bound") {
        RngStream rng(65);
        RandomMdpParams params;
        params.n_states = 3;
        params.n_actions = 2;
        params.gamma = 0.5;
        params.reward_min = 0.0;
        params.reward_max = 0.0;
        const FiniteMdp m = random_mdp(params, rng);
        const CheckOutcome outcome = check_value_bound(m);
        CHECK(outcome.passed);
        CHECK(std::abs(outcome.worst_violation) <= 1e-9);
    }

    SUBCASE("a single self-loop attains the bound") {
        FiniteMdp m = FiniteMdp::zeros(1, 1, 0.5);
        m.reward(0, 0) = 1.0;
        m.transition(0, 0, 0) = 1.0;
        const CheckOutcome outcome = check_value_bound(m);
        CHECK(outcome.passed);
        CHECK(outcome.worst_violation >= -1e-8);
    }

    SUBCASE("random ensemble passes") {
        RngStream rng(66);
        RandomMdpParams params;
        params.n_states = 5;
        params.n_actions = 3;
        params.gamma = 0.9;
        params.reward_min = -1.0;
        params.reward_max = 1.0;
        for (int i = 0; i < 10; ++i) {
            const FiniteMdp m = random_mdp(params, rng);
            CHECK(check_value_bound(m).passed);
        }
    }
}

TEST_CASE("replay value identity check at trivial and long horizons") {
    const EnsembleInstance instance = default_ensemble(77, 3).back();
    const TrajectoryLog log = instance.make_log();

    SUBCASE("horizon zero is exact") {
        const CheckOutcome outcome = check_replay_value_identity(
            instance.mdp, log, instance.schedule, 0);
        CHECK(outcome.passed);
        CHECK(outcome.worst_violation == 0.0);
    }

    SUBCASE("horizon 200 stays within 1e-9") {
        const CheckOutcome outcome = check_replay_value_identity(
            instance.mdp, log, instance.schedule,
            std::min<std::int64_t>(200, instance.horizon));
        CHECK(outcome.passed);
    }
}

TEST_CASE("limit recovery on a deterministic kernel") {
    RngStream rng(88);
    RandomMdpParams params;
    params.n_states = 3;
    params.n_actions = 2;
    params.gamma = 0.5;
    params.sparsity = 0.0; // point-mass rows
    const FiniteMdp m = random_mdp(params, rng);

    RngStream traj_rng(89);
    const TrajectoryLog log =
        generate(m, SamplerKind::round_robin(), 600, traj_rng);
    const std::vector<LimitGapPoint> trace = check_replay_limits(
        m, log, StepsizeSchedule::per_visit_polynomial(1.0, 1.0),
        {0, 6, 600});

    REQUIRE(trace.size() == 3);
    // Before any replay the effective rewards are all zero.
    CHECK(trace[0].r_gap == doctest::Approx(m.reward_sup_norm()));
    // The first per-visit stepsize is 1, so one full sweep already removes
    // the absorbing residue; point-mass rows then make the pooled kernel
    // exact.
    CHECK(trace[1].p_gap <= 1e-15);
    CHECK(trace[2].p_gap <= 1e-15);
    CHECK(trace[2].r_gap <= 1e-12);
}

TEST_CASE("error decomposition probes cover the observed error") {
    const EnsembleInstance instance = default_ensemble(99, 5).back();
    const TrajectoryLog log = instance.make_log();
    const SolveReport solved = value_iteration(instance.mdp, 1e-10);

    RngStream rng(90);
    const std::vector<BoundBreakdown> probes = check_error_decomposition(
        instance.mdp, log, instance.schedule, solved.q_star, 200, rng);
    REQUIRE(probes.size() == 200);
    for (const BoundBreakdown& probe : probes) {
        CHECK(probe.contraction_term >= 0.0);
        CHECK(probe.reward_gap_term >= 0.0);
        CHECK(probe.dynamics_gap_term >= 0.0);
        CHECK(probe.escape_term >= 0.0);
        CHECK(probe.lhs <= probe.total() + 1e-9);
    }
    CHECK(outcome_from_breakdowns(probes).passed);

    SUBCASE("zero rewards collapse both sides to zero") {
        RngStream zero_rng(91);
        RandomMdpParams params;
        params.n_states = 2;
        params.n_actions = 2;
        params.gamma = 0.5;
        params.reward_min = 0.0;
        params.reward_max = 0.0;
        const FiniteMdp zero_mdp = random_mdp(params, zero_rng);
        RngStream traj_rng(92);
        const TrajectoryLog zero_log =
            generate(zero_mdp, SamplerKind::uniform_iid(), 100, traj_rng);
        const SolveReport zero_solved = value_iteration(zero_mdp, 1e-10);
        RngStream probe_rng(93);
        const std::vector<BoundBreakdown> zero_probes =
            check_error_decomposition(zero_mdp, zero_log,
                                      StepsizeSchedule::constant(0.5),
                                      zero_solved.q_star, 50, probe_rng);
        for (const BoundBreakdown& probe : zero_probes) {
            CHECK(probe.lhs == 0.0);
            CHECK(probe.total() >= 0.0);
        }
    }
}

TEST_CASE("convergence check") {
    SUBCASE("discount zero with full stepsize is exact after one sweep") {
        RngStream rng(94);
        RandomMdpParams params;
        params.n_states = 2;
        params.n_actions = 2;
        params.gamma = 0.0;
        const FiniteMdp m = random_mdp(params, rng);
        const CheckOutcome outcome = check_convergence(
            m, SamplerKind::round_robin(), StepsizeSchedule::constant(1.0),
            64, {5, 6}, 1e-12);
        CHECK(outcome.passed);
    }

    SUBCASE("single-state chain reaches its closed-form value") {
        FiniteMdp m = FiniteMdp::zeros(1, 1, 0.5);
        m.reward(0, 0) = 1.0;
        m.transition(0, 0, 0) = 1.0;
        const CheckOutcome outcome = check_convergence(
            m, SamplerKind::round_robin(),
            StepsizeSchedule::per_visit_polynomial(1.0, 1.0), 10000, {1, 2, 3},
            0.05);
        CHECK(outcome.passed);
    }
}

TEST_CASE("geometric checkpoint times") {
    CHECK(geometric_times(0).empty());
    CHECK(geometric_times(1) == std::vector<std::int64_t>{1});
    CHECK(geometric_times(10) == std::vector<std::int64_t>{1, 2, 4, 8, 10});
    CHECK(geometric_times(16) == std::vector<std::int64_t>{1, 2, 4, 8, 16});
}

TEST_CASE("suite plumbing") {
    CHECK(parse_suite("theorem3") == Suite::theorem3);
    CHECK(parse_suite("limits") == Suite::limits);
    CHECK(parse_suite("bounds") == Suite::bounds);
    CHECK(parse_suite("convergence") == Suite::convergence);
    CHECK(parse_suite("all") == Suite::all);
    CHECK_THROWS_AS(parse_suite("everything"), std::invalid_argument);

    SUBCASE("a small identity suite passes end to end") {
        VerifyConfig config;
        config.ensemble_size = 5;
        const SuiteReport report = run_suite(Suite::theorem3, config);
        CHECK(report.all_passed());
        REQUIRE(report.checks.size() == 3);
        for (const CheckOutcome& check : report.checks)
            CHECK(check.passed == (check.worst_violation <= check.tolerance));
    }

    SUBCASE("deterministic outcomes for a fixed seed") {
        VerifyConfig config;
        config.ensemble_size = 3;
        config.probes_per_check = 30;
        const SuiteReport a = run_suite(Suite::bounds, config);
        const SuiteReport b = run_suite(Suite::bounds, config);
        REQUIRE(a.checks.size() == b.checks.size());
        for (std::size_t i = 0; i < a.checks.size(); ++i) {
            CHECK(a.checks[i].worst_violation == b.checks[i].worst_violation);
            CHECK(a.checks[i].witness == b.checks[i].witness);
        }
    }
}
