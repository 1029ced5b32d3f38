#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/qlearning.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"

using namespace qlab;

namespace {

FiniteMdp single_state(double reward, double gamma) {
    FiniteMdp m = FiniteMdp::zeros(1, 1, gamma);
    m.reward(0, 0) = reward;
    m.transition(0, 0, 0) = 1.0;
    return m;
}

} // namespace

TEST_CASE("stepsize schedules produce their defining values") {
    const StepsizeSchedule constant = StepsizeSchedule::constant(0.1);
    CHECK(constant.at(0, 0) == 0.1);
    CHECK(constant.at(12345, 17) == 0.1);

    const StepsizeSchedule per_visit =
        StepsizeSchedule::per_visit_polynomial(1.0, 1.0);
    CHECK(per_visit.at(99, 0) == 1.0);
    CHECK(per_visit.at(5, 3) == 0.25);

    const StepsizeSchedule global = StepsizeSchedule::global_polynomial(1.0, 1.0);
    CHECK(global.at(3, 7) == 0.25);

    SUBCASE("constructor rejects parameters that escape [0, 1]") {
        CHECK_THROWS_AS(StepsizeSchedule::constant(0.0), std::invalid_argument);
        CHECK_THROWS_AS(StepsizeSchedule::constant(1.5), std::invalid_argument);
        CHECK_THROWS_AS(StepsizeSchedule::global_polynomial(1.0, -0.5),
                        std::invalid_argument);
    }

    SUBCASE("every produced value stays inside [0, 1]") {
        RngStream rng(3);
        for (int i = 0; i < 200; ++i) {
            const double c = 1.0 - rng.next_unit() * 0.999;
            const double p = 2.0 * rng.next_unit();
            const StepsizeSchedule schedule =
                i % 2 == 0 ? StepsizeSchedule::global_polynomial(c, p)
                           : StepsizeSchedule::per_visit_polynomial(c, p);
            const auto t = static_cast<std::int64_t>(rng.next_below(10000));
            const auto n = static_cast<std::int64_t>(rng.next_below(10000));
            const double alpha = schedule.at(t, n);
            CHECK(alpha >= 0.0);
            CHECK(alpha <= 1.0);
        }
    }
}

TEST_CASE("stepsize partial sums over occurrence times") {
    FiniteMdp m = single_state(1.0, 0.5);
    RngStream rng(4);
    const TrajectoryLog log =
        generate(m, SamplerKind::round_robin(), 64, rng);

    SUBCASE("harmonic per-visit sums are harmonic numbers") {
        const StepsizeDiagnostics diag = stepsize_diagnostics(
            log, StepsizeSchedule::per_visit_polynomial(1.0, 1.0));
        double harmonic = 0.0;
        double squares = 0.0;
        for (int k = 1; k <= 64; ++k) {
            harmonic += 1.0 / k;
            squares += 1.0 / (static_cast<double>(k) * k);
        }
        CHECK(diag.per_pair[0].sum_alpha == doctest::Approx(harmonic).epsilon(1e-12));
        CHECK(diag.per_pair[0].sum_alpha_sq ==
              doctest::Approx(squares).epsilon(1e-12));
        CHECK(diag.per_pair[0].visits == 64);
    }

    SUBCASE("constant schedule sums scale with the visit count") {
        const StepsizeDiagnostics diag =
            stepsize_diagnostics(log, StepsizeSchedule::constant(0.1));
        CHECK(diag.per_pair[0].sum_alpha == doctest::Approx(6.4).epsilon(1e-12));
        CHECK(diag.per_pair[0].sum_alpha_sq ==
              doctest::Approx(0.64).epsilon(1e-12));
    }

    SUBCASE("unvisited pairs report empty sums") {
        const TrajectoryLog empty(1, 1);
        const StepsizeDiagnostics diag =
            stepsize_diagnostics(empty, StepsizeSchedule::constant(0.5));
        CHECK(diag.per_pair[0].sum_alpha == 0.0);
        CHECK(diag.per_pair[0].sum_alpha_sq == 0.0);
        CHECK(diag.low_sum_flag[0]);
        CHECK_FALSE(diag.high_sum_sq_flag[0]);
    }

    SUBCASE("flags respond to thresholds") {
        StepsizeDiagnosticsThresholds thresholds;
        thresholds.min_sum_alpha = 100.0;
        thresholds.max_sum_alpha_sq = 0.001;
        const StepsizeDiagnostics diag = stepsize_diagnostics(
            log, StepsizeSchedule::constant(0.1), thresholds);
        CHECK(diag.low_sum_flag[0]);
        CHECK(diag.high_sum_sq_flag[0]);
    }
}

TEST_CASE("single update touches exactly the visited entry") {
    RngStream rng(5);
    RandomMdpParams params;
    params.n_states = 3;
    params.n_actions = 2;
    params.gamma = 0.8;
    const FiniteMdp m = random_mdp(params, rng);

    SUBCASE("first update from zero lands on alpha times the reward") {
        const ActionValueTable q(3, 2, 0.0);
        const double alpha = 0.37;
        const ActionValueTable out = q_step(m, q, {1, 1, 2}, alpha);
        CHECK(out(1, 1) == alpha * m.reward(1, 1));
    }

    SUBCASE("alpha zero leaves the table bitwise unchanged") {
        ActionValueTable q(3, 2);
        for (double& v : q.data()) v = rng.next_unit();
        const ActionValueTable out = q_step(m, q, {0, 1, 2}, 0.0);
        CHECK(out.data() == q.data());
    }

    SUBCASE("alpha one replaces the entry with the bootstrapped target") {
        const ActionValueTable q(3, 2, 0.0);
        FiniteMdp plain = m;
        plain.reward(2, 0) = 2.0;
        const ActionValueTable out = q_step(plain, q, {2, 0, 1}, 1.0);
        CHECK(out(2, 0) == 2.0);
    }

    SUBCASE("all other entries carry over bitwise") {
        ActionValueTable q(3, 2);
        for (double& v : q.data()) v = rng.next_unit();
        for (int trial = 0; trial < 50; ++trial) {
            const int s = static_cast<int>(rng.next_below(3));
            const int a = static_cast<int>(rng.next_below(2));
            const int sp = static_cast<int>(rng.next_below(3));
            const double alpha = rng.next_unit();
            const ActionValueTable out = q_step(m, q, {s, a, sp}, alpha);
            int changed = 0;
            for (int ss = 0; ss < 3; ++ss)
                for (int aa = 0; aa < 2; ++aa)
                    if (out(ss, aa) != q(ss, aa)) {
                        ++changed;
                        CHECK(ss == s);
                        CHECK(aa == a);
                    }
            CHECK(changed <= 1);
            q = out;
        }
    }

    SUBCASE("out-of-range indices and stepsizes are rejected") {
        const ActionValueTable q(3, 2, 0.0);
        CHECK_THROWS_AS(q_step(m, q, {3, 0, 0}, 0.5), std::out_of_range);
        CHECK_THROWS_AS(q_step(m, q, {0, 2, 0}, 0.5), std::out_of_range);
        CHECK_THROWS_AS(q_step(m, q, {0, 0, 0}, 1.5), std::invalid_argument);
    }
}

TEST_CASE("iterate runs over a log") {
    SUBCASE("empty log returns the zero table") {
        const FiniteMdp m = single_state(1.0, 0.5);
        const TrajectoryLog log(1, 1);
        const QRunReport report = run_qlearning(
            m, log, StepsizeSchedule::constant(0.5), nullptr, 1);
        CHECK(report.final_table(0, 0) == 0.0);
        CHECK(report.checkpoints.empty());
    }

    SUBCASE("single-state chain converges to r / (1 - gamma)") {
        const FiniteMdp m = single_state(1.0, 0.5);
        RngStream rng(6);
        const TrajectoryLog log =
            generate(m, SamplerKind::round_robin(), 10000, rng);
        const SolveReport solved = value_iteration(m, 1e-10);
        const QRunReport report = run_qlearning(
            m, log, StepsizeSchedule::per_visit_polynomial(1.0, 1.0),
            &solved.q_star, 1000);
        CHECK(std::abs(report.final_table(0, 0) - 2.0) <= 0.05);
        CHECK(*report.final_sup_error <= 0.05);
    }

    SUBCASE("checkpoints land on cadence multiples only") {
        const FiniteMdp m = single_state(1.0, 0.5);
        RngStream rng(7);
        const TrajectoryLog log =
            generate(m, SamplerKind::round_robin(), 10, rng);
        const QRunReport report = run_qlearning(
            m, log, StepsizeSchedule::constant(0.5), nullptr, 3);
        REQUIRE(report.checkpoints.size() == 3);
        CHECK(report.checkpoints[0].t == 3);
        CHECK(report.checkpoints[1].t == 6);
        CHECK(report.checkpoints[2].t == 9);
    }

    SUBCASE("partial sums match an independent rescan exactly") {
        RngStream mdp_rng(8);
        RandomMdpParams params;
        params.n_states = 3;
        params.n_actions = 2;
        params.gamma = 0.9;
        const FiniteMdp m = random_mdp(params, mdp_rng);
        RngStream rng(9);
        const TrajectoryLog log =
            generate(m, SamplerKind::uniform_iid(), 2000, rng);
        const StepsizeSchedule schedule =
            StepsizeSchedule::per_visit_polynomial(1.0, 0.8);

        const QRunReport report =
            run_qlearning(m, log, schedule, nullptr, 0);
        const StepsizeDiagnostics diag = stepsize_diagnostics(log, schedule);
        for (std::size_t pair = 0; pair < diag.per_pair.size(); ++pair) {
            CHECK(report.rm_partial_sums[pair].sum_alpha ==
                  diag.per_pair[pair].sum_alpha);
            CHECK(report.rm_partial_sums[pair].sum_alpha_sq ==
                  diag.per_pair[pair].sum_alpha_sq);
            CHECK(report.rm_partial_sums[pair].visits ==
                  diag.per_pair[pair].visits);
        }
    }

    SUBCASE("harmonic squared sums stay below pi^2 / 6") {
        const FiniteMdp m = single_state(1.0, 0.5);
        RngStream rng(10);
        const TrajectoryLog log =
            generate(m, SamplerKind::round_robin(), 50000, rng);
        const StepsizeDiagnostics diag = stepsize_diagnostics(
            log, StepsizeSchedule::per_visit_polynomial(1.0, 1.0));
        CHECK(diag.per_pair[0].sum_alpha_sq <=
              std::numbers::pi * std::numbers::pi / 6.0 + 1e-9);
    }
}

TEST_CASE("averaging recursion") {
    SUBCASE("a weight of one jumps straight to the target") {
        const std::vector<double> xi = {3.0, 3.0, 3.0};
        const std::vector<double> beta = {1.0, 0.5, 0.25};
        const std::vector<double> trace = rm_average(xi, beta, 17.0);
        REQUIRE(trace.size() == 4);
        CHECK(trace[0] == 17.0);
        CHECK(trace[1] == 3.0);
        CHECK(trace[2] == 3.0);
        CHECK(trace[3] == 3.0);
    }

    SUBCASE("zero weights freeze the iterate") {
        const std::vector<double> xi = {5.0, -2.0, 9.0};
        const std::vector<double> beta = {0.0, 0.0, 0.0};
        const std::vector<double> trace = rm_average(xi, beta, 1.25);
        for (double x : trace) CHECK(x == 1.25);
    }

    SUBCASE("harmonic weights reproduce the running mean") {
        RngStream rng(11);
        const int n = 5000;
        std::vector<double> xi(n);
        std::vector<double> beta(n);
        for (int k = 0; k < n; ++k) {
            xi[k] = rng.next_unit() < 0.3 ? 1.0 : 0.0;
            beta[k] = 1.0 / (k + 1.0);
        }
        const std::vector<double> trace = rm_average(xi, beta, 0.0);

        double running_sum = 0.0;
        for (int k = 0; k < n; ++k) {
            running_sum += xi[k];
            const double mean = running_sum / (k + 1.0);
            CHECK(std::abs(trace[static_cast<std::size_t>(k) + 1] - mean) <=
                  1e-12);
        }
    }

    SUBCASE("bernoulli mean settles near 0.3 at depth 10^4") {
        RngStream rng(12);
        const int n = 10000;
        std::vector<double> xi(n);
        std::vector<double> beta(n);
        for (int k = 0; k < n; ++k) {
            xi[k] = rng.next_unit() < 0.3 ? 1.0 : 0.0;
            beta[k] = 1.0 / (k + 1.0);
        }
        const std::vector<double> trace = rm_average(xi, beta, 0.0);
        CHECK(std::abs(trace.back() - 0.3) <= 0.03);
    }

    SUBCASE("length mismatch and out-of-range weights are rejected") {
        const std::vector<double> xi = {1.0};
        const std::vector<double> beta = {0.5, 0.5};
        CHECK_THROWS_AS(rm_average(xi, beta, 0.0), std::invalid_argument);
        const std::vector<double> bad_beta = {1.5};
        CHECK_THROWS_AS(rm_average(xi, bad_beta, 0.0), std::invalid_argument);
    }
}
