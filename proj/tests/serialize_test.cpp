#include "doctest.h"

#include <filesystem>

#include "qlab/mdp.hpp"
#include "qlab/serialize.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"
#include "qlab/verify.hpp"

using namespace qlab;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qlab_test_" + name);
}

} // namespace

TEST_CASE("17-digit formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 2e-300, -12345.6789, 0.0}) {
        const std::string text = format_double(v);
        CHECK(std::stod(text) == v);
    }
}

TEST_CASE("MDP files round-trip bitwise") {
    RngStream rng(71);
    RandomMdpParams params;
    params.n_states = 4;
    params.n_actions = 3;
    params.gamma = 0.9;
    params.sparsity = 0.7;
    params.reward_min = -1.0;
    params.reward_max = 1.0;
    const FiniteMdp m = random_mdp(params, rng);

    const FiniteMdp back = mdp_from_json(mdp_to_json(m));
    CHECK(back.n_states == m.n_states);
    CHECK(back.n_actions == m.n_actions);
    CHECK(back.gamma == m.gamma);
    CHECK(back.rewards == m.rewards);
    CHECK(back.transitions == m.transitions);

    SUBCASE("file save and load") {
        const auto path = temp_file("roundtrip.json");
        save_mdp(m, path);
        const FiniteMdp loaded = load_mdp(path);
        CHECK(loaded.transitions == m.transitions);
        CHECK(!std::filesystem::exists(path.string() + ".tmp"));
        std::filesystem::remove(path);
    }
}

TEST_CASE("malformed and invalid MDP files are rejected") {
    CHECK_THROWS_AS(mdp_from_json("not json at all"), std::invalid_argument);
    CHECK_THROWS_AS(mdp_from_json("{\"states\": 1}"), std::invalid_argument);
    // Structurally fine, but the row sums to 0.9.
    const std::string bad_row = R"({
      "states": 1, "actions": 1, "gamma": 0.5,
      "rewards": [[0.0]], "transitions": [[[0.9]]]
    })";
    CHECK_THROWS_AS(mdp_from_json(bad_row), std::invalid_argument);

    SUBCASE("every truncation fails cleanly") {
        RngStream rng(73);
        RandomMdpParams params;
        params.n_states = 3;
        params.n_actions = 2;
        params.gamma = 0.5;
        const std::string full = mdp_to_json(random_mdp(params, rng));
        for (std::size_t len = 0; len < full.size(); len += 3)
            CHECK_THROWS_AS(mdp_from_json(full.substr(0, len)),
                            std::invalid_argument);
    }
}

TEST_CASE("trajectory CSV layout") {
    TrajectoryLog log(2, 1);
    log.append({0, 0, 1});
    log.append({1, 0, 0});
    CHECK(trajectory_to_csv(log) == "t,s,a,s_next\n0,0,0,1\n1,1,0,0\n");

    const TrajectoryLog empty(2, 1);
    CHECK(trajectory_to_csv(empty) == "t,s,a,s_next\n");
}

TEST_CASE("trace CSV carries only checkpoints with errors") {
    std::vector<QCheckpoint> checkpoints;
    QCheckpoint a;
    a.t = 10;
    a.sup_error = 0.5;
    checkpoints.push_back(a);
    QCheckpoint b;
    b.t = 20;
    checkpoints.push_back(b);
    const std::string csv = trace_to_csv(checkpoints);
    CHECK(csv == "t,sup_error\n10,0.5\n");
}

TEST_CASE("suite reports serialize their outcomes and metadata") {
    SuiteReport report;
    report.suite = "bounds";
    report.checks.push_back(
        make_outcome("sample_check", 0.5, 1.0, "witness \"quoted\""));
    report.limit_trace.push_back({100, 0.25, 0.125});

    const std::string text = suite_report_to_json(report, 42, "deadbeef");
    CHECK(text.find("\"seed\": 42") != std::string::npos);
    CHECK(text.find("\"config_hash\": \"deadbeef\"") != std::string::npos);
    CHECK(text.find("\"version\": \"0.1.0\"") != std::string::npos);
    CHECK(text.find("\"sample_check\"") != std::string::npos);
    CHECK(text.find("\\\"quoted\\\"") != std::string::npos);
    CHECK(text.find("\"all_passed\": true") != std::string::npos);
    CHECK(text.find("\"limit_trace\"") != std::string::npos);
}

TEST_CASE("replay diagnostics CSV lists each pair per requested layer") {
    FiniteMdp m = FiniteMdp::zeros(2, 1, 0.5);
    m.reward(0, 0) = 2.0;
    m.transition(0, 0, 1) = 1.0;
    m.transition(1, 0, 0) = 1.0;
    validate_mdp(m);

    ActionReplayProcess arp(m, true);
    extend_arp(arp, 0, {0, 0, 1}, 0.5);

    const std::string csv = arp_diagnostics_to_csv(m, arp, {0, 1});
    // Layer 0: fully absorbing, so the pooled gap equals the largest kernel
    // entry of each row; layer 1: pair (0,0) replays its recorded successor
    // with probability 0.5.
    CHECK(csv == "t,s,a,absorb_mass,r_hat,max_abs_p_gap\n"
                 "0,0,0,1,0,1\n"
                 "0,1,0,1,0,1\n"
                 "1,0,0,0.5,1,0.5\n"
                 "1,1,0,1,0,1\n");
}

TEST_CASE("atomic writes leave no temporary behind") {
    const auto path = temp_file("atomic.txt");
    write_text_atomic(path, "payload");
    CHECK(read_text(path) == "payload");
    CHECK(!std::filesystem::exists(path.string() + ".tmp"));
    write_text_atomic(path, "replaced");
    CHECK(read_text(path) == "replaced");
    std::filesystem::remove(path);
}

TEST_CASE("content hashes are stable") {
    CHECK(content_hash("abc") == content_hash("abc"));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(content_hash("").size() == 16);
}
