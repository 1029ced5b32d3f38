// qlab: command-line front end for the finite-MDP Q-learning laboratory.
//
// Subcommands:
//   gen     write a random MDP file
//   solve   solve an MDP file exactly and write a solve report
//   qlearn  run a Q-learning experiment, writing a trace CSV and a report
//   verify  run a verification suite and write its JSON report
//
// Exit codes: 0 success, 1 failed verification check, 2 configuration or
// validation error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qlab/arp.hpp"
#include "qlab/mdp.hpp"
#include "qlab/qlearning.hpp"
#include "qlab/rng.hpp"
#include "qlab/serialize.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/trajectory.hpp"
#include "qlab/verify.hpp"

namespace {

using nlohmann::json;

struct Options {
    std::uint64_t seed = 1;
    std::string mdp_path;
    int states = 3;
    int actions = 2;
    double gamma = 0.9;
    double sparsity = 1.0;
    double reward_min = 0.0;
    double reward_max = 1.0;
    std::string sampler = "round_robin";
    std::string stepsize = "per_visit_poly:1,1";
    std::int64_t horizon = 10000;
    std::int64_t checkpoint_every = 0;
    double tol = 1e-8;
    std::string suite = "all";
    std::string out;
    std::string trace_path;
    std::string trajectory_path;
    std::string arp_diag_path;
    qlab::VerifyConfig verify;
    std::string config_text; // canonical text used for the config hash
};

template <typename T>
void read_field(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

void apply_config_file(Options& opts, const std::string& path) {
    json j;
    try {
        j = json::parse(qlab::read_text(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config file: ") +
                                    e.what());
    }
    read_field(j, "seed", opts.seed);
    read_field(j, "mdp", opts.mdp_path);
    read_field(j, "horizon", opts.horizon);
    read_field(j, "checkpoint_every", opts.checkpoint_every);
    read_field(j, "tol", opts.tol);
    read_field(j, "suite", opts.suite);
    read_field(j, "sampler", opts.sampler);
    read_field(j, "stepsize", opts.stepsize);
    read_field(j, "out", opts.out);
    read_field(j, "trace", opts.trace_path);
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        read_field(g, "states", opts.states);
        read_field(g, "actions", opts.actions);
        read_field(g, "gamma", opts.gamma);
        read_field(g, "sparsity", opts.sparsity);
        read_field(g, "reward_min", opts.reward_min);
        read_field(g, "reward_max", opts.reward_max);
    }
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        read_field(v, "ensemble_size", opts.verify.ensemble_size);
        read_field(v, "probes_per_check", opts.verify.probes_per_check);
        read_field(v, "limits_horizon", opts.verify.limits_horizon);
        read_field(v, "limits_r_gap_rel", opts.verify.limits_r_gap_rel);
        read_field(v, "limits_p_gap", opts.verify.limits_p_gap);
        read_field(v, "limits_backslide_slack",
                   opts.verify.limits_backslide_slack);
        read_field(v, "convergence_horizon", opts.verify.convergence_horizon);
        read_field(v, "convergence_seeds", opts.verify.convergence_n_seeds);
        read_field(v, "convergence_threshold",
                   opts.verify.convergence_threshold);
    }
    opts.config_text = j.dump();
}

/// Parses "round_robin", "uniform_iid", or
/// "follow_with_restart[:epsilon,restart_prob]".
qlab::SamplerKind parse_sampler(const std::string& spec) {
    if (spec == "round_robin") return qlab::SamplerKind::round_robin();
    if (spec == "uniform_iid") return qlab::SamplerKind::uniform_iid();
    if (spec == "follow_with_restart")
        return qlab::SamplerKind::follow_with_restart();
    const std::string prefix = "follow_with_restart:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string args = spec.substr(prefix.size());
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(
                "expected follow_with_restart:epsilon,restart_prob");
        return qlab::SamplerKind::follow_with_restart(
            std::stod(args.substr(0, comma)),
            std::stod(args.substr(comma + 1)));
    }
    throw std::invalid_argument("unknown sampler: " + spec);
}

/// Parses "constant:c", "global_poly:c,p", "per_visit_poly:c,p", or the
/// alias "harmonic" for per_visit_poly:1,1.
qlab::StepsizeSchedule parse_stepsize(const std::string& spec) {
    if (spec == "harmonic")
        return qlab::StepsizeSchedule::per_visit_polynomial(1.0, 1.0);
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("unknown stepsize schedule: " + spec);
    const std::string kind = spec.substr(0, colon);
    const std::string args = spec.substr(colon + 1);
    if (kind == "constant")
        return qlab::StepsizeSchedule::constant(std::stod(args));
    const auto comma = args.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("expected " + kind + ":c,p");
    const double c = std::stod(args.substr(0, comma));
    const double p = std::stod(args.substr(comma + 1));
    if (kind == "global_poly")
        return qlab::StepsizeSchedule::global_polynomial(c, p);
    if (kind == "per_visit_poly")
        return qlab::StepsizeSchedule::per_visit_polynomial(c, p);
    throw std::invalid_argument("unknown stepsize schedule: " + spec);
}

qlab::FiniteMdp resolve_mdp(const Options& opts) {
    if (!opts.mdp_path.empty()) return qlab::load_mdp(opts.mdp_path);
    qlab::RandomMdpParams params;
    params.n_states = opts.states;
    params.n_actions = opts.actions;
    params.gamma = opts.gamma;
    params.sparsity = opts.sparsity;
    params.reward_min = opts.reward_min;
    params.reward_max = opts.reward_max;
    qlab::RngStream rng(opts.seed, "mdp-gen");
    return qlab::random_mdp(params, rng);
}

std::string effective_config_hash(const Options& opts) {
    // The report fingerprints whatever determined the run: the config file
    // when one was given, else the master seed.
    if (!opts.config_text.empty()) return qlab::content_hash(opts.config_text);
    return qlab::content_hash("seed=" + std::to_string(opts.seed));
}

int cmd_gen(const Options& opts) {
    qlab::RngStream rng(opts.seed, "mdp-gen");
    qlab::RandomMdpParams params;
    params.n_states = opts.states;
    params.n_actions = opts.actions;
    params.gamma = opts.gamma;
    params.sparsity = opts.sparsity;
    params.reward_min = opts.reward_min;
    params.reward_max = opts.reward_max;
    const qlab::FiniteMdp mdp = qlab::random_mdp(params, rng);

    const std::string path = opts.out.empty() ? "mdp.json" : opts.out;
    qlab::save_mdp(mdp, path);
    std::cout << "wrote " << path << " (" << mdp.n_states << " states, "
              << mdp.n_actions << " actions, gamma "
              << qlab::format_double(mdp.gamma) << ")\n";
    return 0;
}

int cmd_solve(const Options& opts) {
    if (opts.mdp_path.empty())
        throw std::invalid_argument("solve requires --mdp");
    const qlab::FiniteMdp mdp = qlab::load_mdp(opts.mdp_path);
    const qlab::SolveReport report = qlab::value_iteration(mdp, opts.tol);
    const std::string text = qlab::solve_report_to_json(report);
    if (opts.out.empty()) {
        std::cout << text;
    } else {
        qlab::write_text_atomic(opts.out, text);
        std::cout << "wrote " << opts.out << " (iterations "
                  << report.iterations << ", certified error "
                  << qlab::format_double(report.error_bound) << ")\n";
    }
    return 0;
}

int cmd_qlearn(const Options& opts) {
    const qlab::FiniteMdp mdp = resolve_mdp(opts);
    const qlab::SamplerKind sampler = parse_sampler(opts.sampler);
    const qlab::StepsizeSchedule schedule = parse_stepsize(opts.stepsize);
    if (opts.horizon < 0)
        throw std::invalid_argument("horizon must be nonnegative");

    qlab::RngStream trajectory_rng(opts.seed, "trajectory");
    const qlab::TrajectoryLog log =
        qlab::generate(mdp, sampler, opts.horizon, trajectory_rng);

    const qlab::SolveReport solved = qlab::value_iteration(mdp, 1e-10);

    qlab::QLearnOptions run_options;
    run_options.q_star = &solved.q_star;
    run_options.checkpoint_every =
        opts.checkpoint_every > 0
            ? opts.checkpoint_every
            : std::max<std::int64_t>(1, opts.horizon / 100);
    run_options.snapshot_tables = false;
    const qlab::QRunReport report =
        qlab::run_qlearning(mdp, log, schedule, run_options);

    const std::string trace_path =
        opts.trace_path.empty() ? "qlearn_trace.csv" : opts.trace_path;
    qlab::write_text_atomic(trace_path, qlab::trace_to_csv(report.checkpoints));

    const std::string report_path =
        opts.out.empty() ? "qlearn_report.json" : opts.out;
    qlab::write_text_atomic(report_path,
                            qlab::qrun_report_to_json(mdp, report));

    if (!opts.trajectory_path.empty())
        qlab::write_text_atomic(opts.trajectory_path,
                                qlab::trajectory_to_csv(log));

    std::cout << "wrote " << trace_path << " and " << report_path;
    if (report.final_sup_error)
        std::cout << " (final sup error "
                  << qlab::format_double(*report.final_sup_error) << ")";
    std::cout << "\n";
    return 0;
}

/// Re-runs the limits instance with an incrementally tracked replay process,
/// emitting one diagnostics row block per geometric checkpoint.
void write_arp_diagnostics(const qlab::VerifyConfig& config,
                           const std::string& path) {
    const qlab::EnsembleInstance instance = qlab::make_limits_instance(config);
    const qlab::FiniteMdp& mdp = instance.mdp;
    const qlab::TrajectoryLog log = instance.make_log();
    const std::vector<double> alphas =
        qlab::stepsizes_along(log, instance.schedule);

    qlab::ActionReplayProcess arp(mdp, false);
    const std::string header = "t,s,a,absorb_mass,r_hat,max_abs_p_gap\n";
    std::string csv = header;
    const auto checkpoints = qlab::geometric_times(config.limits_horizon);
    auto next = checkpoints.begin();
    for (std::int64_t t = 0; t < log.size(); ++t) {
        qlab::extend_arp(arp, t, log.step(t),
                         alphas[static_cast<std::size_t>(t)]);
        while (next != checkpoints.end() && *next == t + 1) {
            csv += qlab::arp_diagnostics_to_csv(mdp, arp, {t + 1})
                       .substr(header.size());
            ++next;
        }
    }
    qlab::write_text_atomic(path, csv);
}

int cmd_verify(const Options& opts) {
    const qlab::Suite suite = qlab::parse_suite(opts.suite);
    qlab::VerifyConfig config = opts.verify;
    config.master_seed = opts.seed;

    const qlab::SuiteReport report = qlab::run_suite(suite, config);

    for (const qlab::CheckOutcome& check : report.checks)
        std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name
                  << " worst_violation="
                  << qlab::format_double(check.worst_violation)
                  << " tolerance=" << qlab::format_double(check.tolerance)
                  << "\n";

    const std::string path =
        opts.out.empty() ? "verify_report.json" : opts.out;
    qlab::write_text_atomic(
        path, qlab::suite_report_to_json(report, config.master_seed,
                                         effective_config_hash(opts)));
    std::cout << "wrote " << path << "\n";

    if (!opts.arp_diag_path.empty() &&
        (suite == qlab::Suite::limits || suite == qlab::Suite::all)) {
        write_arp_diagnostics(config, opts.arp_diag_path);
        std::cout << "wrote " << opts.arp_diag_path << "\n";
    }

    return report.all_passed() ? 0 : 1;
}

void add_common_flags(CLI::App* sub, Options& opts, std::string& config_path) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", opts.seed, "master seed (64-bit)");
    sub->add_option("--mdp", opts.mdp_path, "MDP file path");
    sub->add_option("--out", opts.out, "output file path");
    sub->add_option("--gamma", opts.gamma, "discount in [0, 1)");
    sub->add_option("--states", opts.states, "number of states");
    sub->add_option("--actions", opts.actions, "number of actions");
    sub->add_option("--sparsity", opts.sparsity,
                    "kernel row density in [0, 1]");
    sub->add_option("--horizon", opts.horizon, "number of trajectory steps");
    sub->add_option("--sampler", opts.sampler, "visiting strategy spec");
    sub->add_option("--stepsize", opts.stepsize, "stepsize schedule spec");
    sub->add_option("--checkpoint-every", opts.checkpoint_every,
                    "checkpoint cadence (0 = horizon/100)");
    sub->add_option("--tol", opts.tol, "solver tolerance");
    sub->add_option("--suite", opts.suite,
                    "verify suite: theorem3|limits|bounds|convergence|all");
    sub->add_option("--reward-min", opts.reward_min,
                    "generator reward lower bound");
    sub->add_option("--reward-max", opts.reward_max,
                    "generator reward upper bound");
    sub->add_option("--trace", opts.trace_path, "trace CSV output path");
    sub->add_option("--dump-trajectory", opts.trajectory_path,
                    "trajectory CSV output path");
    sub->add_option("--arp-diag", opts.arp_diag_path,
                    "replay diagnostics CSV output path");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-MDP Q-learning laboratory"};
    app.require_subcommand(1);

    // Flag values land in a separate copy so the file config can be layered
    // underneath: defaults, then config file, then explicit flags.
    Options flag_values;
    std::string config_path;

    CLI::App* gen = app.add_subcommand("gen", "generate a random MDP file");
    CLI::App* solve = app.add_subcommand("solve", "solve an MDP exactly");
    CLI::App* qlearn =
        app.add_subcommand("qlearn", "run a Q-learning experiment");
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    for (CLI::App* sub : {gen, solve, qlearn, verify})
        add_common_flags(sub, flag_values, config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();

    try {
        Options opts;
        if (!config_path.empty()) apply_config_file(opts, config_path);

        const auto take = [&](const char* flag, auto member) {
            if (sub->count(flag) > 0) opts.*member = flag_values.*member;
        };
        take("--seed", &Options::seed);
        take("--mdp", &Options::mdp_path);
        take("--out", &Options::out);
        take("--gamma", &Options::gamma);
        take("--states", &Options::states);
        take("--actions", &Options::actions);
        take("--sparsity", &Options::sparsity);
        take("--horizon", &Options::horizon);
        take("--sampler", &Options::sampler);
        take("--stepsize", &Options::stepsize);
        take("--checkpoint-every", &Options::checkpoint_every);
        take("--tol", &Options::tol);
        take("--suite", &Options::suite);
        take("--reward-min", &Options::reward_min);
        take("--reward-max", &Options::reward_max);
        take("--trace", &Options::trace_path);
        take("--dump-trajectory", &Options::trajectory_path);
        take("--arp-diag", &Options::arp_diag_path);

        if (sub == gen) return cmd_gen(opts);
        if (sub == solve) return cmd_solve(opts);
        if (sub == qlearn) return cmd_qlearn(opts);
        if (sub == verify) return cmd_verify(opts);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
