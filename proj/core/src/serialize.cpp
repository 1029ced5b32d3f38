#include "qlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qlab {

namespace {

using nlohmann::json;

std::string escape_json(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

const json& require_field(const json& j, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string("missing field: ") + key);
    return j.at(key);
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
    const std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write to " + tmp.string());
        out << content;
        if (!out)
            throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

std::string mdp_to_json(const FiniteMdp& m) {
    std::string out = "{\n";
    out += "  \"states\": " + std::to_string(m.n_states) + ",\n";
    out += "  \"actions\": " + std::to_string(m.n_actions) + ",\n";
    out += "  \"gamma\": " + format_double(m.gamma) + ",\n";
    out += "  \"rewards\": [";
    for (int s = 0; s < m.n_states; ++s) {
        out += s == 0 ? "[" : ", [";
        for (int a = 0; a < m.n_actions; ++a) {
            if (a > 0) out += ", ";
            out += format_double(m.reward(s, a));
        }
        out += "]";
    }
    out += "],\n";
    out += "  \"transitions\": [";
    for (int s = 0; s < m.n_states; ++s) {
        out += s == 0 ? "[" : ", [";
        for (int a = 0; a < m.n_actions; ++a) {
            out += a == 0 ? "[" : ", [";
            for (int sp = 0; sp < m.n_states; ++sp) {
                if (sp > 0) out += ", ";
                out += format_double(m.transition(s, a, sp));
            }
            out += "]";
        }
        out += "]";
    }
    out += "]\n}\n";
    return out;
}

FiniteMdp mdp_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed MDP file: ") +
                                    e.what());
    }

    FiniteMdp m;
    try {
        m.n_states = require_field(j, "states").get<int>();
        m.n_actions = require_field(j, "actions").get<int>();
        m.gamma = require_field(j, "gamma").get<double>();
        if (m.n_states < 1 || m.n_actions < 1)
            throw std::invalid_argument("state and action counts must be >= 1");

        const json& rewards = require_field(j, "rewards");
        const json& transitions = require_field(j, "transitions");
        m.rewards.reserve(m.n_pairs());
        m.transitions.reserve(m.n_pairs() * m.n_states);
        if (rewards.size() != static_cast<std::size_t>(m.n_states) ||
            transitions.size() != static_cast<std::size_t>(m.n_states))
            throw std::invalid_argument("outer dimension mismatch");
        for (int s = 0; s < m.n_states; ++s) {
            const json& reward_row = rewards.at(s);
            const json& transition_row = transitions.at(s);
            if (reward_row.size() != static_cast<std::size_t>(m.n_actions) ||
                transition_row.size() != static_cast<std::size_t>(m.n_actions))
                throw std::invalid_argument("action dimension mismatch");
            for (int a = 0; a < m.n_actions; ++a) {
                m.rewards.push_back(reward_row.at(a).get<double>());
                const json& row = transition_row.at(a);
                if (row.size() != static_cast<std::size_t>(m.n_states))
                    throw std::invalid_argument("successor dimension mismatch");
                for (int sp = 0; sp < m.n_states; ++sp)
                    m.transitions.push_back(row.at(sp).get<double>());
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed MDP file: ") +
                                    e.what());
    }
    validate_mdp(m);
    return m;
}

void save_mdp(const FiniteMdp& m, const std::filesystem::path& path) {
    write_text_atomic(path, mdp_to_json(m));
}

FiniteMdp load_mdp(const std::filesystem::path& path) {
    return mdp_from_json(read_text(path));
}

std::string trajectory_to_csv(const TrajectoryLog& log) {
    std::string out = "t,s,a,s_next\n";
    for (std::int64_t t = 0; t < log.size(); ++t) {
        const Transition& tr = log.step(t);
        out += std::to_string(t) + "," + std::to_string(tr.s) + "," +
               std::to_string(tr.a) + "," + std::to_string(tr.s_next) + "\n";
    }
    return out;
}

std::string trace_to_csv(const std::vector<QCheckpoint>& checkpoints) {
    std::string out = "t,sup_error\n";
    for (const QCheckpoint& cp : checkpoints) {
        if (!cp.sup_error) continue;
        out += std::to_string(cp.t) + "," + format_double(*cp.sup_error) + "\n";
    }
    return out;
}

std::string arp_diagnostics_to_csv(const FiniteMdp& m,
                                   const ActionReplayProcess& arp,
                                   const std::vector<std::int64_t>& layers) {
    std::string out = "t,s,a,absorb_mass,r_hat,max_abs_p_gap\n";
    for (std::int64_t t : layers) {
        const ArpLayer& layer = arp.layer(t);
        const std::vector<double> pooled = aggregate_dynamics(arp, t);
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const std::size_t pair = m.pair_index(s, a);
                double gap = 0.0;
                for (int sp = 0; sp < m.n_states; ++sp)
                    gap = std::max(gap,
                                   std::abs(pooled[pair * m.n_states + sp] -
                                            m.transition(s, a, sp)));
                out += std::to_string(t) + "," + std::to_string(s) + "," +
                       std::to_string(a) + "," +
                       format_double(layer.absorb_mass[pair]) + "," +
                       format_double(layer.effective_reward[pair]) + "," +
                       format_double(gap) + "\n";
            }
        }
    }
    return out;
}

namespace {

std::string table_to_json(const ActionValueTable& q) {
    std::string out = "[";
    for (int s = 0; s < q.n_states(); ++s) {
        out += s == 0 ? "[" : ", [";
        for (int a = 0; a < q.n_actions(); ++a) {
            if (a > 0) out += ", ";
            out += format_double(q(s, a));
        }
        out += "]";
    }
    out += "]";
    return out;
}

} // namespace

std::string solve_report_to_json(const SolveReport& report) {
    const std::vector<int> policy = greedy_policy(report.q_star);
    std::string out = "{\n";
    out += "  \"q_star\": " + table_to_json(report.q_star) + ",\n";
    out += "  \"iterations\": " + std::to_string(report.iterations) + ",\n";
    out += "  \"residual\": " + format_double(report.residual) + ",\n";
    out += "  \"error_bound\": " + format_double(report.error_bound) + ",\n";
    out += "  \"greedy_policy\": [";
    for (std::size_t s = 0; s < policy.size(); ++s) {
        if (s > 0) out += ", ";
        out += std::to_string(policy[s]);
    }
    out += "]\n}\n";
    return out;
}

std::string qrun_report_to_json(const FiniteMdp& m, const QRunReport& report) {
    std::string out = "{\n";
    out += "  \"final_table\": " + table_to_json(report.final_table) +
           ",\n";
    out += "  \"final_sup_error\": ";
    out += report.final_sup_error ? format_double(*report.final_sup_error)
                                  : "null";
    out += ",\n  \"checkpoints\": [";
    bool first = true;
    for (const QCheckpoint& cp : report.checkpoints) {
        if (!cp.sup_error) continue;
        if (!first) out += ", ";
        first = false;
        out += "{\"t\": " + std::to_string(cp.t) +
               ", \"sup_error\": " + format_double(*cp.sup_error) + "}";
    }
    out += "],\n  \"rm_partial_sums\": [";
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            const PairStepsizeSums& sums =
                report.rm_partial_sums[m.pair_index(s, a)];
            if (s != 0 || a != 0) out += ", ";
            out += "{\"s\": " + std::to_string(s) +
                   ", \"a\": " + std::to_string(a) +
                   ", \"visits\": " + std::to_string(sums.visits) +
                   ", \"sum_alpha\": " + format_double(sums.sum_alpha) +
                   ", \"sum_alpha_sq\": " + format_double(sums.sum_alpha_sq) +
                   "}";
        }
    }
    out += "]\n}\n";
    return out;
}

std::string suite_report_to_json(const SuiteReport& report,
                                 std::uint64_t master_seed,
                                 const std::string& config_hash) {
    std::string out = "{\n";
    out += "  \"metadata\": {\"seed\": " + std::to_string(master_seed) +
           ", \"config_hash\": \"" + config_hash + "\", \"version\": \"" +
           kVersion + "\", \"suite\": \"" + report.suite + "\"},\n";
    out += "  \"all_passed\": ";
    out += report.all_passed() ? "true" : "false";
    out += ",\n  \"checks\": [";
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const CheckOutcome& check = report.checks[i];
        if (i > 0) out += ", ";
        out += "\n    {\"name\": \"" + escape_json(check.name) +
               "\", \"category\": \"" + escape_json(check.category) +
               "\", \"passed\": " + (check.passed ? "true" : "false") +
               ", \"worst_violation\": " + format_double(check.worst_violation) +
               ", \"tolerance\": " + format_double(check.tolerance) +
               ", \"witness\": \"" + escape_json(check.witness) + "\"}";
    }
    out += "\n  ]";
    if (!report.limit_trace.empty()) {
        out += ",\n  \"limit_trace\": [";
        for (std::size_t i = 0; i < report.limit_trace.size(); ++i) {
            const LimitGapPoint& point = report.limit_trace[i];
            if (i > 0) out += ", ";
            out += "{\"t\": " + std::to_string(point.t) +
                   ", \"r_gap\": " + format_double(point.r_gap) +
                   ", \"p_gap\": " + format_double(point.p_gap) + "}";
        }
        out += "]";
    }
    out += "\n}\n";
    return out;
}

} // namespace qlab
