#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/qlearning.hpp"
#include "qlab/trajectory.hpp"
#include "qlab/verify.hpp"

namespace qlab {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest text that still round-trips: all floating-point output uses 17
/// significant digits.
std::string format_double(double value);

/// Writes content to path via a temporary file and rename, so readers never
/// observe a partial file.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// FNV-1a hash of a string, hex-encoded; used to fingerprint configs in
/// reports.
std::string content_hash(const std::string& text);

/// MDP file format:
/// {"states": N, "actions": M, "gamma": g,
///  "rewards": [[r(s,a)]], "transitions": [[[p(s,a,s')]]]}
std::string mdp_to_json(const FiniteMdp& m);
FiniteMdp mdp_from_json(const std::string& text);
void save_mdp(const FiniteMdp& m, const std::filesystem::path& path);
FiniteMdp load_mdp(const std::filesystem::path& path);

/// Trajectory dump: CSV with columns t,s,a,s_next.
std::string trajectory_to_csv(const TrajectoryLog& log);

/// Convergence trace: CSV with columns t,sup_error.
std::string trace_to_csv(const std::vector<QCheckpoint>& checkpoints);

/// Replay-process diagnostics: CSV with columns
/// t,s,a,absorb_mass,r_hat,max_abs_p_gap (gap against the true kernel row).
std::string arp_diagnostics_to_csv(const FiniteMdp& m,
                                   const ActionReplayProcess& arp,
                                   const std::vector<std::int64_t>& layers);

/// Solve report as JSON: the solution table, iteration count, exit residual,
/// certified error bound, and the greedy policy.
std::string solve_report_to_json(const SolveReport& report);

/// Q-learning run report as JSON: final table, optional final error,
/// checkpoint errors, and per-pair stepsize partial sums.
std::string qrun_report_to_json(const FiniteMdp& m, const QRunReport& report);

/// Suite report as JSON: check outcomes plus run metadata (master seed,
/// config hash, version).
std::string suite_report_to_json(const SuiteReport& report,
                                 std::uint64_t master_seed,
                                 const std::string& config_hash);

} // namespace qlab
