#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arlab/agents.hpp"
#include "arlab/envs.hpp"

namespace arlab {

/// One simulation run. The effective-regret curve compares against the true
/// optimal gain of the environment (never the agent's own estimate):
/// regret(t) = t * gain_opt - sum of collected rewards up to t.
struct RegretTrace {
    long long horizon = 0;
    std::uint64_t seed = 0;
    double gain_opt = 0.0;
    std::vector<double> rewards;            // per step, length horizon
    std::vector<long long> episode_starts;  // plan times t_k
    std::vector<long long> checkpoints;     // strictly increasing, ends at horizon
    std::vector<double> regret;             // effective regret at each checkpoint
    std::string env_json;
    std::string agent_json;

    double final_regret() const { return regret.back(); }
};

/// About `count` geometrically spaced integers in [1, T], deduplicated,
/// always ending at T.
std::vector<long long> geometric_checkpoints(long long T, int count = 100);

RegretTrace run_simulation(const EnvConfig& env, const AgentConfig& agent, long long T,
                           std::uint64_t seed);

/// Same run against an already-built model with a precomputed optimal gain
/// (what batch_run uses so the solve happens once).
RegretTrace run_simulation_on(const TabularMdp& mdp, double gain_opt, const EnvConfig& env,
                              const AgentConfig& agent, long long T, std::uint64_t seed);

struct BatchResult {
    std::vector<RegretTrace> traces;  // input seed order
    std::vector<long long> checkpoints;
    std::vector<double> regret_mean;
    std::vector<double> regret_std;   // sample std, 0 for a single seed
};

/// Runs are independent and may execute on `jobs` threads; the aggregate is
/// reduced in seed-sorted order so it does not depend on scheduling or on
/// the order of the seed list.
BatchResult batch_run(const EnvConfig& env, const AgentConfig& agent, long long T,
                      const std::vector<std::uint64_t>& seeds, int jobs = 1);

struct AnalyzeResult {
    int n_states = 0;
    int n_actions = 0;
    MdpProfile profile;
    TheoremBounds bounds;
    std::string csv_header;  // S,psi,v_max,psi_sqrt_SA,sqrt_sum_V
    std::string csv_row;
    std::string json;
};

AnalyzeResult analyze_mdp(const EnvConfig& env, long long T = 100'000, double delta = 0.05,
                          long long mixing_policy_cap = 4096);

/// File emitters shared by the CLI: traces/<seed>.csv, aggregate.csv and
/// config_echo.json under `out_dir`.
void write_trace_csv(const std::string& path, const RegretTrace& trace);
void write_batch_outputs(const std::string& out_dir, const BatchResult& batch, const EnvConfig& env,
                         const AgentConfig& agent, long long T,
                         const std::vector<std::uint64_t>& seeds);

} // namespace arlab
