#include "arlab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "arlab/errors.hpp"

namespace arlab {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

std::vector<long long> geometric_checkpoints(long long T, int count) {
    if (T < 1) throw DomainError("checkpoints: T must be >= 1");
    std::vector<long long> cps;
    double logT = std::log(static_cast<double>(T));
    for (int i = 1; i <= count; ++i) {
        auto c = static_cast<long long>(std::llround(std::exp(logT * i / count)));
        c = std::clamp<long long>(c, 1, T);
        if (cps.empty() || c > cps.back()) cps.push_back(c);
    }
    if (cps.empty() || cps.back() != T) cps.push_back(T);
    return cps;
}

RegretTrace run_simulation_on(const TabularMdp& mdp, double gain_opt, const EnvConfig& env,
                              const AgentConfig& agent_cfg, long long T, std::uint64_t seed) {
    if (T < 1) throw DomainError("simulation: T must be >= 1");
    std::unique_ptr<Agent> agent = make_agent(agent_cfg, mdp);
    Rng rng(Rng::derive(seed, 0x5eedull));

    RegretTrace trace;
    trace.horizon = T;
    trace.seed = seed;
    trace.gain_opt = gain_opt;
    trace.rewards.resize(T);
    trace.env_json = env.to_json();
    trace.agent_json = agent_cfg.to_json();
    trace.checkpoints = geometric_checkpoints(T);

    int s = 0;
    for (long long t = 1; t <= T; ++t) {
        int a = agent->act(s);
        auto [next, reward] = sample_step(mdp, s, a, rng);
        agent->observe(s, a, reward, next);
        trace.rewards[t - 1] = reward;
        s = next;
    }

    trace.episode_starts = agent->episode_starts();
    long long sa = static_cast<long long>(mdp.n_states) * mdp.n_actions;
    if (T >= sa && static_cast<double>(trace.episode_starts.size()) >
                       episode_count_bound(mdp.n_states, mdp.n_actions, T))
        throw Error("simulation: episode count " + std::to_string(trace.episode_starts.size()) +
                    " violates the doubling bound");
    if (const CountsTable* c = agent->counts(); c && c->total_observations() != T)
        throw Error("simulation: count conservation failed");

    double cum = 0.0;
    std::size_t next_cp = 0;
    trace.regret.resize(trace.checkpoints.size());
    for (long long t = 1; t <= T; ++t) {
        cum += trace.rewards[t - 1];
        while (next_cp < trace.checkpoints.size() && trace.checkpoints[next_cp] == t) {
            trace.regret[next_cp] = static_cast<double>(t) * gain_opt - cum;
            ++next_cp;
        }
    }
    return trace;
}

RegretTrace run_simulation(const EnvConfig& env, const AgentConfig& agent_cfg, long long T,
                           std::uint64_t seed) {
    TabularMdp mdp = env.build();
    auto [gb, pol] = solve_bellman_optimality(mdp, 1e-10);
    GainBias exact = policy_gain_bias(mdp, pol);
    return run_simulation_on(mdp, exact.gain, env, agent_cfg, T, seed);
}

BatchResult batch_run(const EnvConfig& env, const AgentConfig& agent_cfg, long long T,
                      const std::vector<std::uint64_t>& seeds, int jobs) {
    if (seeds.empty()) throw DomainError("batch_run: need at least one seed");
    TabularMdp mdp = env.build();
    auto [gb, pol] = solve_bellman_optimality(mdp, 1e-10);
    double gain = policy_gain_bias(mdp, pol).gain;

    BatchResult out;
    out.traces.resize(seeds.size());
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                out.traces[i] = run_simulation_on(mdp, gain, env, agent_cfg, T, seeds[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    int n_workers = std::clamp<int>(jobs, 1, static_cast<int>(seeds.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    out.checkpoints = out.traces.front().checkpoints;
    const std::size_t n_cp = out.checkpoints.size();
    const std::size_t n = out.traces.size();

    // Seed-sorted reduction: the aggregate is invariant to the order the
    // seeds were listed in.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return seeds[i] < seeds[j]; });

    out.regret_mean.assign(n_cp, 0.0);
    out.regret_std.assign(n_cp, 0.0);
    for (std::size_t j = 0; j < n_cp; ++j) {
        double mean = 0.0;
        for (std::size_t i : order) mean += out.traces[i].regret[j];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i : order) {
            double d = out.traces[i].regret[j] - mean;
            ss += d * d;
        }
        out.regret_mean[j] = mean;
        out.regret_std[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    return out;
}

AnalyzeResult analyze_mdp(const EnvConfig& env, long long T, double delta,
                          long long mixing_policy_cap) {
    TabularMdp mdp = env.build();
    AnalyzeResult res;
    res.n_states = mdp.n_states;
    res.n_actions = mdp.n_actions;
    res.profile = build_profile(mdp, mixing_policy_cap);
    res.bounds = theorem_bound_evaluators(res.profile, mdp.n_states, mdp.n_actions, T, delta);

    res.csv_header = "S,psi,v_max,psi_sqrt_SA,sqrt_sum_V";
    res.csv_row = std::to_string(mdp.n_states) + "," + fmt(res.profile.span_bias) + "," +
                  fmt(res.profile.v_max) + "," + fmt(res.bounds.psi_sqrt_sa) + "," +
                  fmt(res.bounds.sqrt_sum_v);

    nlohmann::json doc;
    doc["n_states"] = mdp.n_states;
    doc["n_actions"] = mdp.n_actions;
    doc["gain_opt"] = res.profile.gain_opt;
    doc["span_bias"] = res.profile.span_bias;
    doc["diameter"] = res.profile.diameter;
    doc["v_max"] = res.profile.v_max;
    if (res.profile.mixing_time)
        doc["mixing_time"] = *res.profile.mixing_time;
    else
        doc["mixing_time"] = nullptr;
    doc["opt_actions"] = res.profile.opt_actions;
    doc["bias"] = res.profile.bias_opt;
    nlohmann::json variances = nlohmann::json::array(), gaps = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        nlohmann::json vrow = nlohmann::json::array(), grow = nlohmann::json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            vrow.push_back(res.profile.bias_variance[static_cast<std::size_t>(s) * mdp.n_actions + a]);
            grow.push_back(res.profile.gaps[static_cast<std::size_t>(s) * mdp.n_actions + a]);
        }
        variances.push_back(std::move(vrow));
        gaps.push_back(std::move(grow));
    }
    doc["bias_variance"] = std::move(variances);
    doc["gaps"] = std::move(gaps);
    doc["bounds"] = {{"horizon_T", T},
                     {"delta", delta},
                     {"ub_leading", res.bounds.ub_leading},
                     {"ub_full", res.bounds.ub_full},
                     {"lb", res.bounds.lb},
                     {"psi_sqrt_SA", res.bounds.psi_sqrt_sa},
                     {"sqrt_sum_V", res.bounds.sqrt_sum_v}};
    res.json = doc.dump(2);
    return res;
}

void write_trace_csv(const std::string& path, const RegretTrace& trace) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "t,regret\n";
    for (std::size_t j = 0; j < trace.checkpoints.size(); ++j)
        out << trace.checkpoints[j] << "," << fmt(trace.regret[j]) << "\n";
}

void write_batch_outputs(const std::string& out_dir, const BatchResult& batch, const EnvConfig& env,
                         const AgentConfig& agent, long long T,
                         const std::vector<std::uint64_t>& seeds) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "traces");
    for (const RegretTrace& trace : batch.traces)
        write_trace_csv((fs::path(out_dir) / "traces" / (std::to_string(trace.seed) + ".csv")).string(),
                        trace);
    std::ofstream agg(fs::path(out_dir) / "aggregate.csv");
    if (!agg) throw Error("cannot write aggregate.csv");
    agg << "t,regret_mean,regret_std\n";
    for (std::size_t j = 0; j < batch.checkpoints.size(); ++j)
        agg << batch.checkpoints[j] << "," << fmt(batch.regret_mean[j]) << ","
            << fmt(batch.regret_std[j]) << "\n";
    nlohmann::json echo;
    echo["env"] = nlohmann::json::parse(env.to_json());
    echo["agent"] = nlohmann::json::parse(agent.to_json());
    echo["T"] = T;
    echo["seeds"] = seeds;
    std::ofstream cfg(fs::path(out_dir) / "config_echo.json");
    cfg << echo.dump(2) << "\n";
}

} // namespace arlab
