#pragma once

#include <memory>
#include <string>
#include <vector>

#include "arlab/analytics.hpp"
#include "arlab/kl_opt.hpp"
#include "arlab/mdp.hpp"

namespace arlab {

/// Sufficient statistics of a learner. Visit, transition, and reward
/// totals update on every observation; `local` counts visits since the
/// current episode started, so the pre-episode totals used by the doubling
/// rule are n_total - local.
struct CountsTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<long long> visits;       // [s][a], all-time
    std::vector<long long> transitions;  // [s][a][s'], all-time
    std::vector<double> reward_sum;      // [s][a], all-time
    std::vector<long long> local;        // [s][a], since episode start
    long long episode_index = 0;         // k, number of planning events so far
    long long episode_start_time = 1;    // t_k

    static CountsTable make(int S, int A);

    long long n_total(int s, int a) const { return visits[idx(s, a)]; }
    long long n_snapshot(int s, int a) const { return visits[idx(s, a)] - local[idx(s, a)]; }
    long long n_plus(int s, int a) const { return std::max<long long>(1, n_total(s, a)); }
    long long n_local(int s, int a) const { return local[idx(s, a)]; }
    long long n_transition(int s, int a, int y) const {
        return transitions[(idx(s, a)) * n_states + y];
    }

    double mu_hat(int s, int a) const { return reward_sum[idx(s, a)] / n_plus(s, a); }

    /// Empirical next-state row; uniform before the first visit.
    void p_hat(int s, int a, std::vector<double>& out) const;

    void record(int s, int a, double reward, int next);
    void start_new_episode(long long t);

    long long total_observations() const;

    std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * n_actions + a; }
};

/// True when playing (s, a) again would exceed its pre-episode visit count,
/// i.e. local(s,a) >= max(1, n_snapshot(s,a)).
bool episode_should_end(const CountsTable& counts, int s, int a);

/// Ceiling on the number of episodes the doubling rule can start in t steps.
double episode_count_bound(int S, int A, long long t);

struct OptimisticPlan {
    std::vector<int> policy;       // deterministic, per state
    double optimistic_gain = 0.0;  // midpoint of the final difference interval
    std::vector<double> u;         // final value iterate (pre-centering)
    double evi_accuracy = 0.0;     // achieved span of the difference
    long long sweeps = 0;
};

/// Extended value iteration over the KL confidence regions:
///   u'(s) = max_a [ min(mu_hat + sqrt(c_mu / N+), 1)
///                   + max_{KL(p_hat, q) <= c_p / N+} q . u ]
/// stopped when the difference span falls below `accuracy`. Values are
/// re-centered every sweep; greedy ties break toward the lowest action.
OptimisticPlan extended_value_iteration_kl(const CountsTable& counts,
                                           const ConfidenceConstants& constants, double accuracy,
                                           long long max_sweeps = 1'000'000);

/// L1-ball radii of the UCRL2 baseline at plan time t:
///   transition: sqrt(14 S log(2 A t / delta) / N+), capped at 2
///   reward:     sqrt(3.5 log(2 S A t / delta) / N+)
struct L1Constants {
    double delta = 0.05;
};

OptimisticPlan extended_value_iteration_l1(const CountsTable& counts, const L1Constants& constants,
                                           long long plan_time, double accuracy,
                                           long long max_sweeps = 1'000'000);

/// Numeric evaluation of the regret-bound formulas on a solved instance.
struct TheoremBounds {
    double ub_leading = 0.0;   // 31 sqrt(S sum_V T B)
    double ub_full = 0.0;      // + (35 S sqrt(A) + sqrt(2) D + 1) sqrt(T B)
    double lb = 0.0;           // 0.0123 sqrt(v_max S A T)
    double psi_sqrt_sa = 0.0;  // span comparison column
    double sqrt_sum_v = 0.0;   // variance comparison column
};

TheoremBounds theorem_bound_evaluators(const MdpProfile& profile, int S, int A, long long T,
                                       double delta);

class Agent {
  public:
    virtual ~Agent() = default;
    virtual int act(int s) = 0;
    virtual void observe(int s, int a, double reward, int next) = 0;
    virtual const std::vector<long long>& episode_starts() const = 0;
    virtual const CountsTable* counts() const { return nullptr; }
};

struct AgentConfig {
    std::string algo = "kl_ucrl";  // kl_ucrl | ucrl2 | oracle
    double delta = 0.05;
    long long horizon_T = 100'000;
    std::string evi_accuracy_mode = "one_over_sqrt_tk";  // or "fixed"
    double evi_accuracy_fixed = 1e-4;
    long long max_evi_sweeps = 1'000'000;

    std::string to_json() const;
};

AgentConfig agent_config_from_json(const std::string& text);
AgentConfig agent_config_from_json_file(const std::string& path);

/// Learners read only the shape (S, A) of `mdp`; the oracle solves it.
std::unique_ptr<Agent> make_agent(const AgentConfig& config, const TabularMdp& mdp);

} // namespace arlab
