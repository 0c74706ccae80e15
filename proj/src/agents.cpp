#include "arlab/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "arlab/errors.hpp"

namespace arlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CountsTable CountsTable::make(int S, int A) {
    CountsTable c;
    c.n_states = S;
    c.n_actions = A;
    c.visits.assign(static_cast<std::size_t>(S) * A, 0);
    c.transitions.assign(static_cast<std::size_t>(S) * A * S, 0);
    c.reward_sum.assign(static_cast<std::size_t>(S) * A, 0.0);
    c.local.assign(static_cast<std::size_t>(S) * A, 0);
    return c;
}

void CountsTable::p_hat(int s, int a, std::vector<double>& out) const {
    out.assign(n_states, 0.0);
    long long n = n_total(s, a);
    if (n == 0) {
        std::fill(out.begin(), out.end(), 1.0 / n_states);
        return;
    }
    const long long* row = transitions.data() + idx(s, a) * n_states;
    for (int y = 0; y < n_states; ++y) out[y] = static_cast<double>(row[y]) / n;
}

void CountsTable::record(int s, int a, double reward, int next) {
    std::size_t i = idx(s, a);
    visits[i] += 1;
    local[i] += 1;
    transitions[i * n_states + next] += 1;
    reward_sum[i] += reward;
}

void CountsTable::start_new_episode(long long t) {
    std::fill(local.begin(), local.end(), 0);
    episode_index += 1;
    episode_start_time = t;
}

long long CountsTable::total_observations() const {
    return std::accumulate(visits.begin(), visits.end(), 0LL);
}

bool episode_should_end(const CountsTable& counts, int s, int a) {
    return counts.n_local(s, a) >= std::max<long long>(1, counts.n_snapshot(s, a));
}

double episode_count_bound(int S, int A, long long t) {
    double sa = static_cast<double>(S) * A;
    return sa * std::log2(8.0 * static_cast<double>(t) / sa);
}

namespace {

/// Shared sweep loop of extended value iteration. `reward_opt` and
/// `transition_max` encapsulate the confidence-region geometry.
OptimisticPlan evi_loop(int S, int A, const std::function<double(int, int)>& reward_opt,
                        const std::function<double(int, int, const std::vector<double>&)>& transition_max,
                        double accuracy, long long max_sweeps) {
    if (!(accuracy > 0.0)) throw DomainError("evi: accuracy must be > 0");
    std::vector<double> u(S, 0.0), u_next(S, 0.0);
    std::vector<int> greedy(S, 0);
    double prev_span = kInf;
    for (long long sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int s = 0; s < S; ++s) {
            double best = -kInf;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = reward_opt(s, a) + transition_max(s, a, u);
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            u_next[s] = best;
            greedy[s] = best_a;
        }
        double dmax = -kInf, dmin = kInf;
        for (int s = 0; s < S; ++s) {
            double d = u_next[s] - u[s];
            dmax = std::max(dmax, d);
            dmin = std::min(dmin, d);
        }
        double sp = dmax - dmin;
        if (sp > prev_span + 1e-12)
            throw NumericalFailure("evi: difference span increased from " + std::to_string(prev_span) +
                                   " to " + std::to_string(sp));
        prev_span = sp;
        if (sp <= accuracy) {
            OptimisticPlan plan;
            plan.policy = greedy;
            plan.optimistic_gain = 0.5 * (dmax + dmin);
            plan.u = u;
            plan.evi_accuracy = sp;
            plan.sweeps = sweep;
            return plan;
        }
        double shift = *std::min_element(u_next.begin(), u_next.end());
        for (int s = 0; s < S; ++s) u[s] = u_next[s] - shift;
    }
    throw NoConvergence("evi: span did not reach " + std::to_string(accuracy));
}

} // namespace

OptimisticPlan extended_value_iteration_kl(const CountsTable& counts,
                                           const ConfidenceConstants& constants, double accuracy,
                                           long long max_sweeps) {
    const int S = counts.n_states, A = counts.n_actions;
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(S) * A);
    std::vector<double> radii(static_cast<std::size_t>(S) * A);
    std::vector<double> rewards(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            std::size_t i = counts.idx(s, a);
            counts.p_hat(s, a, centers[i]);
            double npl = static_cast<double>(counts.n_plus(s, a));
            radii[i] = constants.c_p / npl;
            rewards[i] = std::min(1.0, counts.mu_hat(s, a) + std::sqrt(constants.c_mu / npl));
        }
    }
    auto reward_opt = [&](int s, int a) { return rewards[counts.idx(s, a)]; };
    auto transition_max = [&](int s, int a, const std::vector<double>& u) {
        std::size_t i = counts.idx(s, a);
        return max_expectation_kl_ball(centers[i], u, radii[i], 1e-13).value;
    };
    return evi_loop(S, A, reward_opt, transition_max, accuracy, max_sweeps);
}

OptimisticPlan extended_value_iteration_l1(const CountsTable& counts, const L1Constants& constants,
                                           long long plan_time, double accuracy,
                                           long long max_sweeps) {
    const int S = counts.n_states, A = counts.n_actions;
    double t = static_cast<double>(std::max<long long>(plan_time, 2));
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(S) * A);
    std::vector<double> radii(static_cast<std::size_t>(S) * A);
    std::vector<double> rewards(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            std::size_t i = counts.idx(s, a);
            counts.p_hat(s, a, centers[i]);
            double npl = static_cast<double>(counts.n_plus(s, a));
            radii[i] = std::min(2.0, std::sqrt(14.0 * S * std::log(2.0 * A * t / constants.delta) / npl));
            rewards[i] = std::min(
                1.0, counts.mu_hat(s, a) +
                         std::sqrt(3.5 * std::log(2.0 * S * A * t / constants.delta) / npl));
        }
    }
    auto reward_opt = [&](int s, int a) { return rewards[counts.idx(s, a)]; };
    auto transition_max = [&](int s, int a, const std::vector<double>& u) {
        std::size_t i = counts.idx(s, a);
        return max_expectation_l1_ball(centers[i], u, radii[i]).value;
    };
    return evi_loop(S, A, reward_opt, transition_max, accuracy, max_sweeps);
}

TheoremBounds theorem_bound_evaluators(const MdpProfile& profile, int S, int A, long long T,
                                       double delta) {
    ConfidenceConstants cc = confidence_constants(S, A, T, delta);
    double sum_v = std::accumulate(profile.bias_variance.begin(), profile.bias_variance.end(), 0.0);
    double tb = static_cast<double>(T) * cc.b;
    TheoremBounds out;
    out.ub_leading = 31.0 * std::sqrt(S * sum_v * tb);
    out.ub_full = out.ub_leading +
                  (35.0 * S * std::sqrt(static_cast<double>(A)) + std::sqrt(2.0) * profile.diameter + 1.0) *
                      std::sqrt(tb);
    out.lb = 0.0123 * std::sqrt(profile.v_max * S * A * static_cast<double>(T));
    out.psi_sqrt_sa = profile.span_bias * std::sqrt(static_cast<double>(S) * A);
    out.sqrt_sum_v = std::sqrt(sum_v);
    return out;
}

namespace {

/// Optimism-driven learner skeleton: replan whenever the pair about to be
/// played has doubled its pre-episode visit count.
class OptimisticAgent : public Agent {
  public:
    OptimisticAgent(int S, int A, const AgentConfig& cfg)
        : counts_(CountsTable::make(S, A)), cfg_(cfg) {}

    int act(int s) override {
        if (!have_plan_) start_episode();
        int a = plan_.policy[s];
        if (episode_should_end(counts_, s, a)) {
            start_episode();
            a = plan_.policy[s];
        }
        return a;
    }

    void observe(int s, int a, double reward, int next) override {
        counts_.record(s, a, reward, next);
        t_ += 1;
    }

    const std::vector<long long>& episode_starts() const override { return episode_starts_; }
    const CountsTable* counts() const override { return &counts_; }

  protected:
    virtual OptimisticPlan plan(double accuracy) = 0;

    void start_episode() {
        counts_.start_new_episode(t_);
        long long sa = static_cast<long long>(counts_.n_states) * counts_.n_actions;
        if (t_ >= sa && static_cast<double>(counts_.episode_index) >
                            episode_count_bound(counts_.n_states, counts_.n_actions, t_))
            throw Error("episode count " + std::to_string(counts_.episode_index) +
                        " exceeds the doubling bound at t=" + std::to_string(t_));
        double accuracy = cfg_.evi_accuracy_mode == "fixed"
                              ? cfg_.evi_accuracy_fixed
                              : 1.0 / std::sqrt(static_cast<double>(t_));
        plan_ = plan(accuracy);
        episode_starts_.push_back(t_);
        have_plan_ = true;
    }

    CountsTable counts_;
    AgentConfig cfg_;
    OptimisticPlan plan_;
    std::vector<long long> episode_starts_;
    long long t_ = 1;
    bool have_plan_ = false;
};

class KlUcrlAgent final : public OptimisticAgent {
  public:
    KlUcrlAgent(int S, int A, const AgentConfig& cfg)
        : OptimisticAgent(S, A, cfg),
          constants_(confidence_constants(S, A, cfg.horizon_T, cfg.delta)) {}

  protected:
    OptimisticPlan plan(double accuracy) override {
        return extended_value_iteration_kl(counts_, constants_, accuracy, cfg_.max_evi_sweeps);
    }

  private:
    ConfidenceConstants constants_;
};

class Ucrl2Agent final : public OptimisticAgent {
  public:
    Ucrl2Agent(int S, int A, const AgentConfig& cfg)
        : OptimisticAgent(S, A, cfg), constants_{cfg.delta} {}

  protected:
    OptimisticPlan plan(double accuracy) override {
        return extended_value_iteration_l1(counts_, constants_, counts_.episode_start_time, accuracy,
                                           cfg_.max_evi_sweeps);
    }

  private:
    L1Constants constants_;
};

class OracleAgent final : public Agent {
  public:
    explicit OracleAgent(const TabularMdp& mdp) {
        auto [gb, pol] = solve_bellman_optimality(mdp, 1e-10);
        for (int s = 0; s < mdp.n_states; ++s) actions_.push_back(pol.action(s));
        episode_starts_.push_back(1);
    }

    int act(int s) override { return actions_[s]; }
    void observe(int, int, double, int) override {}
    const std::vector<long long>& episode_starts() const override { return episode_starts_; }

  private:
    std::vector<int> actions_;
    std::vector<long long> episode_starts_;
};

} // namespace

std::string AgentConfig::to_json() const {
    nlohmann::json doc;
    doc["algo"] = algo;
    doc["delta"] = delta;
    doc["horizon_T"] = horizon_T;
    doc["evi_accuracy_mode"] = evi_accuracy_mode;
    doc["evi_accuracy_fixed"] = evi_accuracy_fixed;
    doc["max_evi_sweeps"] = max_evi_sweeps;
    return doc.dump(2);
}

AgentConfig agent_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig(std::string("agent json parse error: ") + e.what());
    }
    AgentConfig cfg;
    if (doc.contains("algo")) cfg.algo = doc.at("algo").get<std::string>();
    if (doc.contains("delta")) cfg.delta = doc.at("delta").get<double>();
    if (doc.contains("horizon_T")) cfg.horizon_T = doc.at("horizon_T").get<long long>();
    if (doc.contains("evi_accuracy_mode"))
        cfg.evi_accuracy_mode = doc.at("evi_accuracy_mode").get<std::string>();
    if (doc.contains("evi_accuracy_fixed"))
        cfg.evi_accuracy_fixed = doc.at("evi_accuracy_fixed").get<double>();
    if (doc.contains("max_evi_sweeps")) cfg.max_evi_sweeps = doc.at("max_evi_sweeps").get<long long>();
    if (cfg.algo != "kl_ucrl" && cfg.algo != "ucrl2" && cfg.algo != "oracle")
        throw InvalidConfig("agent: unknown algo \"" + cfg.algo + "\"");
    if (cfg.evi_accuracy_mode != "one_over_sqrt_tk" && cfg.evi_accuracy_mode != "fixed")
        throw InvalidConfig("agent: unknown evi_accuracy_mode \"" + cfg.evi_accuracy_mode + "\"");
    if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw InvalidConfig("agent: delta must lie in (0,1]");
    return cfg;
}

AgentConfig agent_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return agent_config_from_json(buf.str());
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const TabularMdp& mdp) {
    if (config.algo == "kl_ucrl")
        return std::make_unique<KlUcrlAgent>(mdp.n_states, mdp.n_actions, config);
    if (config.algo == "ucrl2")
        return std::make_unique<Ucrl2Agent>(mdp.n_states, mdp.n_actions, config);
    if (config.algo == "oracle") return std::make_unique<OracleAgent>(mdp);
    throw InvalidConfig("agent: unknown algo \"" + config.algo + "\"");
}

} // namespace arlab
