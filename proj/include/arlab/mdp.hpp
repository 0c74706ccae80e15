#pragma once

#include <span>
#include <string>
#include <vector>

namespace arlab {

enum class RewardNoise { Deterministic, BernoulliWithMean };

/// Finite MDP with S states and A actions per state. Transition rows and
/// mean rewards are stored flat; rows are probability vectors and rewards
/// live in [0, 1]. `reward_noise` selects, per (s, a), whether sampled
/// rewards equal the mean or are Bernoulli with that mean.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;   // [s][a][s'] row-major, S*A*S
    std::vector<double> mean_reward;  // [s][a], S*A
    std::vector<RewardNoise> reward_noise;  // [s][a], S*A

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    std::span<const double> row(int s, int a) const {
        return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
                static_cast<std::size_t>(n_states)};
    }
    double mu(int s, int a) const { return mean_reward[static_cast<std::size_t>(s) * n_actions + a]; }
    double& mu(int s, int a) { return mean_reward[static_cast<std::size_t>(s) * n_actions + a]; }
    RewardNoise noise(int s, int a) const {
        return reward_noise[static_cast<std::size_t>(s) * n_actions + a];
    }

    static TabularMdp zeros(int S, int A);

    /// Throws InvalidConfig naming the offending field.
    void validate(double simplex_tol = 1e-12) const;
};

/// Per-state distribution over actions. Deterministic policies are the
/// special case of point masses.
struct StationaryPolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> action_dist;  // [s][a], S*A

    double prob(int s, int a) const { return action_dist[static_cast<std::size_t>(s) * n_actions + a]; }

    static StationaryPolicy deterministic(const std::vector<int>& actions, int n_actions);
    static StationaryPolicy uniform(int S, int A);

    /// Action of a deterministic policy at s (largest-mass action otherwise).
    int action(int s) const;

    void validate(double simplex_tol = 1e-12) const;
};

/// JSON document form:
///   {"n_states": S, "n_actions": A,
///    "transition": [[[..S..] x A] x S],
///    "mean_reward": [[..A..] x S],
///    "reward_noise": "deterministic" | "bernoulli" | [[..A..] x S]}
TabularMdp mdp_from_json(const std::string& text);
TabularMdp mdp_from_json_file(const std::string& path);
std::string mdp_to_json(const TabularMdp& mdp);

} // namespace arlab
