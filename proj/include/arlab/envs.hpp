#pragma once

#include <cstdint>
#include <string>

#include "arlab/mdp.hpp"
#include "arlab/rng.hpp"

namespace arlab {

/// Chain of `n_states` pools. Action 0 swims with the current: one step
/// left with probability 1 - left_slip, one step right otherwise (the slip
/// keeps every policy's chain irreducible). Action 1 swims against it with
/// the (p_back, p_stay, p_forward) split at interior states; at the left
/// end the backward mass folds into staying, at the right end the forward
/// mass is pushed back. Reward reward_left at the leftmost state under
/// action 0 and reward_right at the rightmost under action 1.
struct RiverSwimConfig {
    int n_states = 6;
    double p_forward = 0.35;
    double p_stay = 0.60;
    double p_back = 0.05;
    double left_slip = 0.05;
    double reward_left = 0.05;
    double reward_right = 1.0;

    void validate() const;
};

/// Two states, `n_actions` actions each. Rewards are deterministic: 0 in
/// state 0 and 1 in state 1. Every action leaves state 1 with probability
/// delta; action 0 is the only action reaching state 1 from state 0 at the
/// elevated rate delta + eps, all others use delta.
struct TwoStateHardConfig {
    double delta = 0.2;
    double eps = 0.05;
    int n_actions = 2;

    void validate() const;
};

/// Closed forms for the two-state instance.
struct TwoStateHardAnalytic {
    double gain_opt = 0.0;      // (delta + eps) / (2 delta + eps)
    double span_bias = 0.0;     // 1 / (2 delta + eps)
    double v_max = 0.0;         // (delta+eps)(1-delta-eps) span^2
    double diameter = 0.0;      // 1 / delta
    double gap_bad_action = 0.0;  // eps * span
};

TabularMdp make_ergodic_riverswim(const RiverSwimConfig& config);

/// Builds the instance and cross-checks the solver-computed profile against
/// the closed forms to 1e-9. Throws NumericalFailure on disagreement.
std::pair<TabularMdp, TwoStateHardAnalytic> make_two_state_hard(const TwoStateHardConfig& config);

/// Every transition entry at least `min_prob` (so every policy's chain is
/// irreducible), rewards uniform on [0,1], fully determined by the seed.
TabularMdp make_random_ergodic(int S, int A, std::uint64_t seed, double min_prob = 0.01);

/// One environment step: next state from p(.|s,a), reward from the (s,a)
/// noise model.
std::pair<int, double> sample_step(const TabularMdp& mdp, int s, int a, Rng& rng);

/// Environment description with a "family" discriminator:
///   riverswim      -> RiverSwimConfig fields
///   two_state_hard -> TwoStateHardConfig fields
///   random         -> {n_states, n_actions, seed, min_prob}
///   explicit       -> inline TabularMdp document
struct EnvConfig {
    std::string family;
    RiverSwimConfig riverswim;
    TwoStateHardConfig two_state;
    int random_n_states = 5;
    int random_n_actions = 2;
    std::uint64_t random_seed = 0;
    double random_min_prob = 0.01;
    TabularMdp explicit_mdp;

    TabularMdp build() const;
    std::string to_json() const;
};

EnvConfig env_config_from_json(const std::string& text);
EnvConfig env_config_from_json_file(const std::string& path);

} // namespace arlab
