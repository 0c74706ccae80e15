#pragma once

#include <optional>
#include <vector>

#include "arlab/mdp.hpp"

namespace arlab {

/// Long-run reward rate of a policy together with its bias vector.
/// The bias is centered so that it has zero mean under the stationary
/// distribution of the evaluated chain, which makes it equal to the
/// transient-advantage series rather than an arbitrary fixed point.
struct GainBias {
    double gain = 0.0;
    std::vector<double> bias;
    double bellman_residual = 0.0;
};

/// Exact analytics of a solved MDP: everything needed to evaluate the
/// regret-bound formulas on a known instance.
struct MdpProfile {
    double gain_opt = 0.0;
    double span_bias = 0.0;                  // span of the optimal bias
    double diameter = 0.0;
    double v_max = 0.0;                      // max over (s,a) of bias_variance
    std::vector<double> bias_variance;       // [s][a]
    std::vector<double> gaps;                // [s][a]
    std::optional<double> mixing_time;       // absent when enumeration was capped
    std::vector<double> bias_opt;            // centered optimal bias
    std::vector<int> opt_actions;            // greedy optimal policy
};

struct SolverOptions {
    double simplex_tol = 1e-12;
    double residual_tol = 1e-9;
    double stationary_tol = 1e-10;
    long long max_value_iterations = 1'000'000;
};

/// max(f) - min(f). f must be nonempty.
double span(const std::vector<double>& f);

/// Unique stationary distribution of the chain induced by `policy`.
/// Throws ReducibleChain when the induced chain has more than one closed
/// communicating class.
std::vector<double> stationary_distribution(const TabularMdp& mdp, const StationaryPolicy& policy,
                                            const SolverOptions& opts = {});

/// Gain and bias of a stationary policy, solved through the fundamental
/// matrix [I - P + Pbar]^{-1}[I - Pbar] mu. The Bellman identity
/// b + g = mu + P b is checked and its residual reported.
GainBias policy_gain_bias(const TabularMdp& mdp, const StationaryPolicy& policy,
                          const SolverOptions& opts = {});

/// Optimal gain/bias and a greedy optimal policy by relative value
/// iteration with the span stopping rule span(u_{n+1} - u_n) <= epsilon.
/// The returned gain is within epsilon of the optimum. Ties in the greedy
/// step break toward the lowest action index. When plain iteration cycles
/// (periodic chains), the solve retries on the half-blend (P + I)/2,
/// which preserves the gain and optimal policy and doubles the bias.
std::pair<GainBias, StationaryPolicy> solve_bellman_optimality(const TabularMdp& mdp, double epsilon,
                                                               const SolverOptions& opts = {});

/// Worst ordered-pair minimal expected hitting time. Defined as 0 for a
/// single state. Throws NotCommunicating when some target is unreachable.
double diameter(const TabularMdp& mdp, const SolverOptions& opts = {});

/// Worst-pair expected hitting time maximized over all deterministic
/// policies, enumerated exhaustively. Returns nullopt when A^S exceeds
/// `policy_cap` (absence is a value, not an error).
std::optional<double> mixing_time(const TabularMdp& mdp, long long policy_cap = 4096,
                                  const SolverOptions& opts = {});

/// Variance of `bias` under each next-state row p(.|s,a). Invariant to
/// adding a constant to `bias`.
std::vector<double> bias_variance_table(const TabularMdp& mdp, const std::vector<double>& bias);

/// Sub-optimality gap of each action against the optimal policy's reward
/// and bias: mu(s,opt) - mu(s,a) + (p(.|s,opt) - p(.|s,a)) . bias.
/// Entries are clamped to zero from below (they are nonnegative up to
/// solver noise) and exact zero at the optimal action.
std::vector<double> suboptimality_gaps(const TabularMdp& mdp, const GainBias& gain_bias,
                                       const StationaryPolicy& opt_policy);

/// Full profile: optimality solve, exact re-evaluation of the greedy
/// policy, diameter, variances, gaps, and (when affordable) mixing time.
MdpProfile build_profile(const TabularMdp& mdp, long long mixing_policy_cap = 4096,
                         const SolverOptions& opts = {});

} // namespace arlab
