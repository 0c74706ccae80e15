#include "arlab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "arlab/errors.hpp"

namespace arlab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Row-stochastic matrix of the chain induced by a policy, plus its reward vector.
struct InducedChain {
    MatrixXd P;
    VectorXd mu;
};

InducedChain induce(const TabularMdp& mdp, const StationaryPolicy& policy) {
    const int S = mdp.n_states;
    InducedChain c{MatrixXd::Zero(S, S), VectorXd::Zero(S)};
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double w = policy.prob(s, a);
            if (w == 0.0) continue;
            c.mu(s) += w * mdp.mu(s, a);
            for (int y = 0; y < S; ++y) c.P(s, y) += w * mdp.p(s, a, y);
        }
    }
    return c;
}

/// Strongly connected components of the positive-probability digraph,
/// iterative Tarjan. Returns component id per node.
std::vector<int> scc_ids(const MatrixXd& P, int& n_comps) {
    const int n = static_cast<int>(P.rows());
    std::vector<int> index(n, -1), lowlink(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0;
    n_comps = 0;

    struct Frame {
        int v;
        int next_child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call;
        call.push_back({root, 0});
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            bool descended = false;
            while (f.next_child < n) {
                int w = f.next_child++;
                if (P(f.v, w) <= 0.0) continue;
                if (index[w] == -1) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[f.v] = std::min(lowlink[f.v], index[w]);
            }
            if (descended) continue;
            if (lowlink[f.v] == index[f.v]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = n_comps;
                    if (w == f.v) break;
                }
                ++n_comps;
            }
            int v = f.v;
            call.pop_back();
            if (!call.empty()) lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
        }
    }
    return comp;
}

int count_closed_classes(const MatrixXd& P) {
    int n_comps = 0;
    std::vector<int> comp = scc_ids(P, n_comps);
    std::vector<bool> closed(n_comps, true);
    const int n = static_cast<int>(P.rows());
    for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w)
            if (P(v, w) > 0.0 && comp[w] != comp[v]) closed[comp[v]] = false;
    return static_cast<int>(std::count(closed.begin(), closed.end(), true));
}

VectorXd stationary_of_chain(const MatrixXd& P, double tol) {
    const int S = static_cast<int>(P.rows());
    if (S == 1) return VectorXd::Ones(1);
    if (count_closed_classes(P) != 1)
        throw ReducibleChain("induced chain has more than one closed communicating class");
    // nu' (I - P) = 0 with sum(nu) = 1, solved as a stacked least-squares
    // system; consistent, so the residual is pure round-off.
    MatrixXd A(S + 1, S);
    A.topRows(S) = (MatrixXd::Identity(S, S) - P).transpose();
    A.row(S).setOnes();
    VectorXd rhs = VectorXd::Zero(S + 1);
    rhs(S) = 1.0;
    VectorXd nu = A.colPivHouseholderQr().solve(rhs);
    double total = nu.sum();
    if (!std::isfinite(total) || std::abs(total - 1.0) > 1e-6)
        throw SingularSystem("stationary distribution solve failed");
    nu /= total;
    for (int i = 0; i < S; ++i)
        if (nu(i) < 0.0) nu(i) = 0.0;
    nu /= nu.sum();
    double err = ((nu.transpose() * P).transpose() - nu).lpNorm<Eigen::Infinity>();
    if (err > tol) throw SingularSystem("stationary distribution residual " + std::to_string(err));
    return nu;
}

struct ViResult {
    double gain = 0.0;
    VectorXd bias_pre;  // iterate before the last Bellman application
    std::vector<int> greedy;
    double residual = 0.0;
    bool converged = false;
};

/// Relative value iteration on max_a [mu(s,a) + sum_y q(y|s,a) u(y)] where
/// q is the original kernel or its half-blend with the identity.
ViResult value_iterate(const TabularMdp& mdp, double epsilon, long long max_iters, bool blend) {
    const int S = mdp.n_states, A = mdp.n_actions;
    VectorXd u = VectorXd::Zero(S), u_next(S);
    std::vector<int> greedy(S, 0);
    ViResult out;
    for (long long it = 0; it < max_iters; ++it) {
        for (int s = 0; s < S; ++s) {
            double best = -kInf;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = mdp.mu(s, a);
                const auto row = mdp.row(s, a);
                double pu = 0.0;
                for (int y = 0; y < S; ++y) pu += row[y] * u(y);
                q += blend ? 0.5 * (pu + u(s)) : pu;
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            u_next(s) = best;
            greedy[s] = best_a;
        }
        double dmax = -kInf, dmin = kInf;
        for (int s = 0; s < S; ++s) {
            double d = u_next(s) - u(s);
            dmax = std::max(dmax, d);
            dmin = std::min(dmin, d);
        }
        if (dmax - dmin <= epsilon) {
            out.gain = 0.5 * (dmax + dmin);
            out.bias_pre = u;
            out.greedy = greedy;
            out.residual = std::max(std::abs(dmax - out.gain), std::abs(dmin - out.gain));
            out.converged = true;
            return out;
        }
        double shift = u_next.minCoeff();
        for (int s = 0; s < S; ++s) u(s) = u_next(s) - shift;
    }
    return out;
}

/// Minimal expected hitting times to `target`: value iteration batches with
/// exact greedy-policy evaluation between batches; accepts once the
/// evaluated vector is a Bellman fixed point.
VectorXd min_hitting_times(const TabularMdp& mdp, int target, const SolverOptions& opts) {
    const int S = mdp.n_states, A = mdp.n_actions;
    VectorXd h = VectorXd::Zero(S);
    auto bellman = [&](const VectorXd& cur, VectorXd& next, std::vector<int>* pol) {
        double change = 0.0;
        for (int s = 0; s < S; ++s) {
            if (s == target) {
                next(s) = 0.0;
                continue;
            }
            double best = kInf;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const auto row = mdp.row(s, a);
                double v = 1.0;
                for (int y = 0; y < S; ++y)
                    if (y != target) v += row[y] * cur(y);
                if (v < best) {
                    best = v;
                    best_a = a;
                }
            }
            change = std::max(change, std::abs(best - cur(s)));
            next(s) = best;
            if (pol) (*pol)[s] = best_a;
        }
        return change;
    };

    std::vector<int> pol(S, 0);
    VectorXd next(S);
    const int batch = 64;
    const long long max_batches = 4000;
    for (long long b = 0; b < max_batches; ++b) {
        double change = 0.0;
        for (int i = 0; i < batch; ++i) change = bellman(h, next, i + 1 == batch ? &pol : nullptr), h = next;

        // Exact evaluation of the current greedy policy on non-target states.
        MatrixXd M = MatrixXd::Identity(S, S);
        for (int s = 0; s < S; ++s) {
            if (s == target) continue;
            const auto row = mdp.row(s, pol[s]);
            for (int y = 0; y < S; ++y)
                if (y != target) M(s, y) -= row[y];
        }
        VectorXd rhs = VectorXd::Ones(S);
        rhs(target) = 0.0;
        VectorXd cand = M.partialPivLu().solve(rhs);
        bool usable = cand.allFinite() && cand.minCoeff() >= -1e-9 &&
                      (M * cand - rhs).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + cand.lpNorm<Eigen::Infinity>());
        if (usable) {
            double scale = 1.0 + cand.lpNorm<Eigen::Infinity>();
            double res = bellman(cand, next, nullptr);
            if (res <= std::max(opts.residual_tol, 1e-12 * scale)) return cand;
            if (next.lpNorm<Eigen::Infinity>() <= cand.lpNorm<Eigen::Infinity>() + 1.0) h = next;
        }
        if (!usable && change > 1e6) break;  // diverging: target unreachable
        if (h.lpNorm<Eigen::Infinity>() > 1e12) break;
    }
    throw NotCommunicating("hitting-time system for target " + std::to_string(target) +
                           " did not converge");
}

/// Expected hitting times to `target` under a fixed chain, by exact solve.
VectorXd policy_hitting_times(const MatrixXd& P, int target) {
    const int S = static_cast<int>(P.rows());
    MatrixXd M = MatrixXd::Identity(S, S);
    for (int s = 0; s < S; ++s) {
        if (s == target) continue;
        for (int y = 0; y < S; ++y)
            if (y != target) M(s, y) -= P(s, y);
    }
    VectorXd rhs = VectorXd::Ones(S);
    rhs(target) = 0.0;
    VectorXd h = M.partialPivLu().solve(rhs);
    if (!h.allFinite() || h.minCoeff() < -1e-9 ||
        (M * h - rhs).lpNorm<Eigen::Infinity>() > 1e-7 * (1.0 + h.lpNorm<Eigen::Infinity>()))
        throw SingularSystem("hitting-time solve failed (chain not irreducible?)");
    return h;
}

} // namespace

double span(const std::vector<double>& f) {
    if (f.empty()) throw DomainError("span of empty vector");
    auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return *hi - *lo;
}

std::vector<double> stationary_distribution(const TabularMdp& mdp, const StationaryPolicy& policy,
                                            const SolverOptions& opts) {
    mdp.validate(opts.simplex_tol);
    policy.validate(opts.simplex_tol);
    InducedChain c = induce(mdp, policy);
    VectorXd nu = stationary_of_chain(c.P, opts.stationary_tol);
    return {nu.data(), nu.data() + nu.size()};
}

GainBias policy_gain_bias(const TabularMdp& mdp, const StationaryPolicy& policy,
                          const SolverOptions& opts) {
    mdp.validate(opts.simplex_tol);
    policy.validate(opts.simplex_tol);
    const int S = mdp.n_states;
    InducedChain c = induce(mdp, policy);
    VectorXd nu = stationary_of_chain(c.P, opts.stationary_tol);

    GainBias out;
    out.gain = nu.dot(c.mu);

    // b = [I - P + Pbar]^{-1} [I - Pbar] mu with Pbar = 1 nu', plus one
    // round of iterative refinement.
    MatrixXd A = MatrixXd::Identity(S, S) - c.P;
    for (int s = 0; s < S; ++s) A.row(s) += nu.transpose();
    VectorXd rhs = c.mu - VectorXd::Constant(S, out.gain);
    auto lu = A.partialPivLu();
    VectorXd b = lu.solve(rhs);
    b += lu.solve(rhs - A * b);
    if (!b.allFinite()) throw SingularSystem("fundamental matrix solve failed");
    b -= VectorXd::Constant(S, nu.dot(b));

    VectorXd res = b + VectorXd::Constant(S, out.gain) - c.mu - c.P * b;
    out.bellman_residual = res.lpNorm<Eigen::Infinity>();
    if (out.bellman_residual > opts.residual_tol)
        throw SingularSystem("gain/bias solve residual " + std::to_string(out.bellman_residual));
    out.bias.assign(b.data(), b.data() + S);
    return out;
}

std::pair<GainBias, StationaryPolicy> solve_bellman_optimality(const TabularMdp& mdp, double epsilon,
                                                               const SolverOptions& opts) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
    mdp.validate(opts.simplex_tol);
    const int S = mdp.n_states;

    ViResult vi = value_iterate(mdp, epsilon, opts.max_value_iterations, false);
    bool blended = false;
    if (!vi.converged) {
        vi = value_iterate(mdp, epsilon, opts.max_value_iterations, true);
        blended = true;
        if (!vi.converged)
            throw NoConvergence("value iteration did not reach span " + std::to_string(epsilon));
    }

    StationaryPolicy pol = StationaryPolicy::deterministic(vi.greedy, mdp.n_actions);
    VectorXd b = vi.bias_pre;
    if (blended) b *= 0.5;

    GainBias out;
    out.gain = vi.gain;
    // Center under the stationary law of the greedy chain when it exists.
    try {
        InducedChain c = induce(mdp, pol);
        VectorXd nu = stationary_of_chain(c.P, opts.stationary_tol);
        b -= VectorXd::Constant(S, nu.dot(b));
    } catch (const ReducibleChain&) {
        b -= VectorXd::Constant(S, b.mean());
    }

    double res = 0.0;
    for (int s = 0; s < S; ++s) {
        double best = -kInf;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double q = mdp.mu(s, a);
            const auto row = mdp.row(s, a);
            for (int y = 0; y < S; ++y) q += row[y] * b(y);
            best = std::max(best, q);
        }
        res = std::max(res, std::abs(b(s) + out.gain - best));
    }
    out.bellman_residual = res;
    out.bias.assign(b.data(), b.data() + S);
    return {out, pol};
}

double diameter(const TabularMdp& mdp, const SolverOptions& opts) {
    mdp.validate(opts.simplex_tol);
    const int S = mdp.n_states;
    if (S == 1) return 0.0;

    // Reachability in the union digraph over all actions: every target must
    // be reachable from every state under some action sequence.
    for (int target = 0; target < S; ++target) {
        std::vector<bool> reaches(S, false);
        reaches[target] = true;
        std::vector<int> queue{target};
        while (!queue.empty()) {
            int y = queue.back();
            queue.pop_back();
            for (int s = 0; s < S; ++s) {
                if (reaches[s]) continue;
                bool edge = false;
                for (int a = 0; a < mdp.n_actions && !edge; ++a) edge = mdp.p(s, a, y) > 0.0;
                if (edge) {
                    reaches[s] = true;
                    queue.push_back(s);
                }
            }
        }
        if (!std::all_of(reaches.begin(), reaches.end(), [](bool v) { return v; }))
            throw NotCommunicating("state " + std::to_string(target) + " unreachable from some state");
    }

    double worst = 0.0;
    for (int target = 0; target < S; ++target) {
        VectorXd h = min_hitting_times(mdp, target, opts);
        for (int s = 0; s < S; ++s)
            if (s != target) worst = std::max(worst, h(s));
    }
    return worst;
}

std::optional<double> mixing_time(const TabularMdp& mdp, long long policy_cap,
                                  const SolverOptions& opts) {
    mdp.validate(opts.simplex_tol);
    const int S = mdp.n_states, A = mdp.n_actions;
    if (S == 1) return 0.0;

    long long n_policies = 1;
    for (int s = 0; s < S; ++s) {
        if (n_policies > policy_cap / A + 1) return std::nullopt;
        n_policies *= A;
        if (n_policies > policy_cap) return std::nullopt;
    }

    double worst = 0.0;
    std::vector<int> actions(S, 0);
    for (long long idx = 0; idx < n_policies; ++idx) {
        long long code = idx;
        for (int s = 0; s < S; ++s) {
            actions[s] = static_cast<int>(code % A);
            code /= A;
        }
        InducedChain c = induce(mdp, StationaryPolicy::deterministic(actions, A));
        int n_comps = 0;
        scc_ids(c.P, n_comps);
        if (n_comps != 1)
            throw DomainError("mixing_time requires an ergodic MDP; a policy induced a reducible chain");
        for (int target = 0; target < S; ++target) {
            VectorXd h = policy_hitting_times(c.P, target);
            for (int s = 0; s < S; ++s)
                if (s != target) worst = std::max(worst, h(s));
        }
    }
    return worst;
}

std::vector<double> bias_variance_table(const TabularMdp& mdp, const std::vector<double>& bias) {
    const int S = mdp.n_states, A = mdp.n_actions;
    if (static_cast<int>(bias.size()) != S) throw DomainError("bias length must equal n_states");
    std::vector<double> table(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const auto row = mdp.row(s, a);
            double mean = 0.0;
            for (int y = 0; y < S; ++y) mean += row[y] * bias[y];
            double var = 0.0;
            for (int y = 0; y < S; ++y) {
                double d = bias[y] - mean;
                var += row[y] * d * d;
            }
            table[static_cast<std::size_t>(s) * A + a] = var;
        }
    }
    return table;
}

std::vector<double> suboptimality_gaps(const TabularMdp& mdp, const GainBias& gain_bias,
                                       const StationaryPolicy& opt_policy) {
    const int S = mdp.n_states, A = mdp.n_actions;
    if (static_cast<int>(gain_bias.bias.size()) != S) throw DomainError("bias length must equal n_states");
    std::vector<double> gaps(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        int star = opt_policy.action(s);
        const auto star_row = mdp.row(s, star);
        double star_q = mdp.mu(s, star);
        for (int y = 0; y < S; ++y) star_q += star_row[y] * gain_bias.bias[y];
        for (int a = 0; a < A; ++a) {
            if (a == star) continue;
            double q = mdp.mu(s, a);
            const auto row = mdp.row(s, a);
            for (int y = 0; y < S; ++y) q += row[y] * gain_bias.bias[y];
            gaps[static_cast<std::size_t>(s) * A + a] = std::max(0.0, star_q - q);
        }
    }
    return gaps;
}

MdpProfile build_profile(const TabularMdp& mdp, long long mixing_policy_cap,
                         const SolverOptions& opts) {
    auto [vi_gb, pol] = solve_bellman_optimality(mdp, 1e-10, opts);
    GainBias gb = policy_gain_bias(mdp, pol, opts);

    const int S = mdp.n_states, A = mdp.n_actions;
    double res = 0.0;
    for (int s = 0; s < S; ++s) {
        double best = -kInf;
        for (int a = 0; a < A; ++a) {
            double q = mdp.mu(s, a);
            const auto row = mdp.row(s, a);
            for (int y = 0; y < S; ++y) q += row[y] * gb.bias[y];
            best = std::max(best, q);
        }
        res = std::max(res, std::abs(gb.bias[s] + gb.gain - best));
    }
    if (res > opts.residual_tol)
        throw NumericalFailure("greedy policy fails the optimality equation, residual " +
                               std::to_string(res));

    MdpProfile prof;
    prof.gain_opt = gb.gain;
    prof.bias_opt = gb.bias;
    prof.span_bias = span(gb.bias);
    prof.bias_variance = bias_variance_table(mdp, gb.bias);
    prof.v_max = *std::max_element(prof.bias_variance.begin(), prof.bias_variance.end());
    double popoviciu = prof.span_bias * prof.span_bias / 4.0;
    if (prof.v_max > popoviciu + 1e-9 * (1.0 + popoviciu))
        throw NumericalFailure("bias variance exceeds span^2/4");
    prof.gaps = suboptimality_gaps(mdp, gb, pol);
    prof.diameter = diameter(mdp, opts);
    prof.mixing_time = mixing_time(mdp, mixing_policy_cap, opts);
    for (int s = 0; s < S; ++s) prof.opt_actions.push_back(pol.action(s));
    return prof;
}

} // namespace arlab
