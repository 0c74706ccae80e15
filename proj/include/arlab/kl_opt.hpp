#pragma once

#include <span>
#include <vector>

namespace arlab {

/// Confidence region {q : KL(center, q) <= radius} around an empirical row.
struct KlBall {
    std::vector<double> center;
    double radius = 0.0;

    void validate(double simplex_tol = 1e-12) const;
};

/// KL(p, q) in nats with the conventions 0 log(0/x) = 0 and +inf whenever
/// p(x) > 0 while q(x) = 0. Inputs are assumed to lie on the simplex.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Result of a linear maximization over a simplex neighborhood.
struct SimplexMax {
    std::vector<double> q;
    double value = 0.0;
    double nu = 0.0;      // dual level of the KL solve (v-units)
    double kl = 0.0;      // KL(center, q) of the returned point
    bool binding = false; // constraint active at the returned point
    bool interior = false;
};

/// Maximize q . v over {q : KL(center, q) <= radius}.
///
/// The support-restricted optimum has the dual form q(i) proportional to
/// center(i) / (nu - v(i)), with nu above the support maximum of v chosen so
/// the KL budget is met; the root is isolated by safeguarded bisection on
/// log(nu - vmax). When the global argmax of v carries no center mass and
/// the budget exceeds the support-restricted cost at nu = max(v), the
/// leftover budget -log(1 - t) buys mass t on that argmax.
SimplexMax max_expectation_kl_ball(std::span<const double> center, std::span<const double> v,
                                   double radius, double tol = 1e-10);

/// Maximize q . v over {q on simplex : ||q - center||_1 <= radius_l1}.
/// Exact: raise the best-v state by radius_l1 / 2 (capped at total mass 1)
/// and drain the worst-v states in ascending order.
SimplexMax max_expectation_l1_ball(std::span<const double> center, std::span<const double> v,
                                   double radius_l1);

/// Constants sizing the confidence regions for horizon T and failure
/// probability delta:
///   b   = log(2 e S^2 A log(T) / delta)
///   g   = b + 1 / log(T)
///   c_p = S (b + log(g) (1 + 1/g))        (transition radius scale)
///   c_mu= log(4 S A log(T) / delta) / 1.99 (reward radius scale)
struct ConfidenceConstants {
    int n_states = 0;
    int n_actions = 0;
    long long horizon = 0;
    double delta = 0.0;
    double b = 0.0;
    double g = 0.0;
    double c_p = 0.0;
    double c_mu = 0.0;
};

/// Throws DomainError for T < 3, delta outside (0, 1], or S, A < 1.
/// The coarse bound c_p <= 4 S b is checked on every construction.
ConfidenceConstants confidence_constants(int S, int A, long long T, double delta);

} // namespace arlab
