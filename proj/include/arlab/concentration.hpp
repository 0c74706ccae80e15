#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace arlab {

/// E_P[f].
double expectation(std::span<const double> p, std::span<const double> f);

/// Variance of f under P.
double variance(std::span<const double> p, std::span<const double> f);

/// Semi-variance sum_{x : P(x) >= Q(x)} P(x) (f(x) - E_P[f])^2. Collapses
/// to the full variance when P = Q and never exceeds it.
double semi_variance(std::span<const double> p, std::span<const double> q,
                     std::span<const double> f);

/// sqrt(2 var kl) + (2/3) span kl: upper deviation allowance of E_Q[f]
/// against E_P[f] for Q absolutely continuous w.r.t. P, with kl = KL(Q,P).
double bernstein_transport_upper(double var_p, double span_f, double kl);

/// sqrt(2 var kl): the matching lower-deviation allowance.
double bernstein_transport_lower(double var_p, double kl);

/// (sqrt(semi_variance(P,Q,f)) + sqrt(semi_variance(Q,P,f))) sqrt(2 KL(P,Q))
/// + span(f) KL(P,Q). +inf when P is not absolutely continuous w.r.t. Q.
/// Dominates E_Q[f] - E_P[f].
double transport2_bound(std::span<const double> p, std::span<const double> q,
                        std::span<const double> f);

/// sqrt(2 V_Q(f)) + 3 span(f) sqrt(|X| KL(Q,P)): dominates
/// sqrt(semi_variance(P,Q,f)) for alphabets of size >= 2.
double vcal_upper_bound(std::span<const double> p, std::span<const double> q,
                        std::span<const double> f);

/// Local refinement of Pinsker's inequality. Returns the pair
/// (KL(P,Q), 0.5 sum_{x : P(x) != Q(x)} (P(x)-Q(x))^2 / max(P(x), Q(x)));
/// the first component dominates the second.
std::pair<double, double> refined_pinsker_lhs_rhs(std::span<const double> p,
                                                  std::span<const double> q);

/// sqrt(2 var_true) + 6 S span_f B / sqrt(N): the allowance for the
/// empirical standard deviation of f against its population counterpart.
double empirical_variance_bound(double var_true, double span_f, int S, double B, long long N);

struct ScanConfig {
    int alphabet_min = 2;
    int alphabet_max = 8;
    long long samples = 100'000;  // Dirichlet triples per inequality family
    std::uint64_t seed = 0;
    bool include_stress = true;   // point masses, constant f, near-boundary rows
    double relative_slack = 1e-12;
};

struct InequalityStats {
    long long samples = 0;
    long long violations = 0;
    double worst_slack = -std::numeric_limits<double>::infinity();  // max (lhs-rhs)/max(1,|rhs|)
};

struct ScanReport {
    ScanConfig config;
    // keys: bernstein_upper, bernstein_lower, transport2, semi_le_var,
    //       vcal_upper, refined_pinsker
    std::map<std::string, InequalityStats> stats;

    long long total_violations() const;
    std::string to_json() const;
};

/// Monte-Carlo certification of the six inequalities above. Sample i of a
/// given suite is a pure function of (seed, i), so any sharding of the index
/// range reproduces the same report.
ScanReport inequality_scan(const ScanConfig& config);

} // namespace arlab
