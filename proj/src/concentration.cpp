#include "arlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "arlab/errors.hpp"
#include "arlab/kl_opt.hpp"
#include "arlab/rng.hpp"

namespace arlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double span_of(std::span<const double> f) {
    auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return *hi - *lo;
}
} // namespace

double expectation(std::span<const double> p, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * f[i];
    return s;
}

double variance(std::span<const double> p, std::span<const double> f) {
    double m = expectation(p, f);
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = f[i] - m;
        v += p[i] * d * d;
    }
    return v;
}

double semi_variance(std::span<const double> p, std::span<const double> q,
                     std::span<const double> f) {
    if (p.size() != q.size() || p.size() != f.size())
        throw DomainError("semi_variance: alphabet mismatch");
    double m = expectation(p, f);
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < q[i]) continue;
        double d = f[i] - m;
        v += p[i] * d * d;
    }
    return v;
}

double bernstein_transport_upper(double var_p, double span_f, double kl) {
    return std::sqrt(2.0 * var_p * kl) + (2.0 / 3.0) * span_f * kl;
}

double bernstein_transport_lower(double var_p, double kl) {
    return std::sqrt(2.0 * var_p * kl);
}

double transport2_bound(std::span<const double> p, std::span<const double> q,
                        std::span<const double> f) {
    double kl = kl_divergence(p, q);
    if (kl == kInf) return kInf;
    return (std::sqrt(semi_variance(p, q, f)) + std::sqrt(semi_variance(q, p, f))) *
               std::sqrt(2.0 * kl) +
           span_of(f) * kl;
}

double vcal_upper_bound(std::span<const double> p, std::span<const double> q,
                        std::span<const double> f) {
    if (p.size() < 2) throw DomainError("vcal_upper_bound: alphabet must have at least 2 points");
    double kl = kl_divergence(q, p);
    if (kl == kInf) return kInf;
    return std::sqrt(2.0 * variance(q, f)) +
           3.0 * span_of(f) * std::sqrt(static_cast<double>(p.size()) * kl);
}

std::pair<double, double> refined_pinsker_lhs_rhs(std::span<const double> p,
                                                  std::span<const double> q) {
    double kl = kl_divergence(p, q);
    double rhs = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == q[i]) continue;
        double d = p[i] - q[i];
        rhs += d * d / std::max(p[i], q[i]);
    }
    return {kl, 0.5 * rhs};
}

double empirical_variance_bound(double var_true, double span_f, int S, double B, long long N) {
    if (N < 1) throw DomainError("empirical_variance_bound: N must be >= 1");
    return std::sqrt(2.0 * var_true) +
           6.0 * S * span_f * B / std::sqrt(static_cast<double>(N));
}

long long ScanReport::total_violations() const {
    long long n = 0;
    for (const auto& [_, s] : stats) n += s.violations;
    return n;
}

std::string ScanReport::to_json() const {
    nlohmann::json doc;
    doc["seed"] = config.seed;
    doc["samples"] = config.samples;
    doc["alphabet_min"] = config.alphabet_min;
    doc["alphabet_max"] = config.alphabet_max;
    doc["include_stress"] = config.include_stress;
    doc["relative_slack"] = config.relative_slack;
    nlohmann::json per;
    for (const auto& [name, s] : stats) {
        per[name] = {{"samples", s.samples},
                     {"violations", s.violations},
                     {"worst_slack", std::isfinite(s.worst_slack) ? s.worst_slack : -1e308}};
    }
    doc["inequalities"] = std::move(per);
    doc["total_violations"] = total_violations();
    return doc.dump(2);
}

namespace {

struct Triple {
    std::vector<double> p, q, f;
};

Triple dirichlet_triple(Rng& rng, int d) {
    Triple t;
    t.p.resize(d);
    t.q.resize(d);
    t.f.resize(d);
    double sp = 0.0, sq = 0.0;
    for (int i = 0; i < d; ++i) {
        t.p[i] = rng.exponential();
        t.q[i] = rng.exponential();
        sp += t.p[i];
        sq += t.q[i];
    }
    for (int i = 0; i < d; ++i) {
        t.p[i] /= sp;
        t.q[i] /= sq;
        t.f[i] = rng.uniform01();
    }
    return t;
}

/// Near-boundary pair: one coordinate of q squeezed to 1e-9 and p pushed
/// toward a vertex, both renormalized so every inequality stays finite.
Triple stress_triple(Rng& rng, int d, int variant) {
    Triple t = dirichlet_triple(rng, d);
    int j = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
    switch (variant) {
        case 0: {  // q nearly loses an atom
            double rest = 1.0 - t.q[j];
            for (int i = 0; i < d; ++i) t.q[i] = (i == j) ? 1e-9 : t.q[i] * (1.0 - 1e-9) / rest;
            break;
        }
        case 1: {  // p nearly a point mass
            for (int i = 0; i < d; ++i) t.p[i] = (i == j) ? 1.0 - (d - 1) * 1e-9 : 1e-9;
            break;
        }
        case 2: {  // nearly identical pair
            for (int i = 0; i < d; ++i) t.q[i] = t.p[i];
            t.q[j] += 1e-8;
            double s = 1.0 + 1e-8;
            for (int i = 0; i < d; ++i) t.q[i] /= s;
            break;
        }
        default: {  // constant f
            double c = rng.uniform01();
            std::fill(t.f.begin(), t.f.end(), c);
            break;
        }
    }
    return t;
}

class Checker {
  public:
    explicit Checker(const ScanConfig& cfg) : slack_(cfg.relative_slack) {}

    void check(ScanReport& rep, const std::string& name, double lhs, double rhs) {
        InequalityStats& s = rep.stats[name];
        s.samples += 1;
        if (lhs == kInf && rhs == kInf) return;  // vacuous
        double margin = lhs - rhs;
        double rel = margin / std::max(1.0, std::abs(rhs));
        if (std::isfinite(rel)) s.worst_slack = std::max(s.worst_slack, rel);
        if (lhs > rhs + slack_ * std::max(1.0, std::abs(rhs))) s.violations += 1;
    }

    void run_all(ScanReport& rep, const Triple& t) {
        const auto &p = t.p, &q = t.q, &f = t.f;
        double ep = expectation(p, f), eq = expectation(q, f);
        double vp = variance(p, f);
        double sf = span_of(f);
        double kl_qp = kl_divergence(q, p);
        double kl_pq = kl_divergence(p, q);

        check(rep, "bernstein_upper", eq - ep, bernstein_transport_upper(vp, sf, kl_qp));
        check(rep, "bernstein_lower", ep - eq, bernstein_transport_lower(vp, kl_qp));
        check(rep, "transport2", eq - ep, transport2_bound(p, q, f));
        check(rep, "semi_le_var", semi_variance(p, q, f), vp);
        if (p.size() >= 2)
            check(rep, "vcal_upper", std::sqrt(semi_variance(p, q, f)), vcal_upper_bound(p, q, f));
        auto [kl, rhs] = refined_pinsker_lhs_rhs(p, q);
        check(rep, "refined_pinsker", rhs, kl);
    }

  private:
    double slack_;
};

} // namespace

ScanReport inequality_scan(const ScanConfig& config) {
    if (config.alphabet_min < 1 || config.alphabet_max < config.alphabet_min)
        throw InvalidConfig("inequality_scan: bad alphabet range");
    if (config.samples < 0) throw InvalidConfig("inequality_scan: negative sample count");

    ScanReport rep;
    rep.config = config;
    Checker checker(config);
    const int d_range = config.alphabet_max - config.alphabet_min + 1;

    for (long long i = 0; i < config.samples; ++i) {
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(i)));
        int d = config.alphabet_min + static_cast<int>(rng() % static_cast<std::uint64_t>(d_range));
        Triple t = dirichlet_triple(rng, d);
        checker.run_all(rep, t);
    }
    if (config.include_stress) {
        // Deterministic degenerate rows first.
        for (int d = std::max(2, config.alphabet_min); d <= config.alphabet_max; ++d) {
            for (int j = 0; j < d; ++j) {
                Triple t;
                t.p.assign(d, 0.0);
                t.q.assign(d, 1.0 / d);
                t.f.resize(d);
                t.p[j] = 1.0;
                for (int i = 0; i < d; ++i) t.f[i] = static_cast<double>((i * 7 + j) % d) / d;
                checker.run_all(rep, t);
                std::swap(t.p, t.q);
                checker.run_all(rep, t);
                std::fill(t.f.begin(), t.f.end(), 0.25);
                checker.run_all(rep, t);
            }
        }
        long long n_stress = std::max<long long>(1000, config.samples / 10);
        for (long long i = 0; i < n_stress; ++i) {
            Rng rng(Rng::derive(config.seed ^ 0x5357ull, static_cast<std::uint64_t>(i)));
            int d = config.alphabet_min + static_cast<int>(rng() % static_cast<std::uint64_t>(d_range));
            if (d < 2) d = 2;
            Triple t = stress_triple(rng, d, static_cast<int>(i % 4));
            checker.run_all(rep, t);
        }
    }
    return rep;
}

} // namespace arlab
