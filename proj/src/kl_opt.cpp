#include "arlab/kl_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arlab/errors.hpp"

namespace arlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// KL budget spent by the support-restricted dual point at level nu:
///   f(nu) = sum_i p_i log(nu - v_i) + log sum_j p_j / (nu - v_j).
/// Monotone decreasing in nu. The direct form cancels badly when the value
/// is tiny, so small results are recomputed through
///   f(nu) = sum_i p_i log1p(sum_j p_j (v_j - v_i) / (nu - v_j)).
double dual_budget(const std::vector<int>& sup, std::span<const double> p,
                   std::span<const double> v, double nu) {
    double log_sum = 0.0, inv_sum = 0.0;
    for (int i : sup) {
        double gap = nu - v[i];
        if (gap <= 0.0) return kInf;
        log_sum += p[i] * std::log(gap);
        inv_sum += p[i] / gap;
    }
    double direct = log_sum + std::log(inv_sum);
    if (std::abs(direct) > 1e-8) return direct;
    double stable = 0.0;
    for (int i : sup) {
        double h = 0.0;
        for (int j : sup) h += p[j] * (v[j] - v[i]) / (nu - v[j]);
        stable += p[i] * std::log1p(h);
    }
    return stable;
}

/// Dual point at level nu restricted to the support, written into q
/// (off-support entries left at zero), scaled by total mass `mass`.
double fill_dual_point(const std::vector<int>& sup, std::span<const double> p,
                       std::span<const double> v, double nu, double mass,
                       std::vector<double>& q) {
    double c = 0.0;
    for (int i : sup) c += p[i] / (nu - v[i]);
    double value = 0.0;
    for (int i : sup) {
        q[i] = mass * p[i] / ((nu - v[i]) * c);
        value += q[i] * v[i];
    }
    return value;
}

} // namespace

void KlBall::validate(double simplex_tol) const {
    if (center.empty()) throw InvalidConfig("KlBall.center: empty");
    double sum = 0.0;
    for (double x : center) {
        if (!(x >= 0.0)) throw InvalidConfig("KlBall.center: negative or NaN entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > simplex_tol)
        throw InvalidConfig("KlBall.center: sums to " + std::to_string(sum));
    if (!(radius >= 0.0)) throw InvalidConfig("KlBall.radius: must be >= 0");
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return kInf;
        // log1p keeps near-identical pairs accurate at the delta^2 scale.
        s += p[i] * std::log1p((p[i] - q[i]) / q[i]);
    }
    return std::max(0.0, s);
}

SimplexMax max_expectation_kl_ball(std::span<const double> center, std::span<const double> v,
                                   double radius, double tol) {
    const int n = static_cast<int>(center.size());
    if (n == 0 || static_cast<int>(v.size()) != n)
        throw DomainError("kl ball: center and v must share a nonempty alphabet");
    if (!(radius >= 0.0)) throw DomainError("kl ball: radius must be >= 0");
    if (!(tol > 0.0)) throw DomainError("kl ball: tol must be > 0");

    SimplexMax out;
    out.q.assign(center.begin(), center.end());
    out.value = dot(center, v);

    std::vector<int> sup;
    for (int i = 0; i < n; ++i)
        if (center[i] > 0.0) sup.push_back(i);

    double v_lo = *std::min_element(v.begin(), v.end());
    int star = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[star]) star = i;
    double v_hi = v[star];
    if (radius == 0.0 || v_hi - v_lo == 0.0) return out;

    double sup_hi = -kInf, sup_lo = kInf;
    for (int i : sup) {
        sup_hi = std::max(sup_hi, v[i]);
        sup_lo = std::min(sup_lo, v[i]);
    }

    // Constant v on the support: the whole budget buys mass on the global
    // argmax (no-op when that argmax already lies in the support).
    if (sup_hi - sup_lo == 0.0) {
        if (v_hi <= sup_hi) return out;
        double t = -std::expm1(-radius);
        for (int i : sup) out.q[i] = (1.0 - t) * center[i];
        out.q[star] += t;
        out.value = (1.0 - t) * sup_hi + t * v_hi;
        out.nu = v_hi;
        out.kl = radius;
        out.binding = true;
        return out;
    }

    std::fill(out.q.begin(), out.q.end(), 0.0);

    // Mass escapes to an off-support argmax only when the support-restricted
    // budget at nu = max(v) leaves slack.
    if (v_hi > sup_hi) {
        double f0 = dual_budget(sup, center, v, v_hi);
        if (f0 < radius) {
            double t = -std::expm1(f0 - radius);
            out.value = fill_dual_point(sup, center, v, v_hi, 1.0 - t, out.q);
            out.q[star] = t;
            out.value += t * v_hi;
            out.nu = v_hi;
            out.kl = kl_divergence(center, out.q);
            out.binding = true;
            return out;
        }
    }

    // Support-restricted root of dual_budget(nu) = radius, bisected on
    // x = log(nu - v_hi) so that roots pinned against the floor resolve.
    // v_hi >= sup_hi, and when they differ the slack check above already
    // ruled out roots below v_hi.
    const double floor_v = v_hi;
    double scale = v_hi - v_lo;
    double x_lo = std::log(scale) - 745.0;  // nu - floor at the double underflow edge
    double x_hi = std::log(scale * std::max(1.0, 1.0 / -std::expm1(-radius)));
    int expand = 0;
    while (dual_budget(sup, center, v, floor_v + std::exp(x_hi)) > radius) {
        x_hi += std::log(4.0);
        if (++expand > 200) throw NumericalFailure("kl ball: cannot bracket the dual root");
    }
    if (dual_budget(sup, center, v, floor_v + std::exp(x_lo)) < radius) x_lo = x_hi - 1e-12;

    for (int it = 0; it < 140; ++it) {
        double mid = 0.5 * (x_lo + x_hi);
        if (dual_budget(sup, center, v, floor_v + std::exp(mid)) >= radius)
            x_lo = mid;
        else
            x_hi = mid;
    }
    double nu = floor_v + std::exp(x_hi);  // feasible side: KL(center, q) <= radius
    out.nu = nu;
    out.value = fill_dual_point(sup, center, v, nu, 1.0, out.q);
    out.kl = kl_divergence(center, out.q);
    out.binding = out.kl >= radius - tol;
    out.interior = true;
    return out;
}

SimplexMax max_expectation_l1_ball(std::span<const double> center, std::span<const double> v,
                                   double radius_l1) {
    const int n = static_cast<int>(center.size());
    if (n == 0 || static_cast<int>(v.size()) != n)
        throw DomainError("l1 ball: center and v must share a nonempty alphabet");
    if (!(radius_l1 >= 0.0 && radius_l1 <= 2.0)) throw DomainError("l1 ball: radius must lie in [0,2]");

    SimplexMax out;
    out.q.assign(center.begin(), center.end());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return v[i] > v[j]; });

    int best = order.front();
    double add = std::min(radius_l1 / 2.0, 1.0 - out.q[best]);
    out.q[best] += add;
    double remove = add;
    for (int k = n - 1; k >= 0 && remove > 0.0; --k) {
        int i = order[k];
        if (i == best) continue;
        double take = std::min(out.q[i], remove);
        out.q[i] -= take;
        remove -= take;
    }
    out.value = dot(out.q, v);
    double moved = 0.0;
    for (int i = 0; i < n; ++i) moved += std::abs(out.q[i] - center[i]);
    out.binding = moved >= radius_l1 - 1e-12;
    return out;
}

ConfidenceConstants confidence_constants(int S, int A, long long T, double delta) {
    if (S < 1 || A < 1) throw DomainError("confidence constants: S and A must be >= 1");
    if (T < 3) throw DomainError("confidence constants: T must be >= 3");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("confidence constants: delta must lie in (0,1]");

    ConfidenceConstants c;
    c.n_states = S;
    c.n_actions = A;
    c.horizon = T;
    c.delta = delta;
    double log_t = std::log(static_cast<double>(T));
    c.b = std::log(2.0 * std::exp(1.0) * S * static_cast<double>(S) * A * log_t / delta);
    c.g = c.b + 1.0 / log_t;
    c.c_p = S * (c.b + std::log(c.g) * (1.0 + 1.0 / c.g));
    c.c_mu = std::log(4.0 * S * static_cast<double>(A) * log_t / delta) / 1.99;
    if (!(c.c_p <= 4.0 * S * c.b))
        throw NumericalFailure("confidence constants: c_p exceeds 4*S*b");
    return c;
}

} // namespace arlab
