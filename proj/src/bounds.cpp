#include "mauc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mauc/error.hpp"

namespace mauc::bounds {

namespace {

constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

void check_n(double n) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw InvalidParameter("sequence length n must be finite and >= 1");
}

void check_family(const FamilySpec& f) {
    if (!(f.d >= 1.0) || !std::isfinite(f.d)) throw InvalidParameter("parameter count d must be >= 1");
    if (!std::isfinite(f.log_c)) throw InvalidParameter("logC must be finite");
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
}

void check_memory(double m) {
    if (std::isnan(m) || m < 0.0) throw InvalidParameter("memory length m must be >= 0 or infinite");
    if (m == 0.0) throw InvalidParameter("memory length m = 0 leaves the residual redundancy undefined");
}

} // namespace

FamilySpec FamilySpec::markov(int k, int order) {
    if (k < 2) throw InvalidParameter("alphabet size k must be >= 2");
    if (order < 0) throw InvalidParameter("order must be >= 0");
    FamilySpec f;
    f.k = k;
    f.order = order;
    f.d = std::pow(static_cast<double>(k), order) * (k - 1);
    f.log_c = jeffreys_integral_log(k, order);
    return f;
}

FamilySpec FamilySpec::custom(double d, double log_c, int k, int order) {
    FamilySpec f;
    f.k = k;
    f.order = order;
    f.d = d;
    f.log_c = log_c;
    check_family(f);
    return f;
}

void BoundQuery::validate() const {
    check_n(n);
    if (std::isnan(m) || m < 0.0) throw InvalidParameter("memory length m must be >= 0 or infinite");
    check_eps(eps);
    if (!(p_z > 0.0 && p_z <= 1.0)) throw InvalidParameter("p_z must lie in (0, 1]");
    if (!(entropy_p >= 0.0)) throw InvalidParameter("H(p) must be >= 0");
    if (!(entropy_rate > 0.0)) throw InvalidParameter("entropy rate must be > 0");
}

double jeffreys_integral_log(int k, int order) {
    if (k < 2) throw InvalidParameter("alphabet size k must be >= 2");
    if (order < 0) throw InvalidParameter("order must be >= 0");
    const double row = (0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k)) / std::numbers::ln2;
    return std::pow(static_cast<double>(k), order) * row;
}

double avg_minimax_redundancy(const FamilySpec& family, double n) {
    check_n(n);
    check_family(family);
    return 0.5 * family.d * std::log2(n / kTwoPiE) + family.log_c;
}

double redundancy_tail_bound(const FamilySpec& family, double n, double delta) {
    check_n(n);
    check_family(family);
    // 2^{-logC} (2 pi e / n^delta)^{d/2}, evaluated in the log domain.
    const double log_term = -family.log_c + 0.5 * family.d * (std::log2(kTwoPiE) - delta * std::log2(n));
    return std::clamp(1.0 - std::exp2(log_term), 0.0, 1.0);
}

double tail_exponent_closed_form(const FamilySpec& family, double n, double eps) {
    check_n(n);
    check_family(family);
    check_eps(eps);
    if (n == 1.0) throw NoSolution("tail bound does not depend on delta at n = 1");
    return (std::log2(kTwoPiE) + (2.0 / family.d) * (std::log2(1.0 / eps) - family.log_c)) / std::log2(n);
}

double solve_tail_exponent(const FamilySpec& family, double n, double eps) {
    check_n(n);
    check_family(family);
    check_eps(eps);
    const double target = 1.0 - eps;
    auto residual = [&](double delta) { return redundancy_tail_bound(family, n, delta) - target; };

    // The tail is nondecreasing in delta; widen the bracket until it straddles the target.
    double lo = -1.0, hi = 2.0;
    for (int i = 0; i < 200 && residual(lo) > 0.0; ++i) lo = lo * 2.0 - 1.0;
    for (int i = 0; i < 200 && residual(hi) < 0.0; ++i) hi = hi * 2.0 + 1.0;
    if (!(residual(lo) <= 0.0 && residual(hi) >= 0.0))
        throw NoSolution("tail bound never crosses 1 - eps in the search bracket");

    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double delta = std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
    if (!(std::abs(residual(delta)) < 1e-9)) throw NoSolution("bisection did not reach the tail target");
    return delta;
}

double overhead_ratio(const FamilySpec& family, double n, double entropy_rate, double eps) {
    if (!(entropy_rate > 0.0)) throw InvalidParameter("entropy rate must be > 0");
    const double delta = solve_tail_exponent(family, n, eps);
    const double redundancy = std::max(0.0, (1.0 - delta) * 0.5 * family.d * std::log2(n));
    return 1.0 + redundancy / (n * entropy_rate);
}

double residual_redundancy_single(double n, double m, double d) {
    check_n(n);
    check_memory(m);
    if (std::isinf(m)) return 2.0;
    return 0.5 * d * std::log2(1.0 + n / m) + 2.0;
}

double residual_redundancy_clustered(double n, double m, double d, double p_z, double entropy_p) {
    check_n(n);
    check_memory(m);
    if (!(p_z > 0.0 && p_z <= 1.0)) throw InvalidParameter("p_z must lie in (0, 1]");
    if (!(entropy_p >= 0.0)) throw InvalidParameter("H(p) must be >= 0");
    if (std::isinf(m)) return 3.0 + entropy_p;
    return 0.5 * d * std::log2(1.0 + n / (p_z * m)) + 3.0 + entropy_p;
}

double memorization_gain_lower_bound(const BoundQuery& query, const FamilySpec& family) {
    query.validate();
    const double rbar = avg_minimax_redundancy(family, query.n);
    const double r1 = residual_redundancy_single(query.n, query.m, family.d);
    return 1.0 + (rbar + std::log2(query.eps) - r1) / (query.entropy() + r1);
}

double clustered_gain_lower_bound(const BoundQuery& query, const FamilySpec& family) {
    query.validate();
    const double rbar = avg_minimax_redundancy(family, query.n);
    const double r2 = residual_redundancy_clustered(query.n, query.m, family.d, query.p_z, query.entropy_p);
    return 1.0 + (rbar + std::log2(query.eps) - r2) / (query.entropy() + r2);
}

MixedMemoryBound mixed_memory_gain_upper_bound(double n, const FamilySpec& family, double entropy_rate,
                                               double kl_rate) {
    check_n(n);
    check_family(family);
    if (!(entropy_rate > 0.0)) throw InvalidParameter("entropy rate must be > 0");
    if (!(kl_rate >= 0.0)) throw InvalidParameter("KL rate must be >= 0");

    auto gain = [&](double len) {
        const double h = len * entropy_rate;
        return (h + avg_minimax_redundancy(family, len)) / (h + len * kl_rate);
    };
    MixedMemoryBound out{gain(n), kInfinity};
    if (kl_rate == 0.0) return out;

    // gain > 1 iff Rbar(n) > n * kl. Rbar(n) - n*kl is concave in n with its
    // peak at n = (d/2) / (kl ln 2), so there is one crossing beyond the peak.
    auto excess = [&](double len) { return avg_minimax_redundancy(family, len) - len * kl_rate; };
    double lo = std::max(1.0, 0.5 * family.d / (kl_rate * std::numbers::ln2));
    if (excess(lo) <= 0.0) {
        out.crossover = lo;
        return out;
    }
    double hi = 2.0 * lo;
    while (excess(hi) > 0.0) hi *= 2.0;
    while (hi - lo > 1e-6 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.crossover = hi;
    return out;
}

double entropy_of_p(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v < 0.0) throw InvalidParameter("probabilities must be nonnegative");
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

ConvergenceTable large_n_convergence_table(const FamilySpec& family, std::span<const double> n_grid,
                                           std::span<const double> m_grid, double entropy_rate, double eps) {
    ConvergenceTable table;
    for (double n : n_grid)
        for (double m : m_grid) {
            BoundQuery q;
            q.n = n;
            q.m = m;
            q.entropy_rate = entropy_rate;
            q.eps = eps;
            table.rows.push_back({n, m, memorization_gain_lower_bound(q, family)});
        }

    table.converges_in_n = true;
    for (double m : m_grid) {
        double prev = kInfinity;
        for (const auto& row : table.rows) {
            if (row.m != m || !(row.n > m)) continue;
            const double dist = std::abs(row.gain - 1.0);
            if (!(dist < prev)) table.converges_in_n = false;
            prev = dist;
        }
    }
    table.nondecreasing_in_m = true;
    for (double n : n_grid) {
        double prev = -kInfinity;
        double prev_m = -kInfinity;
        for (const auto& row : table.rows) {
            if (row.n != n) continue;
            if (row.m >= prev_m && row.gain < prev) table.nondecreasing_in_m = false;
            prev = row.gain;
            prev_m = row.m;
        }
    }
    return table;
}

} // namespace mauc::bounds
