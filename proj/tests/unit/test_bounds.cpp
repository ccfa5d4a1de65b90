#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mauc/bounds.hpp"
#include "mauc/error.hpp"

using namespace mauc;
using namespace mauc::bounds;

namespace {

const double kLog2Pi = std::log2(std::numbers::pi);

FamilySpec bernoulli() { return FamilySpec::custom(1.0, kLog2Pi, 2, 0); }

// Composite Simpson rule of f over [a, b] with `steps` (even) intervals.
template <class F>
double simpson(F f, double a, double b, int steps) {
    const double h = (b - a) / steps;
    double s = f(a) + f(b);
    for (int i = 1; i < steps; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

BoundQuery query(double n, double m, double rate, double eps = 0.05) {
    BoundQuery q;
    q.n = n;
    q.m = m;
    q.entropy_rate = rate;
    q.eps = eps;
    return q;
}

} // namespace

TEST(JeffreysIntegral, BinaryMatchesQuadrature) {
    // Integral of (t(1-t))^{-1/2} over [0, 1]; with t = v^2 on the left half
    // the integrand becomes 2 / sqrt(1 - v^2), which is smooth.
    const double half = simpson([](double v) { return 2.0 / std::sqrt(1.0 - v * v); }, 0.0, std::sqrt(0.5), 2000);
    EXPECT_NEAR(jeffreys_integral_log(2, 0), std::log2(2.0 * half), 1e-6);
    EXPECT_NEAR(jeffreys_integral_log(2, 0), 1.6514961294723187, 1e-9);
}

TEST(JeffreysIntegral, TernaryAndHigherOrder) {
    EXPECT_NEAR(jeffreys_integral_log(3, 0), std::log2(2.0 * std::numbers::pi), 1e-9);
    EXPECT_NEAR(jeffreys_integral_log(2, 1), 2.0 * kLog2Pi, 1e-12);
    EXPECT_NEAR(jeffreys_integral_log(4, 1), 13.212, 1e-3);
    EXPECT_THROW(jeffreys_integral_log(1, 0), InvalidParameter);
}

TEST(FamilySpec, MarkovParameterCount) {
    EXPECT_DOUBLE_EQ(FamilySpec::markov(4, 1).d, 12.0);
    EXPECT_DOUBLE_EQ(FamilySpec::markov(256, 1).d, 65280.0);
    EXPECT_DOUBLE_EQ(FamilySpec::markov(2, 0).d, 1.0);
    EXPECT_THROW(FamilySpec::custom(0.5, 0.0), InvalidParameter);
    EXPECT_THROW(FamilySpec::custom(1.0, NAN), InvalidParameter);
}

TEST(AvgMinimaxRedundancy, Examples) {
    EXPECT_NEAR(avg_minimax_redundancy(bernoulli(), 1000.0), 4.587292686622721, 1e-9);
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    EXPECT_NEAR(avg_minimax_redundancy(FamilySpec::custom(2.0, 0.7), two_pi_e), 0.7, 1e-12);
    const auto f1 = FamilySpec::custom(3.0, 1.0), f2 = FamilySpec::custom(6.0, 1.0);
    EXPECT_NEAR(avg_minimax_redundancy(f2, 5000.0) - 2.0 * avg_minimax_redundancy(f1, 5000.0), 1.0 - 2.0, 1e-9);
    EXPECT_THROW(avg_minimax_redundancy(bernoulli(), 0.5), InvalidParameter);
}

TEST(TailBound, ExamplesAndClamping) {
    const double expect = 1.0 - (1.0 / std::numbers::pi) *
                                    std::sqrt(2.0 * std::numbers::pi * std::numbers::e / std::sqrt(1000.0));
    EXPECT_NEAR(redundancy_tail_bound(bernoulli(), 1000.0, 0.5), expect, 1e-12);
    EXPECT_NEAR(redundancy_tail_bound(bernoulli(), 1000.0, 0.5), 0.766069, 1e-6);
    EXPECT_DOUBLE_EQ(redundancy_tail_bound(bernoulli(), 10.0, 0.0), 0.0);
    EXPECT_NEAR(redundancy_tail_bound(bernoulli(), 1e6, 50.0), 1.0, 1e-12);
    // Extreme families do not overflow.
    EXPECT_DOUBLE_EQ(redundancy_tail_bound(FamilySpec::markov(256, 2), 100.0, 0.0), 0.0);
}

TEST(TailExponent, BernoulliExample) {
    const double closed = tail_exponent_closed_form(bernoulli(), 1000.0, 0.05);
    EXPECT_NEAR(closed, 0.946744865400354, 1e-9);
    EXPECT_NEAR(solve_tail_exponent(bernoulli(), 1000.0, 0.05), closed, 1e-9);
}

TEST(TailExponent, BisectionMatchesClosedFormOnGrid) {
    int checked = 0;
    for (double d : {1.0, 2.0, 12.0, 255.0, 65280.0})
        for (double n : {10.0, 1e3, 1e5, 1e7})
            for (double eps : {0.01, 0.05, 0.2, 0.5, 0.9}) {
                const auto f = FamilySpec::custom(d, 0.3 * d);
                EXPECT_NEAR(solve_tail_exponent(f, n, eps), tail_exponent_closed_form(f, n, eps), 1e-9)
                    << "d=" << d << " n=" << n << " eps=" << eps;
                ++checked;
            }
    EXPECT_EQ(checked, 100);
}

TEST(TailExponent, DecreasesAsEpsGrows) {
    double prev = INFINITY;
    for (double eps = 0.01; eps < 0.99; eps += 0.05) {
        const double delta = solve_tail_exponent(bernoulli(), 1000.0, eps);
        EXPECT_LT(delta, prev);
        prev = delta;
    }
}

TEST(TailExponent, NoSolutionAtLengthOne) {
    EXPECT_THROW(solve_tail_exponent(bernoulli(), 1.0, 0.05), NoSolution);
    EXPECT_THROW(tail_exponent_closed_form(bernoulli(), 1.0, 0.05), NoSolution);
    EXPECT_THROW(solve_tail_exponent(bernoulli(), 100.0, 1.0), InvalidParameter);
}

TEST(OverheadRatio, MonotoneAndFrozenValues) {
    const auto f = FamilySpec::markov(256, 1);
    // Reference values from the closed form (percent overhead at 2^18 ... 2^26 bytes).
    const std::vector<std::pair<int, double>> expected{
        {18, 124.53159431017097}, {20, 37.35848451504275}, {22, 10.896017613135687},
        {24, 3.1131035243776717}, {26, 0.8755506613678554}};
    double prev = INFINITY;
    for (auto [p, pct] : expected) {
        const double r = overhead_ratio(f, std::exp2(p), 1.0, 0.05);
        EXPECT_NEAR(100.0 * (r - 1.0), pct, 1e-6) << "n=2^" << p;
        EXPECT_LT(r, prev);
        prev = r;
    }
    EXPECT_LT(overhead_ratio(f, std::exp2(20), 8.0, 0.05), overhead_ratio(f, std::exp2(20), 4.0, 0.05));
    EXPECT_THROW(overhead_ratio(f, 1024.0, 0.0, 0.05), InvalidParameter);
}

TEST(ResidualRedundancy, Examples) {
    EXPECT_EQ(residual_redundancy_single(1024.0, kInfinity, 12.0), 2.0);
    EXPECT_NEAR(residual_redundancy_single(1024.0, 8192.0, 1.0), 0.5 * std::log2(1.125) + 2.0, 1e-12);
    EXPECT_NEAR(residual_redundancy_single(1024.0, 8192.0, 1.0), 2.084963, 1e-6);
    EXPECT_EQ(residual_redundancy_clustered(1024.0, kInfinity, 12.0, 0.3, 1.5), 4.5);
    for (double m : {1.0, 100.0, 1e6})
        EXPECT_NEAR(residual_redundancy_clustered(500.0, m, 7.0, 1.0, 0.0), residual_redundancy_single(500.0, m, 7.0) + 1.0,
                    1e-12);
    EXPECT_THROW(residual_redundancy_single(10.0, 0.0, 1.0), InvalidParameter);
    EXPECT_THROW(residual_redundancy_clustered(10.0, 5.0, 1.0, 0.0, 0.0), InvalidParameter);
    EXPECT_THROW(residual_redundancy_clustered(10.0, 5.0, 1.0, 0.5, -1.0), InvalidParameter);
}

TEST(GainLowerBound, Examples) {
    EXPECT_NEAR(memorization_gain_lower_bound(query(1024, 8192, 0.5), bernoulli()), 0.996493789581884, 1e-9);
    const auto f = FamilySpec::markov(256, 1);
    const double at_inf = memorization_gain_lower_bound(query(131072, kInfinity, 1.0), f);
    const double at_8mb = memorization_gain_lower_bound(query(131072, 8388608, 1.0), f);
    EXPECT_NEAR(at_inf, 3.24156, 1e-5);
    EXPECT_NEAR(at_8mb, 3.22360, 1e-5);
    EXPECT_GE(at_8mb, 1.5);
}

TEST(GainLowerBound, UnboundedMemoryLimit) {
    for (auto f : {bernoulli(), FamilySpec::markov(4, 1), FamilySpec::markov(256, 1)})
        for (double n : {1e3, 1e5, 1e7}) {
            const auto q = query(n, kInfinity, 1.0);
            const double rbar = avg_minimax_redundancy(f, n);
            const double corollary = 1.0 + (rbar + std::log2(0.05) - 2.0) / (n + 2.0);
            EXPECT_DOUBLE_EQ(memorization_gain_lower_bound(q, f), corollary);
            EXPECT_LT(std::abs(memorization_gain_lower_bound(query(n, 1e9 * n, 1.0), f) - corollary), 1e-3);
        }
}

TEST(GainLowerBound, ClusteredBelowSingleAndMonotoneInEntropy) {
    const auto f = FamilySpec::markov(4, 1);
    for (double n : {256.0, 4096.0})
        for (double m : {1024.0, 1e6, kInfinity}) {
            auto q = query(n, m, 1.5);
            EXPECT_LT(clustered_gain_lower_bound(q, f), memorization_gain_lower_bound(q, f));
            double prev = INFINITY;
            for (double hp : {0.0, 0.5, 1.0, 3.0}) {
                q.entropy_p = hp;
                const double g = clustered_gain_lower_bound(q, f);
                EXPECT_LE(g, prev);
                prev = g;
            }
        }
}

TEST(GainLowerBound, TenUniformSourcesBelowSingleSource) {
    const auto f = FamilySpec::markov(4, 1);
    for (double n : {128.0, 512.0, 1024.0, 4096.0, 16384.0})
        for (double m_per : {1024.0, 16384.0, 131072.0}) {
            auto one = query(n, m_per, 1.5);
            auto ten = one;
            ten.m = 10.0 * m_per;
            ten.p_z = 0.1;
            ten.entropy_p = std::log2(10.0);
            EXPECT_LT(clustered_gain_lower_bound(ten, f), clustered_gain_lower_bound(one, f));
        }
}

TEST(GainLowerBound, FixedFamilyCurveShape) {
    const auto f = FamilySpec::markov(256, 1);
    const std::vector<double> n_grid{131072, 524288, 2097152, 8388608, 33554432};
    const std::vector<double> m_grid{131072, 524288, 2097152, 8388608, kInfinity};
    for (double n : n_grid) {
        double prev = -INFINITY;
        for (double m : m_grid) {
            const double g = memorization_gain_lower_bound(query(n, m, 1.0), f);
            EXPECT_GT(g, prev);
            prev = g;
        }
    }
    for (double m : m_grid) {
        double prev = INFINITY;
        for (double n : n_grid) {
            const double g = memorization_gain_lower_bound(query(n, m, 1.0), f);
            EXPECT_LT(g, prev);
            prev = g;
        }
    }
}

TEST(ConvergenceTable, ApproachesOneInN) {
    const auto f = FamilySpec::markov(4, 1);
    const std::vector<double> n_grid{1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
    const std::vector<double> m_grid{1e3, 1e4};
    const auto table = large_n_convergence_table(f, n_grid, m_grid, 1.0, 0.05);
    EXPECT_EQ(table.rows.size(), 12u);
    EXPECT_TRUE(table.converges_in_n);
    EXPECT_TRUE(table.nondecreasing_in_m);
    EXPECT_NEAR(memorization_gain_lower_bound(query(1e9, 1e3, 1.0), f), 1.0, 1e-3);
}

TEST(MixedMemoryBound, ZeroDivergence) {
    const auto f = FamilySpec::markov(2, 1);
    const auto b = mixed_memory_gain_upper_bound(2048.0, f, 0.5, 0.0);
    EXPECT_NEAR(b.gain, 1.0 + avg_minimax_redundancy(f, 2048.0) / 1024.0, 1e-12);
    EXPECT_GT(b.gain, 1.0);
    EXPECT_TRUE(std::isinf(b.crossover));
}

TEST(MixedMemoryBound, LimitAndCrossover) {
    const auto f = FamilySpec::markov(2, 1);  // d = 2
    const double rate = 0.5, kl = 0.1;
    EXPECT_NEAR(mixed_memory_gain_upper_bound(1e12, f, rate, kl).gain, rate / (rate + kl), 1e-9);

    // Independent integer scan: the first n past the peak where Rbar(n) <= n kl.
    auto excess = [&](double n) {
        return 0.5 * 2.0 * std::log2(n / (2.0 * std::numbers::pi * std::numbers::e)) + f.log_c - n * kl;
    };
    double n = 1.0;
    while (excess(n + 1.0) > excess(n) || excess(n) > 0.0) n += 1.0;
    const auto b = mixed_memory_gain_upper_bound(1000.0, f, rate, kl);
    EXPECT_NEAR(b.crossover, n, 1.0);
    EXPECT_LT(mixed_memory_gain_upper_bound(b.crossover + 2.0, f, rate, kl).gain, 1.0);
    EXPECT_GT(mixed_memory_gain_upper_bound(b.crossover - 2.0, f, rate, kl).gain, 1.0);
    EXPECT_THROW(mixed_memory_gain_upper_bound(100.0, f, rate, -0.1), InvalidParameter);
}

TEST(EntropyOfP, Examples) {
    const std::vector<double> point{0.0, 1.0, 0.0};
    EXPECT_EQ(entropy_of_p(point), 0.0);
    const std::vector<double> uniform(10, 0.1);
    EXPECT_NEAR(entropy_of_p(uniform), std::log2(10.0), 1e-6);
    const std::vector<double> a{0.5, 0.3, 0.2}, b{0.2, 0.5, 0.3};
    EXPECT_DOUBLE_EQ(entropy_of_p(a), entropy_of_p(b));
    const std::vector<double> bad{1.2, -0.2};
    EXPECT_THROW(entropy_of_p(bad), InvalidParameter);
}

TEST(BoundQuery, Validation) {
    EXPECT_THROW(query(0.5, 10, 1.0).validate(), InvalidParameter);
    EXPECT_THROW(query(10, -1, 1.0).validate(), InvalidParameter);
    EXPECT_THROW(query(10, 10, 1.0, 0.0).validate(), InvalidParameter);
    EXPECT_THROW(query(10, 10, 0.0).validate(), InvalidParameter);
    auto q = query(10, 10, 1.0);
    q.p_z = 0.0;
    EXPECT_THROW(q.validate(), InvalidParameter);
    EXPECT_NO_THROW(query(10, kInfinity, 1.0).validate());
}
