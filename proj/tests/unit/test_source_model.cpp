#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mauc/error.hpp"
#include "mauc/rng.hpp"
#include "mauc/source_model.hpp"

using namespace mauc;

namespace {

double h2(double p) { return p <= 0 || p >= 1 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

MarkovModel binary_chain(double a, double b) { return MarkovModel(2, 1, {1 - a, a, b, 1 - b}); }

// All length-L blocks over [0, k), in lexicographic order.
std::vector<Sequence> all_blocks(int k, std::size_t L) {
    std::vector<Sequence> out;
    Sequence cur(L, 0);
    for (;;) {
        out.push_back(cur);
        std::size_t i = L;
        while (i > 0) {
            --i;
            if (++cur[i] < k) break;
            cur[i] = 0;
            if (i == 0) return out;
        }
        if (L == 0) return out;
    }
}

} // namespace

TEST(MarkovModel, RejectsBadRows) {
    EXPECT_THROW(MarkovModel(2, 0, {0.5, 0.6}), InvalidParameter);
    EXPECT_THROW(MarkovModel(2, 0, {0.5}), InvalidParameter);
    EXPECT_THROW(MarkovModel(1, 0, {1.0}), InvalidParameter);
    EXPECT_THROW(MarkovModel(2, 0, {1.5, -0.5}), InvalidParameter);
}

TEST(MarkovModel, TwoStateStationaryClosedForm) {
    const double a = 0.3, b = 0.1;
    const auto m = binary_chain(a, b);
    ASSERT_TRUE(m.has_stationary());
    EXPECT_NEAR(m.stationary()[0], b / (a + b), 1e-12);
    EXPECT_NEAR(m.stationary()[1], a / (a + b), 1e-12);
    EXPECT_EQ(m.num_parameters(), 2u);
}

TEST(MarkovModel, ReducibleChainHasNoStationary) {
    const MarkovModel m(2, 1, {1.0, 0.0, 0.0, 1.0});
    EXPECT_FALSE(m.has_stationary());
    EXPECT_THROW(m.stationary(), NumericalFailure);
}

TEST(MarkovModel, LargeChainStationaryIsFixedPoint) {
    // 1024 states exercises the iterative solver.
    const auto m = sample_jeffreys(4, 5, 11);
    const auto& pi = m.stationary();
    ASSERT_EQ(pi.size(), 1024u);
    std::vector<double> next(pi.size(), 0.0);
    for (std::size_t s = 0; s < pi.size(); ++s)
        for (int x = 0; x < 4; ++x) next[m.next_state(s, static_cast<Symbol>(x))] += pi[s] * m.prob(s, static_cast<Symbol>(x));
    double err = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) err = std::max(err, std::abs(next[s] - pi[s]));
    EXPECT_LT(err, 1e-10);
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-12);
}

TEST(Jeffreys, RowsAreDistributions) {
    for (int k : {2, 3, 16, 256}) {
        const auto m = sample_jeffreys(k, 1, static_cast<std::uint64_t>(k));
        for (std::size_t s = 0; s < m.num_states(); ++s) {
            const auto row = m.row(s);
            EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
            for (double v : row) EXPECT_GE(v, 0.0);
        }
    }
}

TEST(Jeffreys, BinaryMarginalIsArcsineLaw) {
    // First coordinate of Dirichlet(1/2, 1/2) is Beta(1/2, 1/2); its CDF is
    // obtained here by midpoint quadrature of the density.
    auto beta_cdf = [](double x) {
        // substitution t = sin^2(u) turns the density into the constant 2/pi
        const double upper = std::asin(std::sqrt(x));
        const int steps = 2000;
        double acc = 0.0;
        for (int i = 0; i < steps; ++i) {
            const double u = (i + 0.5) * upper / steps;
            const double t = std::sin(u) * std::sin(u);
            const double dens = 1.0 / (std::numbers::pi * std::sqrt(t * (1 - t)));
            acc += dens * 2 * std::sin(u) * std::cos(u) * upper / steps;
        }
        return acc;
    };
    Rng rng = make_rng(2024);
    const int N = 4000;
    std::vector<double> xs;
    for (int i = 0; i < N; ++i) xs.push_back(sample_jeffreys(2, 0, rng).prob(0, 0));
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < N; ++i) {
        const double F = beta_cdf(xs[static_cast<std::size_t>(i)]);
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / N), std::abs(F - static_cast<double>(i + 1) / N)});
    }
    EXPECT_LT(ks, 1.63 / std::sqrt(N));  // 1% critical value
}

TEST(Generate, EmpiricalTransitionsMatchRows) {
    const auto m = sample_jeffreys(3, 1, 5);
    const auto x = generate(m, 300000, 6);
    std::vector<double> counts(9, 0.0), totals(3, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        counts[x[t - 1] * 3u + x[t]] += 1;
        totals[x[t - 1]] += 1;
    }
    for (std::size_t s = 0; s < 3; ++s) {
        if (totals[s] < 1000) continue;
        for (std::size_t v = 0; v < 3; ++v) EXPECT_NEAR(counts[s * 3 + v] / totals[s], m.prob(s, static_cast<Symbol>(v)), 0.015);
    }
}

TEST(Generate, DeterministicPerSeed) {
    const auto m = sample_jeffreys(4, 2, 9);
    EXPECT_EQ(generate(m, 1000, 3), generate(m, 1000, 3));
    EXPECT_NE(generate(m, 1000, 3), generate(m, 1000, 4));
    EXPECT_TRUE(generate(m, 0, 3).empty());
}

TEST(EntropyRate, IidAndBinaryChainClosedForms) {
    const MarkovModel iid(4, 0, {0.5, 0.25, 0.125, 0.125});
    EXPECT_NEAR(entropy_rate(iid), 1.75, 1e-12);
    const double a = 0.2, b = 0.35;
    const auto m = binary_chain(a, b);
    const double pi0 = b / (a + b);
    EXPECT_NEAR(entropy_rate(m), pi0 * h2(a) + (1 - pi0) * h2(b), 1e-12);
}

TEST(EmpiricalEntropy, SimplePatterns) {
    Sequence alt;
    for (int i = 0; i < 1000; ++i) alt.push_back(static_cast<Symbol>(i % 2));
    EXPECT_NEAR(empirical_entropy(alt, 2, 0), 1.0, 1e-12);
    EXPECT_NEAR(empirical_entropy(alt, 2, 1), 0.0, 1e-12);
    EXPECT_NEAR(empirical_entropy(Sequence(100, 1), 2, 0), 0.0, 1e-12);
    EXPECT_THROW(empirical_entropy(Sequence(4, 0), 4, 1), InvalidParameter);
}

TEST(EmpiricalEntropy, ConvergesToEntropyRate) {
    const auto m = sample_jeffreys(4, 1, 17);
    const auto x = generate(m, 200000, 18);
    EXPECT_NEAR(empirical_entropy(x, 4, 1), entropy_rate(m), 0.01);
}

TEST(KlRate, ZeroOnSelfAndIidClosedForm) {
    const auto m = sample_jeffreys(3, 2, 4);
    EXPECT_NEAR(kl_rate(m, m), 0.0, 1e-12);
    const MarkovModel a(2, 0, {0.9, 0.1}), b(2, 0, {0.5, 0.5});
    EXPECT_NEAR(kl_rate(a, b), 0.9 * std::log2(0.9 / 0.5) + 0.1 * std::log2(0.1 / 0.5), 1e-12);
    EXPECT_GT(kl_rate(a, b), 0.0);
    EXPECT_THROW(kl_rate(a, m), InvalidParameter);
}

TEST(Compound, LabelsLengthsAndFrequencies) {
    std::vector<MarkovModel> models{sample_jeffreys(2, 1, 1), sample_jeffreys(2, 1, 2), sample_jeffreys(2, 1, 3)};
    const CompoundSource c(models, {0.5, 0.3, 0.2});
    const auto mem = sample_compound(c, 5000, LengthLaw{3, 9}, 77);
    ASSERT_EQ(mem.size(), 5000u);
    std::vector<double> freq(3, 0.0);
    for (std::size_t i = 0; i < mem.size(); ++i) {
        ASSERT_GE(mem.labels[i], 1);
        ASSERT_LE(mem.labels[i], 3);
        freq[static_cast<std::size_t>(mem.labels[i]) - 1] += 1.0 / 5000;
        EXPECT_GE(mem.sequences[i].size(), 3u);
        EXPECT_LE(mem.sequences[i].size(), 9u);
    }
    EXPECT_NEAR(freq[0], 0.5, 0.03);
    EXPECT_NEAR(freq[1], 0.3, 0.03);
    EXPECT_NEAR(freq[2], 0.2, 0.03);
    EXPECT_THROW(CompoundSource(models, {0.5, 0.5}), InvalidParameter);
}

TEST(BlockProbability, SumsToOneOverAllBlocks) {
    const auto m = sample_jeffreys(2, 2, 8);
    for (std::size_t L : {0u, 1u, 2u, 5u}) {
        double total = 0.0;
        for (const auto& b : all_blocks(2, L)) total += std::exp2(log2_block_probability(m, b));
        EXPECT_NEAR(total, 1.0, 1e-12) << "L=" << L;
    }
}

TEST(BlockProbability, LongBlocksStayFinite) {
    const auto m = sample_jeffreys(4, 1, 8);
    const auto x = generate(m, 20000, 9);
    EXPECT_TRUE(std::isfinite(log2_block_probability(m, x)));
}

TEST(MixtureMeasure, IsAProbabilityMeasure) {
    const CompoundSource c({sample_jeffreys(2, 1, 1), sample_jeffreys(2, 1, 2)}, {0.4, 0.6});
    const MixtureTreeMeasure mix(c, 2);
    for (std::size_t L : {1u, 3u, 7u}) {
        double total = 0.0;
        for (const auto& b : all_blocks(2, L)) total += std::exp2(mix.log2_block(b));
        EXPECT_NEAR(total, 1.0, 1e-12) << "L=" << L;
    }
}

TEST(MixtureMeasure, SingleComponentReducesToTheSource) {
    const auto m = sample_jeffreys(3, 1, 21);
    const MixtureTreeMeasure mix(CompoundSource({m}, {1.0}), 1);
    const auto x = generate(m, 50, 22);
    EXPECT_NEAR(mix.log2_block(x), log2_block_probability(m, x), 1e-9);
}

TEST(MixtureKl, MonteCarloMatchesExactEnumeration) {
    const auto a = binary_chain(0.1, 0.2);
    const auto b = binary_chain(0.7, 0.6);
    const CompoundSource c({a, b}, {0.5, 0.5});
    const MixtureTreeMeasure mix(c, 1);
    const std::size_t L = 10;
    double exact = 0.0;
    for (const auto& blk : all_blocks(2, L)) {
        const double la = log2_block_probability(a, blk);
        exact += std::exp2(la) * (la - mix.log2_block(blk));
    }
    exact /= static_cast<double>(L);
    const auto est = mixture_kl_rate(a, c, 1, 20000, 99, L);
    EXPECT_GT(exact, 0.0);
    EXPECT_NEAR(est.rate, exact, 4 * est.std_error + 1e-3);
}

TEST(MixtureKl, ZeroWhenEveryComponentIsTheSource) {
    const auto m = sample_jeffreys(4, 1, 3);
    const auto est = mixture_kl_rate(m, CompoundSource({m, m}, {0.5, 0.5}), 1, 4, 1, 100);
    EXPECT_EQ(est.rate, 0.0);
    EXPECT_THROW(mixture_kl_rate(m, CompoundSource({m, sample_jeffreys(4, 1, 5)}, {0.5, 0.5}), 0, 4, 1, 100),
                 InvalidParameter);
}

TEST(Seeds, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
}
