#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

using Seq = std::vector<std::uint8_t>;

// Sequential KT probability of the symbols whose context matches `ctx`
// (ctx[0] is the most recent symbol; missing history counts as symbol 0).
inline double kt_leaf(const Seq& x, const Seq& ctx, int k) {
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    double total = 0.0, prob = 1.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        bool match = true;
        for (std::size_t j = 0; j < ctx.size() && match; ++j) {
            const std::uint8_t past = t >= j + 1 ? x[t - j - 1] : 0;
            match = past == ctx[j];
        }
        if (!match) continue;
        prob *= (counts[x[t]] + 0.5) / (total + 0.5 * k);
        counts[x[t]] += 1;
        total += 1;
    }
    return prob;
}

struct PrunedTree {
    double prior;             // probability of this tree under the CTW prior
    std::vector<Seq> leaves;  // contexts, most recent symbol first
};

// Every pruned k-ary tree of depth <= D below `prefix` with its prior: a node
// above depth D is a leaf with probability 1/2 and splits with probability 1/2.
inline std::vector<PrunedTree> enumerate_trees(int k, int D, const Seq& prefix) {
    if (static_cast<int>(prefix.size()) == D) return {{1.0, {prefix}}};
    std::vector<PrunedTree> out{{0.5, {prefix}}};
    std::vector<PrunedTree> combos{{0.5, {}}};
    for (int c = 0; c < k; ++c) {
        Seq child = prefix;
        child.push_back(static_cast<std::uint8_t>(c));
        const auto sub = enumerate_trees(k, D, child);
        std::vector<PrunedTree> next;
        for (const auto& a : combos)
            for (const auto& b : sub) {
                PrunedTree t{a.prior * b.prior, a.leaves};
                t.leaves.insert(t.leaves.end(), b.leaves.begin(), b.leaves.end());
                next.push_back(std::move(t));
            }
        combos = std::move(next);
    }
    out.insert(out.end(), combos.begin(), combos.end());
    return out;
}

// Explicit weighted mixture over all pruned trees; returns log2 probability.
inline double ctw_mixture_log2(const Seq& x, int k, int D) {
    double total = 0.0;
    for (const auto& tree : enumerate_trees(k, D, {})) {
        double p = tree.prior;
        for (const auto& leaf : tree.leaves) p *= kt_leaf(x, leaf, k);
        total += p;
    }
    return std::log2(total);
}

// Brute-force reading of the quantile estimator: the largest sample value z
// such that at least (1 - eps) N samples are >= z.
inline double gain_quantile(const std::vector<double>& q, double eps) {
    double best = -INFINITY;
    const double need = (1.0 - eps) * static_cast<double>(q.size()) - 1e-9;
    for (double z : q) {
        const auto count = std::count_if(q.begin(), q.end(), [&](double v) { return v >= z; });
        if (static_cast<double>(count) >= need) best = std::max(best, z);
    }
    return best;
}

// Best one-to-one matching accuracy by trying every permutation.
inline double permutation_accuracy(const std::vector<int>& a, const std::vector<int>& labels, int K) {
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), 1);
    std::size_t best = 0;
    do {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (perm[static_cast<std::size_t>(a[i]) - 1] == labels[i]) ++hit;
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(a.size());
}

}  // namespace oracle
