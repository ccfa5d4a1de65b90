#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mauc/source_model.hpp"

namespace mauc {

/// Krichevsky-Trofimov (add-1/2) sequential estimate of `symbol` given counts.
double kt_symbol_prob(std::span<const std::uint32_t> counts, Symbol symbol, int k);

/// The most recent `depth` symbols packed base k, most recent symbol in the
/// lowest digit. A reset window is all-zero, i.e. padded with symbol 0.
class ContextWindow {
public:
    ContextWindow(int k, int depth);

    void reset() noexcept { value_ = 0; }
    void push(Symbol s) noexcept {
        if (modulus_ > 1) value_ = (value_ * k_ + s) % modulus_;
    }
    std::uint64_t value() const noexcept { return value_; }

private:
    std::uint64_t k_;
    std::uint64_t modulus_;
    std::uint64_t value_ = 0;
};

/// Per-node symbol counts of a depth-D k-ary context tree.
///
/// Node (d, c) is the context formed by the d most recent symbols; its key is
/// offset(d) + (c mod k^d). Small trees are stored densely with every node
/// preallocated, large ones are materialized on demand through a hash index.
/// Because KT block probabilities depend only on counts, the CTW probability
/// of everything counted here is a closed-form function of this table.
class ContextCounts {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;

    ContextCounts(int k, int depth);

    int alphabet_size() const noexcept { return k_; }
    int depth() const noexcept { return depth_; }
    bool dense() const noexcept { return dense_; }

    // Count one sequence, context reset (zero padded) at its start.
    void add(std::span<const Symbol> seq);
    void add(const ContextCounts& other);
    void subtract(const ContextCounts& other);

    // log2 of the CTW weighted block probability of the counted data.
    double log2_probability() const;

    std::uint64_t root_total() const { return totals_[0]; }
    std::size_t node_count() const noexcept { return totals_.size(); }

    std::uint32_t find(int d, std::uint64_t context) const;
    std::uint32_t obtain(int d, std::uint64_t context);
    std::uint32_t parent_of(std::uint32_t id) const;

    std::span<const std::uint32_t> counts(std::uint32_t id) const {
        return {counts_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(k_),
                static_cast<std::size_t>(k_)};
    }
    std::uint32_t total(std::uint32_t id) const { return totals_[id]; }
    int node_depth(std::uint32_t id) const { return depth_of_[id]; }
    const std::vector<std::uint32_t>& nodes_at_depth(int d) const { return by_depth_[static_cast<std::size_t>(d)]; }

    // Node ids from depth 0 to D along the path of `context` (created if absent).
    void increment(std::uint64_t context, Symbol s, std::span<std::uint32_t> path_out);
    void path(std::uint64_t context, std::span<std::uint32_t> path_out);
    // Add `delta` to the count of `s` at node `id` (and to its total).
    void adjust(std::uint32_t id, Symbol s, std::int64_t delta);

private:
    friend class ContextTree;

    std::uint64_t key(int d, std::uint64_t context) const {
        return offset_[static_cast<std::size_t>(d)] + context % pow_[static_cast<std::size_t>(d)];
    }
    std::uint32_t create(int d, std::uint64_t key);

    int k_;
    int depth_;
    bool dense_;
    std::vector<std::uint64_t> pow_;
    std::vector<std::uint64_t> offset_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint8_t> depth_of_;
    std::vector<std::uint32_t> totals_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::vector<std::uint32_t>> by_depth_;
};

// log2((2^a + 2^b) / 2)
double log2_half_sum(double a, double b);

// log2 of the KT block probability of a count vector.
double log2_kt_block(std::span<const std::uint32_t> counts, int k);

/// k-ary Context Tree Weighting model.
///
/// Each node keeps log2 of its KT estimate P_e and of its weighted probability
/// P_w = P_e at depth D and P_w = (P_e + prod_children P_w) / 2 above, all in
/// the log domain. `update` walks the path of the current context and returns
/// log2 of the conditional probability assigned to the symbol.
class ContextTree {
public:
    ContextTree(int k, int depth);
    // Tree whose state equals having sequentially counted `counts`.
    explicit ContextTree(ContextCounts counts);

    int alphabet_size() const noexcept { return counts_.alphabet_size(); }
    int depth() const noexcept { return counts_.depth(); }

    double update(std::uint64_t context, Symbol s);
    // Predictive distribution of the next symbol, written into `out` (size k).
    void predict(std::uint64_t context, std::span<double> out) const;

    double log2_weighted() const { return acc_.empty() ? 0.0 : acc_[0].log_pw; }
    std::uint64_t root_total() const { return counts_.root_total(); }
    const ContextCounts& counts() const noexcept { return counts_; }

    struct NodeView {
        std::span<const std::uint32_t> counts;
        std::uint32_t total;
        double log_pe;
        double log_pw;
    };
    std::optional<NodeView> node(int d, std::uint64_t context) const;

private:
    struct Accumulators {
        double log_pe = 0.0;
        double log_pw = 0.0;
        double log_children = 0.0;
    };

    ContextCounts counts_;
    std::vector<Accumulators> acc_;
    std::vector<std::uint32_t> path_;
};

// Feed a sequence; returns its codelength in bits. The window is not reset.
double feed(ContextTree& tree, ContextWindow& window, std::span<const Symbol> seq);

// Sequentially update the tree with each memory sequence, resetting the
// context at every sequence boundary.
void prime(ContextTree& tree, std::span<const Sequence> memory);

} // namespace mauc
