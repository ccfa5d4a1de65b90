#include "mauc/ctw.hpp"

#include <cmath>
#include <numbers>

#include "mauc/error.hpp"

namespace mauc {

namespace {

constexpr std::size_t kDenseCountLimit = std::size_t{1} << 20;

void check_shape(int k, int depth) {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (depth < 0 || depth > 255) throw InvalidParameter("context tree depth must be in [0, 255]");
}

} // namespace

double log2_half_sum(double a, double b) {
    const double hi = a > b ? a : b;
    const double diff = std::abs(a - b);
    return hi + std::log1p(std::exp2(-diff)) * std::numbers::log2e - 1.0;
}

double kt_symbol_prob(std::span<const std::uint32_t> counts, Symbol symbol, int k) {
    if (symbol >= k || counts.size() != static_cast<std::size_t>(k))
        throw InvalidParameter("symbol or count vector does not match the alphabet");
    double total = 0.0;
    for (auto c : counts) total += c;
    return (counts[symbol] + 0.5) / (total + 0.5 * k);
}

double log2_kt_block(std::span<const std::uint32_t> counts, int k) {
    static const double lgamma_half = std::lgamma(0.5);
    double total = 0.0;
    double acc = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        total += c;
        acc += std::lgamma(c + 0.5) - lgamma_half;
    }
    if (total == 0.0) return 0.0;
    acc += std::lgamma(0.5 * k) - std::lgamma(total + 0.5 * k);
    return acc * std::numbers::log2e;
}

ContextWindow::ContextWindow(int k, int depth) : k_(static_cast<std::uint64_t>(k)), modulus_(1) {
    check_shape(k, depth);
    for (int d = 0; d < depth; ++d) {
        if (modulus_ > (std::uint64_t{1} << 62) / k_)
            throw InvalidParameter("k^depth exceeds the 62-bit context range");
        modulus_ *= k_;
    }
}

ContextCounts::ContextCounts(int k, int depth) : k_(k), depth_(depth), dense_(false) {
    check_shape(k, depth);
    pow_.resize(static_cast<std::size_t>(depth) + 1);
    offset_.resize(static_cast<std::size_t>(depth) + 1);
    std::uint64_t p = 1, off = 0;
    for (int d = 0; d <= depth; ++d) {
        pow_[static_cast<std::size_t>(d)] = p;
        offset_[static_cast<std::size_t>(d)] = off;
        off += p;
        if (d < depth) {
            if (p > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(k))
                throw InvalidParameter("k^depth exceeds the 62-bit context range");
            p *= static_cast<std::uint64_t>(k);
        }
    }
    by_depth_.resize(static_cast<std::size_t>(depth) + 1);
    const std::uint64_t nodes = off;
    dense_ = nodes <= kDenseCountLimit / static_cast<std::uint64_t>(k);
    if (dense_) {
        totals_.assign(nodes, 0);
        counts_.assign(nodes * static_cast<std::uint64_t>(k), 0);
        depth_of_.resize(nodes);
        for (int d = 0; d <= depth; ++d) {
            auto& ids = by_depth_[static_cast<std::size_t>(d)];
            ids.resize(pow_[static_cast<std::size_t>(d)]);
            for (std::uint64_t c = 0; c < pow_[static_cast<std::size_t>(d)]; ++c) {
                const auto id = static_cast<std::uint32_t>(offset_[static_cast<std::size_t>(d)] + c);
                ids[c] = id;
                depth_of_[id] = static_cast<std::uint8_t>(d);
            }
        }
    } else {
        create(0, 0);
    }
}

std::uint32_t ContextCounts::create(int d, std::uint64_t node_key) {
    const auto id = static_cast<std::uint32_t>(totals_.size());
    if (id == npos) throw InvalidParameter("context tree node limit reached");
    index_.emplace(node_key, id);
    keys_.push_back(node_key);
    depth_of_.push_back(static_cast<std::uint8_t>(d));
    totals_.push_back(0);
    counts_.resize(counts_.size() + static_cast<std::size_t>(k_), 0);
    by_depth_[static_cast<std::size_t>(d)].push_back(id);
    return id;
}

std::uint32_t ContextCounts::find(int d, std::uint64_t context) const {
    const std::uint64_t node_key = key(d, context);
    if (dense_) return static_cast<std::uint32_t>(node_key);
    auto it = index_.find(node_key);
    return it == index_.end() ? npos : it->second;
}

std::uint32_t ContextCounts::obtain(int d, std::uint64_t context) {
    const std::uint64_t node_key = key(d, context);
    if (dense_) return static_cast<std::uint32_t>(node_key);
    auto it = index_.find(node_key);
    return it == index_.end() ? create(d, node_key) : it->second;
}

std::uint32_t ContextCounts::parent_of(std::uint32_t id) const {
    const int d = depth_of_[id];
    if (d == 0) return npos;
    const std::uint64_t node_key = dense_ ? id : keys_[id];
    const std::uint64_t context = node_key - offset_[static_cast<std::size_t>(d)];
    return find(d - 1, context);
}

void ContextCounts::adjust(std::uint32_t id, Symbol s, std::int64_t delta) {
    auto& c = counts_[static_cast<std::size_t>(id) * static_cast<std::size_t>(k_) + s];
    if (delta < 0 && static_cast<std::uint64_t>(-delta) > c) throw InvalidParameter("count would become negative");
    c = static_cast<std::uint32_t>(static_cast<std::int64_t>(c) + delta);
    totals_[id] = static_cast<std::uint32_t>(static_cast<std::int64_t>(totals_[id]) + delta);
}

void ContextCounts::path(std::uint64_t context, std::span<std::uint32_t> path_out) {
    for (int d = 0; d <= depth_; ++d) path_out[static_cast<std::size_t>(d)] = obtain(d, context);
}

void ContextCounts::increment(std::uint64_t context, Symbol s, std::span<std::uint32_t> path_out) {
    path(context, path_out);
    for (int d = 0; d <= depth_; ++d) {
        const std::uint32_t id = path_out[static_cast<std::size_t>(d)];
        ++counts_[static_cast<std::size_t>(id) * static_cast<std::size_t>(k_) + s];
        ++totals_[id];
    }
}

void ContextCounts::add(std::span<const Symbol> seq) {
    ContextWindow window(k_, depth_);
    std::vector<std::uint32_t> ids(static_cast<std::size_t>(depth_) + 1);
    for (Symbol s : seq) {
        if (s >= k_) throw InvalidParameter("symbol outside the alphabet");
        increment(window.value(), s, ids);
        window.push(s);
    }
}

void ContextCounts::add(const ContextCounts& other) {
    if (other.k_ != k_ || other.depth_ != depth_) throw InvalidParameter("context tree shapes differ");
    if (dense_) {
        for (std::size_t i = 0; i < totals_.size(); ++i) totals_[i] += other.totals_[i];
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
        return;
    }
    for (std::uint32_t src = 0; src < other.totals_.size(); ++src) {
        if (other.totals_[src] == 0) continue;
        const int d = other.depth_of_[src];
        auto it = index_.find(other.keys_[src]);
        const std::uint32_t dst = it == index_.end() ? create(d, other.keys_[src]) : it->second;
        totals_[dst] += other.totals_[src];
        for (int x = 0; x < k_; ++x)
            counts_[static_cast<std::size_t>(dst) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(x)] +=
                other.counts_[static_cast<std::size_t>(src) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(x)];
    }
}

void ContextCounts::subtract(const ContextCounts& other) {
    if (other.k_ != k_ || other.depth_ != depth_) throw InvalidParameter("context tree shapes differ");
    auto sub = [](std::uint32_t& a, std::uint32_t b) {
        if (b > a) throw InvalidParameter("subtracting counts that were never added");
        a -= b;
    };
    if (dense_) {
        for (std::size_t i = 0; i < totals_.size(); ++i) sub(totals_[i], other.totals_[i]);
        for (std::size_t i = 0; i < counts_.size(); ++i) sub(counts_[i], other.counts_[i]);
        return;
    }
    for (std::uint32_t src = 0; src < other.totals_.size(); ++src) {
        if (other.totals_[src] == 0) continue;
        auto it = index_.find(other.keys_[src]);
        if (it == index_.end()) throw InvalidParameter("subtracting counts that were never added");
        const std::uint32_t dst = it->second;
        sub(totals_[dst], other.totals_[src]);
        for (int x = 0; x < k_; ++x)
            sub(counts_[static_cast<std::size_t>(dst) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(x)],
                other.counts_[static_cast<std::size_t>(src) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(x)]);
    }
}

double ContextCounts::log2_probability() const {
    std::vector<double> children(totals_.size(), 0.0);
    double root = 0.0;
    for (int d = depth_; d >= 0; --d) {
        for (std::uint32_t id : by_depth_[static_cast<std::size_t>(d)]) {
            if (totals_[id] == 0) continue;
            const double pe = log2_kt_block(counts(id), k_);
            const double pw = d == depth_ ? pe : log2_half_sum(pe, children[id]);
            if (d == 0)
                root = pw;
            else
                children[parent_of(id)] += pw;
        }
    }
    return root;
}

ContextTree::ContextTree(int k, int depth)
    : counts_(k, depth), acc_(counts_.node_count()), path_(static_cast<std::size_t>(depth) + 1) {}

ContextTree::ContextTree(ContextCounts counts)
    : counts_(std::move(counts)), acc_(counts_.node_count()), path_(static_cast<std::size_t>(counts_.depth()) + 1) {
    const int depth = counts_.depth();
    const int k = counts_.alphabet_size();
    for (int d = depth; d >= 0; --d) {
        for (std::uint32_t id : counts_.nodes_at_depth(d)) {
            if (counts_.total(id) == 0) continue;
            auto& a = acc_[id];
            a.log_pe = log2_kt_block(counts_.counts(id), k);
            a.log_pw = d == depth ? a.log_pe : log2_half_sum(a.log_pe, a.log_children);
            if (d > 0) acc_[counts_.parent_of(id)].log_children += a.log_pw;
        }
    }
}

double ContextTree::update(std::uint64_t context, Symbol s) {
    const int depth = counts_.depth();
    const int k = counts_.alphabet_size();
    if (s >= k) throw InvalidParameter("symbol outside the alphabet");
    counts_.path(context, path_);
    if (acc_.size() < counts_.node_count()) acc_.resize(counts_.node_count());
    const double half_k = 0.5 * k;
    double delta = 0.0;
    for (int d = depth; d >= 0; --d) {
        const std::uint32_t id = path_[static_cast<std::size_t>(d)];
        auto& a = acc_[id];
        const double p = (counts_.counts(id)[s] + 0.5) / (counts_.total(id) + half_k);
        a.log_pe += std::log2(p);
        const double old = a.log_pw;
        if (d == depth) {
            a.log_pw = a.log_pe;
        } else {
            a.log_children += delta;
            a.log_pw = log2_half_sum(a.log_pe, a.log_children);
        }
        delta = a.log_pw - old;
    }
    for (int d = 0; d <= depth; ++d) {
        const std::uint32_t id = path_[static_cast<std::size_t>(d)];
        ++counts_.counts_[static_cast<std::size_t>(id) * static_cast<std::size_t>(k) + s];
        ++counts_.totals_[id];
    }
    return delta;
}

void ContextTree::predict(std::uint64_t context, std::span<double> out) const {
    const int depth = counts_.depth();
    const int k = counts_.alphabet_size();
    const double half_k = 0.5 * k;
    for (int d = depth; d >= 0; --d) {
        const std::uint32_t id = counts_.find(d, context);
        const bool present = id != ContextCounts::npos;
        const double inv = 1.0 / ((present ? counts_.total(id) : 0) + half_k);
        if (d == depth) {
            for (int x = 0; x < k; ++x)
                out[static_cast<std::size_t>(x)] = ((present ? counts_.counts(id)[static_cast<std::size_t>(x)] : 0) + 0.5) * inv;
            continue;
        }
        double w = 0.5;
        if (present) {
            const auto& a = acc_[id];
            w = 1.0 / (1.0 + std::exp2(a.log_children - a.log_pe));
        }
        for (int x = 0; x < k; ++x) {
            const double kt = ((present ? counts_.counts(id)[static_cast<std::size_t>(x)] : 0) + 0.5) * inv;
            out[static_cast<std::size_t>(x)] = w * kt + (1.0 - w) * out[static_cast<std::size_t>(x)];
        }
    }
}

std::optional<ContextTree::NodeView> ContextTree::node(int d, std::uint64_t context) const {
    if (d < 0 || d > counts_.depth()) return std::nullopt;
    const std::uint32_t id = counts_.find(d, context);
    if (id == ContextCounts::npos) return std::nullopt;
    return NodeView{counts_.counts(id), counts_.total(id), acc_[id].log_pe, acc_[id].log_pw};
}

double feed(ContextTree& tree, ContextWindow& window, std::span<const Symbol> seq) {
    double bits = 0.0;
    for (Symbol s : seq) {
        bits -= tree.update(window.value(), s);
        window.push(s);
    }
    return bits;
}

void prime(ContextTree& tree, std::span<const Sequence> memory) {
    ContextWindow window(tree.alphabet_size(), tree.depth());
    for (const auto& seq : memory) {
        for (Symbol s : seq)
            if (s >= tree.alphabet_size()) throw InvalidParameter("memory alphabet does not match the tree");
        window.reset();
        feed(tree, window, seq);
    }
}

} // namespace mauc
