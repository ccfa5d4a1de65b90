#include "mauc/mdl_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>

#include "mauc/error.hpp"

namespace mauc::mdl {

namespace {

constexpr double kMoveThreshold = 1e-6;
constexpr std::uint32_t npos = ContextCounts::npos;

double lg2(double x) { return std::lgamma(x) * std::numbers::log2e; }

void check_memory(std::span<const Sequence> memory, int k) {
    for (const auto& seq : memory)
        for (Symbol s : seq)
            if (s >= k) throw InvalidParameter("memory symbol outside the alphabet");
}

} // namespace

void ClusterState::validate(std::size_t T) const {
    if (K < 1) throw InvalidParameter("number of clusters K must be >= 1");
    if (assignment.size() != T) throw InvalidParameter("assignment length differs from the memory size");
    for (int a : assignment)
        if (a < 1 || a > K) throw InvalidParameter("cluster id outside [1, K]");
}

double description_length(std::span<const Sequence> sequences, int k, int depth, std::size_t memory_size) {
    if (sequences.empty()) return 0.0;
    check_memory(sequences, k);
    ContextTree tree(k, depth);
    ContextWindow window(k, depth);
    double bits = 0.0;
    for (const auto& seq : sequences) {
        window.reset();
        bits += feed(tree, window, seq);
    }
    return bits + std::log2(static_cast<double>(std::max<std::size_t>(memory_size, 1)));
}

SequenceProfile SequenceProfile::build(std::span<const Symbol> seq, int k, int depth) {
    ContextWindow window(k, depth);
    std::vector<std::uint64_t> pow(static_cast<std::size_t>(depth) + 1, 1);
    for (int d = 1; d <= depth; ++d) pow[static_cast<std::size_t>(d)] = pow[static_cast<std::size_t>(d) - 1] * static_cast<std::uint64_t>(k);

    // (depth, context, symbol) for every node on every path.
    std::vector<std::tuple<int, std::uint64_t, Symbol>> hits;
    hits.reserve(seq.size() * (static_cast<std::size_t>(depth) + 1));
    for (Symbol s : seq) {
        if (s >= k) throw InvalidParameter("symbol outside the alphabet");
        for (int d = 0; d <= depth; ++d) hits.emplace_back(d, window.value() % pow[static_cast<std::size_t>(d)], s);
        window.push(s);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });

    SequenceProfile p;
    for (std::size_t i = 0; i < hits.size();) {
        const auto [d, ctx, s] = hits[i];
        std::size_t j = i;
        while (j < hits.size() && hits[j] == hits[i]) ++j;
        const bool new_node = p.nodes.empty() || p.nodes.back().depth != d || p.nodes.back().context != ctx;
        if (new_node) {
            const auto at = static_cast<std::uint32_t>(p.entries.size());
            p.nodes.push_back({d, ctx, 0, npos, at, at});
        }
        auto& node = p.nodes.back();
        const auto c = static_cast<std::uint32_t>(j - i);
        p.entries.emplace_back(s, c);
        node.end = static_cast<std::uint32_t>(p.entries.size());
        node.total += c;
        i = j;
    }

    // Parents sit in the next (shallower) depth group, sorted by context.
    std::size_t group = 0;
    while (group < p.nodes.size()) {
        std::size_t next = group;
        while (next < p.nodes.size() && p.nodes[next].depth == p.nodes[group].depth) ++next;
        if (p.nodes[group].depth > 0) {
            std::size_t end = next;
            while (end < p.nodes.size() && p.nodes[end].depth == p.nodes[next].depth) ++end;
            for (std::size_t i = group; i < next; ++i) {
                const auto& node = p.nodes[i];
                const std::uint64_t parent_ctx = node.context % pow[static_cast<std::size_t>(node.depth) - 1];
                auto it = std::lower_bound(p.nodes.begin() + static_cast<std::ptrdiff_t>(next),
                                           p.nodes.begin() + static_cast<std::ptrdiff_t>(end), parent_ctx,
                                           [](const Node& n, std::uint64_t c) { return n.context < c; });
                p.nodes[i].parent = static_cast<std::uint32_t>(it - p.nodes.begin());
            }
        }
        group = next;
    }
    return p;
}

ClusterModel::ClusterModel(int k, int depth) : k_(k), depth_(depth), counts_(k, depth), acc_(counts_.node_count()) {}

double ClusterModel::evaluate(const SequenceProfile& profile, int sign) const {
    return const_cast<ClusterModel*>(this)->apply(profile, sign, false);
}

void ClusterModel::add(const SequenceProfile& profile) {
    root_ = apply(profile, +1, true);
    ++members_;
}

void ClusterModel::remove(const SequenceProfile& profile) {
    if (members_ == 0) throw InvalidParameter("removing a sequence from an empty cluster");
    root_ = apply(profile, -1, true);
    --members_;
}

double ClusterModel::apply(const SequenceProfile& profile, int sign, bool commit) {
    const double half_k = 0.5 * k_;
    scratch_.assign(profile.nodes.size(), 0.0);
    double root = root_;
    for (std::size_t i = 0; i < profile.nodes.size(); ++i) {
        const auto& node = profile.nodes[i];
        std::uint32_t id = commit ? counts_.obtain(node.depth, node.context) : counts_.find(node.depth, node.context);
        if (commit && acc_.size() < counts_.node_count()) acc_.resize(counts_.node_count());

        Accumulators old;
        std::uint32_t old_total = 0;
        if (id != npos) {
            old = acc_[id];
            old_total = counts_.total(id);
        }
        const std::int64_t new_total = static_cast<std::int64_t>(old_total) + sign * static_cast<std::int64_t>(node.total);
        if (new_total < 0) throw InvalidParameter("removing counts that were never added");

        Accumulators now;
        if (new_total > 0) {
            if (commit) {
                for (std::uint32_t e = node.begin; e < node.end; ++e)
                    counts_.adjust(id, profile.entries[e].first, sign * static_cast<std::int64_t>(profile.entries[e].second));
                now.log_pe = log2_kt_block(counts_.counts(id), k_);
            } else {
                double delta = lg2(old_total + half_k) - lg2(static_cast<double>(new_total) + half_k);
                for (std::uint32_t e = node.begin; e < node.end; ++e) {
                    const double c = id == npos ? 0.0 : counts_.counts(id)[profile.entries[e].first];
                    delta += lg2(c + sign * static_cast<double>(profile.entries[e].second) + 0.5) - lg2(c + 0.5);
                }
                now.log_pe = old.log_pe + delta;
            }
            if (node.depth == depth_) {
                now.log_pw = now.log_pe;
            } else {
                now.log_children = old.log_children + scratch_[i];
                now.log_pw = log2_half_sum(now.log_pe, now.log_children);
            }
        } else if (commit) {
            for (std::uint32_t e = node.begin; e < node.end; ++e)
                counts_.adjust(id, profile.entries[e].first, sign * static_cast<std::int64_t>(profile.entries[e].second));
        }

        if (node.parent != npos)
            scratch_[node.parent] += now.log_pw - old.log_pw;
        else
            root = now.log_pw;
        if (commit) acc_[id] = now;
    }
    return root;
}

Clusterer::Clusterer(std::span<const Sequence> memory, const MdlParams& params)
    : params_(params), memory_(memory) {
    if (params.k < 2 || params.k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (params.depth < 0) throw InvalidParameter("context tree depth must be >= 0");
    profiles_.reserve(memory.size());
    for (const auto& seq : memory) profiles_.push_back(SequenceProfile::build(seq, params.k, params.depth));
    header_bits_ = std::log2(static_cast<double>(std::max<std::size_t>(memory.size(), 1)));
}

double Clusterer::cluster_dl(const ClusterModel& model) const {
    return model.members() == 0 ? 0.0 : header_bits_ - model.log2_probability();
}

ClusterState Clusterer::initial_partition(int K) {
    const std::size_t T = profiles_.size();
    if (K < 1) throw InvalidParameter("number of clusters K must be >= 1");
    if (T < static_cast<std::size_t>(K)) throw InvalidParameter("memory holds fewer sequences than clusters");

    std::vector<std::pair<double, std::size_t>> keyed(T);
    for (std::size_t i = 0; i < T; ++i) {
        const auto& seq = memory_[i];
        int order = params_.entropy_order;
        // Fall back to lower orders for sequences too short to estimate.
        while (order > 0 && seq.size() <= static_cast<std::size_t>(std::pow(params_.k, order))) --order;
        keyed[i] = {seq.empty() ? 0.0 : empirical_entropy(seq, params_.k, order), i};
    }
    std::sort(keyed.begin(), keyed.end());

    std::vector<int> assignment(T);
    const std::size_t base = T / static_cast<std::size_t>(K);
    const std::size_t extra = T % static_cast<std::size_t>(K);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < static_cast<std::size_t>(K); ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        for (std::size_t j = 0; j < size; ++j) assignment[keyed[pos++].second] = static_cast<int>(g) + 1;
    }
    return assign(K, std::move(assignment));
}

void Clusterer::rebuild(const ClusterState& state) {
    state.validate(profiles_.size());
    models_.assign(static_cast<std::size_t>(state.K), ClusterModel(params_.k, params_.depth));
    for (std::size_t i = 0; i < profiles_.size(); ++i)
        models_[static_cast<std::size_t>(state.assignment[i]) - 1].add(profiles_[i]);
    models_assignment_ = state.assignment;
}

ClusterState Clusterer::assign(int K, std::vector<int> assignment) {
    ClusterState state;
    state.K = K;
    state.assignment = std::move(assignment);
    rebuild(state);
    state.per_cluster_dl.resize(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) state.per_cluster_dl[static_cast<std::size_t>(j)] = cluster_dl(models_[static_cast<std::size_t>(j)]);
    state.total_dl = std::accumulate(state.per_cluster_dl.begin(), state.per_cluster_dl.end(), 0.0);
    state.dl_history = {state.total_dl};
    return state;
}

ClusterState Clusterer::refine(ClusterState state, int max_iters) {
    if (models_assignment_ != state.assignment || models_.size() != static_cast<std::size_t>(state.K)) {
        rebuild(state);
        state.per_cluster_dl.assign(static_cast<std::size_t>(state.K), 0.0);
        for (int j = 0; j < state.K; ++j) state.per_cluster_dl[static_cast<std::size_t>(j)] = cluster_dl(models_[static_cast<std::size_t>(j)]);
        state.total_dl = std::accumulate(state.per_cluster_dl.begin(), state.per_cluster_dl.end(), 0.0);
        if (state.dl_history.empty()) state.dl_history = {state.total_dl};
    }
    auto& dl = state.per_cluster_dl;

    for (int pass = 0; pass < max_iters; ++pass) {
        bool moved = false;
        for (std::size_t i = 0; i < profiles_.size(); ++i) {
            const auto a = static_cast<std::size_t>(state.assignment[i]) - 1;
            const auto& profile = profiles_[i];
            const double a_after = models_[a].members() == 1 ? 0.0 : header_bits_ - models_[a].evaluate(profile, -1);
            const double leave = a_after - dl[a];

            double best = 0.0;
            std::size_t best_j = a;
            for (std::size_t j = 0; j < models_.size(); ++j) {
                if (j == a) continue;
                const double join = header_bits_ - models_[j].evaluate(profile, +1) - dl[j];
                const double delta = leave + join;
                if (best_j == a ? delta < -kMoveThreshold : delta < best) {
                    best = delta;
                    best_j = j;
                }
            }
            if (best_j == a) continue;
            models_[a].remove(profile);
            models_[best_j].add(profile);
            dl[a] = cluster_dl(models_[a]);
            dl[best_j] = cluster_dl(models_[best_j]);
            state.assignment[i] = static_cast<int>(best_j) + 1;
            moved = true;
        }
        models_assignment_ = state.assignment;
        ++state.passes;
        state.total_dl = std::accumulate(dl.begin(), dl.end(), 0.0);
        state.dl_history.push_back(state.total_dl);
        if (!moved) break;
    }
    return state;
}

std::vector<double> Clusterer::join_costs(std::span<const Symbol> x, const ClusterState& state) {
    if (models_assignment_ != state.assignment || models_.size() != static_cast<std::size_t>(state.K)) rebuild(state);
    const auto profile = SequenceProfile::build(x, params_.k, params_.depth);
    std::vector<double> costs(models_.size());
    for (std::size_t j = 0; j < models_.size(); ++j)
        costs[j] = header_bits_ - models_[j].evaluate(profile, +1) - cluster_dl(models_[j]);
    return costs;
}

int Clusterer::classify(std::span<const Symbol> x, const ClusterState& state) {
    const auto costs = join_costs(x, state);
    std::size_t best = 0;
    for (std::size_t j = 1; j < costs.size(); ++j)
        if (costs[j] < costs[best]) best = j;
    return static_cast<int>(best) + 1;
}

ClusterState initial_partition(std::span<const Sequence> memory, int K, const MdlParams& params) {
    Clusterer c(memory, params);
    return c.initial_partition(K);
}

ClusterState refine(std::span<const Sequence> memory, ClusterState state, const MdlParams& params) {
    Clusterer c(memory, params);
    return c.refine(std::move(state), params.max_iters);
}

int classify(std::span<const Symbol> x, std::span<const Sequence> memory, const ClusterState& state,
             const MdlParams& params) {
    Clusterer c(memory, params);
    return c.classify(x, state);
}

double clustering_accuracy(std::span<const int> assignment, std::span<const int> labels, int K) {
    if (assignment.size() != labels.size()) throw InvalidParameter("assignment and labels differ in length");
    if (assignment.empty()) return 1.0;
    int n = K;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] < 1 || labels[i] < 1) throw InvalidParameter("cluster ids and labels are 1-based");
        n = std::max({n, assignment[i], labels[i]});
    }
    const auto N = static_cast<std::size_t>(n);
    // Hungarian algorithm on cost = -overlap (rows: clusters, columns: labels).
    std::vector<std::vector<double>> cost(N + 1, std::vector<double>(N + 1, 0.0));
    for (std::size_t i = 0; i < assignment.size(); ++i)
        cost[static_cast<std::size_t>(assignment[i])][static_cast<std::size_t>(labels[i])] -= 1.0;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0);
    std::vector<std::size_t> match(N + 1, 0), way(N + 1, 0);
    for (std::size_t row = 1; row <= N; ++row) {
        match[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(N + 1, inf);
        std::vector<bool> used(N + 1, false);
        do {
            used[col0] = true;
            const std::size_t r = match[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t c = 1; c <= N; ++c) {
                if (used[c]) continue;
                const double cur = cost[r][c] - u[r] - v[c];
                if (cur < minv[c]) {
                    minv[c] = cur;
                    way[c] = col0;
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for (std::size_t c = 0; c <= N; ++c) {
                if (used[c]) {
                    u[match[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    double matched = 0.0;
    for (std::size_t c = 1; c <= N; ++c)
        if (match[c] != 0) matched -= cost[match[c]][c];
    return matched / static_cast<double>(assignment.size());
}

} // namespace mauc::mdl
