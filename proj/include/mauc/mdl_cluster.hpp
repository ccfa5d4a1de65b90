#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mauc/ctw.hpp"
#include "mauc/source_model.hpp"

// MDL clustering of a memory of sequences and MDL classification of a new
// sequence. The description length of a cluster is the CTW codelength of its
// members coded with one shared tree (context reset per sequence) plus a
// header of log2(T) bits, T being the memory size. Empty clusters cost 0.
namespace mauc::mdl {

struct MdlParams {
    int k = 256;
    int depth = 3;
    int entropy_order = 1;   // empirical entropy order used to seed the partition
    int max_iters = 50;
};

struct ClusterState {
    int K = 0;
    std::vector<int> assignment;          // 1-based cluster ids, one per sequence
    std::vector<double> per_cluster_dl;   // bits, index j-1 for cluster j
    double total_dl = 0.0;
    int passes = 0;
    std::vector<double> dl_history;       // total_dl after init and after every pass

    void validate(std::size_t T) const;
};

// Shared-tree codelength of `sequences` plus log2(memory_size) header bits.
// Computed sequentially; an empty set costs 0.
double description_length(std::span<const Sequence> sequences, int k, int depth, std::size_t memory_size);

/// Sparse per-node counts of one sequence, nodes ordered deepest first so that
/// every node precedes its parent.
struct SequenceProfile {
    struct Node {
        int depth;
        std::uint64_t context;   // mod k^depth
        std::uint32_t total;
        std::uint32_t parent;    // index into nodes, npos for the root
        std::uint32_t begin;     // entries [begin, end)
        std::uint32_t end;
    };
    std::vector<Node> nodes;
    std::vector<std::pair<Symbol, std::uint32_t>> entries;

    static SequenceProfile build(std::span<const Symbol> seq, int k, int depth);
};

/// CTW weighted probability of a set of sequences kept in closed form, with
/// cheap what-if evaluation of adding or removing one sequence.
class ClusterModel {
public:
    ClusterModel(int k, int depth);

    std::size_t members() const noexcept { return members_; }
    double log2_probability() const noexcept { return root_; }

    // log2 probability after adding (sign +1) or removing (sign -1) `profile`.
    double evaluate(const SequenceProfile& profile, int sign) const;
    void add(const SequenceProfile& profile);
    void remove(const SequenceProfile& profile);

private:
    struct Accumulators {
        double log_pe = 0.0;
        double log_pw = 0.0;
        double log_children = 0.0;
    };
    double apply(const SequenceProfile& profile, int sign, bool commit);

    int k_;
    int depth_;
    ContextCounts counts_;
    std::vector<Accumulators> acc_;
    mutable std::vector<double> scratch_;
    std::size_t members_ = 0;
    double root_ = 0.0;
};

/// Clustering engine over a fixed memory.
class Clusterer {
public:
    Clusterer(std::span<const Sequence> memory, const MdlParams& params);

    std::size_t size() const noexcept { return profiles_.size(); }
    const MdlParams& params() const noexcept { return params_; }

    // Sequences sorted by (empirical entropy, index), cut into K contiguous
    // groups whose sizes differ by at most one (larger groups first).
    ClusterState initial_partition(int K);
    // Builds the cluster models for an arbitrary assignment.
    ClusterState assign(int K, std::vector<int> assignment);
    // Full passes in index order, each sequence moved to the cluster that
    // lowers the total DL by more than 1e-6 bits, most lowering wins, ties to
    // the smallest id. Stops after a pass without moves or max_iters passes.
    ClusterState refine(ClusterState state, int max_iters);
    // argmin_j DL(C_j + x) - DL(C_j), ties to the smallest id. Uses the models
    // of the most recent assign/refine call, rebuilding them if `state` differs.
    int classify(std::span<const Symbol> x, const ClusterState& state);
    // Increase of the total DL when x joins each cluster (index j-1).
    std::vector<double> join_costs(std::span<const Symbol> x, const ClusterState& state);

private:
    void rebuild(const ClusterState& state);
    double cluster_dl(const ClusterModel& model) const;

    MdlParams params_;
    std::span<const Sequence> memory_;
    std::vector<SequenceProfile> profiles_;
    std::vector<ClusterModel> models_;
    std::vector<int> models_assignment_;
    double header_bits_ = 0.0;
};

ClusterState initial_partition(std::span<const Sequence> memory, int K, const MdlParams& params);
ClusterState refine(std::span<const Sequence> memory, ClusterState state, const MdlParams& params);
int classify(std::span<const Symbol> x, std::span<const Sequence> memory, const ClusterState& state,
             const MdlParams& params);

// Fraction of items whose cluster matches the label under the best one-to-one
// relabelling of cluster ids (both 1-based, at most `K` distinct values each).
double clustering_accuracy(std::span<const int> assignment, std::span<const int> labels, int K);

} // namespace mauc::mdl
