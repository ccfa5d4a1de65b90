#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mauc/rng.hpp"

namespace mauc {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

inline constexpr int kMaxAlphabet = 256;

/// Stationary Markov source over the alphabet [0, k) with a fixed context order.
///
/// A state is the packed context of the previous `order` symbols, most recent
/// symbol in the lowest base-k digit. Transition rows are stored flat:
/// `rows()[state * k + symbol]`. The stationary distribution is solved once at
/// construction; if the chain has no unique stationary distribution the model
/// is still usable for generation from an explicit state, but `stationary()`
/// throws NumericalFailure.
class MarkovModel {
public:
    MarkovModel(int k, int order, std::vector<double> rows);

    int alphabet_size() const noexcept { return k_; }
    int order() const noexcept { return order_; }
    std::size_t num_states() const noexcept { return states_; }
    // d = k^order * (k - 1)
    std::size_t num_parameters() const noexcept { return states_ * static_cast<std::size_t>(k_ - 1); }

    const std::vector<double>& rows() const noexcept { return rows_; }
    std::span<const double> row(std::size_t state) const {
        return {rows_.data() + state * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
    }
    double prob(std::size_t state, Symbol s) const { return rows_[state * static_cast<std::size_t>(k_) + s]; }

    std::size_t next_state(std::size_t state, Symbol s) const noexcept {
        return states_ == 1 ? 0 : (state * static_cast<std::size_t>(k_) + s) % states_;
    }

    // Inverse-CDF draw from a row given u in [0, 1).
    Symbol sample_symbol(std::size_t state, double u) const;

    bool has_stationary() const noexcept { return stationary_.has_value(); }
    const std::vector<double>& stationary() const;

    bool operator==(const MarkovModel& other) const {
        return k_ == other.k_ && order_ == other.order_ && rows_ == other.rows_;
    }

private:
    int k_;
    int order_;
    std::size_t states_;
    std::vector<double> rows_;
    std::vector<double> cumulative_;
    std::optional<std::vector<double>> stationary_;
    std::string stationary_error_;
};

/// K component sources sharing alphabet and order, selected per sequence by p.
struct CompoundSource {
    CompoundSource(std::vector<MarkovModel> models, std::vector<double> p);

    std::vector<MarkovModel> models;
    std::vector<double> p;

    int num_sources() const noexcept { return static_cast<int>(models.size()); }
};

/// The memorized sequences y with optional 1-based source labels Z.
struct MemoryStore {
    std::vector<Sequence> sequences;
    std::vector<int> labels;

    std::size_t size() const noexcept { return sequences.size(); }
    std::vector<std::size_t> lengths() const;
    std::size_t total() const;
    bool labelled() const noexcept { return !labels.empty(); }
    // Sequences whose label equals `label`, in storage order.
    std::vector<Sequence> with_label(int label) const;
    void validate(int k) const;
};

/// Memory sequence length law: uniform on [min_length, max_length]; fixed when equal.
struct LengthLaw {
    std::size_t min_length = 1;
    std::size_t max_length = 1;

    static LengthLaw fixed(std::size_t n) { return {n, n}; }
    std::size_t draw(Rng& rng) const;
};

struct KlEstimate {
    double rate = 0.0;       // bits per symbol, clamped at 0
    double std_error = 0.0;
};

// Each transition row drawn from Dirichlet(1/2, ..., 1/2).
MarkovModel sample_jeffreys(int k, int order, Rng& rng);
MarkovModel sample_jeffreys(int k, int order, std::uint64_t seed);

// Initial context drawn from the stationary distribution.
Sequence generate(const MarkovModel& model, std::size_t n, Rng& rng);
Sequence generate(const MarkovModel& model, std::size_t n, std::uint64_t seed);

// Stationary entropy rate in bits/symbol; H_n is reported as n times this.
double entropy_rate(const MarkovModel& model);

// Plug-in conditional entropy of the given order from empirical counts.
double empirical_entropy(std::span<const Symbol> seq, int k, int order);

// Divergence rate D(a || b) between two Markov sources of equal k and order.
double kl_rate(const MarkovModel& a, const MarkovModel& b);

MemoryStore sample_compound(const CompoundSource& compound, std::size_t T, const LengthLaw& law,
                            Rng& rng);
MemoryStore sample_compound(const CompoundSource& compound, std::size_t T, const LengthLaw& law,
                            std::uint64_t seed);

int sample_index(std::span<const double> p, Rng& rng);

/// Order-`depth` mixture measure induced by a compound source: conditional
/// probabilities are the p- and stationary-weighted average of the component
/// transitions at each length-`depth` context.
class MixtureTreeMeasure {
public:
    MixtureTreeMeasure(const CompoundSource& compound, int depth);

    int depth() const noexcept { return depth_; }
    // log2 of the probability of a whole block under the mixture measure.
    double log2_block(std::span<const Symbol> block) const;

private:
    double mixture_prob(std::span<const Symbol> block) const;

    CompoundSource compound_;
    int depth_;
};

// log2 probability of a block under the stationary chain.
double log2_block_probability(const MarkovModel& model, std::span<const Symbol> block);

// Monte Carlo estimate of (1/L) D_L(mu_phi || mixture^depth) with blocks of
// length `block_length` drawn from phi.
KlEstimate mixture_kl_rate(const MarkovModel& phi, const CompoundSource& compound, int depth,
                           std::size_t n_mc, std::uint64_t seed, std::size_t block_length = 10000);

} // namespace mauc
