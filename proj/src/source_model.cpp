#include "mauc/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "mauc/error.hpp"

namespace mauc {

namespace {

constexpr double kRowTolerance = 1e-12;
constexpr std::size_t kDenseStationaryLimit = 512;

std::size_t checked_power(int k, int order) {
    std::size_t states = 1;
    for (int i = 0; i < order; ++i) {
        if (states > (std::size_t{1} << 40) / static_cast<std::size_t>(k))
            throw InvalidParameter("Markov model state space k^order is too large");
        states *= static_cast<std::size_t>(k);
    }
    return states;
}

double row_entropy(std::span<const double> row) {
    double h = 0.0;
    for (double q : row)
        if (q > 0.0) h -= q * std::log2(q);
    return h;
}

std::optional<std::vector<double>> solve_dense(const MarkovModel& m, std::string& err) {
    const auto n = static_cast<Eigen::Index>(m.num_states());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    const int k = m.alphabet_size();
    // a = P^T - I, with the last equation replaced by sum(pi) = 1
    for (Eigen::Index s = 0; s < n; ++s) {
        for (int x = 0; x < k; ++x) {
            auto t = static_cast<Eigen::Index>(m.next_state(static_cast<std::size_t>(s), static_cast<Symbol>(x)));
            a(t, s) += m.prob(static_cast<std::size_t>(s), static_cast<Symbol>(x));
        }
        a(s, s) -= 1.0;
    }
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        err = "stationary distribution is not unique (reducible chain)";
        return std::nullopt;
    }
    Eigen::VectorXd pi = lu.solve(b);
    std::vector<double> out(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(pi(i) > -1e-9)) {
            err = "stationary solve produced a negative mass";
            return std::nullopt;
        }
        out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
        sum += out[static_cast<std::size_t>(i)];
    }
    for (double& v : out) v /= sum;
    return out;
}

// Power iteration on the lazy chain (P + I)/2, which shares the stationary
// distribution and removes periodicity.
std::optional<std::vector<double>> solve_power(const MarkovModel& m, std::string& err) {
    const std::size_t n = m.num_states();
    const int k = m.alphabet_size();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
    for (int iter = 0; iter < 100000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            next[s] += 0.5 * pi[s];
            for (int x = 0; x < k; ++x)
                next[m.next_state(s, static_cast<Symbol>(x))] += 0.5 * pi[s] * m.prob(s, static_cast<Symbol>(x));
        }
        double diff = 0.0;
        for (std::size_t s = 0; s < n; ++s) diff += std::abs(next[s] - pi[s]);
        pi.swap(next);
        if (diff < 1e-12) return pi;
    }
    err = "power iteration for the stationary distribution did not converge";
    return std::nullopt;
}

} // namespace

MarkovModel::MarkovModel(int k, int order, std::vector<double> rows)
    : k_(k), order_(order), states_(0), rows_(std::move(rows)) {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (order < 0) throw InvalidParameter("Markov order must be nonnegative");
    states_ = checked_power(k, order);
    if (rows_.size() != states_ * static_cast<std::size_t>(k))
        throw InvalidParameter("transition table must have k^order rows of k entries");
    cumulative_.resize(rows_.size());
    for (std::size_t s = 0; s < states_; ++s) {
        double sum = 0.0;
        for (int x = 0; x < k; ++x) {
            double q = rows_[s * static_cast<std::size_t>(k) + static_cast<std::size_t>(x)];
            if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("transition probabilities must lie in [0, 1]");
            sum += q;
            cumulative_[s * static_cast<std::size_t>(k) + static_cast<std::size_t>(x)] = sum;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) throw InvalidParameter("transition row does not sum to 1");
    }
    if (states_ == 1) {
        stationary_ = std::vector<double>{1.0};
    } else if (states_ <= kDenseStationaryLimit) {
        stationary_ = solve_dense(*this, stationary_error_);
    } else {
        stationary_ = solve_power(*this, stationary_error_);
    }
}

Symbol MarkovModel::sample_symbol(std::size_t state, double u) const {
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(state * static_cast<std::size_t>(k_));
    auto last = first + k_;
    auto it = std::upper_bound(first, last, u);
    // rounding can leave the last cumulative slightly below 1
    if (it == last) --it;
    return static_cast<Symbol>(it - first);
}

const std::vector<double>& MarkovModel::stationary() const {
    if (!stationary_) throw NumericalFailure(stationary_error_);
    return *stationary_;
}

CompoundSource::CompoundSource(std::vector<MarkovModel> m, std::vector<double> probs)
    : models(std::move(m)), p(std::move(probs)) {
    if (models.empty()) throw InvalidParameter("compound source needs at least one model");
    if (p.size() != models.size()) throw InvalidParameter("mixture distribution p must have one entry per model");
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw InvalidParameter("mixture probabilities must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameter("mixture distribution p must sum to 1");
    for (const auto& model : models)
        if (model.alphabet_size() != models.front().alphabet_size() || model.order() != models.front().order())
            throw InvalidParameter("compound source models must share alphabet size and order");
}

std::vector<std::size_t> MemoryStore::lengths() const {
    std::vector<std::size_t> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences) out.push_back(s.size());
    return out;
}

std::size_t MemoryStore::total() const {
    std::size_t t = 0;
    for (const auto& s : sequences) t += s.size();
    return t;
}

std::vector<Sequence> MemoryStore::with_label(int label) const {
    if (!labelled()) throw InvalidParameter("memory has no labels");
    std::vector<Sequence> out;
    for (std::size_t j = 0; j < sequences.size(); ++j)
        if (labels[j] == label) out.push_back(sequences[j]);
    return out;
}

void MemoryStore::validate(int k) const {
    if (labelled() && labels.size() != sequences.size())
        throw InvalidParameter("memory labels must have one entry per sequence");
    for (const auto& s : sequences)
        for (Symbol x : s)
            if (x >= k) throw InvalidParameter("memory symbol outside the alphabet");
}

std::size_t LengthLaw::draw(Rng& rng) const {
    if (min_length == max_length) return min_length;
    return std::uniform_int_distribution<std::size_t>(min_length, max_length)(rng);
}

MarkovModel sample_jeffreys(int k, int order, Rng& rng) {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (order < 0) throw InvalidParameter("Markov order must be nonnegative");
    const std::size_t states = checked_power(k, order);
    std::gamma_distribution<double> gamma(0.5, 1.0);
    std::vector<double> rows(states * static_cast<std::size_t>(k));
    for (std::size_t s = 0; s < states; ++s) {
        auto row = std::span<double>(rows).subspan(s * static_cast<std::size_t>(k), static_cast<std::size_t>(k));
        double sum = 0.0;
        do {
            sum = 0.0;
            for (double& v : row) {
                v = gamma(rng);
                sum += v;
            }
        } while (!(sum > 0.0));
        for (double& v : row) v /= sum;
        // re-normalize so the row sums to 1 to within a few ulps
        double residual = 1.0 - std::accumulate(row.begin(), row.end(), 0.0);
        double& top = *std::max_element(row.begin(), row.end());
        top = std::min(1.0, top + residual);
    }
    return MarkovModel(k, order, std::move(rows));
}

MarkovModel sample_jeffreys(int k, int order, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return sample_jeffreys(k, order, rng);
}

Sequence generate(const MarkovModel& model, std::size_t n, Rng& rng) {
    Sequence out(n);
    if (n == 0) return out;
    std::size_t state = 0;
    if (model.num_states() > 1) {
        const auto& pi = model.stationary();
        state = static_cast<std::size_t>(sample_index(pi, rng));
    }
    for (std::size_t t = 0; t < n; ++t) {
        Symbol x = model.sample_symbol(state, uniform01(rng));
        out[t] = x;
        state = model.next_state(state, x);
    }
    return out;
}

Sequence generate(const MarkovModel& model, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return generate(model, n, rng);
}

double entropy_rate(const MarkovModel& model) {
    const auto& pi = model.stationary();
    double h = 0.0;
    for (std::size_t s = 0; s < model.num_states(); ++s)
        if (pi[s] > 0.0) h += pi[s] * row_entropy(model.row(s));
    return h;
}

double empirical_entropy(std::span<const Symbol> seq, int k, int order) {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (order < 0) throw InvalidParameter("order must be nonnegative");
    const std::size_t contexts = checked_power(k, order);
    if (seq.size() <= contexts) throw InvalidParameter("sequence too short for the requested entropy order");
    std::vector<std::uint32_t> counts(contexts * static_cast<std::size_t>(k), 0);
    std::size_t ctx = 0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const Symbol x = seq[t];
        if (x >= k) throw InvalidParameter("symbol outside the alphabet");
        if (t >= static_cast<std::size_t>(order)) ++counts[ctx * static_cast<std::size_t>(k) + x];
        if (contexts > 1) ctx = (ctx * static_cast<std::size_t>(k) + x) % contexts;
    }
    const double total = static_cast<double>(seq.size() - static_cast<std::size_t>(order));
    double h = 0.0;
    for (std::size_t c = 0; c < contexts; ++c) {
        const auto* row = counts.data() + c * static_cast<std::size_t>(k);
        double nc = 0.0;
        for (int x = 0; x < k; ++x) nc += row[x];
        if (nc == 0.0) continue;
        for (int x = 0; x < k; ++x)
            if (row[x] > 0) h -= (row[x] / total) * std::log2(row[x] / nc);
    }
    return std::max(0.0, h);
}

double kl_rate(const MarkovModel& a, const MarkovModel& b) {
    if (a.alphabet_size() != b.alphabet_size() || a.order() != b.order())
        throw InvalidParameter("divergence rate needs models of equal alphabet and order");
    const auto& pi = a.stationary();
    double d = 0.0;
    for (std::size_t s = 0; s < a.num_states(); ++s) {
        if (pi[s] <= 0.0) continue;
        double row = 0.0;
        for (int x = 0; x < a.alphabet_size(); ++x) {
            double pa = a.prob(s, static_cast<Symbol>(x));
            if (pa <= 0.0) continue;
            double pb = b.prob(s, static_cast<Symbol>(x));
            if (pb <= 0.0) return std::numeric_limits<double>::infinity();
            row += pa * std::log2(pa / pb);
        }
        d += pi[s] * row;
    }
    return std::max(0.0, d);
}

int sample_index(std::span<const double> p, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last_positive = static_cast<int>(i);
        if (u < acc) return static_cast<int>(i);
    }
    return last_positive;
}

MemoryStore sample_compound(const CompoundSource& compound, std::size_t T, const LengthLaw& law, Rng& rng) {
    if (law.min_length < 1 || law.max_length < law.min_length)
        throw InvalidParameter("memory length law must yield lengths >= 1");
    MemoryStore mem;
    mem.sequences.reserve(T);
    mem.labels.reserve(T);
    for (std::size_t j = 0; j < T; ++j) {
        const int z = sample_index(compound.p, rng);
        const std::size_t len = law.draw(rng);
        mem.labels.push_back(z + 1);
        mem.sequences.push_back(generate(compound.models[static_cast<std::size_t>(z)], len, rng));
    }
    return mem;
}

MemoryStore sample_compound(const CompoundSource& compound, std::size_t T, const LengthLaw& law,
                            std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return sample_compound(compound, T, law, rng);
}

namespace {

double log2_block(const MarkovModel& model, std::span<const Symbol> block) {
    const int r = model.order();
    const std::size_t head = std::min(block.size(), static_cast<std::size_t>(r));
    double lp = 0.0;
    if (head > 0) {
        const auto& pi = model.stationary();
        double p0 = 0.0;
        if (head == static_cast<std::size_t>(r)) {
            std::size_t state = 0;
            for (std::size_t t = 0; t < head; ++t) state = model.next_state(state, block[t]);
            p0 = pi[state];
        } else {
            // marginal over states whose oldest `head` symbols match the block
            std::size_t stride = 1;
            for (std::size_t t = head; t < static_cast<std::size_t>(r); ++t) stride *= static_cast<std::size_t>(model.alphabet_size());
            std::size_t prefix = 0;
            for (std::size_t t = 0; t < head; ++t) prefix = prefix * static_cast<std::size_t>(model.alphabet_size()) + block[t];
            for (std::size_t low = 0; low < stride; ++low) p0 += pi[prefix * stride + low];
        }
        lp = std::log2(p0);
    }
    std::size_t state = 0;
    for (std::size_t t = 0; t < block.size(); ++t) {
        if (t >= head) lp += std::log2(model.prob(state, block[t]));
        state = model.next_state(state, block[t]);
    }
    return lp;
}

// Short blocks only (at most depth + 1 symbols).
double block_probability(const MarkovModel& model, std::span<const Symbol> block) {
    return std::exp2(log2_block(model, block));
}

} // namespace

double log2_block_probability(const MarkovModel& model, std::span<const Symbol> block) {
    for (Symbol x : block)
        if (x >= model.alphabet_size()) throw InvalidParameter("symbol outside the alphabet");
    return log2_block(model, block);
}

MixtureTreeMeasure::MixtureTreeMeasure(const CompoundSource& compound, int depth)
    : compound_(compound), depth_(depth) {
    if (depth < compound.models.front().order())
        throw InvalidParameter("mixture tree depth must be at least the model order");
}

double MixtureTreeMeasure::mixture_prob(std::span<const Symbol> block) const {
    double prob = 0.0;
    for (std::size_t i = 0; i < compound_.models.size(); ++i)
        if (compound_.p[i] > 0.0) prob += compound_.p[i] * block_probability(compound_.models[i], block);
    return prob;
}

double MixtureTreeMeasure::log2_block(std::span<const Symbol> block) const {
    const auto d = static_cast<std::size_t>(depth_);
    const std::size_t head = std::min(block.size(), d);
    double lp = std::log2(mixture_prob(block.first(head)));
    for (std::size_t t = d; t < block.size(); ++t) {
        const double joint = mixture_prob(block.subspan(t - d, d + 1));
        const double ctx = mixture_prob(block.subspan(t - d, d));
        lp += std::log2(joint) - std::log2(ctx);
    }
    return lp;
}

KlEstimate mixture_kl_rate(const MarkovModel& phi, const CompoundSource& compound, int depth, std::size_t n_mc,
                           std::uint64_t seed, std::size_t block_length) {
    if (n_mc < 1) throw InvalidParameter("n_mc must be at least 1");
    if (block_length < 1) throw InvalidParameter("block length must be at least 1");
    const bool identical = std::all_of(compound.models.begin(), compound.models.end(),
                                       [&](const MarkovModel& m) { return m == phi; });
    if (identical) return {};
    MixtureTreeMeasure mixture(compound, depth);
    Rng rng = make_rng(seed);
    std::vector<double> samples;
    samples.reserve(n_mc);
    for (std::size_t i = 0; i < n_mc; ++i) {
        Sequence x = generate(phi, block_length, rng);
        const double lr = log2_block_probability(phi, x) - mixture.log2_block(x);
        samples.push_back(lr / static_cast<double>(block_length));
    }
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n_mc);
    double se = 0.0;
    if (n_mc > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc));
    }
    return {std::max(0.0, mean), se};
}

} // namespace mauc
