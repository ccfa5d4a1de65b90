#include "mauc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "mauc/bounds.hpp"
#include "mauc/codec.hpp"
#include "mauc/ctw.hpp"
#include "mauc/error.hpp"
#include "mauc/mdl_cluster.hpp"
#include "mauc/rng.hpp"

namespace mauc::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxModelDraws = 10000;

std::size_t idx(Scheme s) { return static_cast<std::size_t>(s); }

double ideal_bits(const ContextCounts* primed, std::span<const Symbol> x, int k, int depth) {
    ContextTree tree = primed ? ContextTree(*primed) : ContextTree(k, depth);
    ContextWindow window(k, depth);
    return feed(tree, window, x);
}

double payload_bits(Mode mode, std::span<const Symbol> x, const std::vector<Sequence>& memory, int k, int depth) {
    const CodecParams params{k, depth};
    const MemoryView view = mode == Mode::ucomp ? MemoryView{} : MemoryView{std::span<const Sequence>(memory)};
    std::optional<std::uint16_t> cluster;
    if (mode == Mode::ucompcm) cluster = 1;
    return static_cast<double>(encode(mode, x, view, params, cluster).header.payload_bits);
}

double min_pairwise_kl(const std::vector<MarkovModel>& models) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < models.size(); ++i)
        for (std::size_t j = 0; j < models.size(); ++j)
            if (i != j) best = std::min(best, kl_rate(models[i], models[j]));
    return best;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

Scheme parse_scheme(std::string_view name) {
    if (name == "ucomp") return Scheme::ucomp;
    if (name == "ucompm") return Scheme::ucompm;
    if (name == "ucompcm") return Scheme::ucompcm;
    if (name == "ucompmdl") return Scheme::ucompmdl;
    throw InvalidParameter("unknown scheme '" + std::string(name) + "' (expected ucomp, ucompm, ucompcm or ucompmdl)");
}

std::string_view scheme_name(Scheme s) {
    switch (s) {
    case Scheme::ucomp: return "ucomp";
    case Scheme::ucompm: return "ucompm";
    case Scheme::ucompcm: return "ucompcm";
    case Scheme::ucompmdl: return "ucompmdl";
    }
    return "?";
}

std::vector<double> ExperimentConfig::effective_p() const {
    if (!p.empty()) return p;
    return std::vector<double>(static_cast<std::size_t>(std::max(K, 1)), 1.0 / std::max(K, 1));
}

bool ExperimentConfig::runs(Scheme s) const {
    return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
}

void ExperimentConfig::validate() const {
    if (k < 2 || k > kMaxAlphabet) throw InvalidParameter("alphabet size k must be in [2, 256]");
    if (order < 0) throw InvalidParameter("order must be >= 0");
    if (K < 1) throw InvalidParameter("number of sources K must be >= 1");
    if (!p.empty() && p.size() != static_cast<std::size_t>(K)) throw InvalidParameter("p must have K entries");
    if (n < 1) throw InvalidParameter("sequence length n must be >= 1");
    if (law.min_length < 1 || law.max_length < law.min_length)
        throw InvalidParameter("memory length law must yield lengths >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
    if (trials < 1) throw InvalidParameter("trials must be >= 1");
    if (max_iters < 0) throw InvalidParameter("max_iters must be >= 0");
    if (runs(Scheme::ucompmdl) && T > 0 && T < static_cast<std::size_t>(K))
        throw InvalidParameter("MDL clustering needs at least K memory sequences");
    if (!(min_kl_rate >= 0.0)) throw InvalidParameter("min_kl_rate must be >= 0");
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw InvalidParameter("p must be nonnegative");
        total += v;
    }
    if (!p.empty() && std::abs(total - 1.0) > 1e-9) throw InvalidParameter("p must sum to 1");
}

std::optional<double> TrialResult::ratio(Scheme s) const {
    const auto& base = lengths[idx(Scheme::ucomp)];
    const auto& other = lengths[idx(s)];
    if (!base || !other || *other <= 0.0) return std::nullopt;
    return *base / *other;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) { return derive_seed(base_seed, trial); }

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    const int k = config.k;
    const int depth = config.effective_depth();
    const auto p = config.effective_p();
    Rng rng = make_rng(seed);

    TrialResult r;
    std::vector<MarkovModel> models;
    for (;;) {
        models.clear();
        for (int i = 0; i < config.K; ++i) models.push_back(sample_jeffreys(k, config.order, rng));
        if (config.K < 2 || config.min_kl_rate <= 0.0 || min_pairwise_kl(models) >= config.min_kl_rate) break;
        if (++r.model_draws > kMaxModelDraws)
            throw NumericalFailure("no model set met the minimum divergence rate after 10000 draws");
    }
    const CompoundSource compound(models, p);
    const MemoryStore memory = sample_compound(compound, config.T, config.law, rng);
    r.z = sample_index(p, rng) + 1;
    r.p_z = p[static_cast<std::size_t>(r.z) - 1];
    const MarkovModel& phi = models[static_cast<std::size_t>(r.z) - 1];
    const Sequence x = generate(phi, config.n, rng);
    r.entropy_rate = entropy_rate(phi);
    r.memory_length = static_cast<double>(memory.total());

    // Per-label count tables; every memory scheme primes with a sum of them.
    std::vector<ContextCounts> by_label(static_cast<std::size_t>(config.K), ContextCounts(k, depth));
    for (std::size_t j = 0; j < memory.size(); ++j)
        by_label[static_cast<std::size_t>(memory.labels[j]) - 1].add(memory.sequences[j]);

    auto measure = [&](Mode mode, const ContextCounts* counts, const std::vector<Sequence>& members) {
        return config.payload_lengths ? payload_bits(mode, x, members, k, depth) : ideal_bits(counts, x, k, depth);
    };
    const std::vector<Sequence> none;

    r.lengths[idx(Scheme::ucomp)] = measure(Mode::ucomp, nullptr, none);

    if (config.runs(Scheme::ucompm)) {
        ContextCounts all(k, depth);
        for (const auto& c : by_label) all.add(c);
        r.lengths[idx(Scheme::ucompm)] = measure(Mode::ucompm, &all, memory.sequences);
        if (config.K > 1 && config.kl_blocks > 0) {
            r.kl_rate = mixture_kl_rate(phi, compound, std::max(depth, config.order), config.kl_blocks,
                                        derive_seed(seed, 1), config.kl_block_length)
                            .rate;
        } else {
            r.kl_rate = 0.0;
        }
    }

    if (config.runs(Scheme::ucompcm)) {
        const auto& counts = by_label[static_cast<std::size_t>(r.z) - 1];
        r.lengths[idx(Scheme::ucompcm)] =
            measure(Mode::ucompcm, &counts, config.payload_lengths ? memory.with_label(r.z) : none);
    }

    if (config.runs(Scheme::ucompmdl)) {
        if (memory.size() == 0) {
            r.lengths[idx(Scheme::ucompmdl)] = r.lengths[idx(Scheme::ucomp)];
        } else {
            mdl::MdlParams params;
            params.k = k;
            params.depth = depth;
            params.max_iters = config.max_iters;
            mdl::Clusterer clusterer(memory.sequences, params);
            auto state = clusterer.refine(clusterer.initial_partition(config.K), config.max_iters);
            const int chosen = clusterer.classify(x, state);

            ContextCounts counts(k, depth);
            std::vector<Sequence> members;
            std::map<int, int> votes;
            for (std::size_t j = 0; j < memory.size(); ++j) {
                if (state.assignment[j] != chosen) continue;
                counts.add(memory.sequences[j]);
                if (config.payload_lengths) members.push_back(memory.sequences[j]);
                ++votes[memory.labels[j]];
            }
            r.lengths[idx(Scheme::ucompmdl)] = measure(Mode::ucompcm, &counts, members);
            r.cluster_accuracy = mdl::clustering_accuracy(state.assignment, memory.labels, config.K);
            int majority = 0, best = 0;
            for (const auto& [label, count] : votes)
                if (count > best) {
                    best = count;
                    majority = label;
                }
            r.classified_correctly = majority == r.z;
        }
    }
    return r;
}

double gain_quantile(std::span<const double> samples, double eps) {
    if (samples.empty()) throw InvalidParameter("gain quantile needs at least one sample");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0, 1)");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto N = sorted.size();
    const auto need = static_cast<std::size_t>(std::ceil((1.0 - eps) * static_cast<double>(N) - 1e-9));
    // The need-th largest value: exactly `need` or more samples are >= it.
    return sorted[N - std::max<std::size_t>(need, 1)];
}

GainReport run_experiment(const ExperimentConfig& config, int workers) {
    config.validate();
    const auto N = static_cast<std::size_t>(config.trials);
    GainReport report;
    report.config = config;
    report.trial_seeds.resize(N);
    for (std::size_t t = 0; t < N; ++t) report.trial_seeds[t] = trial_seed(config.base_seed, t);
    report.trials.resize(N);

    std::vector<std::exception_ptr> errors(N);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next++; t < N; t = next++) {
            try {
                report.trials[t] = run_trial(config, report.trial_seeds[t]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(N)));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    const auto& trials = report.trials;
    for (std::size_t s = 0; s < kNumSchemes; ++s) {
        std::vector<double> v;
        for (const auto& tr : trials)
            if (tr.lengths[s]) v.push_back(*tr.lengths[s]);
        report.mean_length[s] = mean_of(v);
    }

    auto gain = [&](Scheme s) {
        std::vector<double> q;
        std::map<int, std::vector<double>> by_z;
        for (const auto& tr : trials)
            if (auto v = tr.ratio(s)) {
                q.push_back(*v);
                by_z[tr.z].push_back(*v);
            }
        if (q.empty()) return kNaN;
        if (config.quantile == QuantileMode::pooled) return gain_quantile(q, config.eps);
        double g = 0.0;
        for (const auto& [z, samples] : by_z)
            g += static_cast<double>(samples.size()) / static_cast<double>(q.size()) * gain_quantile(samples, config.eps);
        return g;
    };
    report.g_M = gain(Scheme::ucompm);
    report.g_CM = gain(Scheme::ucompcm);
    report.g_MDL = gain(Scheme::ucompmdl);
    report.g_ratio_mdl_cm = report.g_MDL / report.g_CM;

    std::vector<double> mem, rate, kl, pz, acc, cls;
    for (const auto& tr : trials) {
        mem.push_back(tr.memory_length);
        rate.push_back(tr.entropy_rate);
        pz.push_back(tr.p_z);
        if (tr.kl_rate) kl.push_back(*tr.kl_rate);
        if (tr.cluster_accuracy) acc.push_back(*tr.cluster_accuracy);
        if (tr.classified_correctly) cls.push_back(*tr.classified_correctly ? 1.0 : 0.0);
    }
    report.m_total = mean_of(mem);
    report.mean_entropy_rate = mean_of(rate);
    report.mean_kl_rate = mean_of(kl);
    report.mean_p_z = mean_of(pz);
    report.cluster_accuracy = mean_of(acc);
    report.classification_accuracy = mean_of(cls);

    const auto family = bounds::FamilySpec::markov(config.k, config.order);
    const auto p = config.effective_p();
    bounds::BoundQuery q;
    q.n = static_cast<double>(config.n);
    q.m = report.m_total;
    q.entropy_rate = report.mean_entropy_rate;
    q.eps = config.eps;
    q.p_z = report.mean_p_z;
    q.entropy_p = bounds::entropy_of_p(p);
    const bool usable = q.m > 0.0 && q.entropy_rate > 0.0;
    report.bound_gain_lb_k1 = usable ? bounds::memorization_gain_lower_bound(q, family) : kNaN;
    report.bound_gain_lb_cm = usable ? bounds::clustered_gain_lower_bound(q, family) : kNaN;
    report.bound_ucompm_ub =
        kl.empty() || !(q.entropy_rate > 0.0)
            ? kNaN
            : bounds::mixed_memory_gain_upper_bound(q.n, family, q.entropy_rate, report.mean_kl_rate).gain;
    return report;
}

} // namespace mauc::experiment
