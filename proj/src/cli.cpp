#include "mauc/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mauc/bounds.hpp"
#include "mauc/codec.hpp"
#include "mauc/error.hpp"
#include "mauc/experiment.hpp"
#include "mauc/io.hpp"
#include "mauc/mdl_cluster.hpp"
#include "mauc/rng.hpp"
#include "mauc/source_model.hpp"

namespace mauc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using experiment::format_number;

// Raised for flag combinations CLI11 cannot express; exits with code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json parse_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
}

json model_to_json(const MarkovModel& m) {
    return {{"k", m.alphabet_size()}, {"order", m.order()}, {"rows", m.rows()}};
}

MarkovModel model_from_json(const json& j) {
    try {
        return MarkovModel(j.at("k").get<int>(), j.at("order").get<int>(), j.at("rows").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model JSON: ") + e.what());
    }
}

Sequence read_sequence(const std::string& path, int k) {
    Sequence s = read_file(path);
    for (Symbol v : s)
        if (v >= k)
            throw InvalidParameter("'" + path + "' holds symbol " + std::to_string(v) + " outside the alphabet of size " +
                                   std::to_string(k));
    return s;
}

// A manifest is a JSON list of {"path": ..., "label": ...}; paths are relative
// to the manifest. Any other path names a single raw sequence file.
MemoryStore load_memory(const std::vector<std::string>& paths, int k) {
    MemoryStore mem;
    bool any_label = false, all_label = true;
    for (const auto& path : paths) {
        if (fs::path(path).extension() == ".json") {
            const json manifest = parse_json(path);
            if (!manifest.is_array()) throw FormatError("manifest '" + path + "' must be a JSON list");
            const fs::path base = fs::path(path).parent_path();
            for (const auto& entry : manifest) {
                const auto rel = entry.is_string() ? entry.get<std::string>() : entry.at("path").get<std::string>();
                const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
                mem.sequences.push_back(read_sequence(p.string(), k));
                if (entry.is_object() && entry.contains("label")) {
                    mem.labels.push_back(entry.at("label").get<int>());
                    any_label = true;
                } else {
                    mem.labels.push_back(0);
                    all_label = false;
                }
            }
        } else {
            mem.sequences.push_back(read_sequence(path, k));
            mem.labels.push_back(0);
            all_label = false;
        }
    }
    if (!any_label || !all_label) mem.labels.clear();
    return mem;
}

struct Assignment {
    int K = 0;
    std::vector<int> ids;
};

Assignment load_assignment(const std::string& path) {
    const json j = parse_json(path);
    try {
        return {j.at("K").get<int>(), j.at("assignment").get<std::vector<int>>()};
    } catch (const json::exception& e) {
        throw FormatError("malformed assignment '" + path + "': " + e.what());
    }
}

// Memory sequences that make up cluster `id`, by assignment file or labels.
std::vector<Sequence> cluster_members(const MemoryStore& mem, const std::string& assignment_path, int id) {
    std::vector<int> ids;
    if (!assignment_path.empty()) {
        const auto a = load_assignment(assignment_path);
        if (a.ids.size() != mem.size()) throw InvalidParameter("assignment length differs from the memory size");
        ids = a.ids;
    } else if (mem.labelled()) {
        ids = mem.labels;
    } else {
        throw InvalidParameter("mode ucompcm needs --assignment or a labelled memory manifest");
    }
    std::vector<Sequence> out;
    for (std::size_t i = 0; i < mem.size(); ++i)
        if (ids[i] == id) out.push_back(mem.sequences[i]);
    return out;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "infinity") {
            out.push_back(bounds::kInfinity);
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("invalid value '") + item + "' for " + flag);
        }
    }
    if (out.empty()) throw UsageError(std::string("empty list for ") + flag);
    return out;
}

int default_workers() {
    if (const char* env = std::getenv("MAUC_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
        throw UsageError("MAUC_WORKERS must be a positive integer");
    }
    return 1;
}

// ---- gen ----

struct GenArgs {
    int k = 2, order = 1, K = 1;
    std::size_t n = 4096, T = 0, memory_length = 0;
    std::uint64_t seed = 1;
    std::string model_in, model_out, out, out_dir;
};

void run_gen(const GenArgs& a) {
    Rng rng = make_rng(a.seed);
    std::vector<MarkovModel> models;
    if (!a.model_in.empty()) {
        const json j = parse_json(a.model_in);
        if (j.contains("models"))
            for (const auto& m : j.at("models")) models.push_back(model_from_json(m));
        else
            models.push_back(model_from_json(j));
    } else {
        for (int i = 0; i < a.K; ++i) models.push_back(sample_jeffreys(a.k, a.order, rng));
    }
    const int K = static_cast<int>(models.size());
    const std::vector<double> p(static_cast<std::size_t>(K), 1.0 / K);

    if (!a.model_out.empty()) {
        json j;
        if (K == 1) {
            j = model_to_json(models[0]);
        } else {
            j["models"] = json::array();
            for (const auto& m : models) j["models"].push_back(model_to_json(m));
            j["p"] = p;
        }
        write_file_atomic(a.model_out, j.dump(2) + '\n');
    }
    if (!a.out.empty()) {
        const Sequence x = generate(models[0], a.n, rng);
        write_file_atomic(a.out, std::string_view(reinterpret_cast<const char*>(x.data()), x.size()));
    }
    if (!a.out_dir.empty()) {
        const CompoundSource compound(models, p);
        const std::size_t len = a.memory_length ? a.memory_length : a.n;
        const MemoryStore mem = sample_compound(compound, a.T, LengthLaw::fixed(len), rng);
        fs::create_directories(a.out_dir);
        json manifest = json::array();
        for (std::size_t i = 0; i < mem.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "y_%05zu.bin", i);
            const auto& s = mem.sequences[i];
            write_file_atomic((fs::path(a.out_dir) / name).string(),
                              std::string_view(reinterpret_cast<const char*>(s.data()), s.size()));
            manifest.push_back({{"path", name}, {"label", mem.labels[i]}});
        }
        write_file_atomic((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + '\n');
    }
}

// ---- compress / decompress ----

struct CodecArgs {
    std::string mode = "ucomp";
    int k = 256, depth = 3, cluster = 0;
    std::vector<std::string> memory;
    std::string assignment, in, out;
};

void run_compress(const CodecArgs& a) {
    const Mode mode = parse_mode(a.mode);
    if (mode != Mode::ucomp && a.memory.empty())
        throw InvalidParameter("mode " + a.mode + " requires --memory");
    if (mode == Mode::ucompcm && a.cluster < 1) throw InvalidParameter("mode ucompcm requires --cluster (>= 1)");
    const Sequence x = read_sequence(a.in, a.k);
    const CodecParams params{a.k, a.depth};
    CodeStream stream;
    if (mode == Mode::ucomp) {
        stream = encode(mode, x, std::nullopt, params);
    } else {
        const MemoryStore mem = load_memory(a.memory, a.k);
        if (mode == Mode::ucompm) {
            stream = encode(mode, x, std::span<const Sequence>(mem.sequences), params);
        } else {
            const auto members = cluster_members(mem, a.assignment, a.cluster);
            stream = encode(mode, x, std::span<const Sequence>(members), params,
                            static_cast<std::uint16_t>(a.cluster));
        }
    }
    write_file_atomic(a.out, serialize(stream));
    std::cerr << "compressed " << x.size() << " symbols into " << stream.header.payload_bits << " payload bits\n";
}

void run_decompress(const CodecArgs& a) {
    const CodeStream stream = parse_stream(read_file(a.in));
    const auto& h = stream.header;
    Sequence x;
    if (h.mode == Mode::ucomp) {
        x = decode(stream, std::nullopt);
    } else {
        if (a.memory.empty()) throw InvalidParameter(std::string("stream mode ") + std::string(mode_name(h.mode)) + " requires --memory");
        const MemoryStore mem = load_memory(a.memory, h.k);
        if (h.mode == Mode::ucompm) {
            x = decode(stream, std::span<const Sequence>(mem.sequences));
        } else {
            const auto members = cluster_members(mem, a.assignment, *h.cluster_id);
            x = decode(stream, std::span<const Sequence>(members));
        }
    }
    write_file_atomic(a.out, std::string_view(reinterpret_cast<const char*>(x.data()), x.size()));
}

// ---- cluster / classify ----

struct ClusterArgs {
    int k = 256, depth = 3, K = 2, max_iters = 50;
    std::vector<std::string> memory;
    std::string assignment, in, out;
};

void run_cluster(const ClusterArgs& a) {
    const MemoryStore mem = load_memory(a.memory, a.k);
    mdl::MdlParams params;
    params.k = a.k;
    params.depth = a.depth;
    params.max_iters = a.max_iters;
    mdl::Clusterer c(mem.sequences, params);
    const auto state = c.refine(c.initial_partition(a.K), a.max_iters);
    json j = {
        {"K", state.K},
        {"assignment", state.assignment},
        {"total_dl", state.total_dl},
        {"per_cluster_dl", state.per_cluster_dl},
        {"passes", state.passes},
    };
    if (mem.labelled())
        j["accuracy"] = mdl::clustering_accuracy(state.assignment, mem.labels, a.K);
    const std::string text = j.dump(2) + '\n';
    if (a.out.empty())
        std::cout << text;
    else
        write_file_atomic(a.out, text);
}

void run_classify(const ClusterArgs& a) {
    const MemoryStore mem = load_memory(a.memory, a.k);
    const auto assignment = load_assignment(a.assignment);
    mdl::MdlParams params;
    params.k = a.k;
    params.depth = a.depth;
    mdl::Clusterer c(mem.sequences, params);
    const auto state = c.assign(assignment.K, assignment.ids);
    const Sequence x = read_sequence(a.in, a.k);
    std::cout << c.classify(x, state) << '\n';
}

// ---- bounds ----

struct BoundsArgs {
    int k = 2, order = 0;
    std::string n = "1000", m = "inf";
    double eps = 0.05, rate = 1.0, p_z = 1.0, entropy_p = 0.0, kl_rate = 0.0;
    std::optional<double> d, log_c;
    std::string out;
};

void run_bounds(const BoundsArgs& a) {
    auto family = bounds::FamilySpec::markov(a.k, a.order);
    if (a.d) family.d = *a.d;
    if (a.log_c) family.log_c = *a.log_c;
    family = bounds::FamilySpec::custom(family.d, family.log_c, family.k, family.order);

    auto guarded = [](auto&& f) {
        try {
            return f();
        } catch (const NoSolution&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::string out = "n,m,d,k,order,eps,rate,p_z,H_p,Rbar,rhat1,rhat2,gain_lb_k1,gain_lb_cm,ucompm_gain_ub,overhead\n";
    for (double n : parse_list(a.n, "--n")) {
        for (double m : parse_list(a.m, "--m")) {
            bounds::BoundQuery q;
            q.n = n;
            q.m = m;
            q.entropy_rate = a.rate;
            q.eps = a.eps;
            q.p_z = a.p_z;
            q.entropy_p = a.entropy_p;
            q.validate();
            const double values[] = {
                n, m, family.d, static_cast<double>(a.k), static_cast<double>(a.order), a.eps, a.rate, a.p_z,
                a.entropy_p,
                bounds::avg_minimax_redundancy(family, n),
                bounds::residual_redundancy_single(n, m, family.d),
                bounds::residual_redundancy_clustered(n, m, family.d, a.p_z, a.entropy_p),
                bounds::memorization_gain_lower_bound(q, family),
                bounds::clustered_gain_lower_bound(q, family),
                bounds::mixed_memory_gain_upper_bound(n, family, a.rate, a.kl_rate).gain,
                guarded([&] { return bounds::overhead_ratio(family, n, a.rate, a.eps); }),
            };
            for (std::size_t i = 0; i < std::size(values); ++i) {
                if (i) out += ',';
                out += format_number(values[i]);
            }
            out += '\n';
        }
    }
    if (a.out.empty())
        std::cout << out;
    else
        write_file_atomic(a.out, out);
}

// ---- experiment ----

struct ExperimentArgs {
    std::string config;
    std::optional<int> k, order, K, depth, trials, max_iters;
    std::optional<std::string> n, T, schemes, quantile, p;
    std::optional<std::size_t> memory_length;
    std::optional<double> eps, min_kl;
    std::optional<std::uint64_t> seed;
    bool payload = false;
    std::optional<int> workers;
    std::string format = "csv", out;
};

experiment::ExperimentConfig config_from_json(const json& j) {
    experiment::ExperimentConfig c;
    try {
        c.k = j.value("k", c.k);
        c.order = j.value("order", c.order);
        c.K = j.value("K", c.K);
        c.p = j.value("p", c.p);
        c.n = j.value("n", c.n);
        c.T = j.value("T", c.T);
        const std::size_t len = j.value("memory_length", c.n);
        c.law = LengthLaw{j.value("memory_length_min", len), j.value("memory_length_max", len)};
        c.depth = j.value("depth", c.depth);
        c.eps = j.value("eps", c.eps);
        c.trials = j.value("trials", c.trials);
        c.base_seed = j.value("base_seed", c.base_seed);
        if (j.contains("schemes")) {
            c.schemes.clear();
            for (const auto& s : j.at("schemes")) c.schemes.push_back(experiment::parse_scheme(s.get<std::string>()));
        }
        if (j.contains("quantile"))
            c.quantile = j.at("quantile").get<std::string>() == "per_source" ? experiment::QuantileMode::per_source
                                                                              : experiment::QuantileMode::pooled;
        c.payload_lengths = j.value("codelength", std::string("ideal")) == "payload";
        c.min_kl_rate = j.value("min_kl_rate", c.min_kl_rate);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.kl_blocks = j.value("kl_blocks", c.kl_blocks);
        c.kl_block_length = j.value("kl_block_length", c.kl_block_length);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed experiment config: ") + e.what());
    }
    return c;
}

void run_experiment_cmd(const ExperimentArgs& a) {
    experiment::ExperimentConfig base;
    bool law_from_file = false;
    if (!a.config.empty()) {
        const json j = parse_json(a.config);
        base = config_from_json(j);
        law_from_file = j.contains("memory_length") || j.contains("memory_length_min");
    }
    if (a.k) base.k = *a.k;
    if (a.order) base.order = *a.order;
    if (a.K) base.K = *a.K;
    if (a.depth) base.depth = *a.depth;
    if (a.trials) base.trials = *a.trials;
    if (a.max_iters) base.max_iters = *a.max_iters;
    if (a.eps) base.eps = *a.eps;
    if (a.min_kl) base.min_kl_rate = *a.min_kl;
    if (a.seed) base.base_seed = *a.seed;
    if (a.payload) base.payload_lengths = true;
    if (a.p) base.p = parse_list(*a.p, "--p");
    if (a.quantile) {
        if (*a.quantile == "pooled")
            base.quantile = experiment::QuantileMode::pooled;
        else if (*a.quantile == "per_source")
            base.quantile = experiment::QuantileMode::per_source;
        else
            throw UsageError("--quantile must be pooled or per_source");
    }
    if (a.schemes) {
        base.schemes.clear();
        std::stringstream ss(*a.schemes);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) base.schemes.push_back(experiment::parse_scheme(item));
    }
    std::vector<double> ns{static_cast<double>(base.n)}, Ts{static_cast<double>(base.T)};
    if (a.n) ns = parse_list(*a.n, "--n");
    if (a.T) Ts = parse_list(*a.T, "--T");
    const int workers = a.workers ? *a.workers : default_workers();
    if (workers < 1) throw UsageError("--workers must be >= 1");

    std::vector<experiment::GainReport> reports;
    for (double n : ns) {
        for (double T : Ts) {
            if (!(n >= 1) || n != std::floor(n) || !(T >= 0) || T != std::floor(T))
                throw InvalidParameter("--n and --T take nonnegative integers");
            auto c = base;
            c.n = static_cast<std::size_t>(n);
            c.T = static_cast<std::size_t>(T);
            if (a.memory_length)
                c.law = LengthLaw::fixed(*a.memory_length);
            else if (!law_from_file)
                c.law = LengthLaw::fixed(c.n);
            const auto start = std::chrono::steady_clock::now();
            reports.push_back(experiment::run_experiment(c, workers));
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const auto& r = reports.back();
            std::cerr << "n=" << c.n << " T=" << c.T << " g_M=" << format_number(r.g_M)
                      << " g_CM=" << format_number(r.g_CM) << " g_MDL=" << format_number(r.g_MDL) << " ("
                      << format_number(std::round(secs * 100) / 100) << " s)\n";
        }
    }
    const auto format = experiment::parse_format(a.format);
    if (a.out.empty())
        std::cout << (format == experiment::ReportFormat::csv ? experiment::format_csv(reports)
                                                              : experiment::format_json(reports));
    else
        experiment::emit_report(reports, a.out, format);
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Memory-assisted universal compression toolkit"};
    app.name("mauc");
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Sample Markov sources from Jeffreys' prior and generate sequences");
    g->add_option("--k", gen.k, "Alphabet size")->check(CLI::Range(2, 256));
    g->add_option("--order", gen.order, "Markov order")->check(CLI::NonNegativeNumber);
    g->add_option("--K", gen.K, "Number of sources (memory corpus)")->check(CLI::PositiveNumber);
    g->add_option("--n", gen.n, "Length of the generated sequence");
    g->add_option("--T", gen.T, "Number of memory sequences written to --out-dir");
    g->add_option("--memory-length", gen.memory_length, "Length of each memory sequence (default --n)");
    g->add_option("--seed", gen.seed, "Random seed");
    g->add_option("--model-in", gen.model_in, "Use the model(s) in this JSON file instead of sampling");
    g->add_option("--model-out", gen.model_out, "Write the sampled model(s) as JSON");
    g->add_option("--out", gen.out, "Write a sequence from the first source (raw bytes)");
    g->add_option("--out-dir", gen.out_dir, "Write a labelled memory corpus and manifest.json here");

    CodecArgs comp;
    auto* c = app.add_subcommand("compress", "Compress a raw symbol file");
    c->add_option("--mode", comp.mode, "ucomp, ucompm or ucompcm")->check(CLI::IsMember({"ucomp", "ucompm", "ucompcm"}));
    c->add_option("--k", comp.k, "Alphabet size")->check(CLI::Range(2, 256));
    c->add_option("--depth,--model-depth", comp.depth, "Context tree depth")->check(CLI::Range(0, 255));
    c->add_option("--memory", comp.memory, "Memory: raw sequence files or a .json manifest");
    c->add_option("--assignment", comp.assignment, "Cluster assignment JSON (from `cluster`) for ucompcm");
    c->add_option("--cluster", comp.cluster, "Cluster id used to prime ucompcm");
    c->add_option("--in", comp.in, "Input file")->required();
    c->add_option("--out", comp.out, "Output stream file")->required();

    CodecArgs decomp;
    auto* d = app.add_subcommand("decompress", "Decompress a stream written by `compress`");
    d->add_option("--memory", decomp.memory, "The memory given to `compress`");
    d->add_option("--assignment", decomp.assignment, "The assignment given to `compress`");
    d->add_option("--in", decomp.in, "Input stream file")->required();
    d->add_option("--out", decomp.out, "Output file")->required();

    ClusterArgs clus;
    auto* cl = app.add_subcommand("cluster", "MDL clustering of a memory corpus");
    cl->add_option("--memory", clus.memory, "Raw sequence files or a .json manifest")->required();
    cl->add_option("--K", clus.K, "Number of clusters")->check(CLI::PositiveNumber);
    cl->add_option("--k", clus.k, "Alphabet size")->check(CLI::Range(2, 256));
    cl->add_option("--depth,--model-depth", clus.depth, "Context tree depth")->check(CLI::Range(0, 255));
    cl->add_option("--max-iters", clus.max_iters, "Maximum refinement passes")->check(CLI::NonNegativeNumber);
    cl->add_option("--out", clus.out, "Assignment JSON (default stdout)");

    ClusterArgs cls;
    auto* cf = app.add_subcommand("classify", "Pick the cluster of a new sequence by MDL");
    cf->add_option("--in", cls.in, "Sequence to classify")->required();
    cf->add_option("--memory", cls.memory, "Raw sequence files or a .json manifest")->required();
    cf->add_option("--assignment", cls.assignment, "Assignment JSON from `cluster`")->required();
    cf->add_option("--k", cls.k, "Alphabet size")->check(CLI::Range(2, 256));
    cf->add_option("--depth,--model-depth", cls.depth, "Context tree depth")->check(CLI::Range(0, 255));

    BoundsArgs bnd;
    auto* b = app.add_subcommand("bounds", "Evaluate redundancy and memorization-gain bounds (CSV)");
    b->add_option("--k", bnd.k, "Alphabet size")->check(CLI::Range(2, 256));
    b->add_option("--order", bnd.order, "Markov order")->check(CLI::NonNegativeNumber);
    b->add_option("--n", bnd.n, "Sequence length(s), comma separated");
    b->add_option("--m", bnd.m, "Memory length(s), comma separated; inf allowed");
    b->add_option("--eps", bnd.eps, "Failure probability eps");
    b->add_option("--rate", bnd.rate, "Entropy rate in bits/symbol");
    b->add_option("--p-z", bnd.p_z, "Probability of the active cluster");
    b->add_option("--h-p", bnd.entropy_p, "Entropy of the cluster distribution in bits");
    b->add_option("--kl-rate", bnd.kl_rate, "Divergence rate to the mixed memory, bits/symbol");
    b->add_option("--d", bnd.d, "Override the parameter count d");
    b->add_option("--logc", bnd.log_c, "Override logC");
    b->add_option("--out", bnd.out, "Output CSV (default stdout)");

    ExperimentArgs exp;
    auto* e = app.add_subcommand("experiment", "Run a gain experiment and write a CSV or JSON report");
    e->add_option("--config", exp.config, "JSON config; flags override its values");
    e->add_option("--k", exp.k, "Alphabet size");
    e->add_option("--order", exp.order, "Markov order");
    e->add_option("--K", exp.K, "Number of sources");
    e->add_option("--p", exp.p, "Source probabilities, comma separated (default uniform)");
    e->add_option("--n", exp.n, "Sequence length(s), comma separated grid");
    e->add_option("--T", exp.T, "Memory sequence count(s), comma separated grid");
    e->add_option("--memory-length", exp.memory_length, "Length of each memory sequence (default n)");
    e->add_option("--depth,--model-depth", exp.depth, "Context tree depth (default max(order, 3))");
    e->add_option("--eps", exp.eps, "Quantile level eps");
    e->add_option("--trials", exp.trials, "Number of trials");
    e->add_option("--seed", exp.seed, "Base seed");
    e->add_option("--schemes", exp.schemes, "Comma separated: ucomp,ucompm,ucompcm,ucompmdl");
    e->add_option("--quantile", exp.quantile, "pooled (default) or per_source");
    e->add_flag("--payload", exp.payload, "Use coded payload bits instead of ideal codelengths");
    e->add_option("--min-kl", exp.min_kl, "Minimum pairwise divergence rate between sources");
    e->add_option("--max-iters", exp.max_iters, "Maximum MDL refinement passes");
    e->add_option("--workers", exp.workers, "Worker threads (default $MAUC_WORKERS or 1)");
    e->add_option("--format", exp.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    e->add_option("--out", exp.out, "Report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*g) run_gen(gen);
        else if (*c) run_compress(comp);
        else if (*d) run_decompress(decomp);
        else if (*cl) run_cluster(clus);
        else if (*cf) run_classify(cls);
        else if (*b) run_bounds(bnd);
        else if (*e) run_experiment_cmd(exp);
        return 0;
    } catch (const UsageError& err) {
        std::cerr << "mauc: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "mauc: " << err.what() << '\n';
        return 1;
    }
}

} // namespace mauc
