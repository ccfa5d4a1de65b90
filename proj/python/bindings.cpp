#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mauc/bounds.hpp"
#include "mauc/codec.hpp"
#include "mauc/error.hpp"
#include "mauc/experiment.hpp"
#include "mauc/mdl_cluster.hpp"
#include "mauc/source_model.hpp"

namespace py = pybind11;
using namespace mauc;

namespace {

Sequence to_sequence(const py::bytes& b) {
    const std::string s = b;
    return Sequence(s.begin(), s.end());
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<Sequence> to_memory(const std::optional<std::vector<py::bytes>>& memory) {
    std::vector<Sequence> out;
    if (memory)
        for (const auto& b : *memory) out.push_back(to_sequence(b));
    return out;
}

MemoryView view(const std::optional<std::vector<py::bytes>>& memory, const std::vector<Sequence>& seqs) {
    if (!memory) return std::nullopt;
    return std::span<const Sequence>(seqs);
}

py::dict report_dict(const experiment::GainReport& r) {
    py::dict d;
    d["mean_len_ucomp"] = r.mean_length[0];
    d["mean_len_ucompm"] = r.mean_length[1];
    d["mean_len_ucompcm"] = r.mean_length[2];
    d["mean_len_ucompmdl"] = r.mean_length[3];
    d["g_M"] = r.g_M;
    d["g_CM"] = r.g_CM;
    d["g_MDL"] = r.g_MDL;
    d["g_ratio_mdl_cm"] = r.g_ratio_mdl_cm;
    d["m_total"] = r.m_total;
    d["bound_gain_lb_k1"] = r.bound_gain_lb_k1;
    d["bound_gain_lb_cm"] = r.bound_gain_lb_cm;
    d["bound_ucompm_ub"] = r.bound_ucompm_ub;
    d["cluster_accuracy"] = r.cluster_accuracy;
    d["classification_accuracy"] = r.classification_accuracy;
    d["csv"] = experiment::format_csv(std::span<const experiment::GainReport>(&r, 1));
    d["json"] = experiment::format_json(std::span<const experiment::GainReport>(&r, 1));
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Memory-assisted universal compression: CTW codec, MDL clustering and gain bounds";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
    py::register_exception<NoSolution>(m, "NoSolution", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<MemoryDesync>(m, "MemoryDesync", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def(
        "compress",
        [](const py::bytes& x, const std::string& mode, int k, int depth,
           const std::optional<std::vector<py::bytes>>& memory, std::optional<std::uint16_t> cluster) {
            const Sequence seq = to_sequence(x);
            const auto mem = to_memory(memory);
            const auto stream = encode(parse_mode(mode), seq, view(memory, mem), CodecParams{k, depth}, cluster);
            return to_bytes(serialize(stream));
        },
        py::arg("x"), py::arg("mode") = "ucomp", py::arg("k") = 256, py::arg("depth") = 3,
        py::arg("memory") = py::none(), py::arg("cluster") = py::none(),
        "Compress a byte string of symbols into a self-describing stream.");

    m.def(
        "decompress",
        [](const py::bytes& stream, const std::optional<std::vector<py::bytes>>& memory) {
            const std::string s = stream;
            const auto parsed = parse_stream(std::vector<std::uint8_t>(s.begin(), s.end()));
            const auto mem = to_memory(memory);
            return to_bytes(decode(parsed, view(memory, mem)));
        },
        py::arg("stream"), py::arg("memory") = py::none());

    m.def(
        "ideal_codelength",
        [](const py::bytes& x, const std::string& mode, int k, int depth,
           const std::optional<std::vector<py::bytes>>& memory) {
            const Sequence seq = to_sequence(x);
            const auto mem = to_memory(memory);
            return ideal_codelength(parse_mode(mode), seq, view(memory, mem), CodecParams{k, depth});
        },
        py::arg("x"), py::arg("mode") = "ucomp", py::arg("k") = 256, py::arg("depth") = 3,
        py::arg("memory") = py::none(), "CTW codelength in bits (-log2 probability).");

    m.def(
        "generate",
        [](int k, int order, std::size_t n, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            const auto model = sample_jeffreys(k, order, rng);
            return py::make_tuple(model.rows(), to_bytes(generate(model, n, rng)));
        },
        py::arg("k"), py::arg("order"), py::arg("n"), py::arg("seed") = 1,
        "Sample a Markov source from Jeffreys' prior; returns (rows, sequence).");

    m.def(
        "cluster",
        [](const std::vector<py::bytes>& memory, int K, int k, int depth, int max_iters) {
            const auto mem = to_memory(memory);
            mdl::MdlParams params;
            params.k = k;
            params.depth = depth;
            params.max_iters = max_iters;
            mdl::Clusterer c(mem, params);
            const auto state = c.refine(c.initial_partition(K), max_iters);
            return py::make_tuple(state.assignment, state.total_dl);
        },
        py::arg("memory"), py::arg("K"), py::arg("k") = 256, py::arg("depth") = 3, py::arg("max_iters") = 50,
        "MDL clustering; returns (1-based assignment, total description length).");

    m.def(
        "classify",
        [](const py::bytes& x, const std::vector<py::bytes>& memory, const std::vector<int>& assignment, int K, int k,
           int depth) {
            const auto mem = to_memory(memory);
            mdl::MdlParams params;
            params.k = k;
            params.depth = depth;
            mdl::Clusterer c(mem, params);
            const auto state = c.assign(K, assignment);
            return c.classify(to_sequence(x), state);
        },
        py::arg("x"), py::arg("memory"), py::arg("assignment"), py::arg("K"), py::arg("k") = 256,
        py::arg("depth") = 3);

    auto b = m.def_submodule("bounds", "Closed-form redundancy and gain bounds (base-2 logs)");
    b.def("jeffreys_integral_log", &bounds::jeffreys_integral_log, py::arg("k"), py::arg("order"));
    b.def(
        "avg_minimax_redundancy",
        [](double d, double log_c, double n) { return bounds::avg_minimax_redundancy(bounds::FamilySpec::custom(d, log_c), n); },
        py::arg("d"), py::arg("log_c"), py::arg("n"));
    b.def(
        "redundancy_tail_bound",
        [](double d, double log_c, double n, double delta) {
            return bounds::redundancy_tail_bound(bounds::FamilySpec::custom(d, log_c), n, delta);
        },
        py::arg("d"), py::arg("log_c"), py::arg("n"), py::arg("delta"));
    b.def(
        "solve_tail_exponent",
        [](double d, double log_c, double n, double eps) {
            return bounds::solve_tail_exponent(bounds::FamilySpec::custom(d, log_c), n, eps);
        },
        py::arg("d"), py::arg("log_c"), py::arg("n"), py::arg("eps"));
    b.def("residual_redundancy_single", &bounds::residual_redundancy_single, py::arg("n"), py::arg("m"), py::arg("d"));
    b.def("residual_redundancy_clustered", &bounds::residual_redundancy_clustered, py::arg("n"), py::arg("m"),
          py::arg("d"), py::arg("p_z"), py::arg("entropy_p"));
    b.def(
        "memorization_gain_lower_bound",
        [](int k, int order, double n, double m, double rate, double eps) {
            bounds::BoundQuery q;
            q.n = n;
            q.m = m;
            q.entropy_rate = rate;
            q.eps = eps;
            return bounds::memorization_gain_lower_bound(q, bounds::FamilySpec::markov(k, order));
        },
        py::arg("k"), py::arg("order"), py::arg("n"), py::arg("m"), py::arg("rate"), py::arg("eps") = 0.05);
    b.def("entropy_of_p", [](const std::vector<double>& p) { return bounds::entropy_of_p(p); }, py::arg("p"));

    m.def(
        "gain_quantile", [](const std::vector<double>& q, double eps) { return experiment::gain_quantile(q, eps); },
        py::arg("samples"), py::arg("eps"));

    m.def(
        "run_experiment",
        [](int k, int order, int K, std::size_t n, std::size_t T, int trials, std::uint64_t seed, double eps,
           const std::vector<std::string>& schemes, int depth, int workers) {
            experiment::ExperimentConfig c;
            c.k = k;
            c.order = order;
            c.K = K;
            c.n = n;
            c.T = T;
            c.law = LengthLaw::fixed(n);
            c.trials = trials;
            c.base_seed = seed;
            c.eps = eps;
            c.depth = depth;
            c.schemes.clear();
            for (const auto& s : schemes) c.schemes.push_back(experiment::parse_scheme(s));
            experiment::GainReport r;
            {
                py::gil_scoped_release release;
                r = experiment::run_experiment(c, workers);
            }
            return report_dict(r);
        },
        py::arg("k") = 4, py::arg("order") = 1, py::arg("K") = 1, py::arg("n") = 1024, py::arg("T") = 16,
        py::arg("trials") = 20, py::arg("seed") = 1, py::arg("eps") = 0.05,
        py::arg("schemes") = std::vector<std::string>{"ucomp", "ucompm", "ucompcm", "ucompmdl"}, py::arg("depth") = -1,
        py::arg("workers") = 1);
}
