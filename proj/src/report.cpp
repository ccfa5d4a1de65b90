#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mauc/error.hpp"
#include "mauc/experiment.hpp"
#include "mauc/io.hpp"

namespace mauc::experiment {

namespace {

using nlohmann::json;

constexpr const char* kColumns[] = {
    "k", "order", "K", "n", "m_total", "T", "depth", "eps", "trials",
    "mean_len_ucomp", "mean_len_ucompm", "mean_len_ucompcm", "mean_len_ucompmdl",
    "g_M", "g_CM", "g_MDL", "g_ratio_mdl_cm",
    "bound_gain_lb_k1", "bound_gain_lb_cm", "bound_ucompm_ub", "cluster_accuracy", "base_seed",
};
constexpr std::size_t kNumColumns = std::size(kColumns);

template <class Int>
Int parse_int(std::string_view field, std::size_t line) {
    Int v{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("report line " + std::to_string(line) + ": bad integer '" + std::string(field) + "'");
    return v;
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("report line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    return v;
}

// JSON has no NaN; missing values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string quantile_name(QuantileMode q) { return q == QuantileMode::pooled ? "pooled" : "per_source"; }

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

ReportFormat parse_format(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw InvalidParameter("unknown report format '" + std::string(name) + "' (expected csv or json)");
}

ReportRow to_row(const GainReport& r) {
    const auto& c = r.config;
    ReportRow row;
    row.k = c.k;
    row.order = c.order;
    row.K = c.K;
    row.n = c.n;
    row.m_total = r.m_total;
    row.T = c.T;
    row.depth = c.effective_depth();
    row.eps = c.eps;
    row.trials = c.trials;
    row.mean_len_ucomp = r.mean_length[0];
    row.mean_len_ucompm = r.mean_length[1];
    row.mean_len_ucompcm = r.mean_length[2];
    row.mean_len_ucompmdl = r.mean_length[3];
    row.g_M = r.g_M;
    row.g_CM = r.g_CM;
    row.g_MDL = r.g_MDL;
    row.g_ratio_mdl_cm = r.g_ratio_mdl_cm;
    row.bound_gain_lb_k1 = r.bound_gain_lb_k1;
    row.bound_gain_lb_cm = r.bound_gain_lb_cm;
    row.bound_ucompm_ub = r.bound_ucompm_ub;
    row.cluster_accuracy = r.cluster_accuracy;
    row.base_seed = c.base_seed;
    return row;
}

std::string csv_header() {
    std::string out;
    for (std::size_t i = 0; i < kNumColumns; ++i) {
        if (i) out += ',';
        out += kColumns[i];
    }
    return out + '\n';
}

std::string format_csv_rows(std::span<const ReportRow> rows) {
    std::string out = csv_header();
    for (const auto& r : rows) {
        const std::string fields[] = {
            std::to_string(r.k), std::to_string(r.order), std::to_string(r.K), std::to_string(r.n),
            format_number(r.m_total), std::to_string(r.T), std::to_string(r.depth), format_number(r.eps),
            std::to_string(r.trials), format_number(r.mean_len_ucomp), format_number(r.mean_len_ucompm),
            format_number(r.mean_len_ucompcm), format_number(r.mean_len_ucompmdl), format_number(r.g_M),
            format_number(r.g_CM), format_number(r.g_MDL), format_number(r.g_ratio_mdl_cm),
            format_number(r.bound_gain_lb_k1), format_number(r.bound_gain_lb_cm), format_number(r.bound_ucompm_ub),
            format_number(r.cluster_accuracy), std::to_string(r.base_seed),
        };
        for (std::size_t i = 0; i < kNumColumns; ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }
    return out;
}

std::string format_csv(std::span<const GainReport> reports) {
    std::vector<ReportRow> rows;
    for (const auto& r : reports)
        if (!r.config.schemes.empty()) rows.push_back(to_row(r));
    return format_csv_rows(rows);
}

std::vector<ReportRow> parse_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (std::string(line) + '\n' != csv_header()) throw FormatError("report header does not match the schema");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (f.size() != kNumColumns)
            throw FormatError("report line " + std::to_string(line_no) + ": expected " + std::to_string(kNumColumns) + " fields");
        ReportRow r;
        r.k = parse_int<int>(f[0], line_no);
        r.order = parse_int<int>(f[1], line_no);
        r.K = parse_int<int>(f[2], line_no);
        r.n = parse_int<std::uint64_t>(f[3], line_no);
        r.m_total = parse_double(f[4], line_no);
        r.T = parse_int<std::uint64_t>(f[5], line_no);
        r.depth = parse_int<int>(f[6], line_no);
        r.eps = parse_double(f[7], line_no);
        r.trials = parse_int<int>(f[8], line_no);
        r.mean_len_ucomp = parse_double(f[9], line_no);
        r.mean_len_ucompm = parse_double(f[10], line_no);
        r.mean_len_ucompcm = parse_double(f[11], line_no);
        r.mean_len_ucompmdl = parse_double(f[12], line_no);
        r.g_M = parse_double(f[13], line_no);
        r.g_CM = parse_double(f[14], line_no);
        r.g_MDL = parse_double(f[15], line_no);
        r.g_ratio_mdl_cm = parse_double(f[16], line_no);
        r.bound_gain_lb_k1 = parse_double(f[17], line_no);
        r.bound_gain_lb_cm = parse_double(f[18], line_no);
        r.bound_ucompm_ub = parse_double(f[19], line_no);
        r.cluster_accuracy = parse_double(f[20], line_no);
        r.base_seed = parse_int<std::uint64_t>(f[21], line_no);
        rows.push_back(r);
    }
    if (!header_seen) throw FormatError("empty report");
    return rows;
}

std::string format_json(std::span<const GainReport> reports) {
    json out = json::array();
    for (const auto& r : reports) {
        const auto& c = r.config;
        json schemes = json::array();
        for (auto s : c.schemes) schemes.push_back(std::string(scheme_name(s)));
        json p = json::array();
        for (double v : c.effective_p()) p.push_back(v);

        json config = {
            {"k", c.k}, {"order", c.order}, {"K", c.K}, {"p", p}, {"n", c.n}, {"T", c.T},
            {"memory_length_min", c.law.min_length}, {"memory_length_max", c.law.max_length},
            {"depth", c.effective_depth()}, {"eps", c.eps}, {"trials", c.trials}, {"base_seed", c.base_seed},
            {"schemes", schemes}, {"quantile", quantile_name(c.quantile)},
            {"codelength", c.payload_lengths ? "payload" : "ideal"}, {"min_kl_rate", c.min_kl_rate},
            {"max_iters", c.max_iters}, {"kl_blocks", c.kl_blocks}, {"kl_block_length", c.kl_block_length},
        };
        json results = {
            {"m_total", number(r.m_total)},
            {"mean_len_ucomp", number(r.mean_length[0])},
            {"mean_len_ucompm", number(r.mean_length[1])},
            {"mean_len_ucompcm", number(r.mean_length[2])},
            {"mean_len_ucompmdl", number(r.mean_length[3])},
            {"g_M", number(r.g_M)},
            {"g_CM", number(r.g_CM)},
            {"g_MDL", number(r.g_MDL)},
            {"g_ratio_mdl_cm", number(r.g_ratio_mdl_cm)},
            {"cluster_accuracy", number(r.cluster_accuracy)},
            {"classification_accuracy", number(r.classification_accuracy)},
            {"mean_entropy_rate", number(r.mean_entropy_rate)},
            {"mean_kl_rate", number(r.mean_kl_rate)},
            {"mean_p_z", number(r.mean_p_z)},
        };
        json bounds = {
            {"bound_gain_lb_k1", number(r.bound_gain_lb_k1)},
            {"bound_gain_lb_cm", number(r.bound_gain_lb_cm)},
            {"bound_ucompm_ub", number(r.bound_ucompm_ub)},
        };
        int draws = 0;
        for (const auto& t : r.trials) draws += t.model_draws;
        json meta = {
            {"format_version", 1},
            {"trial_seeds", r.trial_seeds},
            {"seed_derivation", "splitmix64(base_seed, trial_index)"},
            {"model_draws", draws},
        };
        out.push_back({{"config", config}, {"results", results}, {"bounds", bounds}, {"meta", meta}});
    }
    return out.dump(2) + '\n';
}

void emit_report(std::span<const GainReport> reports, const std::string& path, ReportFormat format) {
    write_file_atomic(path, format == ReportFormat::csv ? format_csv(reports) : format_json(reports));
}

} // namespace mauc::experiment
