#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mauc/source_model.hpp"

namespace mauc::experiment {

enum class Scheme { ucomp = 0, ucompm = 1, ucompcm = 2, ucompmdl = 3 };
inline constexpr std::size_t kNumSchemes = 4;

Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme s);

enum class QuantileMode { pooled, per_source };

struct ExperimentConfig {
    int k = 4;
    int order = 1;
    int K = 1;
    std::vector<double> p;             // empty means uniform over K
    std::size_t n = 1024;
    std::size_t T = 16;                // number of memory sequences
    LengthLaw law = LengthLaw::fixed(1024);
    int depth = -1;                    // CTW depth; -1 means max(order, 3)
    double eps = 0.05;
    int trials = 20;
    std::uint64_t base_seed = 1;
    std::vector<Scheme> schemes{Scheme::ucomp, Scheme::ucompm, Scheme::ucompcm, Scheme::ucompmdl};
    QuantileMode quantile = QuantileMode::pooled;
    bool payload_lengths = false;      // use coded payload bits instead of ideal codelengths
    double min_kl_rate = 0.0;          // resample model sets below this pairwise divergence rate
    int max_iters = 50;                // MDL refine passes
    std::size_t kl_blocks = 8;         // Monte Carlo blocks for the mixed-memory bound
    std::size_t kl_block_length = 4096;

    int effective_depth() const { return depth >= 0 ? depth : std::max(order, 3); }
    std::vector<double> effective_p() const;
    bool runs(Scheme s) const;
    void validate() const;
};

struct TrialResult {
    int z = 0;                          // 1-based index of the active source
    double p_z = 1.0;
    double entropy_rate = 0.0;          // of the active source, bits/symbol
    double memory_length = 0.0;         // total memorized symbols
    std::array<std::optional<double>, kNumSchemes> lengths;   // bits
    std::optional<double> kl_rate;      // active source against the mixed memory measure
    std::optional<double> cluster_accuracy;
    std::optional<bool> classified_correctly;
    int model_draws = 1;                // model sets drawn before passing the separation guard

    // Q = length(ucomp) / length(scheme)
    std::optional<double> ratio(Scheme s) const;
};

struct GainReport {
    ExperimentConfig config;
    std::array<double, kNumSchemes> mean_length{};   // NaN when the scheme did not run
    double g_M = 0.0, g_CM = 0.0, g_MDL = 0.0;       // NaN when not run
    double g_ratio_mdl_cm = 0.0;
    double m_total = 0.0;                            // mean total memory length
    double mean_entropy_rate = 0.0;
    double mean_kl_rate = 0.0;
    double mean_p_z = 1.0;
    double bound_gain_lb_k1 = 0.0;
    double bound_gain_lb_cm = 0.0;
    double bound_ucompm_ub = 0.0;
    double cluster_accuracy = 0.0;                   // NaN when MDL did not run
    double classification_accuracy = 0.0;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<TrialResult> trials;
};

// Deterministic given (config, trial_seed).
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_seed);

// Largest sample z such that at least ceil((1 - eps) N) samples are >= z.
double gain_quantile(std::span<const double> samples, double eps);

// Runs the trials on `workers` threads and aggregates them in trial order.
GainReport run_experiment(const ExperimentConfig& config, int workers = 1);

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial);

// ---- reports ----

// One CSV row; columns in the documented order.
struct ReportRow {
    int k = 0, order = 0, K = 0;
    std::uint64_t n = 0;
    double m_total = 0.0;
    std::uint64_t T = 0;
    int depth = 0;
    double eps = 0.0;
    int trials = 0;
    double mean_len_ucomp = 0.0, mean_len_ucompm = 0.0, mean_len_ucompcm = 0.0, mean_len_ucompmdl = 0.0;
    double g_M = 0.0, g_CM = 0.0, g_MDL = 0.0, g_ratio_mdl_cm = 0.0;
    double bound_gain_lb_k1 = 0.0, bound_gain_lb_cm = 0.0, bound_ucompm_ub = 0.0;
    double cluster_accuracy = 0.0;
    std::uint64_t base_seed = 0;
};

ReportRow to_row(const GainReport& report);

enum class ReportFormat { csv, json };
ReportFormat parse_format(std::string_view name);

std::string csv_header();
// Header plus one row per report with a nonempty scheme list.
std::string format_csv(std::span<const GainReport> reports);
std::string format_csv_rows(std::span<const ReportRow> rows);
std::vector<ReportRow> parse_csv(std::string_view text);
std::string format_json(std::span<const GainReport> reports);

// Writes atomically (temporary file, then rename).
void emit_report(std::span<const GainReport> reports, const std::string& path, ReportFormat format);

// Shortest decimal with 17 significant digits, locale independent; nan/inf spelled out.
std::string format_number(double v);

} // namespace mauc::experiment
