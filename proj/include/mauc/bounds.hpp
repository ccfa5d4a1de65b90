#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

// Closed-form redundancy and memorization-gain bounds. Logarithms are base 2.
// All O(1/n) and O(1/(n sqrt m)) residual terms are dropped.
namespace mauc::bounds {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A parametric family: d free parameters and logC = log2 of the integral of
/// the square root of the Fisher information determinant.
struct FamilySpec {
    int k = 2;
    int order = 0;
    double d = 1.0;
    double log_c = 0.0;

    // d = k^order (k - 1), logC from the row-product Jeffreys integral.
    static FamilySpec markov(int k, int order);
    static FamilySpec custom(double d, double log_c, int k = 0, int order = 0);
};

struct BoundQuery {
    double n = 1.0;
    double m = kInfinity;        // total memory length, may be infinite
    double entropy_rate = 1.0;   // H_n / n in bits per symbol
    double eps = 0.05;
    double p_z = 1.0;            // probability of the active source
    double entropy_p = 0.0;      // H(p) in bits

    double entropy() const { return n * entropy_rate; }
    void validate() const;
};

// log2(pi^{k/2} / Gamma(k/2)) per multinomial row, times k^order rows.
double jeffreys_integral_log(int k, int order);

double avg_minimax_redundancy(const FamilySpec& family, double n);

// Lower bound on P[R_n >= (1 - delta)(d/2) log n], clamped to [0, 1].
double redundancy_tail_bound(const FamilySpec& family, double n, double delta);

// Exponent delta* at which the tail bound equals 1 - eps, found by bisection.
double solve_tail_exponent(const FamilySpec& family, double n, double eps);
// The same exponent from the algebraic inversion of the tail formula.
double tail_exponent_closed_form(const FamilySpec& family, double n, double eps);

// E l / H for at least a (1 - eps) fraction of sources.
double overhead_ratio(const FamilySpec& family, double n, double entropy_rate, double eps);

// (d/2) log(1 + n/m) + 2
double residual_redundancy_single(double n, double m, double d);
// (d/2) log(1 + n/(p_z m)) + 3 + H(p)
double residual_redundancy_clustered(double n, double m, double d, double p_z, double entropy_p);

// 1 + (Rbar_n + log eps - R1) / (H_n + R1)
double memorization_gain_lower_bound(const BoundQuery& query, const FamilySpec& family);
// Same shape with the clustered residual term.
double clustered_gain_lower_bound(const BoundQuery& query, const FamilySpec& family);

struct MixedMemoryBound {
    double gain;        // (H_n + Rbar_n) / (H_n + n * kl_rate)
    double crossover;   // the bound is below 1 for every n above this point
};
MixedMemoryBound mixed_memory_gain_upper_bound(double n, const FamilySpec& family, double entropy_rate,
                                               double kl_rate);

double entropy_of_p(std::span<const double> p);

struct ConvergenceRow {
    double n;
    double m;
    double gain;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    // |gain - 1| strictly shrinking along n among rows with n > m.
    bool converges_in_n = false;
    // gain nondecreasing in m at each fixed n.
    bool nondecreasing_in_m = false;
};

// Evaluates the single-source lower bound on the (n, m) grid.
ConvergenceTable large_n_convergence_table(const FamilySpec& family, std::span<const double> n_grid,
                                           std::span<const double> m_grid, double entropy_rate, double eps);

} // namespace mauc::bounds
