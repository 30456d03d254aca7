#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phenoclust::stats {

enum class Method { KruskalWallis, ChiSquared, MannWhitney };

const char* to_string(Method method) noexcept;

struct StatResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    Method method = Method::KruskalWallis;
    std::vector<std::string> warnings;
};

/// Mid-ranks (1-based) of `values`, ties sharing their average rank.
std::vector<double> mid_ranks(std::span<const double> values);

/// Kruskal-Wallis H with tie correction; p from the chi-squared tail with
/// g - 1 degrees of freedom. All-tied data gives H = 0, p = 1.
StatResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Upper tail of the chi-squared distribution, Q(df/2, x/2).
double chi_squared_sf(double x, double df);

/// Pearson X^2 without continuity correction; df = (r - 1)(c - 1).
/// Expected counts below 5 add a warning.
StatResult pearson_chi_squared(const std::vector<std::vector<std::int64_t>>& table);

/// Two-sided Mann-Whitney U via normal approximation with tie-corrected
/// variance and continuity correction. `statistic` is U for sample `a`.
StatResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

/// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

} // namespace phenoclust::stats
