#include "phenoclust/stats.hpp"

#include "phenoclust/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phenoclust::stats {
namespace {

/// Sum over tie groups of t^3 - t.
double tie_term(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        const double t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

double normal_two_sided(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }

} // namespace

const char* to_string(Method method) noexcept {
    switch (method) {
    case Method::KruskalWallis: return "kruskal-wallis";
    case Method::ChiSquared: return "chi-squared";
    case Method::MannWhitney: return "mann-whitney";
    }
    return "unknown";
}

std::vector<double> mid_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

StatResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw ConfigError("parameter", "Kruskal-Wallis needs at least two groups");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.empty()) throw ConfigError("parameter", "Kruskal-Wallis groups must be nonempty");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const double n = static_cast<double>(pooled.size());
    if (pooled.size() < 3) throw ConfigError("parameter", "Kruskal-Wallis needs at least three observations");

    StatResult out;
    out.method = Method::KruskalWallis;
    out.df = static_cast<double>(groups.size() - 1);

    const double ties = tie_term(pooled);
    const double correction = 1.0 - ties / (n * n * n - n);
    if (correction <= 0.0) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        return out;
    }

    const auto ranks = mid_ranks(pooled);
    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
        offset += g.size();
        h += rank_sum * rank_sum / static_cast<double>(g.size());
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    out.statistic = std::max(0.0, h / correction);
    out.p_value = chi_squared_sf(out.statistic, out.df);
    return out;
}

double chi_squared_sf(double x, double df) {
    if (!(df > 0.0)) throw ConfigError("parameter", "chi-squared df must be positive");
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

StatResult pearson_chi_squared(const std::vector<std::vector<std::int64_t>>& table) {
    const std::size_t r = table.size();
    if (r < 2) throw ConfigError("parameter", "contingency table needs at least two rows");
    const std::size_t c = table.front().size();
    if (c < 2) throw ConfigError("parameter", "contingency table needs at least two columns");

    std::vector<double> row_total(r, 0.0);
    std::vector<double> col_total(c, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        if (table[i].size() != c) throw ConfigError("parameter", "contingency table rows must have equal length");
        for (std::size_t j = 0; j < c; ++j) {
            if (table[i][j] < 0) throw ConfigError("parameter", "contingency counts must be nonnegative");
            const auto v = static_cast<double>(table[i][j]);
            row_total[i] += v;
            col_total[j] += v;
            grand += v;
        }
    }
    for (double t : row_total) {
        if (t <= 0.0) throw ConfigError("parameter", "contingency table has a zero row margin");
    }
    for (double t : col_total) {
        if (t <= 0.0) throw ConfigError("parameter", "contingency table has a zero column margin");
    }

    StatResult out;
    out.method = Method::ChiSquared;
    out.df = static_cast<double>((r - 1) * (c - 1));
    bool small = false;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double expected = row_total[i] * col_total[j] / grand;
            const double diff = static_cast<double>(table[i][j]) - expected;
            out.statistic += diff * diff / expected;
            small = small || expected < 5.0;
        }
    }
    if (small) out.warnings.emplace_back("expected count below 5");
    out.p_value = chi_squared_sf(out.statistic, out.df);
    return out;
}

StatResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ConfigError("parameter", "Mann-Whitney samples must be nonempty");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = mid_ranks(pooled);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];

    StatResult out;
    out.method = Method::MannWhitney;
    out.df = 0.0;
    out.statistic = rank_sum_a - na * (na + 1.0) / 2.0;

    const double mean = na * nb / 2.0;
    const double ties = tie_term(pooled);
    const double variance = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if (!(variance > 0.0)) {
        out.p_value = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::abs(out.statistic - mean) - 0.5) / std::sqrt(variance);
    out.p_value = normal_two_sided(z);
    return out;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("parameter", "p-values must lie in [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return p_values[x] < p_values[y]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double scaled = std::min(1.0, static_cast<double>(m - rank) * p_values[order[rank]]);
        running = std::max(running, scaled);
        adjusted[order[rank]] = running;
    }
    return adjusted;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("parameter", "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("parameter", "quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

} // namespace phenoclust::stats
