#include "phenoclust/synth.hpp"

#include "phenoclust/error.hpp"
#include "phenoclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phenoclust::synth {
namespace {

// Stream tags keep the counter draws of different purposes disjoint.
enum Stream : std::uint64_t { kRows = 1, kColumns, kCenters, kNoiseRate, kCell, kBernoulli, kMask };

std::size_t binary_count(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

} // namespace

Planted generate_planted(const PlantSpec& spec) {
    if (spec.m < 2 || spec.n_clusters < 2 || static_cast<std::size_t>(spec.n_clusters) > spec.m) {
        throw ConfigError("parameter", "planted data needs m >= n_clusters >= 2");
    }
    if (spec.n_informative < 1) throw ConfigError("parameter", "at least one informative feature is required");
    if (!(spec.separation >= 0.0) || !(spec.binary_fraction >= 0.0 && spec.binary_fraction <= 1.0) ||
        !(spec.missing_fraction >= 0.0 && spec.missing_fraction < 1.0)) {
        throw ConfigError("parameter", "invalid planted-data specification");
    }

    const std::size_t m = spec.m;
    const auto c_count = static_cast<std::size_t>(spec.n_clusters);
    const std::size_t n = spec.n_informative + spec.n_noise;
    const std::size_t inf_binary = binary_count(spec.n_informative, spec.binary_fraction);
    const std::size_t noise_binary = binary_count(spec.n_noise, spec.binary_fraction);

    Planted out;
    out.true_labels.assign(m, 0);
    const auto row_perm = rng::permutation(m, rng::hash(spec.seed, kRows));
    for (std::size_t i = 0; i < m; ++i) out.true_labels[row_perm[i]] = static_cast<int>(i % c_count);

    // Logical feature f (informative first) lands in column col_of[f].
    const auto col_of = rng::permutation(n, rng::hash(spec.seed, kColumns));
    const double spread = std::sqrt(1.0 + spec.separation * spec.separation *
                                              (static_cast<double>(c_count * c_count) - 1.0) / 12.0);

    Dataset& data = out.data;
    data.row_ids.resize(m);
    for (std::size_t i = 0; i < m; ++i) data.row_ids[i] = "r" + std::to_string(i + 1);
    data.columns.resize(n);
    data.levels.assign(n, {});
    data.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    data.missing = MaskMatrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), false);

    for (std::size_t f = 0; f < n; ++f) {
        const bool informative = f < spec.n_informative;
        const std::size_t local = informative ? f : f - spec.n_informative;
        const bool binary = informative ? local < inf_binary : local < noise_binary;
        const std::size_t col = col_of[f];
        const auto jj = static_cast<Eigen::Index>(col);

        auto& meta = data.columns[col];
        meta.name = "f" + std::to_string(col + 1);
        meta.origin = meta.name;
        meta.kind = binary ? ColumnKind::Binary : ColumnKind::Numeric;
        (informative ? out.informative : out.noise).push_back(col);

        const auto order = rng::permutation(c_count, rng::hash(spec.seed, kCenters, f));
        const double noise_rate = 0.1 + 0.8 * rng::uniform(spec.seed, kNoiseRate, f);
        for (std::size_t i = 0; i < m; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto cluster = static_cast<std::size_t>(out.true_labels[i]);
            const double level = static_cast<double>(order[cluster]);
            double value = 0.0;
            if (binary) {
                const double rate = informative
                                        ? 0.1 + 0.8 * level / static_cast<double>(c_count - 1)
                                        : noise_rate;
                value = rng::uniform(spec.seed, kBernoulli, i, f) < rate ? 1.0 : 0.0;
            } else {
                const double z = rng::gaussian(spec.seed, kCell, i, f);
                value = informative
                            ? spec.separation * (level - 0.5 * static_cast<double>(c_count - 1)) + z
                            : spread * z;
            }
            data.values(ii, jj) = value;
            if (spec.missing_fraction > 0.0 && rng::uniform(spec.seed, kMask, i, f) < spec.missing_fraction) {
                data.missing(ii, jj) = true;
                data.values(ii, jj) = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    std::sort(out.informative.begin(), out.informative.end());
    std::sort(out.noise.begin(), out.noise.end());

    if (spec.missing_fraction == 0.0) {
        const std::size_t before = data.cols();
        data = finalize(std::move(data));
        if (data.cols() != before) {
            throw DataError("insufficient-data", "planted column came out constant; increase m");
        }
    }
    return out;
}

} // namespace phenoclust::synth
