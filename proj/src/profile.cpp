#include "phenoclust/profile.hpp"

#include "phenoclust/csv.hpp"
#include "phenoclust/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

namespace phenoclust {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

stats::StatResult undefined_test(stats::Method method, std::string reason) {
    stats::StatResult r;
    r.method = method;
    r.statistic = kNaN;
    r.df = kNaN;
    r.p_value = kNaN;
    r.warnings.push_back(std::move(reason));
    return r;
}

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

} // namespace

ClusterProfile profile_clusters(const Dataset& data, std::span<const int> labels, std::span<const std::size_t> features,
                                double alpha) {
    if (labels.size() != data.rows()) throw ConfigError("parameter", "labels must cover every row");
    ClusterProfile profile;
    profile.alpha = alpha;
    std::map<int, std::size_t> index;
    for (int label : labels) index.emplace(label, 0);
    if (index.size() < 2) throw ConfigError("parameter", "profiling needs at least two clusters");
    for (auto& [label, idx] : index) {
        idx = profile.clusters.size();
        profile.clusters.push_back(label);
    }
    const std::size_t g = profile.clusters.size();
    profile.sizes.assign(g, 0);
    for (int label : labels) ++profile.sizes[index.at(label)];

    for (std::size_t f : features) {
        if (f >= data.cols()) throw ConfigError("parameter", "feature index out of range");
        const auto& meta = data.columns[f];
        if (meta.kind == ColumnKind::Categorical) {
            throw DataError("type", "column '" + meta.name + "' must be dummy coded before profiling");
        }
        const auto col = static_cast<Eigen::Index>(f);
        std::vector<std::vector<double>> groups(g);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (!data.missing(ii, col)) groups[index.at(labels[i])].push_back(data.values(ii, col));
        }

        FeatureProfile fp;
        fp.name = meta.name;
        fp.kind = meta.kind;
        if (meta.kind == ColumnKind::Numeric) {
            for (const auto& grp : groups) {
                NumericSummary s;
                s.n = grp.size();
                if (!grp.empty()) {
                    s.median = stats::quantile(grp, 0.5);
                    s.q1 = stats::quantile(grp, 0.25);
                    s.q3 = stats::quantile(grp, 0.75);
                    s.iqr = s.q3 - s.q1;
                } else {
                    s.median = s.q1 = s.q3 = s.iqr = kNaN;
                }
                fp.numeric.push_back(s);
            }
            std::vector<std::vector<double>> present;
            std::vector<std::size_t> present_idx;
            std::size_t total = 0;
            for (std::size_t c = 0; c < g; ++c) {
                if (groups[c].empty()) continue;
                present.push_back(groups[c]);
                present_idx.push_back(c);
                total += groups[c].size();
            }
            if (present.size() < 2 || total < 3) {
                fp.test = undefined_test(stats::Method::KruskalWallis, "fewer than two nonempty groups");
            } else {
                fp.test = stats::kruskal_wallis(present);
                if (fp.test.p_value < alpha) {
                    std::vector<double> raw;
                    for (std::size_t a = 0; a < present.size(); ++a) {
                        for (std::size_t b = a + 1; b < present.size(); ++b) {
                            const auto r = stats::mann_whitney_u(present[a], present[b]);
                            fp.posthoc.push_back({profile.clusters[present_idx[a]], profile.clusters[present_idx[b]],
                                                  r.p_value, r.p_value});
                            raw.push_back(r.p_value);
                        }
                    }
                    const auto adjusted = stats::holm_adjust(raw);
                    for (std::size_t i = 0; i < adjusted.size(); ++i) fp.posthoc[i].adjusted_p = adjusted[i];
                }
            }
        } else {
            std::vector<std::vector<std::int64_t>> table;
            for (const auto& grp : groups) {
                BinarySummary s;
                s.n = grp.size();
                for (double v : grp) s.count += v == 1.0 ? 1 : 0;
                s.percent = grp.empty() ? kNaN : 100.0 * static_cast<double>(s.count) / static_cast<double>(s.n);
                fp.binary.push_back(s);
                if (!grp.empty()) table.push_back({static_cast<std::int64_t>(s.n) - s.count, s.count});
            }
            try {
                fp.test = stats::pearson_chi_squared(table);
            } catch (const ConfigError& e) {
                fp.test = undefined_test(stats::Method::ChiSquared, e.what());
            }
        }
        profile.features.push_back(std::move(fp));
    }
    return profile;
}

void write_profile_csv(std::ostream& out, const ClusterProfile& profile) {
    csv::Record header{"feature", "kind"};
    for (std::size_t c = 0; c < profile.clusters.size(); ++c) {
        const std::string name = "cluster_" + std::to_string(profile.clusters[c]);
        header.push_back(name + "_median_or_percent");
        header.push_back(name + "_iqr_or_count");
    }
    for (const char* h : {"test", "statistic", "df", "p_value", "posthoc_holm"}) header.emplace_back(h);
    csv::write_record(out, header);

    csv::Record sizes{"n", "size"};
    for (std::size_t c = 0; c < profile.clusters.size(); ++c) {
        sizes.push_back(std::to_string(profile.sizes[c]));
        sizes.emplace_back();
    }
    for (int i = 0; i < 5; ++i) sizes.emplace_back();
    csv::write_record(out, sizes);

    for (const auto& fp : profile.features) {
        csv::Record row{fp.name, to_string(fp.kind)};
        for (std::size_t c = 0; c < profile.clusters.size(); ++c) {
            if (fp.kind == ColumnKind::Numeric) {
                row.push_back(format_real(fp.numeric[c].median));
                row.push_back(format_real(fp.numeric[c].iqr));
            } else {
                row.push_back(format_percent(fp.binary[c].percent));
                row.push_back(std::to_string(fp.binary[c].count));
            }
        }
        row.emplace_back(stats::to_string(fp.test.method));
        row.push_back(format_real(fp.test.statistic));
        row.push_back(format_real(fp.test.df));
        row.push_back(format_real(fp.test.p_value));
        std::string posthoc;
        for (const auto& pc : fp.posthoc) {
            if (!posthoc.empty()) posthoc += ';';
            posthoc += std::to_string(pc.cluster_a) + "-" + std::to_string(pc.cluster_b) + ":" + format_real(pc.adjusted_p);
        }
        row.push_back(posthoc);
        csv::write_record(out, row);
    }
}

} // namespace phenoclust
