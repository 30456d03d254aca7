#include "phenoclust/dissimilarity.hpp"
#include "phenoclust/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace phenoclust;

TEST_CASE("gower_pair examples") {
    ColumnMeta num;
    num.kind = ColumnKind::Numeric;
    num.range = 10.0;
    ColumnMeta bin;
    bin.kind = ColumnKind::Binary;
    bin.range = 1.0;
    const std::vector<ColumnMeta> metas{num, bin};
    const std::vector<double> ones{1.0, 1.0};
    const std::vector<double> a{0.0, 1.0}, b{5.0, 0.0};
    CHECK(gower_pair(a, a, metas, ones) == 0.0);
    CHECK(gower_pair(a, b, metas, std::vector<double>{1.0, 3.0}) == doctest::Approx(0.875));

    const std::vector<ColumnMeta> single{num};
    CHECK(gower_pair(std::vector<double>{0.0}, std::vector<double>{10.0}, single, std::vector<double>{1.0}) == 1.0);

    ColumnMeta flat = num;
    flat.range = 0.0;
    CHECK_THROWS_AS(gower_pair(std::vector<double>{1.0}, std::vector<double>{1.0}, std::vector<ColumnMeta>{flat},
                               std::vector<double>{1.0}),
                    ConfigError);
}

TEST_CASE("gower_matrix examples") {
    const auto d = support::make_dataset({{0.0, 5.0, 10.0}}, {ColumnKind::Numeric});
    const std::vector<std::size_t> f{0};
    const auto g = gower_matrix(d, f, FeatureWeights::uniform(f));
    CHECK(g(0, 1) == doctest::Approx(0.5));
    CHECK(g(0, 2) == doctest::Approx(1.0));
    CHECK(g(1, 2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gower_matrix(d, std::vector<std::size_t>{}, FeatureWeights{}), ConfigError);

    auto twin = support::make_dataset({{1.0, 1.0, 3.0}}, {ColumnKind::Numeric});
    const auto t = gower_matrix(twin, f, FeatureWeights::uniform(f));
    CHECK(t(0, 1) == 0.0);
}

TEST_CASE("balanced_weights examples") {
    const auto numeric_only = support::random_mixed(20, 4, 0.0, 1);
    const std::vector<std::size_t> all{0, 1, 2, 3};
    for (double w : balanced_weights(numeric_only, all).weights) CHECK(w == 1.0);

    // three rows: numeric {0, 0.3, 1} has mean |diff|/range (0.3 + 1 + 0.7) / 3 = 2/3
    // binary {0, 1, 1} has mean mismatch 2/3 -> weight 1
    const auto even = support::make_dataset({{0.0, 0.3, 1.0}, {0.0, 1.0, 1.0}}, {ColumnKind::Numeric, ColumnKind::Binary});
    const std::vector<std::size_t> both{0, 1};
    CHECK(balanced_weights(even, both).weight_of(1) == doctest::Approx(1.0));

    // four rows: numeric {0, 0.1, 0.2, 1}: pairs 0.1 0.2 1 0.1 0.9 0.8 -> mean 3.1/6
    // binary {0, 0, 1, 1}: 4 mismatches of 6
    const auto ratio = support::make_dataset({{0.0, 0.1, 0.2, 1.0}, {0.0, 0.0, 1.0, 1.0}},
                                             {ColumnKind::Numeric, ColumnKind::Binary});
    CHECK(balanced_weights(ratio, both).weight_of(1) == doctest::Approx((3.1 / 6.0) / (4.0 / 6.0)));
    CHECK(balanced_weights(ratio, both).weight_of(0) == 1.0);

    auto constant_bin = support::make_dataset({{0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}}, {ColumnKind::Numeric, ColumnKind::Binary});
    CHECK(balanced_weights(constant_bin, both).weight_of(1) == 1.0);
}

TEST_CASE("balanced weights equalize the mean block contributions") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto d = support::random_mixed(40, 8, 0.5, seed, 5.0);
        std::vector<std::size_t> num, bin, all;
        for (std::size_t j = 0; j < d.cols(); ++j) {
            all.push_back(j);
            (d.columns[j].kind == ColumnKind::Binary ? bin : num).push_back(j);
        }
        if (num.empty() || bin.empty()) continue;
        const auto w = balanced_weights(d, all);
        double num_sum = 0.0, bin_sum = 0.0;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            for (std::size_t k = i + 1; k < d.rows(); ++k) {
                for (std::size_t f : num)
                    num_sum += std::abs(d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) -
                                        d.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f))) /
                               d.columns[f].range;
                for (std::size_t f : bin)
                    bin_sum += w.weight_of(f) *
                               (d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) !=
                                d.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)));
            }
        }
        CHECK(std::abs(num_sum / static_cast<double>(num.size()) - bin_sum / static_cast<double>(bin.size())) <=
              1e-9 * num_sum);
    }
}

TEST_CASE("gower matrices are symmetric, zero on the diagonal and bounded") {
    const auto d = support::random_mixed(1000, 6, 0.4, 17, 3.0);
    const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    const auto g = balanced_gower(d, all);
    bool ok = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        ok = ok && g(i, i) == 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) ok = ok && g(i, j) == g(j, i) && g(i, j) >= 0.0 && g(i, j) <= 1.0;
    }
    CHECK(ok);
}

TEST_CASE("feature order does not change the matrix") {
    const auto d = support::random_mixed(15, 5, 0.4, 23);
    const std::vector<std::size_t> fwd{0, 1, 2, 3, 4}, rev{4, 3, 2, 1, 0};
    CHECK(balanced_gower(d, fwd) == balanced_gower(d, rev));
}

TEST_CASE("from_rows validates") {
    CHECK_NOTHROW(DissimilarityMatrix::from_rows({{0, 0.5}, {0.5, 0}}));
    CHECK_THROWS_AS(DissimilarityMatrix::from_rows({{0, 0.5}, {0.4, 0}}), DataError);
    CHECK_THROWS_AS(DissimilarityMatrix::from_rows({{0.1, 0.5}, {0.5, 0}}), DataError);
    CHECK_THROWS_AS(DissimilarityMatrix::from_rows({{0, 1.5}, {1.5, 0}}), DataError);
}

TEST_CASE("subset and write_dense") {
    const auto m = DissimilarityMatrix::from_rows({{0, 0.25, 0.5}, {0.25, 0, 1}, {0.5, 1, 0}});
    const std::vector<std::size_t> rows{0, 2};
    const auto s = m.subset(rows);
    CHECK(s.size() == 2);
    CHECK(s(0, 1) == 0.5);
    std::ostringstream out;
    write_dense(out, s);
    CHECK(out.str() == "0 0.5\n0.5 0\n");
}
