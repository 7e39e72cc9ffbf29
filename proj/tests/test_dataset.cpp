#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "featlearn/dataset.hpp"
#include "oracles.hpp"

using namespace featlearn;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "featlearn_tests";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

RawTable table_from(const Eigen::MatrixXd& values) {
    RawTable t;
    t.n_rows = values.rows();
    t.n_cols = values.cols();
    t.values = values;
    return t;
}

} // namespace

TEST_CASE("load_table parses a small comma table") {
    const std::string path = write_temp("small.csv", "1,2\n3,4\n5,6\n");
    const RawTable t = load_table(path, ',');
    CHECK(t.n_rows == 3);
    CHECK(t.n_cols == 2);
    CHECK(t.values(2, 1) == 6.0);
}

TEST_CASE("load_table handles CRLF and no trailing newline") {
    const std::string path = write_temp("crlf.csv", "1,2\r\n3,4");
    const RawTable t = load_table(path, ',');
    CHECK(t.n_rows == 2);
    CHECK(t.values(1, 0) == 3.0);
}

TEST_CASE("load_table reports ragged rows with the row index") {
    const std::string path = write_temp("ragged.csv", "1,2\n3\n");
    try {
        load_table(path, ',');
        FAIL("expected RaggedRow");
    } catch (const Error& e) {
        CHECK(e.code() == errc::ragged_row);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("load_table reports unparseable cells with row and column") {
    const std::string path = write_temp("badcell.csv", "1,2\n3,x\n");
    try {
        load_table(path, ',');
        FAIL("expected BadCell");
    } catch (const Error& e) {
        CHECK(e.code() == errc::bad_cell);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
}

TEST_CASE("load_table on a missing file") {
    CHECK_THROWS_AS(load_table("/nonexistent/nope.csv", ','), Error);
}

TEST_CASE("classify_columns follows the definitions") {
    Eigen::MatrixXd v(4, 4);
    // col0 all zero, col1 binary, col2 continuous, col3 target
    v << 0, 0, 1.5, 7,
         0, 1, 2.5, 8,
         0, 1, 3.5, 9,
         0, 0, 4.5, 10;
    const auto kinds = classify_columns(table_from(v), 3);
    REQUIRE(kinds.size() == 3);
    CHECK(kinds[0] == ColumnKind::AllZero);
    CHECK(kinds[1] == ColumnKind::Binary);
    CHECK(kinds[2] == ColumnKind::Continuous);
}

TEST_CASE("columns with values outside {0,1} are continuous") {
    Eigen::MatrixXd v(3, 2);
    v << 0, 1,
         5, 2,
         0, 3;
    const auto kinds = classify_columns(table_from(v), 1);
    CHECK(kinds[0] == ColumnKind::Continuous);
}

TEST_CASE("classification is a partition") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_below(rng, 20));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(uniform_below(rng, 10));
        Eigen::MatrixXd v(n, p);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j) {
                const auto pick = uniform_below(rng, 4);
                v(i, j) = pick == 0 ? 0.0 : pick == 1 ? 1.0 : uniform_real(rng, -2.0, 2.0);
            }
        const auto kinds = classify_columns(table_from(v), p - 1);
        REQUIRE(kinds.size() == static_cast<std::size_t>(p - 1));
        for (Eigen::Index j = 0; j + 1 < p; ++j) {
            // recompute by definition
            bool all_zero = true;
            bool binary = true;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (v(i, j) != 0.0) all_zero = false;
                if (v(i, j) != 0.0 && v(i, j) != 1.0) binary = false;
            }
            const ColumnKind expected = all_zero  ? ColumnKind::AllZero
                                        : binary ? ColumnKind::Binary
                                                 : ColumnKind::Continuous;
            CHECK(kinds[static_cast<std::size_t>(j)] == expected);
        }
    }
}

TEST_CASE("fit_preprocess standardizes continuous columns with sample sd") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 10,
         2, 20,
         3, 30;
    const auto [ds, params] = fit_preprocess(table_from(v), 1);
    REQUIRE(ds.cols() == 1);
    CHECK(ds.X(0, 0) == doctest::Approx(-1.0));
    CHECK(ds.X(1, 0) == doctest::Approx(0.0));
    CHECK(ds.X(2, 0) == doctest::Approx(1.0));
    CHECK(params.means[0] == doctest::Approx(2.0));
    CHECK(params.sds[0] == doctest::Approx(1.0));
    // target standardized too
    CHECK(params.target_mean == doctest::Approx(20.0));
    CHECK(params.target_sd == doctest::Approx(10.0));
    CHECK(ds.y(0) == doctest::Approx(-1.0));
}

TEST_CASE("fit_preprocess passes binary columns through and drops zero columns") {
    Eigen::MatrixXd v(3, 4);
    v << 0, 0, 1.0, 4,
         1, 0, 2.0, 5,
         0, 0, 3.0, 6;
    const auto [ds, params] = fit_preprocess(table_from(v), 3);
    REQUIRE(ds.cols() == 2);
    CHECK(params.dropped_indices == std::vector<Eigen::Index>{1});
    CHECK(ds.X(0, 0) == 0.0);
    CHECK(ds.X(1, 0) == 1.0);
    CHECK(ds.X(2, 0) == 0.0);
    CHECK(ds.kinds[0] == ColumnKind::Binary);
    CHECK(ds.kinds[1] == ColumnKind::Continuous);
}

TEST_CASE("fit_preprocess rejects constant continuous columns") {
    Eigen::MatrixXd v(3, 2);
    v << 7, 1,
         7, 2,
         7, 3;
    CHECK_THROWS_AS((void)fit_preprocess(table_from(v), 1), Error);
}

TEST_CASE("scaled continuous columns have mean 0 and sample sd 1") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 5 + static_cast<Eigen::Index>(uniform_below(rng, 40));
        Eigen::MatrixXd v = oracles::random_matrix(n, 5, rng, -3.0, 9.0);
        const auto [ds, params] = fit_preprocess(table_from(v), 4);
        for (Eigen::Index j = 0; j < ds.cols(); ++j) {
            if (ds.kinds[static_cast<std::size_t>(j)] != ColumnKind::Continuous) continue;
            const double mean = ds.X.col(j).mean();
            const double sd = std::sqrt((ds.X.col(j).array() - mean).square().sum() /
                                        static_cast<double>(n - 1));
            CHECK(std::abs(mean) < 1e-10);
            CHECK(std::abs(sd - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("apply_preprocess uses stored statistics") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 10,
         2, 20,
         3, 30;
    const auto [ds, params] = fit_preprocess(table_from(v), 1);
    Eigen::MatrixXd w(1, 2);
    w << 4, 20;
    const Dataset applied = apply_preprocess(table_from(w), 1, params);
    CHECK(applied.X(0, 0) == doctest::Approx(2.0)); // (4-2)/1
}

TEST_CASE("apply_preprocess reproduces the fit output exactly") {
    Rng rng(13);
    Eigen::MatrixXd v = oracles::random_matrix(20, 6, rng, -2.0, 5.0);
    const auto [ds, params] = fit_preprocess(table_from(v), 5);
    const Dataset applied = apply_preprocess(table_from(v), 5, params);
    CHECK((applied.X - ds.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((applied.y - ds.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_preprocess rejects a different schema") {
    Eigen::MatrixXd v(3, 3);
    v << 1, 4, 10,
         2, 5, 20,
         3, 6, 30;
    const auto [ds, params] = fit_preprocess(table_from(v), 2);
    Eigen::MatrixXd w(2, 2);
    w << 1, 10,
         2, 20;
    CHECK_THROWS_AS((void)apply_preprocess(table_from(w), 1, params), Error);
}

TEST_CASE("split allocates floor sizes with the remainder to train") {
    Dataset ds;
    ds.X = Eigen::MatrixXd::Zero(10, 2);
    ds.y = Eigen::VectorXd::LinSpaced(10, 0, 9);
    ds.kinds = {ColumnKind::Continuous, ColumnKind::Continuous};
    const auto [train, val, test] = split(ds, SplitRatios{0.6, 0.2, 0.2}, 42);
    CHECK(train.rows() == 6);
    CHECK(val.rows() == 2);
    CHECK(test.rows() == 2);
}

TEST_CASE("split is deterministic and a disjoint cover") {
    const SplitRatios ratios{0.5, 0.25, 0.25};
    for (const std::size_t n : {7UL, 23UL, 100UL}) {
        const SplitIndices a = split_indices(n, ratios, 99);
        const SplitIndices b = split_indices(n, ratios, 99);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);
        CHECK(a.test == b.test);

        std::set<std::size_t> seen;
        for (const auto* part : {&a.train, &a.val, &a.test})
            for (const std::size_t i : *part) CHECK(seen.insert(i).second);
        CHECK(seen.size() == n);
        CHECK(*seen.rbegin() == n - 1);
    }
}

TEST_CASE("split rejects bad ratios") {
    CHECK_THROWS_AS(split_indices(10, SplitRatios{0.5, 0.5, 0.5}, 1), Error);
    CHECK_THROWS_AS(split_indices(10, SplitRatios{-0.2, 0.6, 0.6}, 1), Error);
}

TEST_CASE("histogram splits point masses into the right bins") {
    const Histogram h = histogram({0, 0, 1, 1}, 2);
    REQUIRE(h.counts.size() == 2);
    CHECK(h.counts[0] == 2);
    CHECK(h.counts[1] == 2);
}

TEST_CASE("histogram of a single repeated value puts all mass in one bin") {
    const Histogram h = histogram({3.5, 3.5, 3.5}, 4);
    std::int64_t total = 0;
    int nonzero = 0;
    for (const auto c : h.counts) {
        total += c;
        if (c > 0) ++nonzero;
    }
    CHECK(total == 3);
    CHECK(nonzero == 1);
}

TEST_CASE("histogram counts always sum to the input length") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + uniform_below(rng, 200);
        std::vector<double> values(n);
        for (auto& v : values) v = uniform_real(rng, -5.0, 5.0);
        const int bins = 1 + static_cast<int>(uniform_below(rng, 30));
        const Histogram h = histogram(values, bins);

        std::int64_t total = 0;
        for (const auto c : h.counts) {
            CHECK(c >= 0);
            total += c;
        }
        CHECK(total == static_cast<std::int64_t>(n));
        for (std::size_t e = 0; e + 1 < h.bin_edges.size(); ++e)
            CHECK(h.bin_edges[e] < h.bin_edges[e + 1]);

        // direct counting oracle per bin
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            std::int64_t direct = 0;
            for (const double v : values) {
                const bool last = b + 1 == h.counts.size();
                if (v >= h.bin_edges[b] && (v < h.bin_edges[b + 1] || (last && v <= h.bin_edges[b + 1])))
                    ++direct;
            }
            CHECK(h.counts[b] == direct);
        }
    }
}

TEST_CASE("histogram rejects empty input") {
    CHECK_THROWS_AS(histogram({}, 3), Error);
}
