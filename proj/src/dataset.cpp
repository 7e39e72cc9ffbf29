#include "featlearn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <tuple>

#include "featlearn/rng.hpp"

namespace featlearn {

const char* column_kind_name(ColumnKind k) {
    switch (k) {
    case ColumnKind::AllZero: return "all_zero";
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Continuous: return "continuous";
    }
    return "unknown";
}

namespace {

double parse_cell(const std::string& token, std::size_t row, std::size_t col) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    // from_chars does not accept a leading '+'
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw Error(errc::bad_cell, "unparseable cell at row " + std::to_string(row) +
                                        ", column " + std::to_string(col) + ": '" + token + "'");
    }
    if (!std::isfinite(value)) {
        throw Error(errc::non_finite, "non-finite value at row " + std::to_string(row) +
                                          ", column " + std::to_string(col));
    }
    return value;
}

} // namespace

RawTable load_table(const std::string& path, char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(errc::missing_file, "cannot open '" + path + "'");
    }

    std::vector<std::vector<double>> rows;
    std::size_t n_cols = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;

        std::vector<double> row;
        std::size_t start = 0;
        std::size_t col = 0;
        while (true) {
            const std::size_t end = line.find(delimiter, start);
            const std::string token =
                line.substr(start, end == std::string::npos ? std::string::npos : end - start);
            ++col;
            row.push_back(parse_cell(token, line_no, col));
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (n_cols == 0) {
            n_cols = row.size();
        } else if (row.size() != n_cols) {
            throw Error(errc::ragged_row, "row " + std::to_string(line_no) + " has " +
                                              std::to_string(row.size()) + " cells, expected " +
                                              std::to_string(n_cols));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(errc::empty_input, "'" + path + "' contains no data rows");
    }

    RawTable table;
    table.n_rows = static_cast<Eigen::Index>(rows.size());
    table.n_cols = static_cast<Eigen::Index>(n_cols);
    table.values.resize(table.n_rows, table.n_cols);
    for (Eigen::Index i = 0; i < table.n_rows; ++i)
        for (Eigen::Index j = 0; j < table.n_cols; ++j)
            table.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return table;
}

std::vector<ColumnKind> classify_columns(const RawTable& raw, Eigen::Index target_col) {
    if (target_col < 0 || target_col >= raw.n_cols) {
        throw Error(errc::bad_config, "target column " + std::to_string(target_col) +
                                          " out of range for " + std::to_string(raw.n_cols) +
                                          " columns");
    }
    std::vector<ColumnKind> kinds;
    kinds.reserve(static_cast<std::size_t>(raw.n_cols) - 1);
    for (Eigen::Index j = 0; j < raw.n_cols; ++j) {
        if (j == target_col) continue;
        bool all_zero = true;
        bool binary = true;
        for (Eigen::Index i = 0; i < raw.n_rows; ++i) {
            const double v = raw.values(i, j);
            if (v != 0.0) all_zero = false;
            if (v != 0.0 && v != 1.0) binary = false;
        }
        if (all_zero)
            kinds.push_back(ColumnKind::AllZero);
        else if (binary)
            kinds.push_back(ColumnKind::Binary);
        else
            kinds.push_back(ColumnKind::Continuous);
    }
    return kinds;
}

namespace {

struct ColumnStats {
    double mean;
    double sd; // sample sd, divisor n-1
};

ColumnStats column_stats(const Eigen::VectorXd& col) {
    const double mean = col.mean();
    const double ss = (col.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(col.size() - 1));
    return {mean, sd};
}

} // namespace

std::pair<Dataset, ScalerParams> fit_preprocess(const RawTable& raw, Eigen::Index target_col) {
    if (raw.n_rows < 2) {
        throw Error(errc::empty_input, "need at least 2 rows to fit the scaler");
    }
    const std::vector<ColumnKind> all_kinds = classify_columns(raw, target_col);

    ScalerParams params;
    std::vector<Eigen::Index> retained;
    std::size_t kind_idx = 0;
    for (Eigen::Index j = 0; j < raw.n_cols; ++j) {
        if (j == target_col) continue;
        const ColumnKind kind = all_kinds[kind_idx++];
        if (kind == ColumnKind::AllZero) {
            params.dropped_indices.push_back(j);
        } else {
            retained.push_back(j);
            params.kinds.push_back(kind);
        }
    }

    Dataset ds;
    ds.kinds = params.kinds;
    ds.X.resize(raw.n_rows, static_cast<Eigen::Index>(retained.size()));
    for (std::size_t c = 0; c < retained.size(); ++c) {
        const Eigen::VectorXd col = raw.values.col(retained[c]);
        if (params.kinds[c] == ColumnKind::Continuous) {
            const ColumnStats st = column_stats(col);
            if (!(st.sd > 0.0)) {
                throw Error(errc::zero_variance,
                            "continuous column " + std::to_string(retained[c]) + " is constant");
            }
            params.means.push_back(st.mean);
            params.sds.push_back(st.sd);
            ds.X.col(static_cast<Eigen::Index>(c)) = (col.array() - st.mean) / st.sd;
        } else {
            ds.X.col(static_cast<Eigen::Index>(c)) = col;
        }
    }

    const Eigen::VectorXd target = raw.values.col(target_col);
    const ColumnStats ts = column_stats(target);
    if (!(ts.sd > 0.0)) {
        throw Error(errc::zero_variance, "target column is constant");
    }
    params.target_mean = ts.mean;
    params.target_sd = ts.sd;
    ds.y = (target.array() - ts.mean) / ts.sd;

    return {std::move(ds), std::move(params)};
}

Dataset apply_preprocess(const RawTable& raw, Eigen::Index target_col, const ScalerParams& params) {
    const Eigen::Index expected =
        static_cast<Eigen::Index>(params.kinds.size() + params.dropped_indices.size()) + 1;
    if (raw.n_cols != expected) {
        throw Error(errc::schema_mismatch, "table has " + std::to_string(raw.n_cols) +
                                               " columns, scaler was fitted on " +
                                               std::to_string(expected));
    }
    if (target_col < 0 || target_col >= raw.n_cols) {
        throw Error(errc::bad_config, "target column out of range");
    }

    Dataset ds;
    ds.kinds = params.kinds;
    ds.X.resize(raw.n_rows, static_cast<Eigen::Index>(params.kinds.size()));

    std::size_t drop_idx = 0;
    std::size_t out_col = 0;
    std::size_t cont_idx = 0;
    for (Eigen::Index j = 0; j < raw.n_cols; ++j) {
        if (j == target_col) continue;
        if (drop_idx < params.dropped_indices.size() && params.dropped_indices[drop_idx] == j) {
            ++drop_idx;
            continue;
        }
        const Eigen::VectorXd col = raw.values.col(j);
        if (params.kinds[out_col] == ColumnKind::Continuous) {
            ds.X.col(static_cast<Eigen::Index>(out_col)) =
                (col.array() - params.means[cont_idx]) / params.sds[cont_idx];
            ++cont_idx;
        } else {
            ds.X.col(static_cast<Eigen::Index>(out_col)) = col;
        }
        ++out_col;
    }

    ds.y = (raw.values.col(target_col).array() - params.target_mean) / params.target_sd;
    return ds;
}

SplitIndices split_indices(std::size_t n_rows, const SplitRatios& ratios, std::uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0) ||
        std::abs(sum - 1.0) > 1e-9) {
        throw Error(errc::bad_ratios, "split ratios must be positive and sum to 1");
    }
    Rng rng(seed);
    const std::vector<std::size_t> perm = random_permutation(n_rows, rng);

    const auto n = static_cast<double>(n_rows);
    const std::size_t n_val = static_cast<std::size_t>(std::floor(ratios.val * n));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(ratios.test * n));
    const std::size_t n_train = n_rows - n_val - n_test; // floor(train*n) + remainder

    SplitIndices idx;
    idx.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    idx.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                   perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    idx.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return idx;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.kinds = ds.kinds;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(static_cast<Eigen::Index>(rows[i]));
        out.y(static_cast<Eigen::Index>(i)) = ds.y(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::tuple<Dataset, Dataset, Dataset> split(const Dataset& ds, const SplitRatios& ratios,
                                            std::uint64_t seed) {
    const SplitIndices idx = split_indices(static_cast<std::size_t>(ds.rows()), ratios, seed);
    return {subset(ds, idx.train), subset(ds, idx.val), subset(ds, idx.test)};
}

Histogram histogram(const std::vector<double>& values, int n_bins) {
    if (values.empty()) {
        throw Error(errc::empty_input, "histogram of empty vector");
    }
    if (n_bins < 1) {
        throw Error(errc::bad_config, "histogram needs at least one bin");
    }
    double lo = values[0];
    double hi = values[0];
    for (const double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) { // degenerate range: center a unit-wide window on the value
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / n_bins;

    Histogram h;
    h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b)
        h.bin_edges[static_cast<std::size_t>(b)] = lo + width * b;
    h.bin_edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (const double v : values) {
        auto b = static_cast<std::int64_t>((v - lo) / width);
        b = std::clamp<std::int64_t>(b, 0, n_bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

ColumnCensus census(const std::vector<ColumnKind>& kinds) {
    ColumnCensus c;
    for (const ColumnKind k : kinds) {
        if (k == ColumnKind::AllZero) ++c.dropped;
        else if (k == ColumnKind::Continuous) ++c.continuous;
        else ++c.binary;
    }
    return c;
}

} // namespace featlearn
