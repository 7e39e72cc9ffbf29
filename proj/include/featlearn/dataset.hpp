#ifndef FEATLEARN_DATASET_HPP
#define FEATLEARN_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "featlearn/error.hpp"

namespace featlearn {

// Raw delimiter-separated table as read from disk, target still in place.
struct RawTable {
    Eigen::Index n_rows = 0;
    Eigen::Index n_cols = 0;
    Eigen::MatrixXd values; // n_rows x n_cols
};

enum class ColumnKind { AllZero, Binary, Continuous };

const char* column_kind_name(ColumnKind k);

// Fitted preprocessing statistics. means/sds are aligned with the
// Continuous entries of `kinds`, in column order.
struct ScalerParams {
    std::vector<Eigen::Index> dropped_indices; // original all-zero columns, sorted
    std::vector<ColumnKind> kinds;             // per retained column
    std::vector<double> means;
    std::vector<double> sds;
    double target_mean = 0.0;
    double target_sd = 1.0;
};

struct Dataset {
    Eigen::MatrixXd X;              // n x p
    Eigen::VectorXd y;              // n
    std::vector<ColumnKind> kinds;  // p entries

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index cols() const { return X.cols(); }
};

struct Histogram {
    std::vector<double> bin_edges;      // b + 1, strictly increasing
    std::vector<std::int64_t> counts;   // b
};

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

// Reads a delimiter-separated numeric table, no header row, LF or CRLF.
// Errors: missing_file, ragged_row (1-based row), bad_cell (1-based row/col).
RawTable load_table(const std::string& path, char delimiter = ',');

// Classifies every feature column (the target column is skipped).
std::vector<ColumnKind> classify_columns(const RawTable& raw, Eigen::Index target_col);

// Drops all-zero columns, standardizes continuous columns and the target
// with sample standard deviation (divisor n-1), passes binary columns
// through. Errors: zero_variance on a constant continuous column.
std::pair<Dataset, ScalerParams> fit_preprocess(const RawTable& raw, Eigen::Index target_col);

// Same transform using previously fitted statistics; never refits.
Dataset apply_preprocess(const RawTable& raw, Eigen::Index target_col, const ScalerParams& params);

// Row index sets of a seeded train/val/test partition. Sizes are floor
// allocations with the remainder going to train.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

SplitIndices split_indices(std::size_t n_rows, const SplitRatios& ratios, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows);

std::tuple<Dataset, Dataset, Dataset> split(const Dataset& ds, const SplitRatios& ratios,
                                            std::uint64_t seed);

// Equal-width bins over [min, max]; the max value lands in the last bin.
Histogram histogram(const std::vector<double>& values, int n_bins);

struct ColumnCensus {
    int dropped = 0;
    int continuous = 0;
    int binary = 0;
};

ColumnCensus census(const std::vector<ColumnKind>& kinds);

} // namespace featlearn

#endif
