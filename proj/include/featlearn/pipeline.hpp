#ifndef FEATLEARN_PIPELINE_HPP
#define FEATLEARN_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "featlearn/autoencoder.hpp"
#include "featlearn/dataset.hpp"
#include "featlearn/pca.hpp"
#include "featlearn/regressors.hpp"

namespace featlearn {

enum class MethodKind { Baseline, Pca, SparseAe };
enum class ModelKind { Linear, Tree };

const char* method_name(MethodKind m);
const char* model_name(ModelKind m);

struct Cell {
    MethodKind method;
    ModelKind model;
};

// "baseline:linear", "pca:tree", ... Errors with the offending token.
Cell parse_cell(const std::string& token);
std::string cell_name(const Cell& cell);

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Everything a feature transform may need; fixed values bypass the
// automatic selection.
struct MethodSettings {
    std::optional<int> pca_k;         // engaged: fixed k; empty: gap test
    GapOptions gap;
    bool gap_re = true; // which variants the auto mode runs; when both run,
    bool gap_ev = true; // reconstruction error decides k
    std::optional<AeConfig> ae_fixed; // engaged: train directly; empty: grid search
    GridSearchOptions ae_search;
    std::uint64_t seed = 42;
};

struct FeatureBuild {
    Eigen::MatrixXd train;
    Eigen::MatrixXd val;
    Eigen::MatrixXd test;
    std::string description;
    double seconds = 0.0;
    // fitted artifacts, populated per method
    std::optional<PcaModel> pca_model;
    std::optional<int> pca_k_used;
    std::optional<GapReport> gap_re;
    std::optional<GapReport> gap_ev;
    std::optional<AeParams> ae_params;
    std::optional<AeConfig> ae_config_used;
    std::optional<GridSearchResult> grid;
};

// Fits the transform on training features only and applies it to all
// three splits. PCA auto mode runs both gap variants; on disagreement the
// reconstruction-error k wins and both are recorded.
FeatureBuild build_features(MethodKind method, const Splits& splits, const MethodSettings& ms);

struct CellScore {
    Cell cell;
    double test_rmse = 0.0;
    double seconds = 0.0;
};

CellScore run_cell(MethodKind method, ModelKind model, const Splits& splits,
                   const MethodSettings& ms, const TreeConfig& tree_cfg);

struct ExperimentConfig {
    std::string data_path;
    char delimiter = ',';
    Eigen::Index target_col = -1; // -1: last column
    SplitRatios ratios;
    std::uint64_t seed = 42;
    bool scale_after_split = false; // default keeps the scale-then-split order
    std::optional<int> pca_k;
    GapOptions gap;
    bool gap_re = true;
    bool gap_ev = true;
    std::optional<int> ae_hidden; // with ae_lambda: skip the grid search
    std::optional<double> ae_lambda;
    GridSearchOptions ae_search;
    TreeConfig tree;
    std::vector<Cell> cells; // empty: full 3x2 grid
    std::string out_dir;     // empty: no files written
    int threads = 1;
    bool destandardize_rmse = false; // report in original target units
};

struct CellResult {
    Cell cell;
    double test_rmse = 0.0;
    std::optional<double> improvement; // 1 - rmse / baseline rmse, same model
    double seconds = 0.0;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    std::optional<int> k_star_re;
    std::optional<int> k_star_ev;
    std::optional<int> pca_k_used;
    std::optional<double> ae_lambda;
    std::optional<int> ae_hidden;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    std::vector<std::uint64_t> method_seeds; // baseline, pca, sparse_ae
    std::string split_fingerprint;
    Eigen::Index n_train = 0;
    Eigen::Index n_val = 0;
    Eigen::Index n_test = 0;
    double target_sd = 1.0;
    bool rmse_destandardized = false;
    ColumnCensus feature_census;
    double total_seconds = 0.0;
};

// Loads, preprocesses, splits, runs every requested cell on shared splits,
// then writes report.json, table.txt and figure data under out_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct MethodStanding {
    MethodKind method;
    double test_rmse;
    double improvement; // signed; negative = worse than baseline
};

// Methods sorted by test RMSE per model. Errors if a model lacks its
// baseline cell.
std::vector<std::pair<ModelKind, std::vector<MethodStanding>>>
compare_methods(const ExperimentReport& report);

// FNV-1a over the three index sets; cheap check that cells share splits.
std::string fingerprint_splits(const SplitIndices& idx);

// Aligned-column text rendering of the RMSE/improvement grid.
std::string report_table(const ExperimentReport& report);

// Splits a raw table's features from its target without any scaling;
// column kinds are classified on the given rows.
Dataset dataset_from_table(const RawTable& raw, Eigen::Index target_col);

} // namespace featlearn

#endif
