#ifndef FEATLEARN_AUTOENCODER_HPP
#define FEATLEARN_AUTOENCODER_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "featlearn/dataset.hpp"
#include "featlearn/error.hpp"
#include "featlearn/rng.hpp"

namespace featlearn {

// Weights of the 3-layer autoencoder: p inputs, h tanh hidden units,
// p tanh outputs.
struct AeParams {
    Eigen::MatrixXd W1; // p x h
    Eigen::VectorXd b1; // h
    Eigen::MatrixXd W2; // h x p
    Eigen::VectorXd b2; // p
};

struct AeConfig {
    int n_hidden = 5;
    double weight_decay = 1e-4; // lambda, L2 coefficient
    double sparsity = 0.01;     // rho, L1 coefficient
    double learning_rate = 0.01;
    int max_iters = 1000;
    double tol = 1e-6; // stop when the loss decrease falls below this
    std::uint64_t init_seed = 0;
};

// Which score drives cross-validation and validation in the grid search.
enum class AeMetric { DownstreamRmse, ReconstructionRmse };

struct GridSearchResult {
    double best_lambda = 0.0;
    int best_hidden = 0;
    std::vector<double> lambda_grid;
    std::vector<int> hidden_grid;
    // cv_table[l][h]: mean CV score for lambda_grid[l] x hidden_grid[h]
    std::vector<std::vector<double>> cv_table;
    std::vector<int> selected_hidden_per_lambda;
    std::vector<double> val_rmse_per_lambda;
    // validation score per hidden count at the winning lambda (plot data)
    std::vector<double> val_rmse_per_hidden;
};

double tanh_activation(double z);

struct AeForward {
    Eigen::MatrixXd hidden; // m x h
    Eigen::MatrixXd output; // m x p
};

AeForward forward(const AeParams& params, const Eigen::MatrixXd& X);

// J = mean squared reconstruction error + lambda * sum W^2 + rho * sum |W|.
// Biases carry no penalty.
double loss(const AeParams& params, const Eigen::MatrixXd& X, double lambda, double rho);

// Exact gradient of the objective; the L1 subgradient at zero is zero.
AeParams gradient(const AeParams& params, const Eigen::MatrixXd& X, double lambda, double rho);

struct TrainResult {
    AeParams params;
    std::vector<double> loss_trace; // loss_trace[0] is the initial loss
};

// Full-batch gradient descent from seeded uniform initialization.
TrainResult train(const Eigen::MatrixXd& X, const AeConfig& cfg);

Eigen::MatrixXd encode(const AeParams& params, const Eigen::MatrixXd& X);

struct GridSearchOptions {
    std::vector<int> hidden_grid = {2, 5, 10, 15};
    std::vector<double> lambda_grid = {0.0001, 0.01, 0.1};
    double rho = 0.01;
    int folds = 5;
    AeMetric metric = AeMetric::DownstreamRmse;
    // training settings shared by every grid cell
    double learning_rate = 0.01;
    int max_iters = 1000;
    double tol = 1e-6;
};

// For each lambda, k-fold CV on the training set picks the hidden count;
// the lambda whose (full-train) autoencoder scores best on the validation
// set wins. Ties break toward smaller lambda, then smaller hidden count.
GridSearchResult grid_search(const Dataset& train, const Dataset& val,
                             const GridSearchOptions& opts, Rng& rng);

// Contiguous blocks of a seeded permutation; every row in exactly one fold.
std::vector<std::vector<std::size_t>> fold_assignment(std::size_t n_rows, int folds, Rng& rng);

} // namespace featlearn

#endif
