#ifndef FEATLEARN_REGRESSORS_HPP
#define FEATLEARN_REGRESSORS_HPP

#include <Eigen/Core>
#include <vector>

#include "featlearn/error.hpp"

namespace featlearn {

struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
};

// max_depth < 0 means unlimited.
struct TreeConfig {
    int max_depth = -1;
    int min_samples_leaf = 5;
    int min_samples_split = 10;
};

// Flat node store, root at index 0. Internal nodes route rows by
// value <= threshold (ties go left); leaves predict the training mean.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double prediction = 0.0;
    int count = 0;

    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;
    Eigen::Index n_features = 0;
};

// Least squares with an intercept column; rank-deficient systems get the
// minimum-norm solution.
LinearModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& X);

// Greedy top-down CART on squared deviations. Candidate thresholds are
// midpoints between consecutive distinct sorted values; ties between
// splits break toward the lowest feature index, then lowest threshold.
TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeConfig& cfg);

Eigen::VectorXd predict_tree(const TreeModel& model, const Eigen::MatrixXd& X);

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

} // namespace featlearn

#endif
