#include "featlearn/regressors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace featlearn {

LinearModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 1) {
        throw Error(errc::empty_input, "no rows to fit");
    }
    if (y.size() != n) {
        throw Error(errc::length_mismatch, "X has " + std::to_string(n) + " rows, y has " +
                                               std::to_string(y.size()));
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(errc::non_finite, "linear regression input contains non-finite values");
    }

    Eigen::MatrixXd design(n, p + 1);
    design.leftCols(p) = X;
    design.col(p).setOnes();

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::VectorXd beta = cod.solve(y);

    LinearModel model;
    model.coefficients = beta.head(p);
    model.intercept = beta(p);
    return model;
}

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.coefficients.size()) {
        throw Error(errc::shape_mismatch, "data has " + std::to_string(X.cols()) +
                                              " columns, model expects " +
                                              std::to_string(model.coefficients.size()));
    }
    return (X * model.coefficients).array() + model.intercept;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double node_ssd(const Eigen::VectorXd& y, const std::vector<int>& rows) {
    double sum = 0.0;
    for (const int r : rows) sum += y(r);
    const double mean = sum / static_cast<double>(rows.size());
    double ssd = 0.0;
    for (const int r : rows) {
        const double d = y(r) - mean;
        ssd += d * d;
    }
    return ssd;
}

SplitChoice best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<int>& rows, double parent_ssd, int min_leaf) {
    const auto n = static_cast<int>(rows.size());
    SplitChoice best;

    std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(n));
    for (int f = 0; f < X.cols(); ++f) {
        for (int i = 0; i < n; ++i) pairs[static_cast<std::size_t>(i)] = {X(rows[static_cast<std::size_t>(i)], f), y(rows[static_cast<std::size_t>(i)])};
        std::sort(pairs.begin(), pairs.end());
        if (pairs.front().first == pairs.back().first) continue; // constant feature

        // prefix sums of targets and squared targets
        double left_sum = 0.0;
        double left_sq = 0.0;
        double total_sum = 0.0;
        double total_sq = 0.0;
        for (const auto& [xv, yv] : pairs) {
            total_sum += yv;
            total_sq += yv * yv;
        }
        for (int i = 0; i + 1 < n; ++i) {
            const auto& [xv, yv] = pairs[static_cast<std::size_t>(i)];
            left_sum += yv;
            left_sq += yv * yv;
            if (xv == pairs[static_cast<std::size_t>(i + 1)].first) continue;
            const int nl = i + 1;
            const int nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double left_ssd = std::max(0.0, left_sq - left_sum * left_sum / nl);
            const double right_ssd = std::max(0.0, right_sq - right_sum * right_sum / nr);
            const double gain = parent_ssd - left_ssd - right_ssd;
            if (gain > best.gain) { // strict: first (feature, threshold) wins ties
                best.found = true;
                best.feature = f;
                best.threshold = (xv + pairs[static_cast<std::size_t>(i + 1)].first) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeConfig& cfg,
         std::vector<int> rows, int depth, TreeModel& model) {
    const int node_id = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();

    double sum = 0.0;
    for (const int r : rows) sum += y(r);
    model.nodes[static_cast<std::size_t>(node_id)].prediction =
        sum / static_cast<double>(rows.size());
    model.nodes[static_cast<std::size_t>(node_id)].count = static_cast<int>(rows.size());

    const bool depth_ok = cfg.max_depth < 0 || depth < cfg.max_depth;
    if (!depth_ok || static_cast<int>(rows.size()) < cfg.min_samples_split) return node_id;

    const double parent_ssd = node_ssd(y, rows);
    if (!(parent_ssd > 0.0)) return node_id;

    const SplitChoice choice = best_split(X, y, rows, parent_ssd, cfg.min_samples_leaf);
    if (!choice.found || !(choice.gain > 0.0)) return node_id;

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (const int r : rows) {
        if (X(r, choice.feature) <= choice.threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = grow(X, y, cfg, std::move(left_rows), depth + 1, model);
    const int right = grow(X, y, cfg, std::move(right_rows), depth + 1, model);
    TreeNode& node = model.nodes[static_cast<std::size_t>(node_id)];
    node.feature = choice.feature;
    node.threshold = choice.threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

} // namespace

TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeConfig& cfg) {
    if (X.rows() < 1) {
        throw Error(errc::empty_input, "no rows to fit");
    }
    if (y.size() != X.rows()) {
        throw Error(errc::length_mismatch, "X has " + std::to_string(X.rows()) + " rows, y has " +
                                               std::to_string(y.size()));
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(errc::non_finite, "tree input contains non-finite values");
    }
    if (cfg.min_samples_leaf < 1 || cfg.min_samples_split < 2) {
        throw Error(errc::bad_config, "min_samples_leaf >= 1 and min_samples_split >= 2 required");
    }

    TreeModel model;
    model.n_features = X.cols();
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    grow(X, y, cfg, std::move(rows), 0, model);
    return model;
}

Eigen::VectorXd predict_tree(const TreeModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.n_features) {
        throw Error(errc::shape_mismatch, "data has " + std::to_string(X.cols()) +
                                              " columns, tree expects " +
                                              std::to_string(model.n_features));
    }
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int node = 0;
        while (!model.nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const TreeNode& nd = model.nodes[static_cast<std::size_t>(node)];
            node = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        out(i) = model.nodes[static_cast<std::size_t>(node)].prediction;
    }
    return out;
}

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
    if (predicted.size() != actual.size()) {
        throw Error(errc::length_mismatch, "prediction length " + std::to_string(predicted.size()) +
                                               " vs actual length " + std::to_string(actual.size()));
    }
    if (predicted.size() == 0) {
        throw Error(errc::empty_input, "RMSE of empty vectors");
    }
    return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(predicted.size()));
}

} // namespace featlearn
