#include "featlearn/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "featlearn/regressors.hpp"

namespace featlearn {

double tanh_activation(double z) {
    // std::tanh already saturates cleanly for large |z|
    return std::tanh(z);
}

namespace {

void check_shapes(const AeParams& params, const Eigen::MatrixXd& X) {
    const Eigen::Index p = params.W1.rows();
    const Eigen::Index h = params.W1.cols();
    if (params.b1.size() != h || params.W2.rows() != h || params.W2.cols() != p ||
        params.b2.size() != p) {
        throw Error(errc::shape_mismatch, "inconsistent autoencoder parameter shapes");
    }
    if (X.cols() != p) {
        throw Error(errc::shape_mismatch, "data has " + std::to_string(X.cols()) +
                                              " columns, autoencoder expects " + std::to_string(p));
    }
}

} // namespace

AeForward forward(const AeParams& params, const Eigen::MatrixXd& X) {
    check_shapes(params, X);
    AeForward f;
    f.hidden = ((X * params.W1).rowwise() + params.b1.transpose()).array().tanh();
    f.output = ((f.hidden * params.W2).rowwise() + params.b2.transpose()).array().tanh();
    return f;
}

double loss(const AeParams& params, const Eigen::MatrixXd& X, double lambda, double rho) {
    const AeForward f = forward(params, X);
    const double mse = (f.output - X).squaredNorm() / static_cast<double>(X.rows());
    const double l2 = params.W1.squaredNorm() + params.W2.squaredNorm();
    const double l1 = params.W1.cwiseAbs().sum() + params.W2.cwiseAbs().sum();
    return mse + lambda * l2 + rho * l1;
}

namespace {

// sign with sign(0) = 0
inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

AeParams gradient(const AeParams& params, const Eigen::MatrixXd& X, double lambda, double rho) {
    const AeForward f = forward(params, X);
    const double m = static_cast<double>(X.rows());

    // delta at the output: d/dz2 of (1/m) sum ||a2 - x||^2, tanh' = 1 - a^2
    const Eigen::MatrixXd delta2 =
        ((2.0 / m) * (f.output - X).array() * (1.0 - f.output.array().square())).matrix();
    const Eigen::MatrixXd delta1 =
        ((delta2 * params.W2.transpose()).array() * (1.0 - f.hidden.array().square())).matrix();

    AeParams g;
    g.W2 = f.hidden.transpose() * delta2 + 2.0 * lambda * params.W2 +
           rho * params.W2.unaryExpr(&sgn);
    g.b2 = delta2.colwise().sum().transpose();
    g.W1 = X.transpose() * delta1 + 2.0 * lambda * params.W1 + rho * params.W1.unaryExpr(&sgn);
    g.b1 = delta1.colwise().sum().transpose();
    return g;
}

namespace {

AeParams init_params(Eigen::Index p, Eigen::Index h, std::uint64_t seed) {
    Rng rng(seed);
    AeParams params;
    params.W1.resize(p, h);
    params.W2.resize(h, p);
    params.b1 = Eigen::VectorXd::Zero(h);
    params.b2 = Eigen::VectorXd::Zero(p);
    const double r1 = std::sqrt(6.0 / static_cast<double>(p + h));
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < h; ++j) params.W1(i, j) = uniform_real(rng, -r1, r1);
    const double r2 = std::sqrt(6.0 / static_cast<double>(h + p));
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index j = 0; j < p; ++j) params.W2(i, j) = uniform_real(rng, -r2, r2);
    return params;
}

} // namespace

TrainResult train(const Eigen::MatrixXd& X, const AeConfig& cfg) {
    if (X.rows() < 2) {
        throw Error(errc::empty_input, "need at least 2 samples to train");
    }
    if (cfg.n_hidden < 1 || cfg.learning_rate <= 0.0 || cfg.max_iters < 0 || cfg.tol <= 0.0 ||
        cfg.weight_decay < 0.0 || cfg.sparsity < 0.0) {
        throw Error(errc::bad_config, "invalid autoencoder configuration");
    }

    TrainResult result;
    result.params = init_params(X.cols(), cfg.n_hidden, cfg.init_seed);

    double prev = loss(result.params, X, cfg.weight_decay, cfg.sparsity);
    result.loss_trace.push_back(prev);
    for (int it = 0; it < cfg.max_iters; ++it) {
        const AeParams g = gradient(result.params, X, cfg.weight_decay, cfg.sparsity);
        result.params.W1 -= cfg.learning_rate * g.W1;
        result.params.b1 -= cfg.learning_rate * g.b1;
        result.params.W2 -= cfg.learning_rate * g.W2;
        result.params.b2 -= cfg.learning_rate * g.b2;

        const double cur = loss(result.params, X, cfg.weight_decay, cfg.sparsity);
        if (!std::isfinite(cur)) {
            throw Error(errc::divergence, "loss became non-finite at iteration " +
                                              std::to_string(it + 1) +
                                              " (learning rate too high?)");
        }
        result.loss_trace.push_back(cur);
        if (prev - cur < cfg.tol) break;
        prev = cur;
    }
    return result;
}

Eigen::MatrixXd encode(const AeParams& params, const Eigen::MatrixXd& X) {
    return forward(params, X).hidden;
}

std::vector<std::vector<std::size_t>> fold_assignment(std::size_t n_rows, int folds, Rng& rng) {
    if (folds < 2 || static_cast<std::size_t>(folds) > n_rows) {
        throw Error(errc::bad_config, "fold count must be in 2..n_rows");
    }
    const std::vector<std::size_t> perm = random_permutation(n_rows, rng);
    std::vector<std::vector<std::size_t>> assignment(static_cast<std::size_t>(folds));
    const std::size_t base = n_rows / static_cast<std::size_t>(folds);
    const std::size_t extra = n_rows % static_cast<std::size_t>(folds);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < static_cast<std::size_t>(folds); ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        assignment[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                             perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return assignment;
}

namespace {

struct FoldData {
    Eigen::MatrixXd train_X;
    Eigen::VectorXd train_y;
    Eigen::MatrixXd held_X;
    Eigen::VectorXd held_y;
};

FoldData make_fold(const Dataset& ds, const std::vector<std::vector<std::size_t>>& folds,
                   std::size_t held) {
    std::vector<std::size_t> train_rows;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f == held) continue;
        train_rows.insert(train_rows.end(), folds[f].begin(), folds[f].end());
    }
    FoldData fd;
    fd.train_X.resize(static_cast<Eigen::Index>(train_rows.size()), ds.X.cols());
    fd.train_y.resize(static_cast<Eigen::Index>(train_rows.size()));
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        fd.train_X.row(static_cast<Eigen::Index>(i)) =
            ds.X.row(static_cast<Eigen::Index>(train_rows[i]));
        fd.train_y(static_cast<Eigen::Index>(i)) = ds.y(static_cast<Eigen::Index>(train_rows[i]));
    }
    const auto& held_rows = folds[held];
    fd.held_X.resize(static_cast<Eigen::Index>(held_rows.size()), ds.X.cols());
    fd.held_y.resize(static_cast<Eigen::Index>(held_rows.size()));
    for (std::size_t i = 0; i < held_rows.size(); ++i) {
        fd.held_X.row(static_cast<Eigen::Index>(i)) =
            ds.X.row(static_cast<Eigen::Index>(held_rows[i]));
        fd.held_y(static_cast<Eigen::Index>(i)) = ds.y(static_cast<Eigen::Index>(held_rows[i]));
    }
    return fd;
}

AeConfig cell_config(const GridSearchOptions& opts, int hidden, double lambda,
                     std::uint64_t seed) {
    AeConfig cfg;
    cfg.n_hidden = hidden;
    cfg.weight_decay = lambda;
    cfg.sparsity = opts.rho;
    cfg.learning_rate = opts.learning_rate;
    cfg.max_iters = opts.max_iters;
    cfg.tol = opts.tol;
    cfg.init_seed = seed;
    return cfg;
}

// Train on `fit_X`, then score the encoding on held-out data: either RMSE
// of a linear regressor fit on the encoded training features, or plain
// reconstruction RMSE.
double score_cell(const AeConfig& cfg, AeMetric metric, const Eigen::MatrixXd& fit_X,
                  const Eigen::VectorXd& fit_y, const Eigen::MatrixXd& held_X,
                  const Eigen::VectorXd& held_y) {
    const TrainResult trained = train(fit_X, cfg);
    if (metric == AeMetric::ReconstructionRmse) {
        const Eigen::MatrixXd rec = forward(trained.params, held_X).output;
        return std::sqrt((rec - held_X).squaredNorm() /
                         static_cast<double>(held_X.rows() * held_X.cols()));
    }
    const Eigen::MatrixXd enc_train = encode(trained.params, fit_X);
    const Eigen::MatrixXd enc_held = encode(trained.params, held_X);
    const LinearModel lm = fit_linear(enc_train, fit_y);
    return rmse(predict_linear(lm, enc_held), held_y);
}

} // namespace

GridSearchResult grid_search(const Dataset& train_ds, const Dataset& val_ds,
                             const GridSearchOptions& opts, Rng& rng) {
    if (opts.hidden_grid.empty() || opts.lambda_grid.empty()) {
        throw Error(errc::bad_config, "empty hyperparameter grid");
    }

    const std::vector<std::vector<std::size_t>> folds =
        fold_assignment(static_cast<std::size_t>(train_ds.rows()), opts.folds, rng);
    const std::uint64_t seed_base = rng();

    GridSearchResult result;
    result.lambda_grid = opts.lambda_grid;
    result.hidden_grid = opts.hidden_grid;
    result.cv_table.assign(opts.lambda_grid.size(),
                           std::vector<double>(opts.hidden_grid.size(), 0.0));
    result.selected_hidden_per_lambda.resize(opts.lambda_grid.size());
    result.val_rmse_per_lambda.resize(opts.lambda_grid.size());

    std::vector<FoldData> fold_data;
    fold_data.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) fold_data.push_back(make_fold(train_ds, folds, f));

    for (std::size_t l = 0; l < opts.lambda_grid.size(); ++l) {
        const double lambda = opts.lambda_grid[l];

        double best_cv = std::numeric_limits<double>::infinity();
        std::size_t best_h_idx = 0;
        for (std::size_t h = 0; h < opts.hidden_grid.size(); ++h) {
            double mean_score = 0.0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const std::uint64_t seed =
                    derive_seed(seed_base, (l * opts.hidden_grid.size() + h) * folds.size() + f);
                const AeConfig cfg = cell_config(opts, opts.hidden_grid[h], lambda, seed);
                try {
                    mean_score += score_cell(cfg, opts.metric, fold_data[f].train_X,
                                             fold_data[f].train_y, fold_data[f].held_X,
                                             fold_data[f].held_y);
                } catch (const Error& e) {
                    throw Error(e.code(), "grid cell (lambda=" + std::to_string(lambda) +
                                              ", hidden=" + std::to_string(opts.hidden_grid[h]) +
                                              ", fold=" + std::to_string(f) + "): " + e.what());
                }
            }
            mean_score /= static_cast<double>(folds.size());
            result.cv_table[l][h] = mean_score;
            const bool better = mean_score < best_cv ||
                                (mean_score == best_cv &&
                                 opts.hidden_grid[h] < opts.hidden_grid[best_h_idx]);
            if (h == 0 || better) {
                best_cv = mean_score;
                best_h_idx = h;
            }
        }
        result.selected_hidden_per_lambda[l] = opts.hidden_grid[best_h_idx];

        const std::uint64_t seed = derive_seed(seed_base, 0x10000000ULL + l);
        const AeConfig cfg = cell_config(opts, opts.hidden_grid[best_h_idx], lambda, seed);
        try {
            result.val_rmse_per_lambda[l] = score_cell(cfg, opts.metric, train_ds.X, train_ds.y,
                                                       val_ds.X, val_ds.y);
        } catch (const Error& e) {
            throw Error(e.code(), "validation cell (lambda=" + std::to_string(lambda) +
                                      ", hidden=" +
                                      std::to_string(opts.hidden_grid[best_h_idx]) +
                                      "): " + e.what());
        }
    }

    std::size_t best_l = 0;
    for (std::size_t l = 1; l < opts.lambda_grid.size(); ++l) {
        const bool better =
            result.val_rmse_per_lambda[l] < result.val_rmse_per_lambda[best_l] ||
            (result.val_rmse_per_lambda[l] == result.val_rmse_per_lambda[best_l] &&
             opts.lambda_grid[l] < opts.lambda_grid[best_l]);
        if (better) best_l = l;
    }
    result.best_lambda = opts.lambda_grid[best_l];
    result.best_hidden = result.selected_hidden_per_lambda[best_l];

    // validation curve over hidden counts at the winning lambda (plot data)
    result.val_rmse_per_hidden.resize(opts.hidden_grid.size());
    for (std::size_t h = 0; h < opts.hidden_grid.size(); ++h) {
        const std::uint64_t seed = derive_seed(seed_base, 0x20000000ULL + h);
        const AeConfig cfg = cell_config(opts, opts.hidden_grid[h], result.best_lambda, seed);
        result.val_rmse_per_hidden[h] =
            score_cell(cfg, opts.metric, train_ds.X, train_ds.y, val_ds.X, val_ds.y);
    }
    return result;
}

} // namespace featlearn
