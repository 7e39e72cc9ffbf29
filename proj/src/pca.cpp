#include "featlearn/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace featlearn {

const char* gap_variant_name(GapVariant v) {
    return v == GapVariant::ReconstructionError ? "reconstruction_error" : "explained_variation";
}

PcaModel fit_pca(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n < 2 || p < 1) {
        throw Error(errc::empty_input, "PCA needs at least 2 rows and 1 column");
    }
    if (!X.allFinite()) {
        throw Error(errc::non_finite, "PCA input contains non-finite values");
    }

    PcaModel model;
    model.center = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - model.center.transpose();

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.adjoint(),
                                                   1.0 / static_cast<double>(n - 1));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw Error(errc::non_finite, "eigendecomposition failed");
    }

    // Eigen returns eigenvalues ascending; flip to variance-descending.
    model.variances.resize(p);
    model.components.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        model.variances(i) = std::max(0.0, solver.eigenvalues()(p - 1 - i));
        model.components.col(i) = solver.eigenvectors().col(p - 1 - i);
    }

    // Resolve reflection ambiguity: largest-magnitude entry positive.
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::Index arg_max = 0;
        model.components.col(j).cwiseAbs().maxCoeff(&arg_max);
        if (model.components(arg_max, j) < 0.0) model.components.col(j) = -model.components.col(j);
    }
    return model;
}

namespace {

void check_k(const PcaModel& model, int k) {
    if (k < 1 || k > model.components.cols()) {
        throw Error(errc::bad_k, "k = " + std::to_string(k) + " outside 1.." +
                                     std::to_string(model.components.cols()));
    }
}

double clamp_floor(const Eigen::MatrixXd& centered) {
    return 1e-12 * centered.squaredNorm();
}

} // namespace

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& X, int k) {
    check_k(model, k);
    if (X.cols() != model.center.size()) {
        throw Error(errc::shape_mismatch, "data has " + std::to_string(X.cols()) +
                                              " columns, model expects " +
                                              std::to_string(model.center.size()));
    }
    return (X.rowwise() - model.center.transpose()) * model.components.leftCols(k);
}

Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& X, int k) {
    Eigen::MatrixXd rec = project(model, X, k) * model.components.leftCols(k).transpose();
    rec.rowwise() += model.center.transpose();
    return rec;
}

double w_reconstruction(const PcaModel& model, const Eigen::MatrixXd& X, int k) {
    check_k(model, k);
    const Eigen::MatrixXd centered = X.rowwise() - model.center.transpose();
    const double total = centered.squaredNorm();
    // The basis is complete and orthonormal, so the rank-k residual is the
    // centered energy minus the energy of the leading k scores.
    const double captured = (centered * model.components.leftCols(k)).squaredNorm();
    return std::max(total - captured, 1e-12 * total);
}

std::vector<double> w_reconstruction_curve(const PcaModel& model, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd centered = X.rowwise() - model.center.transpose();
    const Eigen::MatrixXd scores = centered * model.components;
    const Eigen::VectorXd energy = scores.colwise().squaredNorm();
    const double floor = clamp_floor(centered);

    // W_k is the energy of the trailing p-k score columns.
    const auto p = static_cast<std::size_t>(X.cols());
    std::vector<double> suffix(p + 1, 0.0);
    for (std::size_t j = p; j-- > 0;)
        suffix[j] = suffix[j + 1] + energy(static_cast<Eigen::Index>(j));
    std::vector<double> w(p);
    for (std::size_t k = 1; k <= p; ++k) w[k - 1] = std::max(suffix[k], floor);
    return w;
}

double w_explained(const PcaModel& model, int k) {
    check_k(model, k);
    const double total = model.variances.sum();
    if (!(total > 0.0)) {
        throw Error(errc::degenerate_data, "all principal variances are zero");
    }
    return model.variances.head(k).sum() / total;
}

Eigen::MatrixXd sample_reference(const Eigen::MatrixXd& X, Rng& rng) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd ref(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double lo = X.col(j).minCoeff();
        const double hi = X.col(j).maxCoeff();
        if (lo == hi) {
            ref.col(j).setConstant(lo);
        } else {
            for (Eigen::Index i = 0; i < n; ++i) ref(i, j) = uniform_real(rng, lo, hi);
        }
    }
    return ref;
}

Eigen::MatrixXd sample_reference_pca(const Eigen::MatrixXd& X, const PcaModel& model, Rng& rng) {
    const Eigen::MatrixXd scores = (X.rowwise() - model.center.transpose()) * model.components;
    Eigen::MatrixXd ref = sample_reference(scores, rng) * model.components.transpose();
    ref.rowwise() += model.center.transpose();
    return ref;
}

namespace {

// log W_k curve for one dataset under its own fitted basis.
std::vector<double> log_w_curve(GapVariant variant, const Eigen::MatrixXd& data, int k_max) {
    const PcaModel model = fit_pca(data);
    std::vector<double> lw(static_cast<std::size_t>(k_max));
    if (variant == GapVariant::ReconstructionError) {
        const std::vector<double> w = w_reconstruction_curve(model, data);
        for (int k = 1; k <= k_max; ++k)
            lw[static_cast<std::size_t>(k - 1)] = std::log(w[static_cast<std::size_t>(k - 1)]);
    } else {
        const double total = model.variances.sum();
        if (!(total > 0.0)) {
            throw Error(errc::degenerate_data, "all principal variances are zero");
        }
        double leading = 0.0;
        for (int k = 1; k <= k_max; ++k) {
            leading += model.variances(k - 1);
            lw[static_cast<std::size_t>(k - 1)] = std::log(leading / total);
        }
    }
    return lw;
}

} // namespace

std::pair<int, bool> select_k(GapVariant variant, const std::vector<double>& gap,
                              const std::vector<double>& se) {
    const std::size_t K = gap.size();
    for (std::size_t i = 0; i + 1 < K; ++i) {
        const bool hit = variant == GapVariant::ReconstructionError
                             ? gap[i] >= gap[i + 1] - se[i + 1]
                             : gap[i] <= gap[i + 1] - se[i + 1];
        if (hit) return {static_cast<int>(i) + 1, false};
    }
    return {static_cast<int>(K), true};
}

GapReport gap_test(const Eigen::MatrixXd& X, GapVariant variant, const GapOptions& opts, Rng& rng) {
    const auto p = static_cast<int>(X.cols());
    const int k_max = opts.k_max == 0 ? p : opts.k_max;
    if (opts.B < 2) {
        throw Error(errc::bad_b, "B = " + std::to_string(opts.B) + ", need at least 2");
    }
    if (k_max < 2 || k_max > p) {
        throw Error(errc::bad_kmax,
                    "k_max = " + std::to_string(k_max) + " outside 2.." + std::to_string(p));
    }

    const PcaModel data_model = fit_pca(X); // box basis for the PC-aligned option

    // Child seeds are drawn up front so reference b is identical no matter
    // how many threads run.
    const auto B = static_cast<std::size_t>(opts.B);
    std::vector<std::uint64_t> seeds(B);
    for (auto& s : seeds) s = rng();

    std::vector<std::vector<double>> ref_curves(B);
    std::exception_ptr failure = nullptr;
    auto run_one = [&](std::size_t b) {
        Rng ref_rng(seeds[b]);
        const Eigen::MatrixXd ref = opts.box == ReferenceBox::AxisAligned
                                        ? sample_reference(X, ref_rng)
                                        : sample_reference_pca(X, data_model, ref_rng);
        ref_curves[b] = log_w_curve(variant, ref, k_max);
    };

    const int n_threads = std::max(1, opts.threads);
    if (n_threads == 1 || B < 2) {
        for (std::size_t b = 0; b < B; ++b) run_one(b);
    } else {
        std::vector<std::thread> pool;
        std::mutex fail_mutex;
        const auto workers = static_cast<std::size_t>(std::min<int>(n_threads, opts.B));
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = t; b < B; b += workers) {
                    try {
                        run_one(b);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(fail_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    GapReport report;
    report.variant = variant;
    report.B = opts.B;
    report.log_w = log_w_curve(variant, X, k_max);
    report.expected_log_w.resize(static_cast<std::size_t>(k_max));
    report.sd.resize(static_cast<std::size_t>(k_max));
    report.se.resize(static_cast<std::size_t>(k_max));
    report.gap.resize(static_cast<std::size_t>(k_max));
    const double inflation = std::sqrt(1.0 + 1.0 / static_cast<double>(opts.B));
    for (std::size_t k = 0; k < static_cast<std::size_t>(k_max); ++k) {
        double mean = 0.0;
        for (std::size_t b = 0; b < B; ++b) mean += ref_curves[b][k];
        mean /= static_cast<double>(B);
        double var = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double d = ref_curves[b][k] - mean;
            var += d * d;
        }
        var /= static_cast<double>(B);
        report.expected_log_w[k] = mean;
        report.sd[k] = std::sqrt(var);
        report.se[k] = inflation * report.sd[k];
        report.gap[k] = mean - report.log_w[k];
    }

    std::tie(report.k_star, report.no_elbow) = select_k(variant, report.gap, report.se);
    return report;
}

} // namespace featlearn
