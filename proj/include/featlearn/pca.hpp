#ifndef FEATLEARN_PCA_HPP
#define FEATLEARN_PCA_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "featlearn/error.hpp"
#include "featlearn/rng.hpp"

namespace featlearn {

// Principal component basis fitted to one data matrix. Components are the
// columns of a p x p orthonormal matrix, sorted by variance descending,
// with each column's largest-magnitude entry made positive.
struct PcaModel {
    Eigen::VectorXd center;      // p
    Eigen::MatrixXd components;  // p x p
    Eigen::VectorXd variances;   // p, non-increasing, >= 0
};

enum class GapVariant { ReconstructionError, ExplainedVariation };

const char* gap_variant_name(GapVariant v);

// How reference datasets are drawn: a uniform box over each original
// feature's [min, max], or the same box in the fitted principal axes.
enum class ReferenceBox { AxisAligned, PcaAligned };

struct GapReport {
    GapVariant variant = GapVariant::ReconstructionError;
    int B = 0;
    std::vector<double> log_w;          // on the data, k = 1..K
    std::vector<double> expected_log_w; // mean over reference samples
    std::vector<double> sd;             // reference sd of log W_k
    std::vector<double> se;             // sqrt(1 + 1/B) * sd
    std::vector<double> gap;            // expected_log_w - log_w
    int k_star = 1;
    bool no_elbow = false;
};

struct GapOptions {
    int B = 20;
    int k_max = 0; // 0 = all components
    ReferenceBox box = ReferenceBox::AxisAligned;
    int threads = 1; // per-reference work, assembled in index order
};

PcaModel fit_pca(const Eigen::MatrixXd& X);

// Scores of the leading k components: (X - center) * components[:, 0..k).
Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& X, int k);

// Rank-k reconstruction: center + project(X, k) * components[:, 0..k)^T.
Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& X, int k);

// Sum of squared residuals against the rank-k reconstruction, floored at
// 1e-12 times the total centered sum of squares so logs stay finite.
double w_reconstruction(const PcaModel& model, const Eigen::MatrixXd& X, int k);

// Fraction of total variance carried by the leading k components.
double w_explained(const PcaModel& model, int k);

// W_k for every k in 1..p in one pass over the score matrix.
std::vector<double> w_reconstruction_curve(const PcaModel& model, const Eigen::MatrixXd& X);

// One uniform draw from the bounding box of X (per original feature axis).
Eigen::MatrixXd sample_reference(const Eigen::MatrixXd& X, Rng& rng);

// PC-aligned variant: box in the coordinates of `basis`, rotated back.
Eigen::MatrixXd sample_reference_pca(const Eigen::MatrixXd& X, const PcaModel& model, Rng& rng);

GapReport gap_test(const Eigen::MatrixXd& X, GapVariant variant, const GapOptions& opts, Rng& rng);

// Selection rule on a finished gap/se curve; exposed for direct testing.
// Returns {k_star, no_elbow}.
std::pair<int, bool> select_k(GapVariant variant, const std::vector<double>& gap,
                              const std::vector<double>& se);

} // namespace featlearn

#endif
