#include <doctest.h>

#include <cmath>

#include "featlearn/pca.hpp"
#include "oracles.hpp"

using namespace featlearn;

TEST_CASE("points on the line y = x give the diagonal first component") {
    Eigen::MatrixXd X(4, 2);
    X << -2, -2,
         -1, -1,
          1,  1,
          2,  2;
    const PcaModel m = fit_pca(X);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(m.components(0, 0) == doctest::Approx(s)); // sign convention: (+,+)
    CHECK(m.components(1, 0) == doctest::Approx(s));
    CHECK(m.variances(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("already centered input has a near-zero center") {
    Rng rng(3);
    Eigen::MatrixXd X = oracles::gaussian_matrix(50, 4, rng);
    X.rowwise() -= X.colwise().mean();
    const PcaModel m = fit_pca(X);
    CHECK(m.center.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("variances match a Jacobi eigendecomposition of the explicit covariance") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(uniform_below(rng, 91));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(uniform_below(rng, 19));
        const Eigen::MatrixXd X = oracles::gaussian_matrix(n, p, rng);
        const PcaModel m = fit_pca(X);
        const auto oracle = oracles::jacobi_eigenvalues(oracles::sample_covariance(X));
        REQUIRE(oracle.size() == static_cast<std::size_t>(p));
        // zero eigenvalues of rank-deficient covariances are pure roundoff
        // in both solvers, so the relative scale floors at 1e-8 * lambda_max
        const double lambda_max = std::max(1e-300, oracle[0]);
        for (Eigen::Index i = 0; i < p; ++i) {
            const double expected = std::max(0.0, oracle[static_cast<std::size_t>(i)]);
            const double scale = std::max(1e-8 * lambda_max, std::abs(expected));
            CHECK(std::abs(m.variances(i) - expected) / scale < 1e-8);
        }
    }
}

TEST_CASE("components are orthonormal after every fit") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(uniform_below(rng, 50));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(uniform_below(rng, 15));
        const PcaModel m = fit_pca(oracles::gaussian_matrix(n, p, rng));
        const Eigen::MatrixXd gram = m.components.transpose() * m.components;
        CHECK((gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index i = 0; i + 1 < p; ++i) CHECK(m.variances(i) >= m.variances(i + 1));
    }
}

TEST_CASE("full-rank projection round-trips the data") {
    Rng rng(8);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(30, 6, rng);
    const PcaModel m = fit_pca(X);
    const Eigen::MatrixXd rec = reconstruct(m, X, 6);
    CHECK((rec - X).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("projecting the center point gives zero scores") {
    Rng rng(9);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(25, 4, rng);
    const PcaModel m = fit_pca(X);
    const Eigen::MatrixXd scores = project(m, m.center.transpose(), 4);
    CHECK(scores.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("score variances on the fitting data equal the model variances") {
    Rng rng(10);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(60, 5, rng);
    const PcaModel m = fit_pca(X);
    const Eigen::MatrixXd scores = project(m, X, 5);
    for (Eigen::Index j = 0; j < 5; ++j) {
        const double mean = scores.col(j).mean();
        const double var = (scores.col(j).array() - mean).square().sum() / (60 - 1);
        CHECK(var == doctest::Approx(m.variances(j)).epsilon(1e-8));
    }
}

TEST_CASE("rank-1 data reconstructs exactly from one component") {
    Eigen::MatrixXd X(5, 3);
    for (int i = 0; i < 5; ++i) {
        const double t = i - 2.0;
        X(i, 0) = 2.0 * t;
        X(i, 1) = -t;
        X(i, 2) = 0.5 * t;
    }
    const PcaModel m = fit_pca(X);
    CHECK((reconstruct(m, X, 1) - X).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(w_explained(m, 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("w_reconstruction matches an explicit residual sum oracle") {
    Rng rng(12);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(40, 7, rng);
    const PcaModel m = fit_pca(X);
    for (int k = 1; k <= 7; ++k) {
        const Eigen::MatrixXd rec = reconstruct(m, X, k);
        double direct = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = 0; j < X.cols(); ++j) {
                const double d = X(i, j) - rec(i, j);
                direct += d * d;
            }
        const double w = w_reconstruction(m, X, k);
        if (k < 7) {
            CHECK(w == doctest::Approx(direct).epsilon(1e-8));
        } else {
            CHECK(w <= 1e-12 * (X.rowwise() - m.center.transpose()).squaredNorm() * (1 + 1e-9));
        }
    }
}

TEST_CASE("w_reconstruction_curve agrees with per-k calls") {
    Rng rng(14);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(30, 6, rng);
    const PcaModel m = fit_pca(X);
    const std::vector<double> curve = w_reconstruction_curve(m, X);
    REQUIRE(curve.size() == 6);
    for (int k = 1; k <= 6; ++k)
        CHECK(curve[static_cast<std::size_t>(k - 1)] ==
              doctest::Approx(w_reconstruction(m, X, k)).epsilon(1e-9));
}

TEST_CASE("w_reconstruction is non-increasing and w_explained non-decreasing in k") {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(uniform_below(rng, 91));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(uniform_below(rng, 19));
        const Eigen::MatrixXd X = oracles::gaussian_matrix(n, p, rng);
        const PcaModel m = fit_pca(X);
        double prev_w = std::numeric_limits<double>::infinity();
        double prev_e = 0.0;
        for (int k = 1; k <= p; ++k) {
            const double w = w_reconstruction(m, X, k);
            const double e = w_explained(m, k);
            CHECK(w <= prev_w * (1 + 1e-12));
            CHECK(e >= prev_e - 1e-12);
            prev_w = w;
            prev_e = e;
        }
        CHECK(w_explained(m, static_cast<int>(p)) == doctest::Approx(1.0));
    }
}

TEST_CASE("residual energy plus leading variance energy equals the total") {
    Rng rng(16);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(50, 8, rng);
    const PcaModel m = fit_pca(X);
    const double total = (X.rowwise() - m.center.transpose()).squaredNorm();
    for (int k = 1; k <= 7; ++k) {
        const double lhs = w_reconstruction(m, X, k) +
                           (X.rows() - 1) * m.variances.head(k).sum();
        CHECK(lhs == doctest::Approx(total).epsilon(1e-6));
    }
}

TEST_CASE("sample_reference stays inside the bounding box and keeps constants") {
    Rng rng(18);
    Eigen::MatrixXd X = oracles::gaussian_matrix(40, 5, rng);
    X.col(2).setConstant(3.25);
    Rng sample_rng(1);
    const Eigen::MatrixXd ref = sample_reference(X, sample_rng);
    for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(ref.col(j).minCoeff() >= X.col(j).minCoeff());
        CHECK(ref.col(j).maxCoeff() <= X.col(j).maxCoeff());
    }
    CHECK((ref.col(2).array() == 3.25).all());

    Rng again(1);
    const Eigen::MatrixXd ref2 = sample_reference(X, again);
    CHECK((ref - ref2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pc-aligned reference sampling spans the score box") {
    Rng rng(19);
    const Eigen::MatrixXd X = oracles::planted_rank2(100, 6, 5.0, 0.1, rng);
    const PcaModel m = fit_pca(X);
    Rng sample_rng(2);
    const Eigen::MatrixXd ref = sample_reference_pca(X, m, sample_rng);
    const Eigen::MatrixXd data_scores = (X.rowwise() - m.center.transpose()) * m.components;
    const Eigen::MatrixXd ref_scores = (ref.rowwise() - m.center.transpose()) * m.components;
    for (Eigen::Index j = 0; j < 6; ++j) {
        CHECK(ref_scores.col(j).minCoeff() >= data_scores.col(j).minCoeff() - 1e-9);
        CHECK(ref_scores.col(j).maxCoeff() <= data_scores.col(j).maxCoeff() + 1e-9);
    }
}

TEST_CASE("selection rule: direct evaluation on a two-point stub") {
    // reconstruction error: 0.5 >= 0.3 - 0.1 holds at k = 1
    auto [k_re, flag_re] = select_k(GapVariant::ReconstructionError, {0.5, 0.3}, {0.05, 0.1});
    CHECK(k_re == 1);
    CHECK_FALSE(flag_re);

    // explained variation wants the opposite direction
    auto [k_ev, flag_ev] = select_k(GapVariant::ExplainedVariation, {0.5, 0.3}, {0.05, 0.1});
    CHECK(k_ev == 2);
    CHECK(flag_ev);

    auto [k_ev2, flag_ev2] = select_k(GapVariant::ExplainedVariation, {-2.0, -0.5}, {0.05, 0.1});
    CHECK(k_ev2 == 1);
    CHECK_FALSE(flag_ev2);
}

TEST_CASE("gap test recovers planted rank-2 structure") {
    Rng data_rng(21);
    const Eigen::MatrixXd X = oracles::planted_rank2(500, 20, 10.0, 0.1, data_rng);
    GapOptions opts;
    opts.B = 20;

    Rng re_rng(100);
    const GapReport re = gap_test(X, GapVariant::ReconstructionError, opts, re_rng);
    CHECK(re.k_star == 2);

    Rng ev_rng(101);
    const GapReport ev = gap_test(X, GapVariant::ExplainedVariation, opts, ev_rng);
    CHECK(ev.k_star == 2);
}

TEST_CASE("gap report internal consistency") {
    Rng data_rng(22);
    const Eigen::MatrixXd X = oracles::planted_rank2(120, 8, 4.0, 0.2, data_rng);
    GapOptions opts;
    opts.B = 5;
    Rng rng(7);
    const GapReport r = gap_test(X, GapVariant::ReconstructionError, opts, rng);
    REQUIRE(r.gap.size() == 8);
    const double inflation = std::sqrt(1.0 + 1.0 / 5.0);
    for (std::size_t k = 0; k < r.gap.size(); ++k) {
        CHECK(r.gap[k] == r.expected_log_w[k] - r.log_w[k]);
        CHECK(r.se[k] == inflation * r.sd[k]);
    }
    CHECK(r.k_star >= 1);
    CHECK(r.k_star <= 8);
}

TEST_CASE("gap test is reproducible and thread-count invariant") {
    Rng data_rng(23);
    const Eigen::MatrixXd X = oracles::planted_rank2(80, 6, 3.0, 0.3, data_rng);

    GapOptions seq;
    seq.B = 8;
    Rng r1(55);
    const GapReport a = gap_test(X, GapVariant::ReconstructionError, seq, r1);
    Rng r2(55);
    const GapReport b = gap_test(X, GapVariant::ReconstructionError, seq, r2);

    GapOptions par = seq;
    par.threads = 4;
    Rng r3(55);
    const GapReport c = gap_test(X, GapVariant::ReconstructionError, par, r3);

    REQUIRE(a.gap.size() == b.gap.size());
    REQUIRE(a.gap.size() == c.gap.size());
    for (std::size_t k = 0; k < a.gap.size(); ++k) {
        CHECK(a.gap[k] == b.gap[k]);
        CHECK(a.se[k] == b.se[k]);
        CHECK(a.gap[k] == c.gap[k]);
        CHECK(a.se[k] == c.se[k]);
    }
    CHECK(a.k_star == b.k_star);
    CHECK(a.k_star == c.k_star);
}

TEST_CASE("gap test argument contracts") {
    Rng rng(24);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(20, 4, rng);
    GapOptions opts;
    opts.B = 1;
    Rng r(1);
    CHECK_THROWS_AS((void)gap_test(X, GapVariant::ReconstructionError, opts, r), Error);
    opts.B = 5;
    opts.k_max = 1;
    CHECK_THROWS_AS((void)gap_test(X, GapVariant::ReconstructionError, opts, r), Error);
    opts.k_max = 5;
    CHECK_THROWS_AS((void)gap_test(X, GapVariant::ReconstructionError, opts, r), Error);
}

TEST_CASE("project and reconstruct reject out-of-range k") {
    Rng rng(25);
    const Eigen::MatrixXd X = oracles::gaussian_matrix(10, 3, rng);
    const PcaModel m = fit_pca(X);
    CHECK_THROWS_AS((void)project(m, X, 0), Error);
    CHECK_THROWS_AS((void)project(m, X, 4), Error);
    CHECK_THROWS_AS((void)reconstruct(m, X, 4), Error);
    CHECK_THROWS_AS((void)w_reconstruction(m, X, 0), Error);
    CHECK_THROWS_AS((void)w_explained(m, 4), Error);
}

TEST_CASE("fit_pca rejects non-finite input") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 2);
    X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)fit_pca(X), Error);
}
