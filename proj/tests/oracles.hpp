// Test-only oracles, kept independent of the library's computation paths:
// a cyclic Jacobi eigensolver, central finite differences, explicit
// normal equations, and small data generators.

#ifndef FEATLEARN_TESTS_ORACLES_HPP
#define FEATLEARN_TESTS_ORACLES_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "featlearn/rng.hpp"

namespace oracles {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
// descending. Deliberately not Eigen's tridiagonalization solver.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd A, int sweeps = 100,
                                              double tol = 1e-14) {
    const Eigen::Index n = A.rows();
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < tol * tol) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double aip = A(i, p);
                    const double aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double api = A(p, i);
                    const double aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = A(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

// Sample covariance (divisor n-1) formed explicitly.
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X) {
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(X.rows() - 1);
}

// Central finite difference of a scalar function of one coordinate.
template <typename F>
double central_difference(F&& f, double& coordinate, double step = 1e-5) {
    const double saved = coordinate;
    coordinate = saved + step;
    const double hi = f();
    coordinate = saved - step;
    const double lo = f();
    coordinate = saved;
    return (hi - lo) / (2.0 * step);
}

// Explicit normal equations (X'X)^-1 X'y with an intercept column.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd design(X.rows(), X.cols() + 1);
    design.leftCols(X.cols()) = X;
    design.col(X.cols()).setOnes();
    const Eigen::MatrixXd gram = design.transpose() * design;
    return gram.inverse() * (design.transpose() * y);
}

inline Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, featlearn::Rng& rng,
                                     double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = featlearn::uniform_real(rng, lo, hi);
    return X;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index n, Eigen::Index p, featlearn::Rng& rng) {
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = featlearn::normal(rng);
    return X;
}

// Rank-2 data: two orthogonal directions with the given component standard
// deviation plus isotropic noise.
inline Eigen::MatrixXd planted_rank2(Eigen::Index n, Eigen::Index p, double factor_sd,
                                     double noise_sd, featlearn::Rng& rng) {
    Eigen::VectorXd u1 = gaussian_matrix(p, 1, rng);
    u1.normalize();
    Eigen::VectorXd u2 = gaussian_matrix(p, 1, rng);
    u2 -= u1 * u1.dot(u2);
    u2.normalize();
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z1 = factor_sd * featlearn::normal(rng);
        const double z2 = factor_sd * featlearn::normal(rng);
        for (Eigen::Index j = 0; j < p; ++j)
            X(i, j) = z1 * u1(j) + z2 * u2(j) + noise_sd * featlearn::normal(rng);
    }
    return X;
}

} // namespace oracles

#endif
