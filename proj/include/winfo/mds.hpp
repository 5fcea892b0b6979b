#pragma once

// Classical (Torgerson) multidimensional scaling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "winfo/core.hpp"

namespace winfo {

struct MdsEmbedding {
    std::size_t n = 0;
    std::size_t m = 0;
    Eigen::MatrixXd points;            // n x m, row i embeds input element i
    std::vector<double> eigenvalues;   // m values, non-increasing, clamped at 0
};

struct Eigenpairs {
    std::vector<double> values;   // non-increasing
    Eigen::MatrixXd vectors;      // n x m, unit columns
};

inline Eigen::MatrixXd squared(const DistanceMatrix& dm) {
    const auto n = static_cast<Eigen::Index>(dm.n());
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = dm(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            d2(i, j) = d * d;
        }
    return d2;
}

/// B = -1/2 J D2 J with J = I - 11'/n, applied as row then column mean removal.
inline Eigen::MatrixXd double_center(const Eigen::MatrixXd& d2) {
    if (d2.rows() != d2.cols()) throw AsymmetricInput("squared-distance matrix must be square");
    const Eigen::Index n = d2.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = d2(i, j), b = d2(j, i);
            if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
                throw AsymmetricInput("squared-distance matrix is not symmetric at (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
        }

    const Eigen::VectorXd row_mean = d2.rowwise().mean();
    const Eigen::RowVectorXd col_mean = d2.colwise().mean();
    const double grand = d2.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            b(i, j) = -0.5 * (d2(i, j) - row_mean(i) - col_mean(j) + grand);
    // symmetrize exactly; the two triangles can differ in the last bit
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) b(j, i) = b(i, j);
    return b;
}

/// The m algebraically largest eigenpairs of a symmetric matrix. Each pair
/// satisfies |Bv - lv| <= 1e-8 max(1, |l|), else ConvergenceError.
inline Eigenpairs top_eigenpairs(const Eigen::MatrixXd& b, std::size_t m) {
    const auto n = static_cast<std::size_t>(b.rows());
    if (b.rows() != b.cols()) throw InvalidArgument("matrix must be square");
    if (m == 0) throw RankError("requested zero eigenpairs");
    if (m > n) throw RankError("requested " + std::to_string(m) + " eigenpairs of a " +
                               std::to_string(n) + "x" + std::to_string(n) + " matrix");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    if (solver.info() != Eigen::Success) throw ConvergenceError(std::nan(""));

    Eigenpairs out;
    out.values.resize(m);
    out.vectors.resize(b.rows(), static_cast<Eigen::Index>(m));
    // ascending order from the solver
    for (std::size_t k = 0; k < m; ++k) {
        const auto src = static_cast<Eigen::Index>(n - 1 - k);
        Eigen::VectorXd v = solver.eigenvectors().col(src).normalized();
        // sign convention: largest-magnitude component positive
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        const double lambda = solver.eigenvalues()(src);
        const double residual = (b * v - lambda * v).norm();
        if (!(residual <= 1e-8 * std::max(1.0, std::abs(lambda)))) throw ConvergenceError(residual);
        out.values[k] = lambda;
        out.vectors.col(static_cast<Eigen::Index>(k)) = v;
    }
    return out;
}

/// Embeds the elements of dm into m dimensions. Negative eigenvalues are
/// clamped to zero; an all-zero distance matrix yields an all-zero embedding.
inline MdsEmbedding mds_embed(const DistanceMatrix& dm, std::size_t m) {
    const std::size_t n = dm.n();
    if (m == 0 || m > n) throw RankError("embedding dimension must be in [1, n]");

    MdsEmbedding e;
    e.n = n;
    e.m = m;
    bool all_zero = true;
    for (std::size_t i = 0; i < n && all_zero; ++i)
        for (double d : dm.row(i))
            if (d != 0.0) {
                all_zero = false;
                break;
            }
    if (all_zero) {
        e.points = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        e.eigenvalues.assign(m, 0.0);
        return e;
    }

    const auto pairs = top_eigenpairs(double_center(squared(dm)), m);
    if (std::all_of(pairs.values.begin(), pairs.values.end(), [](double l) { return l <= 0.0; }))
        throw DegenerateEmbedding("no positive eigenvalue among the top " + std::to_string(m));

    e.eigenvalues.resize(m);
    e.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = std::max(pairs.values[k], 0.0);
        e.eigenvalues[k] = lambda;
        e.points.col(static_cast<Eigen::Index>(k)) =
            pairs.vectors.col(static_cast<Eigen::Index>(k)) * std::sqrt(lambda);
    }
    return e;
}

/// Distance of each embedded point from the embedding centroid.
inline std::vector<double> centroid_radii(const Eigen::MatrixXd& points) {
    const Eigen::RowVectorXd c = points.colwise().mean();
    std::vector<double> r(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        r[static_cast<std::size_t>(i)] = (points.row(i) - c).norm();
    return r;
}

}  // namespace winfo
