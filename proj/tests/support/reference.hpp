// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <Eigen/SVD>

#include <random>
#include <vector>

#include "frilift/numeric.hpp"
#include "frilift/structured_matrix.hpp"

namespace frilift::testing {

/// Brute-force multiplicity: count the matrix cells whose anti-diagonal
/// class equals k by enumerating every cell.
inline Index count_cells(Index k, const StructuredLift& lift) {
    Index count = 0;
    for (Index j = 0; j < lift.cols(); ++j) {
        for (Index i = 0; i < lift.rows(); ++i) {
            if (antidiagonal_class(i, j, lift) == k) ++count;
        }
    }
    return count;
}

/// Convex reference solver for min ||lift(g)||_* s.t. P_Omega(g) = b,
/// run by ADMM with an exact singular-value-thresholding proximal step.
/// Intended for tiny instances only; iterated to a tight tolerance so it
/// serves as an exhaustive-accuracy oracle for the factorization solver.
inline CxVector svt_reference_completion(const SampleSet& samples, const StructuredLift& lift_,
                                         double rho = 1.0, Index max_iter = 20000,
                                         double tol = 1e-12) {
    std::vector<char> sampled(size_t(lift_.n), 0);
    CxVector y = CxVector::Zero(lift_.n);
    for (size_t i = 0; i < samples.indices.size(); ++i) {
        sampled[size_t(samples.indices[i])] = 1;
        y[samples.indices[i]] = samples.values[Index(i)];
    }
    CxVector g = y;
    CxMatrix M = lift(g, lift_);
    CxMatrix Lambda = CxMatrix::Zero(lift_.rows(), lift_.cols());

    for (Index it = 0; it < max_iter; ++it) {
        // proximal step: soft-threshold the singular values of lift(g) + Lambda
        Eigen::JacobiSVD<CxMatrix> svd(lift(g, lift_) + Lambda,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd s = svd.singularValues();
        for (Index i = 0; i < s.size(); ++i) s[i] = std::max(0.0, s[i] - 1.0 / rho);
        M = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();

        CxVector gnew = pseudo_inverse(M - Lambda, lift_);
        for (Index k = 0; k < lift_.n; ++k) {
            if (sampled[size_t(k)]) gnew[k] = y[k];
        }
        const double change = (gnew - g).norm() / std::max(g.norm(), 1e-300);
        g = std::move(gnew);
        Lambda += lift(g, lift_) - M;
        if (change < tol && it > 10) break;
    }
    return g;
}

inline CxVector random_unit_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CxVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = cx(gauss(rng), gauss(rng));
    return v / v.norm();
}

/// Locations on [0,1) with pairwise wrap-around separation >= min_sep,
/// drawn by rejection.
inline std::vector<double> random_locations(int count, double min_sep, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> t;
        for (int i = 0; i < count; ++i) t.push_back(unif(rng));
        bool ok = true;
        for (size_t i = 0; i < t.size() && ok; ++i) {
            for (size_t j = i + 1; j < t.size(); ++j) {
                double diff = std::abs(t[i] - t[j]);
                diff = std::min(diff, 1.0 - diff);
                if (diff < min_sep) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return t;
    }
    throw std::runtime_error("random_locations: rejection sampling failed");
}

inline cx random_amplitude(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    return std::polar(mag(rng), phase(rng));
}

}  // namespace frilift::testing
