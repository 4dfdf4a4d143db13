#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "frilift/numeric.hpp"

namespace frilift {

enum class LiftKind { StandardHankel, WrapAroundHankel };

/// Descriptor of the linear lifting from a length-n vector to a structured
/// matrix. StandardHankel maps to an (n-d+1) x d Hankel matrix; the
/// wrap-around variant continues past the end of the vector periodically
/// and has shape n x d.
struct StructuredLift {
    LiftKind kind = LiftKind::StandardHankel;
    Index n = 1;
    Index d = 1;

    StructuredLift() = default;
    StructuredLift(LiftKind kind_, Index n_, Index d_) : kind(kind_), n(n_), d(d_) {
        if (n < 1 || d < 1 || d > n) {
            throw std::invalid_argument("StructuredLift: require 1 <= d <= n");
        }
    }

    Index rows() const { return kind == LiftKind::StandardHankel ? n - d + 1 : n; }
    Index cols() const { return d; }
};

/// Multiset of observed frequency indices with their complex values.
struct SampleSet {
    Index n = 0;
    std::vector<Index> indices;
    CxVector values;
    bool dc_forced = false;
};

inline void validate(const SampleSet& samples) {
    if (samples.n < 1) throw std::invalid_argument("SampleSet: n must be positive");
    if (Index(samples.indices.size()) != samples.values.size()) {
        throw std::invalid_argument("SampleSet: indices/values length mismatch");
    }
    for (Index k : samples.indices) {
        if (k < 0 || k >= samples.n) {
            throw std::invalid_argument("SampleSet: index out of range");
        }
    }
}

/// Anti-diagonal class of cell (i, j): the vector index it reads from.
inline Index antidiagonal_class(Index i, Index j, const StructuredLift& lift) {
    return lift.kind == LiftKind::StandardHankel ? i + j : (i + j) % lift.n;
}

/// Number of matrix cells fed by x[k].
inline Index multiplicity(Index k, const StructuredLift& lift) {
    if (k < 0 || k >= lift.n) throw std::invalid_argument("multiplicity: index out of range");
    if (lift.kind == LiftKind::WrapAroundHankel) return lift.d;
    return std::min({k + 1, lift.d, lift.n - lift.d + 1, lift.n - k});
}

/// Lift a vector into its structured matrix.
inline CxMatrix lift(const CxVector& x, const StructuredLift& lift_) {
    if (x.size() != lift_.n) throw std::invalid_argument("lift: dimension mismatch");
    CxMatrix M(lift_.rows(), lift_.cols());
    for (Index j = 0; j < M.cols(); ++j) {
        for (Index i = 0; i < M.rows(); ++i) {
            M(i, j) = x[antidiagonal_class(i, j, lift_)];
        }
    }
    return M;
}

/// Adjoint of the lifting: sums matrix entries over each anti-diagonal
/// class, so that <lift(x), M> = <x, adjoint(M)> for all x and M.
inline CxVector adjoint(const CxMatrix& M, const StructuredLift& lift_) {
    if (M.rows() != lift_.rows() || M.cols() != lift_.cols()) {
        throw std::invalid_argument("adjoint: shape mismatch");
    }
    CxVector v = CxVector::Zero(lift_.n);
    for (Index j = 0; j < M.cols(); ++j) {
        for (Index i = 0; i < M.rows(); ++i) {
            v[antidiagonal_class(i, j, lift_)] += M(i, j);
        }
    }
    return v;
}

/// Moore-Penrose pseudo-inverse of the lifting: averages each
/// anti-diagonal class. Exact because the lifting's normal operator is
/// diagonal with the multiplicities on the diagonal.
inline CxVector pseudo_inverse(const CxMatrix& M, const StructuredLift& lift_) {
    CxVector v = adjoint(M, lift_);
    for (Index k = 0; k < lift_.n; ++k) v[k] /= double(multiplicity(k, lift_));
    return v;
}

/// Orthonormal basis element A_k = lift(e_k) / sqrt(multiplicity(k)).
/// Unit Frobenius norm; all nonzero entries equal.
inline CxMatrix basis_element(Index k, const StructuredLift& lift_) {
    if (k < 0 || k >= lift_.n) throw std::invalid_argument("basis_element: index out of range");
    CxVector e = CxVector::Zero(lift_.n);
    e[k] = 1.0 / std::sqrt(double(multiplicity(k, lift_)));
    return lift(e, lift_);
}

enum class ProjectMode { KeepSampled, KeepComplement };

/// Sampling projection onto the distinct support of the index multiset
/// (or its complement). The two modes sum to the identity.
inline CxVector project(const CxVector& x, const SampleSet& samples, ProjectMode mode) {
    if (x.size() != samples.n) throw std::invalid_argument("project: dimension mismatch");
    std::vector<char> sampled(size_t(samples.n), 0);
    for (Index k : samples.indices) {
        if (k < 0 || k >= samples.n) throw std::invalid_argument("project: index out of range");
        sampled[size_t(k)] = 1;
    }
    CxVector out = CxVector::Zero(samples.n);
    for (Index k = 0; k < samples.n; ++k) {
        const bool keep = (mode == ProjectMode::KeepSampled) ? bool(sampled[size_t(k)])
                                                             : !bool(sampled[size_t(k)]);
        if (keep) out[k] = x[k];
    }
    return out;
}

}  // namespace frilift
