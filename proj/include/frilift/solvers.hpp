#pragma once

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "frilift/numeric.hpp"
#include "frilift/structured_matrix.hpp"

namespace frilift {

/// Knobs of the factorization-based completion. `penalty` is the ADMM
/// penalty, `data_weight` the measurement-fidelity weight of the noisy
/// variant; `init_*` control the LMaFit warm start.
struct SolverParams {
    double penalty = 1e3;
    double data_weight = 1e5;
    Index rank_cap = 0;  // must be set before solving
    Index max_iter = 500;
    double tol = 1e-9;
    double init_tol = 1e-4;
    Index init_max_iter = 100;
    double init_relax = 0.5;
    std::uint64_t seed = 0;
};

inline void validate(const SolverParams& p, const StructuredLift& lift) {
    if (p.penalty <= 0.0 || p.data_weight <= 0.0) {
        throw std::invalid_argument("SolverParams: weights must be positive");
    }
    if (p.rank_cap < 1 || p.rank_cap > std::min(lift.rows(), lift.cols())) {
        throw std::invalid_argument("SolverParams: rank_cap must lie in [1, min(n1,n2)]");
    }
    if (p.max_iter < 1 || p.init_max_iter < 1) {
        throw std::invalid_argument("SolverParams: iteration budgets must be positive");
    }
    if (p.tol < 0.0 || p.init_tol <= 0.0) {
        throw std::invalid_argument("SolverParams: tolerances must be positive");
    }
    if (p.init_relax <= 0.0 || p.init_relax > 1.0) {
        throw std::invalid_argument("SolverParams: init_relax must lie in (0,1]");
    }
}

/// rank_cap convention: r+2 when the model order is known, else a quarter
/// of the pencil bound.
inline Index default_rank_cap(const StructuredLift& lift, Index known_order = -1) {
    const Index bound = std::min(lift.rows(), lift.cols());
    if (known_order >= 1) return std::min(known_order + 2, bound);
    return std::max<Index>(1, bound / 4);
}

namespace detail {

/// Observations aligned to the ambient grid. Duplicate indices of the
/// multiset are averaged; the constraint set only sees distinct support.
struct ObservedData {
    CxVector y;                 // zero-filled length n
    std::vector<char> sampled;  // 0/1 mask, length n
};

inline ObservedData build_observed(const SampleSet& samples) {
    validate(samples);
    ObservedData out;
    out.y = CxVector::Zero(samples.n);
    out.sampled.assign(size_t(samples.n), 0);
    std::vector<int> count(size_t(samples.n), 0);
    for (size_t i = 0; i < samples.indices.size(); ++i) {
        const Index k = samples.indices[i];
        out.y[k] += samples.values[Index(i)];
        ++count[size_t(k)];
        out.sampled[size_t(k)] = 1;
    }
    for (Index k = 0; k < samples.n; ++k) {
        if (count[size_t(k)] > 1) out.y[k] /= double(count[size_t(k)]);
    }
    return out;
}

inline CxMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CxMatrix M(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            M(i, j) = cx(gauss(rng), gauss(rng)) / std::sqrt(2.0);
        }
    }
    return M;
}

/// Thin orthonormal factor of W together with the pivoted R diagonal.
inline void thin_qr(const CxMatrix& W, CxMatrix& Q, Eigen::VectorXd& rdiag) {
    Eigen::ColPivHouseholderQR<CxMatrix> qr(W);
    const Index k = W.cols();
    Q = qr.householderQ() * CxMatrix::Identity(W.rows(), k);
    rdiag = qr.matrixQR().diagonal().head(k).cwiseAbs();
}

/// Last decay gap (ratio > 10) of a non-increasing magnitude profile whose
/// dropped tail is numerically negligible; 0 when no safe cut exists.
inline Index safe_rank_cut(const Eigen::VectorXd& mags) {
    Index cut = 0;
    const double top = std::max(mags[0], 1e-300);
    for (Index i = 0; i + 1 < mags.size(); ++i) {
        const double ratio = mags[i] / std::max(mags[i + 1], 1e-300);
        if (ratio > 10.0 && mags[i + 1] <= 1e-6 * top) cut = i + 1;
    }
    return cut;
}

/// Rebalance the factor pair through small QRs and drop directions that
/// carry a negligible share of the product's spectrum. The slow tail of
/// the iteration lives in those directions; removing them once they are
/// numerically dead accelerates convergence without touching the iterate.
inline void truncate_factors(CxMatrix& U, CxMatrix& V) {
    const Index k = U.cols();
    if (k <= 1) return;
    Eigen::HouseholderQR<CxMatrix> qu(U), qv(V);
    const CxMatrix Ru = qu.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const CxMatrix Rv = qv.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<CxMatrix> svd(Ru * Rv.adjoint(),
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Index cut = safe_rank_cut(svd.singularValues());
    if (cut == 0 || cut >= k) return;
    const Eigen::VectorXd root = svd.singularValues().head(cut).cwiseSqrt();
    const CxMatrix Qu = qu.householderQ() * CxMatrix::Identity(U.rows(), k);
    const CxMatrix Qv = qv.householderQ() * CxMatrix::Identity(V.rows(), k);
    U = Qu * svd.matrixU().leftCols(cut) * root.asDiagonal();
    V = Qv * svd.matrixV().leftCols(cut) * root.asDiagonal();
}

}  // namespace detail

/// LMaFit-style warm start: alternating least squares on the partially
/// known lifted matrix.
struct FactorPair {
    CxMatrix U;
    CxMatrix V;
    Index iterations = 0;
    double residual = 0.0;
};

/// Solve min 1/2 ||U V^H - Z||_F^2 with the known entries of Z pinned to
/// the lifted observations. Each sweep orthonormalizes U by a pivoted QR,
/// re-imposes the known entries, and relaxes the iterate by averaging the
/// previous and current Z. The factor rank starts at rank_cap and shrinks
/// once at the last decay gap of the pivoted R diagonal (ratio above 10),
/// provided the dropped tail is numerically negligible; signal spectra can
/// have large gaps between genuine singular values, so a gap alone is not
/// evidence of rank deficiency.
inline FactorPair lmafit_init(const SampleSet& samples, const StructuredLift& lift_,
                              Index rank_cap, double init_tol, Index max_iter,
                              std::uint64_t seed, double relax = 0.5) {
    if (rank_cap < 1 || rank_cap > std::min(lift_.rows(), lift_.cols())) {
        throw std::invalid_argument("lmafit_init: rank_cap exceeds matrix dimensions");
    }
    const auto obs = detail::build_observed(samples);
    const Index n1 = lift_.rows(), n2 = lift_.cols();

    // mask of known matrix cells (anti-diagonal classes on the support)
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> known(n1, n2);
    for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < n1; ++i) {
            known(i, j) = bool(obs.sampled[size_t(antidiagonal_class(i, j, lift_))]);
        }
    }
    const CxMatrix Zknown = lift(obs.y, lift_);
    const double known_norm = Zknown.norm();

    FactorPair out;
    if (known_norm == 0.0) {
        out.U = CxMatrix::Zero(n1, rank_cap);
        out.V = CxMatrix::Zero(n2, rank_cap);
        out.iterations = 1;
        out.residual = 0.0;
        return out;
    }

    std::mt19937_64 rng(seed);
    Index k = rank_cap;
    CxMatrix V = detail::random_complex(n2, k, rng);
    CxMatrix U, Z = Zknown;
    bool rank_adjusted = false;

    Index it = 0;
    for (it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd rdiag;
        detail::thin_qr(Z * V, U, rdiag);

        if (!rank_adjusted && k > 1 && it >= 3) {
            const Index cut = detail::safe_rank_cut(rdiag);
            if (cut > 0 && cut < k) {
                k = cut;
                U = U.leftCols(k).eval();
                rank_adjusted = true;
            }
        }

        CxMatrix Vnew = Z.adjoint() * U;
        CxMatrix Znew = U * Vnew.adjoint();
        Znew = known.select(Zknown, Znew);
        const double change = (Znew - Z).norm() / std::max(Z.norm(), 1e-300);
        Z = relax * Znew + (1.0 - relax) * Z;
        Z = known.select(Zknown, Z);
        V = std::move(Vnew);
        if (change < init_tol) break;
    }

    out.U = std::move(U);
    out.V = std::move(V);
    out.iterations = std::min(it, max_iter);
    out.residual = (out.U * out.V.adjoint() - Z).norm() / Z.norm();
    return out;
}

/// Outcome of a completion run. `g` is the completed spectrum in the
/// domain the solver saw (still weighted when the caller weighted the
/// samples). The factor matrices are kept for diagnostics.
struct CompletionResult {
    CxVector g;
    Index iterations = 0;
    double final_residual = 0.0;
    Index factor_rank = 0;
    CxMatrix U;
    CxMatrix V;
};

namespace detail {

inline CompletionResult complete_impl(const SampleSet& samples, const StructuredLift& lift_,
                                      const SolverParams& params, bool noisy) {
    validate(params, lift_);
    if (samples.indices.empty()) {
        throw std::invalid_argument("complete: at least one measurement required");
    }

    // Normalize the data scale: scaling the measurements by c is equivalent
    // to scaling the penalty by c, so without this the iteration behaves
    // differently on large-magnitude (e.g. derivative-weighted) spectra.
    // The normalized problem is the original one exactly; the data weight is
    // rescaled so the noisy objective is preserved at the original scale.
    auto obs = build_observed(samples);
    const CxVector y_original = obs.y;
    const double scale = std::max(obs.y.cwiseAbs().maxCoeff(), 1e-300);
    obs.y /= scale;
    SampleSet scaled = samples;
    scaled.values /= scale;

    FactorPair init = lmafit_init(scaled, lift_, params.rank_cap, params.init_tol,
                                  params.init_max_iter, params.seed, params.init_relax);
    CxMatrix U = std::move(init.U);
    CxMatrix V = std::move(init.V);
    CxMatrix Lambda = CxMatrix::Zero(lift_.rows(), lift_.cols());
    CxVector g = obs.y;

    Eigen::VectorXd mult(lift_.n);
    for (Index i = 0; i < lift_.n; ++i) mult[i] = double(multiplicity(i, lift_));

    const double mu = params.penalty;
    const double lambda = params.data_weight * scale;
    double rel = std::numeric_limits<double>::infinity();
    Index done = 0;

    for (Index it = 1; it <= params.max_iter; ++it) {
        const CxMatrix W = U * V.adjoint() - Lambda;
        const CxVector adj = adjoint(W, lift_);
        CxVector gnew(lift_.n);
        for (Index i = 0; i < lift_.n; ++i) {
            if (!obs.sampled[size_t(i)]) {
                gnew[i] = adj[i] / mult[i];
            } else if (noisy) {
                gnew[i] = (lambda * obs.y[i] + mu * adj[i]) / (lambda + mu * mult[i]);
            } else {
                gnew[i] = obs.y[i];
            }
        }
        rel = (gnew - g).norm() / std::max(g.norm(), 1e-300);
        g = std::move(gnew);

        const CxMatrix Y = lift(g, lift_);
        const CxMatrix B = Y + Lambda;
        const Index k = U.cols();
        // U <- mu B V (I + mu V^H V)^{-1}; the Gram system is Hermitian
        // positive definite, solved by Cholesky rather than inversion.
        {
            CxMatrix G = CxMatrix::Identity(k, k) + mu * (V.adjoint() * V);
            CxMatrix C = mu * (B * V);
            U = G.llt().solve(C.adjoint()).adjoint();
        }
        {
            CxMatrix G = CxMatrix::Identity(k, k) + mu * (U.adjoint() * U);
            CxMatrix C = mu * (B.adjoint() * U);
            V = G.llt().solve(C.adjoint()).adjoint();
        }
        const CxMatrix gap = Y - U * V.adjoint();
        Lambda += gap;
        done = it;
        // Converged only when the iterate has settled AND the factors agree
        // with the lifted iterate; the dual gap decays ~penalty times slower
        // than the g-change.
        if (rel < params.tol && gap.norm() <= 10.0 * params.tol * Y.norm()) break;
        if (it % 25 == 0) detail::truncate_factors(U, V);
    }

    CompletionResult out;
    out.g = scale * g;
    if (!noisy) {
        // the equality constraint holds exactly, free of rescaling round-off
        for (Index i = 0; i < lift_.n; ++i) {
            if (obs.sampled[size_t(i)]) out.g[i] = y_original[i];
        }
    }
    out.iterations = done;
    out.final_residual = rel;
    out.factor_rank = U.cols();
    out.U = std::sqrt(scale) * U;
    out.V = std::sqrt(scale) * V;
    return out;
}

}  // namespace detail

/// Equality-constrained completion: the observed entries of g are pinned
/// to the measurements at every iterate.
inline CompletionResult complete_noiseless(const SampleSet& samples, const StructuredLift& lift_,
                                           const SolverParams& params) {
    return detail::complete_impl(samples, lift_, params, false);
}

/// Noisy variant: the observed entries relax toward the measurements with
/// weight data_weight instead of being pinned.
inline CompletionResult complete_noisy(const SampleSet& samples, const StructuredLift& lift_,
                                       const SolverParams& params) {
    return detail::complete_impl(samples, lift_, params, true);
}

}  // namespace frilift
