#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frilift/fri_signals.hpp"
#include "frilift/numeric.hpp"
#include "frilift/structured_matrix.hpp"
#include "frilift/weighting.hpp"

namespace frilift {

/// Estimated signal poles with multiplicities and the mapped locations
/// t = (-arg lambda / 2 pi) mod 1, sorted by location.
struct PoleEstimate {
    std::vector<cx> poles;
    std::vector<int> multiplicities;
    std::vector<double> locations;
};

struct PencilOptions {
    double cluster_radius = 1e-4;    // eigenvalues closer than this merge
    bool project_unit_circle = false;
    double rank_eps = 1e-12;         // deficiency threshold for the shifted subspace
};

/// Matrix-pencil pole extraction. W holds the top-r left singular vectors
/// of the lifted spectrum; the shift-invariance system W_down Phi = W_up
/// (last/first row dropped) is solved in the least-squares sense and the
/// eigenvalues of Phi give the poles. Nearby eigenvalues are clustered
/// into multiple poles.
inline PoleEstimate matrix_pencil(const CxVector& spectrum, const StructuredLift& lift_,
                                  Index rank, const PencilOptions& opts = {}) {
    if (rank < 1) throw std::invalid_argument("matrix_pencil: rank must be positive");
    if (rank >= std::min(lift_.rows(), lift_.cols())) {
        throw std::invalid_argument("matrix_pencil: rank exceeds the pencil bound min(n1,n2)-1");
    }
    const CxMatrix M = lift(spectrum, lift_);
    Eigen::JacobiSVD<CxMatrix> svd(M, Eigen::ComputeThinU);
    const CxMatrix W = svd.matrixU().leftCols(rank);
    const Index rows = W.rows();
    const CxMatrix Wdown = W.topRows(rows - 1);
    const CxMatrix Wup = W.bottomRows(rows - 1);

    Eigen::JacobiSVD<CxMatrix> dsvd(Wdown, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = dsvd.singularValues();
    if (sig[rank - 1] <= opts.rank_eps * sig[0]) {
        throw std::runtime_error("matrix_pencil: shifted subspace is rank deficient (cond=" +
                                 std::to_string(sig[0] / std::max(sig[rank - 1], 1e-300)) + ")");
    }
    const CxMatrix Phi = dsvd.solve(Wup);

    Eigen::ComplexEigenSolver<CxMatrix> eig(Phi);
    std::vector<cx> raw(eig.eigenvalues().data(), eig.eigenvalues().data() + rank);

    // greedy union-find clustering with the given radius
    std::vector<Index> parent(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) parent[i] = Index(i);
    std::function<Index(Index)> find = [&](Index a) {
        while (parent[size_t(a)] != a) a = parent[size_t(a)] = parent[size_t(parent[size_t(a)])];
        return a;
    };
    for (size_t i = 0; i < raw.size(); ++i) {
        for (size_t j = i + 1; j < raw.size(); ++j) {
            if (std::abs(raw[i] - raw[j]) <= opts.cluster_radius) {
                parent[size_t(find(Index(j)))] = find(Index(i));
            }
        }
    }
    std::map<Index, std::vector<cx>> clusters;
    for (size_t i = 0; i < raw.size(); ++i) clusters[find(Index(i))].push_back(raw[i]);

    PoleEstimate out;
    for (auto& [root, members] : clusters) {
        (void)root;
        cx centroid = 0.0;
        for (const cx& z : members) centroid += z;
        centroid /= double(members.size());
        if (opts.project_unit_circle && std::abs(centroid) > 0.0) centroid /= std::abs(centroid);
        out.poles.push_back(centroid);
        out.multiplicities.push_back(int(members.size()));
    }
    // sort by mapped location for a stable ordering
    std::vector<size_t> order(out.poles.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto location_of = [](const cx& z) {
        double t = -std::arg(z) / (2.0 * pi);
        t -= std::floor(t);
        return t;
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return location_of(out.poles[a]) < location_of(out.poles[b]);
    });
    PoleEstimate sorted;
    for (size_t i : order) {
        sorted.poles.push_back(out.poles[i]);
        sorted.multiplicities.push_back(out.multiplicities[i]);
        sorted.locations.push_back(location_of(out.poles[i]));
    }
    return sorted;
}

/// Least-squares amplitudes for an estimated pole set: the model column
/// for pole lambda and derivative order l is (i 2 pi f_k)^l lambda^k, so
/// the returned stacks match the differentiated-Dirac parameterization.
/// Returns one amplitude stack per pole, aligned with the estimate.
inline std::vector<std::vector<cx>> amplitudes(const PoleEstimate& est, const CxVector& spectrum,
                                               bool centered = false) {
    const Index n = spectrum.size();
    Index r = 0;
    for (int m : est.multiplicities) r += m;
    if (r < 1) throw std::invalid_argument("amplitudes: empty pole estimate");
    if (n < r) throw std::invalid_argument("amplitudes: spectrum shorter than model order");

    CxMatrix A(n, r);
    Index col = 0;
    for (size_t j = 0; j < est.poles.size(); ++j) {
        for (int l = 0; l < est.multiplicities[j]; ++l) {
            cx p = 1.0;
            for (Index k = 0; k < n; ++k) {
                const double f = frequency_of_index(k, n, centered);
                A(k, col) = ipow(imag_unit * 2.0 * pi * f, l) * p;
                p *= est.poles[j];
            }
            ++col;
        }
    }
    Eigen::JacobiSVD<CxMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    const double cond = sig[0] / std::max(sig[r - 1], 1e-300);
    if (cond > 1e12) {
        throw std::runtime_error("amplitudes: ill-conditioned system (cond=" +
                                 std::to_string(cond) + ")");
    }
    const CxVector a = svd.solve(spectrum);
    std::vector<std::vector<cx>> out;
    col = 0;
    for (size_t j = 0; j < est.poles.size(); ++j) {
        std::vector<cx> stack;
        for (int l = 0; l < est.multiplicities[j]; ++l) stack.push_back(a[col++]);
        out.push_back(std::move(stack));
    }
    return out;
}

/// Time-domain reconstruction of a cardinal spline from its completed
/// weighted DFT: unweight, inverse DFT, and deconvolve the B-spline sample
/// filter in the DFT domain (periodic boundary). For order 0 the spline
/// coefficients equal the samples.
struct CardinalReconstruction {
    CxVector samples;       // x_d on the integer grid
    CxVector coefficients;  // B-spline coefficients c
};

inline CardinalReconstruction reconstruct_cardinal(const CxVector& g, const WhiteningSpec& spec,
                                                   Index n,
                                                   const std::map<Index, cx>& null_values) {
    if (spec.kind != WhiteningKind::DiscreteDifference) {
        throw std::invalid_argument("reconstruct_cardinal: whitening must be DiscreteDifference");
    }
    if (g.size() != n) throw std::invalid_argument("reconstruct_cardinal: length mismatch");
    const CxVector lhat = weight_spectrum(spec, n);
    const CxVector xhat = unweight(g, lhat, null_values);

    const BsplineFilter b = bspline_filter(spec.order);
    const CxVector bhat = bspline_filter_dft(b, n);
    const double bmin = bhat.cwiseAbs().minCoeff();
    if (bmin <= 1e-9 * bhat.cwiseAbs().maxCoeff()) {
        throw std::runtime_error("reconstruct_cardinal: B-spline filter has a grid null");
    }
    CardinalReconstruction out;
    out.samples = idft(xhat);
    out.coefficients = idft(CxVector(xhat.cwiseQuotient(bhat)));
    return out;
}

/// Incoherence analysis of a lifted spectrum. The empirical value comes
/// from the rank-r singular subspaces; the upper bounds require the model
/// (pole multiplicities and the minimum separation).
struct IncoherenceReport {
    double mu_empirical = 0.0;
    std::optional<double> mu_bound_vandermonde;
    std::optional<double> mu_bound_moitra;
    std::string moitra_absent_reason;
    std::optional<std::pair<double, double>> zeta_values;  // (zeta_{n1}, zeta_{n2})
};

namespace detail {

/// zeta_N = N [ (N-1)! / (N-l_max)! ]^2 as a falling-factorial product.
inline double zeta_constant(Index N, int l_max) {
    double fall = 1.0;
    for (int i = 0; i < l_max - 1; ++i) fall *= double(N - 1 - i);
    return double(N) * fall * fall;
}

inline double min_eig_gram(const CxMatrix& V) {
    Eigen::JacobiSVD<CxMatrix> svd(V);
    const double s = svd.singularValues()[svd.singularValues().size() - 1];
    return s * s;
}

}  // namespace detail

inline IncoherenceReport incoherence(const CxVector& spectrum, const StructuredLift& lift_,
                                     Index rank, const FriModel* model = nullptr,
                                     double rank_eps = 1e-8) {
    if (rank < 1) throw std::invalid_argument("incoherence: rank must be positive");
    const CxMatrix M = lift(spectrum, lift_);
    Eigen::JacobiSVD<CxMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sig = svd.singularValues();
    if (rank > sig.size() || sig[rank - 1] <= rank_eps * sig[0]) {
        throw std::invalid_argument("incoherence: rank exceeds the numerical rank of the lift");
    }
    const CxMatrix U = svd.matrixU().leftCols(rank);
    const CxMatrix V = svd.matrixV().leftCols(rank);
    const double n1 = double(lift_.rows()), n2 = double(lift_.cols());

    IncoherenceReport rep;
    double mu = 0.0;
    for (Index i = 0; i < U.rows(); ++i) mu = std::max(mu, n1 * U.row(i).squaredNorm() / double(rank));
    for (Index j = 0; j < V.rows(); ++j) mu = std::max(mu, n2 * V.row(j).squaredNorm() / double(rank));
    rep.mu_empirical = mu;

    if (model == nullptr) {
        rep.moitra_absent_reason = "model not provided";
        return rep;
    }

    const auto poles = model_poles(*model);
    int l_max = 1;
    std::vector<double> locations;
    for (const auto& [pole, mult] : poles) {
        l_max = std::max(l_max, mult);
        double t = -std::arg(pole) / (2.0 * pi);
        t -= std::floor(t);
        locations.push_back(t);
    }

    const double zeta1 = detail::zeta_constant(lift_.rows(), l_max);
    const double zeta2 = detail::zeta_constant(lift_.cols(), l_max);
    rep.zeta_values = std::make_pair(zeta1, zeta2);
    const CxMatrix V1 = confluent_vandermonde(poles, lift_.rows());
    const CxMatrix V2 = confluent_vandermonde(poles, lift_.cols());
    rep.mu_bound_vandermonde =
        std::max(zeta1 / detail::min_eig_gram(V1), zeta2 / detail::min_eig_gram(V2));

    if (l_max > 1) {
        rep.moitra_absent_reason = "poles are not all simple";
    } else if (locations.size() < 2) {
        rep.moitra_absent_reason = "minimum separation undefined for a single pole";
    } else {
        const double delta = min_separation(locations);
        const double half = double(lift_.n) / 2.0;
        if (half <= 1.0 / delta + 1.0) {
            rep.moitra_absent_reason =
                "outside validity regime: n/2 <= 1/separation + 1";
        } else {
            rep.mu_bound_moitra = half / (half - 1.0 / delta - 1.0);
        }
    }
    return rep;
}

}  // namespace frilift
