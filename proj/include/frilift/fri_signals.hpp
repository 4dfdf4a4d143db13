#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "frilift/numeric.hpp"
#include "frilift/weighting.hpp"

namespace frilift {

enum class SignalKind {
    Diracs,
    DifferentiatedDiracs,
    NonUniformSpline,
    PiecewisePolynomial,
    CardinalSpline
};

/// One innovation location with its amplitude stack a_{j,0} .. a_{j,l_j-1}
/// (derivative orders for the differentiated kinds; a single entry
/// otherwise).
struct Spike {
    double t = 0.0;
    std::vector<cx> amplitudes;
};

/// Continuous-domain signal description. The meaning of the spikes depends
/// on the kind:
///  - Diracs: weighted impulses at off-grid locations t_j in [0,1).
///  - DifferentiatedDiracs: impulse derivative stacks at each location.
///  - NonUniformSpline: L x = sum a_j delta(t - t_j) with the whitening
///    operator given by `whitening`.
///  - PiecewisePolynomial: the (degree+1)-th derivative is a stream of
///    differentiated Diracs; each spike carries degree+1 amplitudes.
///  - CardinalSpline: innovation on the integer grid of size `grid`
///    (locations must be multiples of 1/grid), B-spline order `order`.
struct FriModel {
    SignalKind kind = SignalKind::Diracs;
    std::vector<Spike> spikes;
    WhiteningSpec whitening;  // NonUniformSpline only
    int degree = 0;           // PiecewisePolynomial only
    int order = 0;            // CardinalSpline only
    Index grid = 0;           // CardinalSpline only
};

namespace detail {

inline Index expected_amplitude_count(const FriModel& model, const Spike& s) {
    switch (model.kind) {
        case SignalKind::Diracs:
        case SignalKind::NonUniformSpline:
        case SignalKind::CardinalSpline:
            return 1;
        case SignalKind::PiecewisePolynomial:
            return Index(model.degree) + 1;
        case SignalKind::DifferentiatedDiracs:
            return Index(s.amplitudes.size());  // free per spike
    }
    return 1;
}

}  // namespace detail

inline void validate(const FriModel& model) {
    if (model.spikes.empty()) throw std::invalid_argument("FriModel: at least one spike required");
    for (size_t a = 0; a < model.spikes.size(); ++a) {
        const Spike& s = model.spikes[a];
        if (s.t < 0.0 || s.t >= 1.0) {
            throw std::invalid_argument("FriModel: spike locations must lie in [0,1)");
        }
        if (s.amplitudes.empty()) throw std::invalid_argument("FriModel: empty amplitude stack");
        if (Index(s.amplitudes.size()) != detail::expected_amplitude_count(model, s)) {
            throw std::invalid_argument("FriModel: amplitude stack size does not match kind");
        }
        if (s.amplitudes.back() == cx(0.0, 0.0)) {
            throw std::invalid_argument("FriModel: leading amplitude must be nonzero");
        }
        for (size_t b = a + 1; b < model.spikes.size(); ++b) {
            if (model.spikes[b].t == s.t) {
                throw std::invalid_argument("FriModel: spike locations must be distinct");
            }
        }
    }
    if (model.kind == SignalKind::PiecewisePolynomial && model.degree < 0) {
        throw std::invalid_argument("FriModel: degree must be >= 0");
    }
    if (model.kind == SignalKind::NonUniformSpline) validate(model.whitening);
    if (model.kind == SignalKind::CardinalSpline) {
        if (model.grid < 1) throw std::invalid_argument("FriModel: grid must be positive");
        if (model.order < 0) throw std::invalid_argument("FriModel: order must be >= 0");
        for (const Spike& s : model.spikes) {
            const double pos = s.t * double(model.grid);
            if (std::abs(pos - std::round(pos)) > 1e-9) {
                throw std::invalid_argument("FriModel: cardinal spikes must sit on the grid");
            }
        }
    }
}

/// Grid innovation a[p] of a cardinal model (length grid).
inline CxVector cardinal_innovation(const FriModel& model) {
    validate(model);
    if (model.kind != SignalKind::CardinalSpline) {
        throw std::invalid_argument("cardinal_innovation: model is not a cardinal spline");
    }
    CxVector a = CxVector::Zero(model.grid);
    for (const Spike& s : model.spikes) {
        a[Index(std::llround(s.t * double(model.grid))) % model.grid] += s.amplitudes[0];
    }
    return a;
}

/// Discrete innovation u_d = a (*) b_L (circular), the sequence whose DFT
/// the wrap-around Hankel lift annihilates.
inline CxVector cardinal_discrete_innovation(const FriModel& model) {
    const CxVector a = cardinal_innovation(model);
    const BsplineFilter b = bspline_filter(model.order);
    CxVector u = CxVector::Zero(model.grid);
    for (Index p = 0; p < model.grid; ++p) {
        if (a[p] == cx(0.0, 0.0)) continue;
        for (Index q = 0; q < b.taps.size(); ++q) {
            u[(p + q + b.offset) % model.grid] += a[p] * b.taps[q];
        }
    }
    return u;
}

/// Poles of the model's annihilable sequence with their multiplicities:
/// u_j = e^{-i 2 pi t_j} for the off-grid kinds, the grid roots of the
/// discrete innovation support for cardinal splines.
inline std::vector<std::pair<cx, int>> model_poles(const FriModel& model) {
    validate(model);
    std::vector<std::pair<cx, int>> poles;
    if (model.kind == SignalKind::CardinalSpline) {
        const CxVector u = cardinal_discrete_innovation(model);
        const double tol = 1e-12 * u.cwiseAbs().maxCoeff();
        for (Index p = 0; p < u.size(); ++p) {
            if (std::abs(u[p]) > tol) {
                poles.emplace_back(unit_phase(double(p) / double(model.grid)), 1);
            }
        }
        return poles;
    }
    for (const Spike& s : model.spikes) {
        int mult = 1;
        if (model.kind == SignalKind::DifferentiatedDiracs) mult = int(s.amplitudes.size());
        if (model.kind == SignalKind::PiecewisePolynomial) mult = model.degree + 1;
        poles.emplace_back(unit_phase(s.t), mult);
    }
    return poles;
}

/// Total order r = sum of pole multiplicities (the rank of the lifted
/// annihilable sequence when the pencil condition holds).
inline Index total_order(const FriModel& model) {
    Index r = 0;
    for (const auto& [pole, mult] : model_poles(model)) {
        (void)pole;
        r += mult;
    }
    return r;
}

namespace detail {

/// Innovation spectrum w[k] = sum_j sum_l a_{j,l} (i 2 pi f_k)^l u_j^{f_k}
/// evaluated on the integer frequency grid.
inline CxVector innovation_spectrum(const FriModel& model, Index n, bool centered) {
    CxVector w = CxVector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        const double f = frequency_of_index(k, n, centered);
        cx acc = 0.0;
        for (const Spike& s : model.spikes) {
            const cx e = unit_phase(f * s.t);
            cx fpow = 1.0;
            for (size_t l = 0; l < s.amplitudes.size(); ++l) {
                acc += s.amplitudes[l] * fpow * e;
                fpow *= imag_unit * 2.0 * pi * f;
            }
        }
        w[k] = acc;
    }
    return w;
}

/// Divide a weighted spectrum by its weight; zero at spectral nulls. The
/// model is consistent only if the numerator also vanishes there, which is
/// checked against `scale`.
inline CxVector deweight_or_throw(const CxVector& what, const CxVector& lhat, double scale) {
    CxVector out = CxVector::Zero(what.size());
    const double ltol = 1e-12 * lhat.cwiseAbs().maxCoeff();
    for (Index k = 0; k < what.size(); ++k) {
        if (std::abs(lhat[k]) > ltol) {
            out[k] = what[k] / lhat[k];
        } else if (std::abs(what[k]) > 1e-9 * scale) {
            throw std::invalid_argument(
                "FriModel: innovation does not vanish at a spectral null (amplitudes of a "
                "periodic spline must sum to zero at DC)");
        }
    }
    return out;
}

}  // namespace detail

/// Exact Fourier samples of the model at integer frequencies k = 0..n-1
/// (closed form; no discretization). For the spline kinds the UNWEIGHTED
/// spectrum is returned with zeros at the spectral nulls of the whitening
/// weight, where the model carries no information; for CardinalSpline the
/// DFT of the integer-grid samples is returned (n must equal the grid).
inline CxVector spectrum(const FriModel& model, Index n, bool centered = false) {
    validate(model);
    if (n < 1) throw std::invalid_argument("spectrum: n must be positive");
    double scale = 0.0;
    for (const Spike& s : model.spikes)
        for (const cx& a : s.amplitudes) scale += std::abs(a);

    switch (model.kind) {
        case SignalKind::Diracs:
        case SignalKind::DifferentiatedDiracs:
            return detail::innovation_spectrum(model, n, centered);
        case SignalKind::NonUniformSpline: {
            const CxVector w = detail::innovation_spectrum(model, n, centered);
            const CxVector l = weight_spectrum(model.whitening, n, centered);
            return detail::deweight_or_throw(w, l, scale);
        }
        case SignalKind::PiecewisePolynomial: {
            const CxVector w = detail::innovation_spectrum(model, n, centered);
            const CxVector l =
                weight_spectrum(WhiteningSpec::derivative_power(model.degree + 1), n, centered);
            return detail::deweight_or_throw(w, l, scale);
        }
        case SignalKind::CardinalSpline: {
            if (n != model.grid) {
                throw std::invalid_argument("spectrum: n must equal the cardinal grid size");
            }
            const CxVector u = dft(cardinal_discrete_innovation(model));
            const CxVector l = weight_spectrum(WhiteningSpec::discrete_difference(model.order), n);
            return detail::deweight_or_throw(u, l, scale);
        }
    }
    throw std::logic_error("spectrum: unreachable");
}

/// One rectangle of a piecewise-constant signal on [0,1).
struct RectPiece {
    double a = 0.0;
    double b = 0.0;
    cx height = 0.0;
};

/// Closed-form Fourier transform of a sum of shifted rectangles, evaluated
/// at the given integer frequencies.
inline CxVector rect_spectrum(const std::vector<RectPiece>& rects, const std::vector<Index>& freqs) {
    for (const RectPiece& r : rects) {
        if (!(0.0 <= r.a && r.a < r.b && r.b <= 1.0)) {
            throw std::invalid_argument("rect_spectrum: require 0 <= a < b <= 1");
        }
    }
    CxVector out = CxVector::Zero(Index(freqs.size()));
    for (size_t i = 0; i < freqs.size(); ++i) {
        const double f = double(freqs[i]);
        cx acc = 0.0;
        for (const RectPiece& r : rects) {
            if (f == 0.0) {
                acc += r.height * (r.b - r.a);
            } else {
                acc += r.height * (unit_phase(f * r.a) - unit_phase(f * r.b)) /
                       (imag_unit * 2.0 * pi * f);
            }
        }
        out[Index(i)] = acc;
    }
    return out;
}

/// Minimum-length annihilating filter together with its root structure.
/// coefficients[0] = 1 and the coefficient vector is the expansion of
/// prod_j (1 - u_j z^{-1})^{l_j}.
struct AnnihilatingFilter {
    CxVector coefficients;
    std::vector<std::pair<cx, int>> roots;
};

/// Expand a root list into filter coefficients by sequential convolution
/// with the degree-1 factors. Adequate for total order <= 30 at desk scale.
inline AnnihilatingFilter filter_from_roots(const std::vector<std::pair<cx, int>>& roots) {
    std::vector<cx> h{1.0};
    for (const auto& [u, mult] : roots) {
        for (int rep = 0; rep < mult; ++rep) {
            std::vector<cx> next(h.size() + 1, 0.0);
            for (size_t i = 0; i < h.size(); ++i) {
                next[i] += h[i];
                next[i + 1] -= u * h[i];
            }
            h = std::move(next);
        }
    }
    AnnihilatingFilter out;
    out.roots = roots;
    out.coefficients = Eigen::Map<CxVector>(h.data(), Index(h.size()));
    return out;
}

/// Minimum annihilating filter of the model's annihilable sequence (the
/// weighted spectrum for the spline kinds, the discrete-innovation DFT for
/// cardinal models).
inline AnnihilatingFilter annihilating_filter(const FriModel& model) {
    return filter_from_roots(model_poles(model));
}

/// The sequence the annihilating filter acts on: the plain spectrum for
/// the Dirac kinds, the weighted spectrum for splines and piecewise
/// polynomials, and the discrete-innovation DFT for cardinal models.
inline CxVector annihilable_spectrum(const FriModel& model, Index n, bool centered = false) {
    switch (model.kind) {
        case SignalKind::Diracs:
        case SignalKind::DifferentiatedDiracs:
            return spectrum(model, n, centered);
        case SignalKind::NonUniformSpline:
            return apply_weight(spectrum(model, n, centered),
                                weight_spectrum(model.whitening, n, centered));
        case SignalKind::PiecewisePolynomial:
            return apply_weight(
                spectrum(model, n, centered),
                weight_spectrum(WhiteningSpec::derivative_power(model.degree + 1), n, centered));
        case SignalKind::CardinalSpline:
            return apply_weight(
                spectrum(model, n, centered),
                weight_spectrum(WhiteningSpec::discrete_difference(model.order), n));
    }
    throw std::logic_error("annihilable_spectrum: unreachable");
}

/// Peak magnitude of the valid-part convolution (h * x)[k], normalized by
/// max|x|. Zero for sequences the filter annihilates.
inline double annihilation_residual(const CxVector& xhat, const AnnihilatingFilter& h) {
    const Index L = h.coefficients.size() - 1;
    if (xhat.size() <= h.coefficients.size()) {
        throw std::invalid_argument("annihilation_residual: vector shorter than filter");
    }
    const double scale = xhat.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (Index k = L; k < xhat.size(); ++k) {
        cx acc = 0.0;
        for (Index l = 0; l <= L; ++l) acc += h.coefficients[l] * xhat[k - l];
        worst = std::max(worst, std::abs(acc));
    }
    return worst / scale;
}

/// Confluent Vandermonde matrix with one column block per pole; the block
/// for a pole of multiplicity l has entries (m-1)!/(m-l')! lambda^{m-l'}
/// (one-based row m and block column l'), zero above the diagonal offset.
inline CxMatrix confluent_vandermonde(const std::vector<std::pair<cx, int>>& poles, Index nrows) {
    if (nrows < 1) throw std::invalid_argument("confluent_vandermonde: need at least one row");
    Index r = 0;
    for (const auto& [pole, mult] : poles) {
        if (pole == cx(0.0, 0.0)) throw std::invalid_argument("confluent_vandermonde: zero pole");
        if (mult < 1) throw std::invalid_argument("confluent_vandermonde: multiplicity < 1");
        r += mult;
    }
    CxMatrix V = CxMatrix::Zero(nrows, r);
    Index col = 0;
    for (const auto& [pole, mult] : poles) {
        for (int lp = 1; lp <= mult; ++lp) {
            for (Index m = 1; m <= nrows; ++m) {
                if (m < lp) continue;
                double fall = 1.0;  // (m-1)!/(m-l')! as a falling product
                for (int i = 0; i < lp - 1; ++i) fall *= double(m - 1 - i);
                V(m - 1, col) = fall * ipow(pole, int(m) - lp);
            }
            ++col;
        }
    }
    return V;
}

/// Smallest pairwise wrap-around distance between locations on [0,1).
inline double min_separation(const std::vector<double>& locations) {
    if (locations.size() < 2) {
        throw std::invalid_argument("min_separation: need at least two locations");
    }
    double best = 1.0;
    for (size_t i = 0; i < locations.size(); ++i) {
        for (size_t j = i + 1; j < locations.size(); ++j) {
            double diff = std::abs(locations[i] - locations[j]);
            diff = std::min(diff, 1.0 - diff);
            best = std::min(best, diff);
        }
    }
    return best;
}

}  // namespace frilift
