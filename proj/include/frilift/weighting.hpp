#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "frilift/numeric.hpp"

namespace frilift {

enum class WhiteningKind { ContinuousDifferential, DiscreteDifference, PowerOfDerivative };

/// Spectral description of a whitening operator. ContinuousDifferential is
/// a constant-coefficient differential operator b_K D^K + ... + b_0 whose
/// symbol is evaluated at integer frequencies; DiscreteDifference is the
/// (m+1)-fold finite difference with symbol (1 - e^{-i w})^{m+1} on the DFT
/// grid; PowerOfDerivative is the pure power (i 2 pi f)^p.
struct WhiteningSpec {
    WhiteningKind kind = WhiteningKind::DiscreteDifference;
    std::vector<cx> coeffs;  // b_0 .. b_K, ContinuousDifferential only
    int order = 0;           // m, DiscreteDifference only
    int power = 1;           // p, PowerOfDerivative only

    static WhiteningSpec continuous_differential(std::vector<cx> b) {
        WhiteningSpec s;
        s.kind = WhiteningKind::ContinuousDifferential;
        s.coeffs = std::move(b);
        return s;
    }
    static WhiteningSpec discrete_difference(int m) {
        WhiteningSpec s;
        s.kind = WhiteningKind::DiscreteDifference;
        s.order = m;
        return s;
    }
    static WhiteningSpec derivative_power(int p) {
        WhiteningSpec s;
        s.kind = WhiteningKind::PowerOfDerivative;
        s.power = p;
        return s;
    }
};

inline void validate(const WhiteningSpec& spec) {
    switch (spec.kind) {
        case WhiteningKind::ContinuousDifferential:
            if (spec.coeffs.empty() || spec.coeffs.back() == cx(0.0, 0.0)) {
                throw std::invalid_argument("WhiteningSpec: leading coefficient must be nonzero");
            }
            break;
        case WhiteningKind::DiscreteDifference:
            if (spec.order < 0) throw std::invalid_argument("WhiteningSpec: order must be >= 0");
            break;
        case WhiteningKind::PowerOfDerivative:
            if (spec.power < 1) throw std::invalid_argument("WhiteningSpec: power must be >= 1");
            break;
    }
}

/// Integer power of a complex number by repeated multiplication.
inline cx ipow(cx base, int e) {
    cx acc = 1.0;
    for (int i = 0; i < e; ++i) acc *= base;
    return acc;
}

/// Weight vector l[k] for a length-n spectrum. Continuous kinds evaluate
/// the operator symbol at f = k (or centered frequencies); the discrete
/// kind evaluates at w = 2 pi k / n in DFT order.
inline CxVector weight_spectrum(const WhiteningSpec& spec, Index n, bool centered = false) {
    if (n < 1) throw std::invalid_argument("weight_spectrum: n must be positive");
    validate(spec);
    CxVector l(n);
    for (Index k = 0; k < n; ++k) {
        switch (spec.kind) {
            case WhiteningKind::ContinuousDifferential: {
                const cx s = imag_unit * 2.0 * pi * frequency_of_index(k, n, centered);
                cx acc = 0.0;
                for (auto it = spec.coeffs.rbegin(); it != spec.coeffs.rend(); ++it) {
                    acc = acc * s + *it;
                }
                l[k] = acc;
                break;
            }
            case WhiteningKind::DiscreteDifference: {
                const cx base = 1.0 - std::polar(1.0, -2.0 * pi * double(k) / double(n));
                l[k] = ipow(base, spec.order + 1);
                break;
            }
            case WhiteningKind::PowerOfDerivative: {
                const cx s = imag_unit * 2.0 * pi * frequency_of_index(k, n, centered);
                l[k] = ipow(s, spec.power);
                break;
            }
        }
    }
    return l;
}

/// Hadamard product of a spectrum with a weight vector.
inline CxVector apply_weight(const CxVector& xhat, const CxVector& lhat) {
    if (xhat.size() != lhat.size()) throw std::invalid_argument("apply_weight: length mismatch");
    return xhat.cwiseProduct(lhat);
}

/// Indices where |l[k]| falls below 1e-12 * max|l| (exact zeros always count).
inline std::vector<Index> spectral_nulls(const CxVector& lhat) {
    const double tol = 1e-12 * lhat.cwiseAbs().maxCoeff();
    std::vector<Index> nulls;
    for (Index k = 0; k < lhat.size(); ++k) {
        if (std::abs(lhat[k]) <= tol) nulls.push_back(k);
    }
    return nulls;
}

/// Invert a weighting: z[k] / l[k] away from spectral nulls; at the nulls
/// the values must be supplied directly (they carry no information through
/// the weight and have to enter as measurements).
inline CxVector unweight(const CxVector& zhat, const CxVector& lhat,
                         const std::map<Index, cx>& null_values) {
    if (zhat.size() != lhat.size()) throw std::invalid_argument("unweight: length mismatch");
    const double tol = 1e-12 * lhat.cwiseAbs().maxCoeff();
    CxVector out(zhat.size());
    for (Index k = 0; k < zhat.size(); ++k) {
        if (std::abs(lhat[k]) > tol) {
            out[k] = zhat[k] / lhat[k];
        } else {
            auto it = null_values.find(k);
            if (it == null_values.end()) {
                throw std::invalid_argument("unmeasured spectral null at k=" + std::to_string(k));
            }
            out[k] = it->second;
        }
    }
    return out;
}

/// Integer samples of the causal B-spline of order m with exact zeros
/// trimmed. `offset` is the number of leading zero taps removed, so the
/// tap for time index p sits at taps[p - offset].
struct BsplineFilter {
    Eigen::VectorXd taps;
    Index offset = 0;
};

namespace detail {

inline double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * double(n - i) / double(i + 1);
    return v;
}

/// Causal B-spline beta_+^m evaluated at real t.
inline double bspline_value(int m, double t) {
    double acc = 0.0;
    double mfact = 1.0;
    for (int i = 2; i <= m; ++i) mfact *= double(i);
    for (int k = 0; k <= m + 1; ++k) {
        const double u = t - double(k);
        if (u < 0.0) continue;
        const double upow = (m == 0) ? 1.0 : std::pow(u, m);
        acc += ((k % 2 == 0) ? 1.0 : -1.0) * binomial(m + 1, k) * upow / mfact;
    }
    return acc;
}

}  // namespace detail

inline BsplineFilter bspline_filter(int order) {
    if (order < 0) throw std::invalid_argument("bspline_filter: order must be >= 0");
    std::vector<double> raw;
    for (int p = 0; p <= order + 1; ++p) raw.push_back(detail::bspline_value(order, double(p)));
    // trim zeros on both sides (values at integers are exactly representable
    // rationals for small m; use a tiny guard anyway)
    const double tol = 1e-14;
    Index lo = 0, hi = Index(raw.size());
    while (lo < hi && std::abs(raw[size_t(lo)]) <= tol) ++lo;
    while (hi > lo && std::abs(raw[size_t(hi - 1)]) <= tol) --hi;
    BsplineFilter out;
    out.offset = lo;
    out.taps = Eigen::VectorXd::Zero(hi - lo);
    for (Index p = lo; p < hi; ++p) out.taps[p - lo] = raw[size_t(p)];
    return out;
}

/// DFT of a B-spline sample filter on an n-point grid, including the
/// causal offset phase.
inline CxVector bspline_filter_dft(const BsplineFilter& f, Index n) {
    CxVector out = CxVector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        cx acc = 0.0;
        for (Index p = 0; p < f.taps.size(); ++p) {
            acc += f.taps[p] * unit_phase(double(k) * double(p + f.offset) / double(n));
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace frilift
