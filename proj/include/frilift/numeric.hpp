#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace frilift {

using cx = std::complex<double>;
using CxVector = Eigen::VectorXcd;
using CxMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr cx imag_unit{0.0, 1.0};

/// e^{-i 2 pi x}
inline cx unit_phase(double x) {
    return std::polar(1.0, -2.0 * pi * x);
}

/// Unnormalized forward DFT, X[k] = sum_p x[p] e^{-i 2 pi k p / n}.
/// Direct O(n^2) evaluation; the library operates at desk scale (n <= 1024).
inline CxVector dft(const CxVector& x) {
    const Index n = x.size();
    CxVector out = CxVector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        cx acc = 0.0;
        for (Index p = 0; p < n; ++p) {
            acc += x[p] * unit_phase(double(k) * double(p) / double(n));
        }
        out[k] = acc;
    }
    return out;
}

/// Inverse DFT with the 1/n convention matching dft().
inline CxVector idft(const CxVector& X) {
    const Index n = X.size();
    CxVector out = CxVector::Zero(n);
    for (Index p = 0; p < n; ++p) {
        cx acc = 0.0;
        for (Index k = 0; k < n; ++k) {
            acc += X[k] * std::conj(unit_phase(double(k) * double(p) / double(n)));
        }
        out[p] = acc / double(n);
    }
    return out;
}

/// Count of singular values above eps * sigma_max.
inline Index numerical_rank(const CxMatrix& M, double eps = 1e-8) {
    Eigen::JacobiSVD<CxMatrix> svd(M);
    const auto& sigma = svd.singularValues();
    if (sigma.size() == 0 || sigma[0] == 0.0) return 0;
    Index r = 0;
    while (r < sigma.size() && sigma[r] > eps * sigma[0]) ++r;
    return r;
}

/// splitmix64 step; used for deriving independent per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic seed derived from a base seed and a position tuple.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    s ^= splitmix64(a);
    (void)splitmix64(s);
    s ^= splitmix64(b);
    (void)splitmix64(s);
    s ^= splitmix64(c);
    return splitmix64(s);
}

/// Signed frequency for index k of a length-n spectrum. The default
/// convention is f = k for k = 0..n-1; the centered convention maps the
/// upper half to negative frequencies.
inline double frequency_of_index(Index k, Index n, bool centered) {
    if (!centered) return double(k);
    return (k <= (n - 1) / 2) ? double(k) : double(k - n);
}

}  // namespace frilift
