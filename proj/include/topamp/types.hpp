#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace topamp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

// cos/sin with multiples of pi/2 snapped to exact axis values. Without this
// cos(pi/2) ~ 6e-17 leaves a tiny reverse hopping in the phi = pi/2 chain and
// splits its exactly degenerate spectrum by ~1e-8.
inline cplx unit_phase(double phi) {
    const double quarter = phi / (pi / 2.0);
    const double nearest = std::round(quarter);
    const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(quarter));
    if (std::abs(quarter - nearest) <= tol) {
        const long q = static_cast<long>(nearest) % 4;
        switch ((q + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    return {std::cos(phi), std::sin(phi)};
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

// Index reversal j -> N+1-j.
inline Matrix parity(Eigen::Index n) {
    Matrix p = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) p(j, n - 1 - j) = 1.0;
    return p;
}

inline Vector reversed(const Vector& v) {
    return v.reverse();
}

} // namespace topamp
