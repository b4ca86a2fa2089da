#pragma once

// Spectra of H and the stability of the first-moment dynamics.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/topology.hpp"
#include "topamp/types.hpp"

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace topamp {

inline const double golden_bound = (std::sqrt(5.0) - 1.0) / 2.0;

struct SpectrumReport {
    Vector eigenvalues;
    double max_real;
    bool stable;  // max_real < 0
};

namespace detail {

inline SpectrumReport report(Vector ev) {
    const double mr = ev.size() ? ev.real().maxCoeff() : -std::numeric_limits<double>::infinity();
    return {std::move(ev), mr, mr < 0.0};
}

inline Vector zgeev_eigenvalues(Matrix a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Vector w(n);
    if (n == 0) return w;
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1,
                                          nullptr, 1);
    if (info != 0)
        throw NumericalError(error_code::eigensolver, "zgeev failed with info = " + fmt(info),
                             static_cast<double>(info));
    return w;
}

inline bool is_tridiagonal(const Matrix& h) {
    for (Eigen::Index l = 0; l < h.cols(); ++l)
        for (Eigen::Index j = 0; j < h.rows(); ++j)
            if (std::abs(j - l) > 1 && h(j, l) != 0.0) return false;
    return true;
}

} // namespace detail

// lambda(k) = gamma_p - 2 t_d + 2 t_d cos k + 2 i t_c cos(k + phi)
inline cplx spectrum_periodic(const ChainParams& p, double k) {
    const cplx e = unit_phase(p.phi);
    const double c = std::cos(k) * e.real() - std::sin(k) * e.imag();
    return p.gamma_p - 2.0 * p.t_d + 2.0 * p.t_d * std::cos(k) + 2.0 * I * p.t_c * c;
}

// (i t_c e^{i phi} - t_d)(i t_c e^{-i phi} - t_d)
inline cplx open_chain_radicand(double t_c, double t_d, double phi) {
    const double c = unit_phase(phi).real();
    return cplx(t_d * t_d - t_c * t_c, -2.0 * t_c * t_d * c);
}

// lambda_n = gamma_p - 2 t_d + 2 sqrt(radicand) cos(n pi/(N+1)), principal root
inline SpectrumReport spectrum_open_analytic(const ChainParams& p) {
    if (p.n_sites < 2) throw ModelError("spectrum_open_analytic needs n_sites >= 2");
    const cplx root = std::sqrt(open_chain_radicand(p.t_c, p.t_d, p.phi));
    Vector ev(p.n_sites);
    for (int n = 1; n <= p.n_sites; ++n)
        ev(n - 1) = p.gamma_p - 2.0 * p.t_d + 2.0 * root * std::cos(n * pi / (p.n_sites + 1));
    return detail::report(std::move(ev));
}

// Dense eigenvalues. A tridiagonal H is first replaced by the similar complex
// symmetric tridiag(sqrt(b_j c_j), a_j, sqrt(b_j c_j)), which removes the
// exponential non-normality of the directional chain.
inline SpectrumReport spectrum_numeric(const CouplingMatrix& cm) {
    const Matrix& h = cm.h;
    if (h.rows() != h.cols()) throw ModelError("spectrum_numeric: matrix must be square");
    if (!h.allFinite()) throw ModelError("spectrum_numeric: non-finite entries");
    const Eigen::Index n = h.rows();
    if (n > 1 && detail::is_tridiagonal(h)) {
        Matrix t = Matrix::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) t(j, j) = h(j, j);
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            const cplx off = std::sqrt(h(j, j + 1) * h(j + 1, j));
            t(j, j + 1) = off;
            t(j + 1, j) = off;
        }
        return detail::report(detail::zgeev_eigenvalues(std::move(t)));
    }
    return detail::report(detail::zgeev_eigenvalues(h));
}

// N -> infinity threshold on gamma_p: 2 t_d - 2 |Re sqrt(radicand)|
inline double stability_threshold(double t_c, double t_d, double phi) {
    return 2.0 * t_d - 2.0 * std::abs(std::sqrt(open_chain_radicand(t_c, t_d, phi)).real());
}

// t_c = t_d: gamma_p < 2 t_d (1 - sqrt|cos phi|)
inline bool stability_window_1d(double t_d, double gamma_p, double phi) {
    return gamma_p < stability_threshold(t_d, t_d, phi);
}

inline bool stable_topological_overlap(double phi) {
    return std::abs(unit_phase(phi).real()) < golden_bound;
}

// Open interval of gamma_p that is topological and stable for t_c = t_d.
inline std::optional<std::pair<double, double>> stable_topological_interval(double t_d, double phi) {
    const auto [lo, hi] = topological_interval(t_d, phi);
    const double upper = std::min(hi, stability_threshold(t_d, t_d, phi));
    if (!(lo < upper) || t_d == 0.0) return std::nullopt;
    return std::make_pair(lo, upper);
}

} // namespace topamp
