#pragma once

// Bloch functions Gamma(k), G(k) of translation-invariant chains, the winding
// number of the curve (Gamma(k), G(k)) around the origin and the symmetry
// class of the Bloch Hamiltonian.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace topamp {

inline constexpr double bloch_real_tol = 1e-12;
inline constexpr double gap_rel_tol = 1e-9;
inline constexpr double winding_round_guard = 0.01;
inline constexpr double symmetry_tol = 1e-9;
inline constexpr int symmetry_grid = 256;

// f(k) = sum_d c_d e^{ikd}; real for every k when c_{-d} = conj(c_d).
struct FourierSeries {
    std::vector<std::pair<int, cplx>> terms;

    cplx evaluate_complex(double k) const {
        cplx acc = 0.0;
        for (const auto& [d, c] : terms) acc += c * std::polar(1.0, k * d);
        return acc;
    }
    double operator()(double k) const { return evaluate_complex(k).real(); }
};

class BlochModel {
public:
    BlochModel(FourierSeries gamma, FourierSeries g) : gamma_(std::move(gamma)), g_(std::move(g)) {
        constexpr int grid = 1024;
        for (int i = 0; i < grid; ++i) {
            const double k = 2.0 * pi * i / grid;
            const double im = std::max(std::abs(gamma_.evaluate_complex(k).imag()),
                                       std::abs(g_.evaluate_complex(k).imag()));
            if (im > bloch_real_tol)
                throw ModelError("Bloch coefficients are not Hermitian Toeplitz (imaginary part " +
                                 fmt(im) + ")");
        }
    }

    double gamma(double k) const { return gamma_(k); }
    double g(double k) const { return g_(k); }
    const FourierSeries& gamma_coeffs() const { return gamma_; }
    const FourierSeries& g_coeffs() const { return g_; }

private:
    FourierSeries gamma_;
    FourierSeries g_;
};

// Gamma(k) = gamma_p - 2 t_d + 2 t_d cos k,  G(k) = 2 t_c cos(k - phi)
inline BlochModel bloch_from_chain(const ChainParams& p) {
    const cplx e = unit_phase(p.phi);
    FourierSeries gamma{{{0, p.gamma_p - 2.0 * p.t_d}, {1, p.t_d}, {-1, p.t_d}}};
    FourierSeries g{{{1, p.t_c * std::conj(e)}, {-1, p.t_c * e}}};
    return BlochModel(std::move(gamma), std::move(g));
}

struct BlochGap {
    double min_radius;
    double max_radius;
    double k_at_min;
};

namespace detail {

inline double radius(const BlochModel& b, double k) {
    return std::hypot(b.gamma(k), b.g(k));
}

} // namespace detail

// Minimum of |(Gamma(k), G(k))| from a grid scan refined by golden-section
// search around every local grid minimum.
inline BlochGap bloch_gap(const BlochModel& b, int k_points = 1024) {
    const double h = 2.0 * pi / k_points;
    std::vector<double> r(k_points);
    for (int i = 0; i < k_points; ++i) r[i] = detail::radius(b, i * h);
    BlochGap out{r[0], r[0], 0.0};
    for (int i = 0; i < k_points; ++i) out.max_radius = std::max(out.max_radius, r[i]);

    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < k_points; ++i) {
        const double left = r[(i + k_points - 1) % k_points];
        const double right = r[(i + 1) % k_points];
        if (r[i] > left || r[i] > right) continue;
        double a = (i - 1) * h, c = (i + 1) * h;
        double x1 = c - golden * (c - a), x2 = a + golden * (c - a);
        double f1 = detail::radius(b, x1), f2 = detail::radius(b, x2);
        for (int it = 0; it < 200 && c - a > 1e-16 * (1.0 + std::abs(a)); ++it) {
            if (f1 < f2) {
                c = x2; x2 = x1; f2 = f1;
                x1 = c - golden * (c - a);
                f1 = detail::radius(b, x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + golden * (c - a);
                f2 = detail::radius(b, x2);
            }
        }
        const double best_k = f1 < f2 ? x1 : x2;
        const double best = std::min({f1, f2, r[i]});
        if (best < out.min_radius) {
            out.min_radius = best;
            out.k_at_min = best == r[i] ? i * h : best_k;
        }
    }
    return out;
}

namespace detail {

inline double raw_winding(const BlochModel& b, long k_points) {
    const double h = 2.0 * pi / static_cast<double>(k_points);
    cplx prev(b.gamma(0.0), b.g(0.0));
    double total = 0.0;
    for (long i = 1; i <= k_points; ++i) {
        const double k = i == k_points ? 0.0 : i * h;
        const cplx cur(b.gamma(k), b.g(k));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return total / (2.0 * pi);
}

} // namespace detail

// Signed angle accumulation over a uniform grid; the grid is doubled until
// two consecutive resolutions agree.
inline int winding_number(const BlochModel& b, int k_points = 1024) {
    if (k_points < 8) throw ModelError("winding_number needs k_points >= 8");
    const BlochGap gap = bloch_gap(b, k_points);
    if (!(gap.min_radius > gap_rel_tol * gap.max_radius))
        throw NumericalError(error_code::gapless,
                             "Bloch curve passes through the origin (min radius " +
                                 fmt(gap.min_radius) + ")",
                             gap.min_radius);

    auto rounded = [](double raw) {
        const double nearest = std::round(raw);
        if (std::abs(raw - nearest) >= winding_round_guard)
            throw NumericalError(error_code::winding_not_integer,
                                 "winding " + fmt(raw) + " is not close to an integer", raw);
        return static_cast<int>(nearest);
    };

    constexpr long cap = 1L << 22;
    long m = k_points;
    int current = rounded(detail::raw_winding(b, m));
    while (m < cap) {
        m *= 2;
        const int next = rounded(detail::raw_winding(b, m));
        if (next == current) return current;
        current = next;
    }
    throw NumericalError(error_code::winding_not_integer, "winding did not stabilise under grid refinement");
}

inline int winding_number(const ChainParams& p, int k_points = 1024) {
    return winding_number(bloch_from_chain(p), k_points);
}

// 2 t_d (1 - |sin phi|) < gamma_p < 2 t_d (1 + |sin phi|) and t_c != 0
inline bool topological_window_1d(double t_c, double t_d, double gamma_p, double phi) {
    if (t_c == 0.0) return false;
    const double s = std::abs(unit_phase(phi).imag());
    return 2.0 * t_d * (1.0 - s) < gamma_p && gamma_p < 2.0 * t_d * (1.0 + s);
}

// Interval (lo, hi) of gamma_p with nontrivial winding.
inline std::pair<double, double> topological_interval(double t_d, double phi) {
    const double s = std::abs(unit_phase(phi).imag());
    return {2.0 * t_d * (1.0 - s), 2.0 * t_d * (1.0 + s)};
}

struct SymmetryClass {
    std::string label;  // AIII, BDI, CI or DIII
    std::optional<double> theta;
};

inline SymmetryClass classify_symmetry(const BlochModel& b, int grid = symmetry_grid) {
    std::vector<double> gp(grid), gm(grid), fp(grid), fm(grid);
    double scale = 1.0;
    for (int i = 0; i < grid; ++i) {
        const double k = 2.0 * pi * i / grid - pi;
        gp[i] = b.gamma(k);
        gm[i] = b.gamma(-k);
        fp[i] = b.g(k);
        fm[i] = b.g(-k);
        scale = std::max({scale, std::abs(gp[i]), std::abs(fp[i])});
    }
    const double tol = symmetry_tol * scale;

    bool even = true, odd = true;
    for (int i = 0; i < grid; ++i) {
        even = even && std::abs(gp[i] - gm[i]) <= tol && std::abs(fp[i] - fm[i]) <= tol;
        odd = odd && std::abs(gp[i] + gm[i]) <= tol && std::abs(fp[i] + fm[i]) <= tol;
    }
    if (even) return {"CI", std::nullopt};
    if (odd) return {"DIII", std::nullopt};

    // rotation R(theta) (Gamma(k), -G(k)) = (Gamma(-k), G(-k))
    std::optional<double> theta;
    bool rotation = true;
    for (int i = 0; i < grid && rotation; ++i) {
        const cplx from(gp[i], -fp[i]);
        const cplx to(gm[i], fm[i]);
        if (std::abs(std::abs(from) - std::abs(to)) > tol) rotation = false;
        else if (!theta && std::abs(from) > tol) theta = std::arg(to / from);
    }
    if (rotation) {
        const cplx rot = std::polar(1.0, theta.value_or(0.0));
        for (int i = 0; i < grid && rotation; ++i)
            rotation = std::abs(rot * cplx(gp[i], -fp[i]) - cplx(gm[i], fm[i])) <= tol;
    }
    if (rotation) return {"BDI", theta.value_or(0.0)};
    return {"AIII", std::nullopt};
}

} // namespace topamp
