#pragma once

// Driven two-array implementation: N main cavities a_j and N+1 auxiliary
// cavities b_l in the rotating frame, the parameter map onto the chain and a
// first-moment check of the adiabatic elimination of the b modes.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/stability.hpp"
#include "topamp/types.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace topamp {

inline constexpr double hierarchy_ratio = 5.0;

struct FloquetParams {
    double omega = 0.0;        // base cavity frequency
    double delta_omega = 0.0;  // frequency step
    double g0 = 0.0;           // a-a modulation amplitude
    double phi_d = 0.0;        // modulation phase
    double gbar0 = 0.0;        // a-b modulation amplitude
    double kappa_a = 0.0;
    double kappa_b = 0.0;
};

inline void validate(const FloquetParams& fp) {
    const std::array<double, 7> all{fp.omega, fp.delta_omega, fp.g0, fp.phi_d, fp.gbar0, fp.kappa_a, fp.kappa_b};
    for (double x : all)
        if (!std::isfinite(x)) throw ModelError("floquet parameters must be finite");
    const std::array<double, 6> rates{fp.omega, fp.delta_omega, fp.g0, fp.gbar0, fp.kappa_a, fp.kappa_b};
    for (double x : rates)
        if (x < 0.0) throw ModelError("floquet rates and frequencies must be >= 0");
}

// t_c = g0/2, phi = phi_d, t_d = gbar0^2/(4 kappa_b), gamma_p = 4 t_d - kappa_a
inline ChainParams map_params(const FloquetParams& fp, int n_sites = 2) {
    validate(fp);
    if (fp.kappa_b == 0.0) throw ModelError("kappa_b = 0: auxiliary modes cannot be eliminated");
    ChainParams p;
    p.t_c = fp.g0 / 2.0;
    p.phi = fp.phi_d;
    p.t_d = fp.gbar0 * fp.gbar0 / (4.0 * fp.kappa_b);
    p.gamma_p = 4.0 * p.t_d - fp.kappa_a;
    p.n_sites = n_sites;
    return p;
}

struct HierarchyCheck {
    std::string relation;  // "small << large"
    double small;
    double large;
    double ratio;  // large / small, +inf when small = 0
    bool pass;
    bool degenerate;
};

struct HierarchyReport {
    std::vector<HierarchyCheck> checks;
    bool pass;
    bool degenerate;
};

// gbar0 << kappa_b << omega and kappa_a, g0 << delta_omega << Omega, with the
// drive frequency Omega taken equal to omega.
inline HierarchyReport check_hierarchy(const FloquetParams& fp) {
    validate(fp);
    HierarchyReport rep{{}, true, false};
    auto add = [&](const char* name, double small, double large) {
        HierarchyCheck c{name, small, large, 0.0, false, false};
        if (small == 0.0) {
            c.ratio = std::numeric_limits<double>::infinity();
            c.pass = true;
            c.degenerate = true;
        } else {
            c.ratio = large / small;
            c.pass = c.ratio >= hierarchy_ratio;
        }
        rep.pass = rep.pass && c.pass;
        rep.degenerate = rep.degenerate || c.degenerate;
        rep.checks.push_back(c);
    };
    add("gbar0 << kappa_b", fp.gbar0, fp.kappa_b);
    add("kappa_b << omega", fp.kappa_b, fp.omega);
    add("kappa_a << delta_omega", fp.kappa_a, fp.delta_omega);
    add("g0 << delta_omega", fp.g0, fp.delta_omega);
    add("delta_omega << Omega", fp.delta_omega, fp.omega);
    return rep;
}

// Generator of (alpha_1..alpha_N, beta*_1..beta*_{N+1}), beta_l = <b_l>.
struct FullChainModel {
    Matrix k;
    int n_sites;

    Eigen::Index a(int j) const { return j; }              // 0-based a_j
    Eigen::Index b(int l) const { return n_sites + l; }    // 0-based b_l
    Eigen::Index size() const { return k.rows(); }

    Vector drive_vector(const Drive& d) const {
        if (d.size() != n_sites) throw ModelError("drive length does not match n_sites");
        Vector f = Vector::Zero(size());
        f.head(n_sites) = d.transformed();
        return f;
    }
};

// a-a block: the chain with t_d = 0 and gamma_p = -kappa_a.
// a_j couples to b_j and b_{j+1} through (gbar0/2)(a_j b_l + h.c.).
inline FullChainModel build_full_chain(const FloquetParams& fp, int n_sites) {
    validate(fp);
    if (n_sites < 2) throw ModelError("full chain needs n_sites >= 2");
    ChainParams pa;
    pa.t_c = fp.g0 / 2.0;
    pa.t_d = 0.0;
    pa.gamma_p = -fp.kappa_a;
    pa.phi = fp.phi_d;
    pa.n_sites = n_sites;
    const CouplingMatrix haa = coupling_matrix(build_chain(pa));

    FullChainModel out{Matrix::Zero(2 * n_sites + 1, 2 * n_sites + 1), n_sites};
    out.k.topLeftCorner(n_sites, n_sites) = haa.h;
    const cplx g = 0.5 * fp.gbar0;
    for (int j = 0; j < n_sites; ++j) {
        for (int l : {j, j + 1}) {
            out.k(out.a(j), out.b(l)) = -I * g;
            out.k(out.b(l), out.a(j)) = I * g;
        }
    }
    for (int l = 0; l <= n_sites; ++l) out.k(out.b(l), out.b(l)) = -fp.kappa_b;
    return out;
}

struct EliminationPoint {
    double kappa_b;
    double gbar0;
    double error;        // steady-state relative error
    double probe_error;  // relative error of alpha(t*) from alpha(0) = 0
};

struct EliminationReport {
    double error;
    double probe_error;
    double t_probe;
    std::vector<EliminationPoint> series;
};

namespace detail {

inline double relative(const Vector& x, const Vector& ref) {
    return (x - ref).norm() / ref.norm();
}

inline EliminationPoint elimination_point(const FloquetParams& fp, int n_sites, const Drive& drive, double t_probe) {
    const FullChainModel full = build_full_chain(fp, n_sites);
    const CouplingMatrix heff = coupling_matrix(build_chain(map_params(fp, n_sites)));

    const SpectrumReport se = spectrum_numeric(heff);
    if (!se.stable)
        throw NumericalError(error_code::unstable,
                             "effective chain unstable (max Re lambda = " + fmt(se.max_real) + ")",
                             se.max_real);
    const SpectrumReport sf = spectrum_numeric({full.k});
    if (!sf.stable)
        throw NumericalError(error_code::unstable,
                             "full chain unstable (max Re lambda = " + fmt(sf.max_real) + ")",
                             sf.max_real);

    const Vector f_full = full.drive_vector(drive);
    const Vector f_eff = drive.transformed();
    Eigen::PartialPivLU<Matrix> lu_full(full.k);
    Eigen::PartialPivLU<Matrix> lu_eff(heff.h);
    const Vector ss_full = -lu_full.solve(f_full);
    const Vector ss_eff = -lu_eff.solve(f_eff);

    // alpha(t) = (e^{Kt} - 1) K^{-1} f
    const Matrix ef = (full.k * t_probe).exp();
    const Matrix ee = (heff.h * t_probe).exp();
    const Vector pr_full = -(ef * ss_full - ss_full);
    const Vector pr_eff = -(ee * ss_eff - ss_eff);

    return {fp.kappa_b, fp.gbar0, relative(ss_full.head(n_sites), ss_eff),
            relative(pr_full.head(n_sites), pr_eff)};
}

} // namespace detail

// Series over kappa_b x (1, 2, 4, 8) with gbar0 ~ sqrt(kappa_b) so t_d is fixed.
// The probe time is t* = 1/|max Re lambda| of the effective chain.
inline EliminationReport validate_elimination(const FloquetParams& fp, int n_sites, const Drive& drive) {
    validate(fp);
    if (drive.size() != n_sites) throw ModelError("drive length does not match n_sites");
    if (drive.epsilon.norm() == 0.0) throw ModelError("validate_elimination needs a nonzero drive");
    const SpectrumReport se = spectrum_numeric(coupling_matrix(build_chain(map_params(fp, n_sites))));
    if (!se.stable)
        throw NumericalError(error_code::unstable,
                             "effective chain unstable (max Re lambda = " + fmt(se.max_real) + ")",
                             se.max_real);
    const double t_probe = 1.0 / std::abs(se.max_real);

    EliminationReport rep{0.0, 0.0, t_probe, {}};
    for (double factor : {1.0, 2.0, 4.0, 8.0}) {
        FloquetParams q = fp;
        q.kappa_b = fp.kappa_b * factor;
        q.gbar0 = fp.gbar0 * std::sqrt(factor);
        rep.series.push_back(detail::elimination_point(q, n_sites, drive, t_probe));
    }
    rep.error = rep.series.front().error;
    rep.probe_error = rep.series.front().probe_error;
    return rep;
}

} // namespace topamp
