#pragma once

// Steady-state coherences alpha^ss = -H^{-1} eps' by SVD sum, direct solve,
// the rank-1 edge-mode form and the closed forms of the SSH point.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/spectral.hpp"
#include "topamp/types.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace topamp {

enum class SteadyMethod { svd_sum, direct, edge_rank1, ssh_analytic };

inline const char* to_string(SteadyMethod m) {
    switch (m) {
    case SteadyMethod::svd_sum: return "svd-sum";
    case SteadyMethod::direct: return "direct";
    case SteadyMethod::edge_rank1: return "edge-rank1";
    case SteadyMethod::ssh_analytic: return "ssh-analytic";
    }
    return "?";
}

// Pseudo-inverse policy of the SVD route.
enum class SvdPolicy { full, truncated };

// parity: alpha = -Pi u* s^-1 <u, eps'>, requires Pi H Pi = H^T
// general: alpha = -v s^-1 <u, eps'>
// automatic: parity when the chain is parity symmetric, general otherwise
enum class EdgeForm { parity, general, automatic };

inline constexpr double max_condition = 1e14;
inline constexpr double parity_tol = 1e-12;
inline constexpr double edge_separation = 0.1;

struct SteadyState {
    Vector alpha;
    SteadyMethod method = SteadyMethod::direct;
    double residual = 0.0;            // ||H alpha + eps'||_2
    RealVector log10_abs;             // log10 |alpha_j|, finite beyond the double range
    double log10_amplification = 0.0;  // log10(1/s_N) for the edge route
    std::string form;                 // edge route: "parity" or "general"
    std::vector<std::string> warnings;
};

namespace detail {

inline void require_drive(const CouplingMatrix& cm, const Drive& d) {
    if (d.size() != cm.size())
        throw ModelError("drive length " + fmt(d.size()) + " does not match N = " +
                         fmt(cm.size()));
    if (!d.epsilon.allFinite()) throw ModelError("drive has non-finite entries");
}

inline double residual(const CouplingMatrix& cm, const Vector& alpha, const Vector& eps_t) {
    return (cm.h * alpha + eps_t).norm();
}

inline RealVector log10_abs(const Vector& v) {
    RealVector out(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) out(j) = std::log10(std::abs(v(j)));
    return out;
}

} // namespace detail

// alpha_j = -sum_n V_jn s_n^-1 sum_l U*_ln eps'_l
inline SteadyState steady_state_svd(const CouplingMatrix& cm, const Drive& drive,
                                    SvdPolicy policy = SvdPolicy::full, double rel_threshold = singular_floor) {
    detail::require_drive(cm, drive);
    const SvdResult r = svd(cm);
    const Vector eps_t = drive.transformed();
    const double cut = rel_threshold * r.largest();

    SteadyState out;
    out.method = SteadyMethod::svd_sum;
    Vector coeff = r.u.adjoint() * eps_t;
    int dropped = 0;
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        if (r.s(k) <= cut) {
            if (policy == SvdPolicy::full)
                throw NumericalError(error_code::singular_beyond_precision,
                                     "s_" + fmt(k + 1) + " = " + fmt(r.s(k)) +
                                         " is below the floor " + fmt(cut),
                                     r.s(k));
            coeff(k) = 0.0;
            ++dropped;
        } else {
            coeff(k) /= r.s(k);
        }
    }
    if (dropped > 0) out.warnings.push_back("truncated " + fmt(dropped) + " singular values");
    const Eigen::Index n = r.size();
    if (n >= 2 && r.s(n - 1) > cut && r.s(n - 1) <= edge_separation * r.s(n - 2)) {
        // isolated edge triple: use the refined s_N and v^(N)
        const EdgeRefinement e = refine_edge_singular_value(cm, r);
        if (e.s_edge > 0.0) {
            coeff(n - 1) = 0.0;
            out.alpha = -(r.v * coeff) - e.v_edge * (r.u.col(n - 1).dot(eps_t) / e.s_edge);
        }
    }
    if (out.alpha.size() == 0) out.alpha = -(r.v * coeff);
    out.residual = detail::residual(cm, out.alpha, eps_t);
    out.log10_abs = detail::log10_abs(out.alpha);
    return out;
}

inline SteadyState steady_state_svd(const LatticeModel& m, const Drive& drive,
                                    SvdPolicy policy = SvdPolicy::full, double rel_threshold = singular_floor) {
    return steady_state_svd(coupling_matrix(m), drive, policy, rel_threshold);
}

inline SteadyState steady_state_direct(const CouplingMatrix& cm, const Drive& drive) {
    detail::require_drive(cm, drive);
    Eigen::PartialPivLU<Matrix> lu(cm.h);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition))
        throw NumericalError(error_code::ill_conditioned,
                             "condition number estimate " + fmt(cond) + " exceeds 1e14", cond);
    const Vector eps_t = drive.transformed();
    SteadyState out;
    out.method = SteadyMethod::direct;
    out.alpha = -lu.solve(eps_t);
    out.residual = detail::residual(cm, out.alpha, eps_t);
    out.log10_abs = detail::log10_abs(out.alpha);
    return out;
}

inline SteadyState steady_state_direct(const LatticeModel& m, const Drive& drive) {
    return steady_state_direct(coupling_matrix(m), drive);
}

inline SteadyState edge_rank1(const CouplingMatrix& cm, const SvdResult& r, const Drive& drive, EdgeForm form);

// Amplification through the edge singular mode alone. The edge value is
// separated from the bulk when s_N <= 0.1 s_{N-1}.
inline SteadyState edge_rank1(const CouplingMatrix& cm, const Drive& drive, EdgeForm form = EdgeForm::parity) {
    detail::require_drive(cm, drive);
    const Eigen::Index n = cm.size();
    if (n < 2) throw ModelError("edge_rank1 needs N >= 2");

    if (form == EdgeForm::parity && parity_defect(cm.h) > parity_tol)
        throw NumericalError(error_code::not_parity_symmetric,
                             "Pi H Pi differs from H^T by " + fmt(parity_defect(cm.h)),
                             parity_defect(cm.h));
    return edge_rank1(cm, svd(cm), drive, form);
}

// Same, reusing an SVD of cm.
inline SteadyState edge_rank1(const CouplingMatrix& cm, const SvdResult& r, const Drive& drive, EdgeForm form) {
    detail::require_drive(cm, drive);
    const Eigen::Index n = cm.size();
    if (n < 2 || r.size() != n) throw ModelError("edge_rank1 needs N >= 2 and a matching SVD");
    const double pdef = parity_defect(cm.h);
    const bool symmetric = pdef <= parity_tol;
    if (form == EdgeForm::parity && !symmetric)
        throw NumericalError(error_code::not_parity_symmetric,
                             "Pi H Pi differs from H^T by " + fmt(pdef), pdef);
    const bool use_parity = form == EdgeForm::parity || (form == EdgeForm::automatic && symmetric);

    const EdgeRefinement edge = refine_edge_singular_value(cm, r);
    const double bulk = r.s(n - 2);
    if (!(edge.s_edge <= edge_separation * bulk))
        throw NumericalError(error_code::no_edge_mode,
                             "s_N = " + fmt(edge.s_edge) + " is not below 0.1 s_{N-1} = " +
                                 fmt(edge_separation * bulk),
                             edge.s_edge);

    Vector u = r.u.col(n - 1);
    Vector v = edge.v_edge;
    Vector out_vec;
    if (use_parity) {
        // joint phase so that <Pi u*, v> is real and positive
        const cplx ov = parity_conjugate(u).dot(v);
        if (std::abs(ov) > 0.0) {
            const cplx half = std::polar(1.0, -0.5 * std::arg(ov));
            u *= half;
            v *= half;
        }
        out_vec = parity_conjugate(u);
    } else {
        out_vec = v;
    }

    const Vector eps_t = drive.transformed();
    const cplx overlap = u.dot(eps_t);
    SteadyState out;
    out.method = SteadyMethod::edge_rank1;
    out.form = use_parity ? "parity" : "general";
    out.log10_amplification = -edge.log10_s_edge;
    out.alpha = -(out_vec * (overlap / edge.s_edge));
    out.log10_abs.resize(n);
    const double lo = std::log10(std::abs(overlap)) + out.log10_amplification;
    for (Eigen::Index j = 0; j < n; ++j) out.log10_abs(j) = std::log10(std::abs(out_vec(j))) + lo;
    out.residual = out.alpha.allFinite() ? detail::residual(cm, out.alpha, eps_t)
                                         : std::numeric_limits<double>::infinity();
    if (form == EdgeForm::automatic && !symmetric)
        out.warnings.push_back("parity symmetry broken (" + fmt(pdef) + "), general rank-1 form used");
    return out;
}

inline SteadyState edge_rank1(const LatticeModel& m, const Drive& drive, EdgeForm form = EdgeForm::parity) {
    return edge_rank1(coupling_matrix(m), drive, form);
}

struct SshAnalytics {
    double xi;             // localisation length in sites
    double s_edge;         // 2 gamma_p e^{-N/xi}
    double log10_s_edge;
    RealVector edge_vector;  // sqrt(2/xi) e^{-j/xi}, j = 1..N
};

inline SshAnalytics ssh_analytics(double t_d, double gamma_p, int n_sites) {
    if (n_sites < 1) throw ModelError("n_sites must be >= 1");
    if (!(t_d > 0.0)) throw ModelError("ssh analytics need t_d > 0");
    if (!(gamma_p > 0.0 && gamma_p < 4.0 * t_d))
        throw ModelError("gamma_p outside the topological window 0 < gamma_p < 4 t_d");
    const double r = std::abs(1.0 - gamma_p / (2.0 * t_d));
    if (r == 0.0) throw ModelError("gamma_p = 2 t_d: localisation length undefined (flat band)");
    const double xi = -1.0 / std::log(r);
    const double log_s = std::log(2.0 * gamma_p) - n_sites / xi;
    RealVector u(n_sites);
    for (int j = 1; j <= n_sites; ++j) u(j - 1) = std::sqrt(2.0 / xi) * std::exp(-j / xi);
    return {xi, std::exp(log_s), log_s / std::log(10.0), u};
}

// alpha_j = -(1/(gamma_p xi)) e^{N/xi} e^{-(N+1-j)/xi} sum_l e^{-l/xi} eps'_l
inline SteadyState ssh_analytic_steady_state(double t_d, double gamma_p, int n_sites, const Drive& drive) {
    const SshAnalytics a = ssh_analytics(t_d, gamma_p, n_sites);
    if (drive.size() != n_sites) throw ModelError("drive length does not match n_sites");
    const Vector eps_t = drive.transformed();
    cplx sum = 0.0;
    for (int l = 1; l <= n_sites; ++l) sum += std::exp(-l / a.xi) * eps_t(l - 1);

    SteadyState out;
    out.method = SteadyMethod::ssh_analytic;
    out.alpha.resize(n_sites);
    out.log10_abs.resize(n_sites);
    const double log_pref = -std::log(gamma_p * a.xi);
    const double log_sum = std::log(std::abs(sum));
    for (int j = 1; j <= n_sites; ++j) {
        const double expo = (j - 1) / a.xi;  // N/xi - (N+1-j)/xi
        out.alpha(j - 1) = -sum * std::exp(log_pref + expo);
        out.log10_abs(j - 1) = (log_pref + expo + log_sum) / std::log(10.0);
    }
    out.log10_amplification = -a.log10_s_edge;
    out.residual = std::numeric_limits<double>::quiet_NaN();
    if (a.xi < 2.0 || n_sites < 5.0 * a.xi)
        out.warnings.push_back("outside the N >> xi >> 1 regime (xi = " + fmt(a.xi) +
                               ", N = " + fmt(n_sites) + "); continuum normalisation is approximate");
    return out;
}

struct GainResult {
    double log10_gain;
    Eigen::Index output_site;  // 0-based
    SteadyMethod method;
    RealVector log10_abs;
};

// log10(max_j |alpha_j| / max_l |eps_l|): direct solve when well conditioned,
// otherwise the log-domain edge form.
inline GainResult gain(const CouplingMatrix& cm, const Drive& drive) {
    detail::require_drive(cm, drive);
    const double in = drive.epsilon.cwiseAbs().maxCoeff();
    if (!(in > 0.0)) throw ModelError("gain needs a nonzero drive");
    SteadyState st;
    try {
        st = steady_state_direct(cm, drive);
    } catch (const NumericalError& e) {
        if (e.code() != error_code::ill_conditioned) throw;
        st = edge_rank1(cm, drive, EdgeForm::automatic);
    }
    Eigen::Index site = 0;
    const double top = st.log10_abs.maxCoeff(&site);
    return {top - std::log10(in), site, st.method, st.log10_abs};
}

inline GainResult gain(const LatticeModel& m, const Drive& drive) {
    return gain(coupling_matrix(m), drive);
}

} // namespace topamp
