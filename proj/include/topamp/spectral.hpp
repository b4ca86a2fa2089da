#pragma once

// Singular value decomposition of the coupling matrix with fixed ordering and
// phase conventions, and the chiral doubled Hamiltonian [[0, H], [H^dag, 0]]
// whose spectrum is {+-s_n}.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace topamp {

// Relative level below which s_N is reported as numerically zero.
inline constexpr double singular_floor = 1e-14;
// Relative width of a cluster of degenerate singular values.
inline constexpr double degeneracy_tol = 1e-8;

struct SvdResult {
    Matrix u;      // columns u^(n)
    RealVector s;  // descending, s(N-1) is the edge value
    Matrix v;      // columns v^(n)

    Eigen::Index size() const { return s.size(); }
    double largest() const { return s.size() ? s(0) : 0.0; }
    double smallest() const { return s.size() ? s(s.size() - 1) : 0.0; }
    Matrix reconstruct() const { return u * s.cast<cplx>().asDiagonal() * v.adjoint(); }
    bool edge_is_numerically_zero() const { return smallest() <= largest() * singular_floor; }
};

namespace detail {

inline Eigen::Index argmax_abs(const Vector& col) {
    Eigen::Index idx = 0;
    col.cwiseAbs().maxCoeff(&idx);
    return idx;
}

} // namespace detail

inline SvdResult svd(const CouplingMatrix& cm) {
    const Matrix& h = cm.h;
    if (h.rows() != h.cols() || h.rows() == 0) throw ModelError("svd: coupling matrix must be square");
    if (!h.allFinite()) throw ModelError("svd: non-finite entries");

    Eigen::BDCSVD<Matrix> dec(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index n = h.rows();
    SvdResult raw{dec.matrixU(), dec.singularValues(), dec.matrixV()};

    // Phase: largest-magnitude entry of every v column real and >= 0; the
    // same factor on u keeps H = U S V^dag.
    std::vector<Eigen::Index> peak(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        peak[k] = detail::argmax_abs(raw.v.col(k));
        const cplx pivot = raw.v(peak[k], k);
        if (std::abs(pivot) > 0.0) {
            const cplx rot = std::conj(pivot) / std::abs(pivot);
            raw.v.col(k) *= rot;
            raw.u.col(k) *= rot;
            raw.v(peak[k], k) = std::abs(pivot);
        }
    }

    // Inside a degenerate cluster order by the position of the v peak.
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double width = degeneracy_tol * raw.largest();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && std::abs(raw.s(stop - 1) - raw.s(stop)) <= width) ++stop;
        std::stable_sort(order.begin() + start, order.begin() + stop,
                         [&](Eigen::Index a, Eigen::Index b) { return peak[a] < peak[b]; });
        start = stop;
    }

    SvdResult out{Matrix(n, n), RealVector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.u.col(k) = raw.u.col(order[k]);
        out.v.col(k) = raw.v.col(order[k]);
        out.s(k) = raw.s(order[k]);
    }
    return out;
}

inline double singular_gap(const SvdResult& r) {
    const Eigen::Index n = r.size();
    if (n < 2) throw ModelError("singular gap needs N >= 2");
    return std::max(0.0, r.s(n - 2) - r.s(n - 1));
}

struct EffectiveHamiltonian {
    Matrix h_eff;  // N spin-up rows, then N spin-down rows
};

inline EffectiveHamiltonian effective_hamiltonian(const CouplingMatrix& cm) {
    const Eigen::Index n = cm.h.rows();
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    out.topRightCorner(n, n) = cm.h;
    out.bottomLeftCorner(n, n) = cm.h.adjoint();
    return {out};
}

// Sigma_z = diag(+1 ... +1, -1 ... -1)
inline Matrix chiral_operator(Eigen::Index n) {
    Matrix sz = Matrix::Identity(2 * n, 2 * n);
    sz.bottomRightCorner(n, n) *= -1.0;
    return sz;
}

struct EigenPair {
    double value;
    Vector vec;
    double residual;
};

// (u^(n) (x) up +- v^(n) (x) down)/sqrt(2) with eigenvalue +-s_n, listed as
// +s_1, -s_1, +s_2, -s_2, ... Residuals are measured against the doubled
// Hamiltonian of `reference` when given, otherwise of U S V^dag.
inline std::vector<EigenPair> eigenpairs_from_svd(const SvdResult& r, const CouplingMatrix* reference = nullptr) {
    const Eigen::Index n = r.size();
    const Matrix h = reference ? reference->h : r.reconstruct();
    const Matrix heff = effective_hamiltonian({h}).h_eff;
    const double scale = std::max(1.0, r.largest());
    std::vector<EigenPair> out;
    out.reserve(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (double sign : {1.0, -1.0}) {
            Vector w(2 * n);
            w.head(n) = r.u.col(k);
            w.tail(n) = sign * r.v.col(k);
            w /= std::sqrt(2.0);
            const double lambda = sign * r.s(k);
            const double res = (heff * w - lambda * w).norm();
            if (res > 1e-9 * scale)
                throw NumericalError(error_code::eigensolver,
                                     "eigenpair residual " + fmt(res) + " exceeds 1e-9", res);
            out.push_back({lambda, std::move(w), res});
        }
    }
    return out;
}

// max |(Pi H Pi)_{jl} - H_{lj}|
inline double parity_defect(const Matrix& h) {
    const Eigen::Index n = h.rows();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            worst = std::max(worst, std::abs(h(n - 1 - j, n - 1 - l) - h(l, j)));
    return worst;
}

// Pi u^*
inline Vector parity_conjugate(const Vector& u) {
    return u.conjugate().reverse();
}

// The tiny edge singular value is lost at ~eps * s_1 in the SVD. One step of
// inverse iteration with the LU factors recovers it: H^{-1} u^(N) = v^(N)/s_N
// exactly, and for these banded matrices the solve keeps full relative accuracy.
struct EdgeRefinement {
    double s_edge;         // refined s_N
    double log10_s_edge;   // log10 s_N (-inf for an exactly singular H)
    Vector v_edge;         // H^{-1} u^(N) normalised
};

inline EdgeRefinement refine_edge_singular_value(const CouplingMatrix& cm, const SvdResult& r) {
    const Eigen::Index n = r.size();
    const Vector u = r.u.col(n - 1);
    Eigen::PartialPivLU<Matrix> lu(cm.h);
    // a second, pre-scaled solve covers 1/s_N beyond the double range
    for (double shift : {0.0, 250.0}) {
        const Vector x = lu.solve(u * std::pow(10.0, -shift));
        const double nrm = x.stableNorm();
        if (!x.allFinite() || !(nrm > 0.0)) continue;
        Vector v = x / nrm;
        const cplx ov = r.v.col(n - 1).dot(v);
        if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
        const double log10_s = -(std::log10(nrm) + shift);
        return {std::pow(10.0, log10_s), log10_s, v};
    }
    return {0.0, -std::numeric_limits<double>::infinity(), r.v.col(n - 1)};
}

} // namespace topamp
