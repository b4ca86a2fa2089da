#pragma once

// Lattice models: the three Hermitian matrices of the master equation
// (pump, decay, coherent hopping), the non-Hermitian generator of the
// coherences H = Gamma - iG, and the 1D non-reciprocal chain.

#include "topamp/errors.hpp"
#include "topamp/rng.hpp"
#include "topamp/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace topamp {

inline constexpr double hermiticity_tol = 1e-12;
inline constexpr double psd_tol = -1e-10;

enum class Boundary { open, periodic };

struct ChainParams {
    double t_c = 1.0;      // coherent hopping rate
    double t_d = 1.0;      // dissipative hopping rate
    double gamma_p = 0.0;  // net pump rate
    double phi = 0.0;      // tunneling phase
    int n_sites = 2;
};

struct Drive {
    Vector epsilon;

    // The drive as it enters the coherence equation, eps'_j = i eps_j.
    Vector transformed() const { return I * epsilon; }

    Eigen::Index size() const { return epsilon.size(); }

    // Single-site drive; `site` is 0-based.
    static Drive at_site(Eigen::Index n, Eigen::Index site, cplx amplitude = 1.0) {
        if (site < 0 || site >= n) throw ModelError("drive site out of range");
        Drive d{Vector::Zero(n)};
        d.epsilon(site) = amplitude;
        return d;
    }
};

struct CouplingMatrix {
    Matrix h;
    Eigen::Index size() const { return h.rows(); }
};

inline double hermiticity_defect(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

inline double smallest_eigenvalue(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError(error_code::eigensolver, "Hermitian eigensolve failed");
    return es.eigenvalues().minCoeff();
}

class LatticeModel {
public:
    Eigen::Index n_sites() const { return gamma_pump_.rows(); }
    const Matrix& gamma_pump() const { return gamma_pump_; }
    const Matrix& gamma_decay() const { return gamma_decay_; }
    const Matrix& coherent() const { return coherent_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Gamma_{jl} = Gamma^(p)_{jl} - Gamma^(d)_{lj}
    Matrix net_dissipation() const { return gamma_pump_ - gamma_decay_.transpose(); }

    friend LatticeModel build_custom(Matrix, Matrix, Matrix);
    friend LatticeModel build_chain(const ChainParams&, Boundary);
    friend LatticeModel add_diagonal_disorder(const LatticeModel&, double, std::uint64_t);

private:
    LatticeModel(Matrix pump, Matrix decay, Matrix coherent, std::vector<std::string> warnings)
        : gamma_pump_(std::move(pump)), gamma_decay_(std::move(decay)),
          coherent_(std::move(coherent)), warnings_(std::move(warnings)) {}

    Matrix gamma_pump_;
    Matrix gamma_decay_;
    Matrix coherent_;
    std::vector<std::string> warnings_;
};

namespace detail {

inline void require_square(const Matrix& m, const char* name) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw ModelError(std::string(name) + " must be a non-empty square matrix");
    if (!m.allFinite()) throw ModelError(std::string(name) + " has non-finite entries");
}

inline void require_hermitian(const Matrix& m, const char* name) {
    const double d = hermiticity_defect(m);
    if (d > hermiticity_tol)
        throw ModelError(std::string(name) + " is not Hermitian (max deviation " + fmt(d) + ")");
}

inline void require_psd(const Matrix& m, const char* name) {
    const double lo = smallest_eigenvalue(m);
    if (lo < psd_tol)
        throw ModelError(std::string(name) + " is not positive semidefinite (min eigenvalue " +
                         fmt(lo) + ")");
}

} // namespace detail

inline LatticeModel build_custom(Matrix gamma_pump, Matrix gamma_decay, Matrix coherent) {
    detail::require_square(gamma_pump, "gamma_pump");
    detail::require_square(gamma_decay, "gamma_decay");
    detail::require_square(coherent, "coherent");
    if (gamma_decay.rows() != gamma_pump.rows() || coherent.rows() != gamma_pump.rows())
        throw ModelError("gamma_pump, gamma_decay and coherent must have equal dimension");
    detail::require_hermitian(gamma_pump, "gamma_pump");
    detail::require_hermitian(gamma_decay, "gamma_decay");
    detail::require_hermitian(coherent, "coherent");
    detail::require_psd(gamma_pump, "gamma_pump");
    detail::require_psd(gamma_decay, "gamma_decay");
    return LatticeModel(std::move(gamma_pump), std::move(gamma_decay), std::move(coherent), {});
}

// Non-reciprocal chain:
//   Gamma_{jl} = (gamma_p - 2 t_d) delta_{jl} + t_d delta_{l,j+-1}
//   G_{j,j+1}  = t_c e^{-i phi},  G_{j+1,j} = t_c e^{+i phi}
// The phase is oriented so that for 0 < phi < pi a drive at site 1 is
// amplified towards site N and the Bloch curve (Gamma(k), G(k)) winds +1.
// Gamma^(p) is tridiag(t_d, 2 t_d, t_d) and Gamma^(d) = kappa_a * 1 with
// kappa_a = 4 t_d - gamma_p, the decomposition obtained from eliminating
// auxiliary reservoir modes.
inline LatticeModel build_chain(const ChainParams& p, Boundary boundary = Boundary::open) {
    if (p.n_sites < 2) throw ModelError("chain needs n_sites >= 2");
    if (boundary == Boundary::periodic && p.n_sites < 3)
        throw ModelError("periodic chain needs n_sites >= 3");
    if (!(p.t_d >= 0.0)) throw ModelError("t_d must be >= 0");
    if (!(p.t_c >= 0.0)) throw ModelError("t_c must be >= 0");
    if (!std::isfinite(p.gamma_p) || !std::isfinite(p.phi)) throw ModelError("non-finite chain parameter");

    const Eigen::Index n = p.n_sites;
    const cplx forward = p.t_c * std::conj(unit_phase(p.phi));  // G_{j,j+1}

    Matrix pump = Matrix::Zero(n, n);
    Matrix coherent = Matrix::Zero(n, n);
    auto link = [&](Eigen::Index j, Eigen::Index l) {
        pump(j, l) += p.t_d;
        pump(l, j) += p.t_d;
        coherent(j, l) += forward;
        coherent(l, j) += std::conj(forward);
    };
    for (Eigen::Index j = 0; j < n; ++j) pump(j, j) = 2.0 * p.t_d;
    for (Eigen::Index j = 0; j + 1 < n; ++j) link(j, j + 1);
    if (boundary == Boundary::periodic) link(n - 1, 0);

    const double kappa_a = 4.0 * p.t_d - p.gamma_p;
    Matrix decay = kappa_a * Matrix::Identity(n, n);

    std::vector<std::string> warnings;
    if (kappa_a < 0.0)
        warnings.push_back("kappa_a = 4 t_d - gamma_p = " + fmt(kappa_a) +
                           " < 0: decay matrix is not a physical dissipator");
    detail::require_psd(pump, "gamma_pump");
    return LatticeModel(std::move(pump), std::move(decay), std::move(coherent), std::move(warnings));
}

inline CouplingMatrix coupling_matrix(const LatticeModel& model) {
    return {model.net_dissipation() - I * model.coherent()};
}

// i.i.d. N(0, sigma) frequency offsets, one per site.
inline RealVector disorder_offsets(Eigen::Index n, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ModelError("disorder sigma must be >= 0");
    RealVector out = RealVector::Zero(n);
    if (sigma == 0.0) return out;
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index j = 0; j < n; ++j) out(j) = normal(engine);
    return out;
}

// G -> G + diag(delta omega_j). sigma == 0 returns an identical copy.
inline LatticeModel add_diagonal_disorder(const LatticeModel& model, double sigma, std::uint64_t seed) {
    const RealVector offsets = disorder_offsets(model.n_sites(), sigma, seed);
    Matrix coherent = model.coherent();
    if (sigma > 0.0) coherent.diagonal() += offsets.cast<cplx>();
    return LatticeModel(model.gamma_pump(), model.gamma_decay(), std::move(coherent), model.warnings());
}

} // namespace topamp
