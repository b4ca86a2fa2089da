#pragma once

// First moments: d alpha/dt = H alpha + eps'.
// Second moments: dM/dt = H* M + M H^T + 2 (Gamma^(p))^T, M_jl = <a_j^dag a_l>.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/stability.hpp"
#include "topamp/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace topamp {

inline constexpr double step_guard = 0.1;
inline constexpr double divergence_bound = 1e100;
inline constexpr double lyapunov_rel_tol = 1e-9;

namespace detail {

inline double spectral_radius(const CouplingMatrix& cm) {
    return spectrum_numeric(cm).eigenvalues.cwiseAbs().maxCoeff();
}

inline void check_step(const CouplingMatrix& cm, double dt, double t_final) {
    if (!(dt > 0.0)) throw ModelError("dt must be > 0");
    if (!(t_final >= 0.0)) throw ModelError("t_final must be >= 0");
    const double rho = spectral_radius(cm);
    if (dt * rho > step_guard)
        throw ModelError("step guard violated: dt * rho(H) = " + fmt(dt * rho) + " > 0.1");
}

// Number of equal steps no longer than dt that end exactly on t_final.
inline long step_count(double dt, double t_final) {
    return static_cast<long>(std::ceil(t_final / dt * (1.0 - 1e-12)));
}

} // namespace detail

// Classical RK4 for d alpha/dt = H alpha + eps'.
class CoherenceStepper {
public:
    CoherenceStepper(const CouplingMatrix& cm, const Drive& drive, Vector alpha0)
        : h_(cm.h), f_(drive.transformed()), alpha_(std::move(alpha0)) {
        if (alpha_.size() != h_.rows() || f_.size() != h_.rows())
            throw ModelError("state and drive must have length N");
    }

    void step(double dt) {
        const Vector k1 = rhs(alpha_);
        const Vector k2 = rhs(alpha_ + 0.5 * dt * k1);
        const Vector k3 = rhs(alpha_ + 0.5 * dt * k2);
        const Vector k4 = rhs(alpha_ + dt * k3);
        alpha_ += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t_ += dt;
    }

    double time() const { return t_; }
    const Vector& state() const { return alpha_; }

private:
    Vector rhs(const Vector& a) const { return h_ * a + f_; }

    Matrix h_;
    Vector f_;
    Vector alpha_;
    double t_ = 0.0;
};

struct CoherenceTrajectory {
    std::vector<double> t;
    std::vector<Vector> alpha;
};

inline CoherenceTrajectory evolve_coherences(const CouplingMatrix& cm, const Drive& drive, const Vector& alpha0,
                                             double dt, double t_final, long stride = 1) {
    detail::check_step(cm, dt, t_final);
    if (stride < 1) throw ModelError("stride must be >= 1");
    const long steps = detail::step_count(dt, t_final);
    const double h = steps ? t_final / steps : dt;

    CoherenceStepper st(cm, drive, alpha0);
    CoherenceTrajectory out;
    out.t.push_back(0.0);
    out.alpha.push_back(alpha0);
    for (long i = 1; i <= steps; ++i) {
        st.step(h);
        const double nrm = st.state().norm();
        if (!std::isfinite(nrm) || nrm > divergence_bound)
            throw NumericalError(error_code::diverged,
                                 "coherences diverged at t = " + fmt(i * h), i * h);
        if (i % stride == 0 || i == steps) {
            out.t.push_back(i * h);
            out.alpha.push_back(st.state());
        }
    }
    return out;
}

struct CorrelationMatrix {
    Matrix m;
    double residual = 0.0;  // max |H* M + M H^T + 2 Gamma_p^T|
};

namespace detail {

// X with A X + X A^dag + Q = 0, Bartels-Stewart on the complex Schur form of A.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    const Eigen::Index n = a.rows();
    Eigen::ComplexSchur<Matrix> schur(a);
    if (schur.info() != Eigen::Success) throw NumericalError(error_code::eigensolver, "complex Schur failed");
    const Matrix& t = schur.matrixT();
    const Matrix& z = schur.matrixU();
    const Matrix c = -(z.adjoint() * q * z);

    // T x_k + sum_{l >= k} conj(T_kl) x_l = c_k, last column first
    Matrix x = Matrix::Zero(n, n);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        Vector rhs = c.col(k);
        for (Eigen::Index l = k + 1; l < n; ++l) rhs -= std::conj(t(k, l)) * x.col(l);
        Matrix shifted = t;
        shifted.diagonal().array() += std::conj(t(k, k));
        x.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return z * x * z.adjoint();
}

} // namespace detail

// Solution and residual without the residual gate.
inline CorrelationMatrix lyapunov_solve(const CouplingMatrix& cm, const Matrix& gamma_pump) {
    const Eigen::Index n = cm.size();
    if (gamma_pump.rows() != n || gamma_pump.cols() != n) throw ModelError("gamma_pump must be N x N");
    const SpectrumReport sp = spectrum_numeric(cm);
    if (!sp.stable)
        throw NumericalError(error_code::unstable,
                             "max Re lambda = " + fmt(sp.max_real) + " >= 0: no steady state",
                             sp.max_real);
    const Matrix a = cm.h.conjugate();
    const Matrix q = 2.0 * gamma_pump.transpose();
    Matrix m = detail::solve_lyapunov(a, q);
    m = 0.5 * (m + m.adjoint()).eval();
    return {m, max_abs(a * m + m * a.adjoint() + q)};
}

// Raises ill-conditioned when max |residual| > 1e-9 max |2 Gamma^(p)|.
inline CorrelationMatrix lyapunov_steady(const CouplingMatrix& cm, const Matrix& gamma_pump) {
    CorrelationMatrix out = lyapunov_solve(cm, gamma_pump);
    const Matrix q = 2.0 * gamma_pump.transpose();
    const double bound = lyapunov_rel_tol * max_abs(q);
    if (out.residual > bound)
        throw NumericalError(error_code::ill_conditioned,
                             "Lyapunov residual " + fmt(out.residual) + " above 1e-9 relative",
                             out.residual);
    return out;
}

inline CorrelationMatrix lyapunov_steady(const LatticeModel& model) {
    return lyapunov_steady(coupling_matrix(model), model.gamma_pump());
}

class CorrelationStepper {
public:
    CorrelationStepper(const CouplingMatrix& cm, const Matrix& gamma_pump, Matrix m0)
        : a_(cm.h.conjugate()), q_(2.0 * gamma_pump.transpose()), m_(std::move(m0)) {}

    // One RK4 step followed by Hermitian symmetrisation; returns the
    // deviation from Hermiticity before symmetrising.
    double step(double dt) {
        const Matrix k1 = rhs(m_);
        const Matrix k2 = rhs(m_ + 0.5 * dt * k1);
        const Matrix k3 = rhs(m_ + 0.5 * dt * k2);
        const Matrix k4 = rhs(m_ + dt * k3);
        m_ += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double dev = hermiticity_defect(m_);
        m_ = 0.5 * (m_ + m_.adjoint()).eval();
        t_ += dt;
        return dev;
    }

    double time() const { return t_; }
    const Matrix& state() const { return m_; }

private:
    Matrix rhs(const Matrix& m) const { return a_ * m + m * a_.adjoint() + q_; }

    Matrix a_;
    Matrix q_;
    Matrix m_;
    double t_ = 0.0;
};

struct CorrelationTrajectory {
    std::vector<double> t;
    std::vector<Matrix> m;
    double max_hermiticity_deviation = 0.0;
};

// m0 defaults to the vacuum M = 0.
inline CorrelationTrajectory evolve_correlations(const CouplingMatrix& cm, const Matrix& gamma_pump,
                                                 std::optional<Matrix> m0, double dt, double t_final,
                                                 long stride = 1) {
    const Eigen::Index n = cm.size();
    detail::check_step(cm, dt, t_final);
    if (stride < 1) throw ModelError("stride must be >= 1");
    if (gamma_pump.rows() != n || gamma_pump.cols() != n) throw ModelError("gamma_pump must be N x N");
    Matrix start = m0 ? *m0 : Matrix::Zero(n, n);
    if (start.rows() != n || start.cols() != n) throw ModelError("m0 must be N x N");
    if (hermiticity_defect(start) > 1e-10) throw ModelError("m0 is not Hermitian");
    if (smallest_eigenvalue(start) < -1e-8) throw ModelError("m0 is not positive semidefinite");

    const long steps = detail::step_count(dt, t_final);
    const double h = steps ? t_final / steps : dt;
    CorrelationStepper st(cm, gamma_pump, start);
    CorrelationTrajectory out;
    out.t.push_back(0.0);
    out.m.push_back(start);
    for (long i = 1; i <= steps; ++i) {
        out.max_hermiticity_deviation = std::max(out.max_hermiticity_deviation, st.step(h));
        const double nrm = max_abs(st.state());
        if (!std::isfinite(nrm) || nrm > divergence_bound)
            throw NumericalError(error_code::diverged,
                                 "correlations diverged at t = " + fmt(i * h), i * h);
        if (i % stride == 0 || i == steps) {
            out.t.push_back(i * h);
            out.m.push_back(st.state());
        }
    }
    return out;
}

} // namespace topamp
