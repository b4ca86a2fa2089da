#pragma once

#include "topamp/topamp.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace th {

using namespace topamp;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) m(j, l) = cplx(u(rng), u(rng));
    return m;
}

// Random matrix shifted so every eigenvalue has Re < -margin.
inline Matrix random_stable(std::mt19937_64& rng, Eigen::Index n, double margin = 0.5) {
    Matrix m = random_matrix(rng, n);
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    const double shift = es.eigenvalues().real().maxCoeff() + margin;
    m.diagonal().array() -= shift;
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const Matrix a = random_matrix(rng, n);
    return 0.5 * (a + a.adjoint());
}

inline Matrix random_psd(std::mt19937_64& rng, Eigen::Index n) {
    const Matrix a = random_matrix(rng, n);
    return a * a.adjoint() / static_cast<double>(n);
}

inline CouplingMatrix chain_h(double t_c, double t_d, double gamma_p, double phi, int n) {
    return coupling_matrix(build_chain({t_c, t_d, gamma_p, phi, n}));
}

// Chain with G_jj += 0.5 sin(1.7 j + 0.3), j = 1..N: a fixed, RNG-free
// disorder pattern shared with the high-precision reference values.
inline CouplingMatrix patterned_disorder_h(double gamma_p, double phi, int n) {
    const LatticeModel clean = build_chain({1.0, 1.0, gamma_p, phi, n});
    Matrix g = clean.coherent();
    for (int j = 1; j <= n; ++j) g(j - 1, j - 1) += 0.5 * std::sin(1.7 * j + 0.3);
    return coupling_matrix(build_custom(clean.gamma_pump(), clean.gamma_decay(), g));
}

// A X + X A^dag + Q = 0 through the N^2 x N^2 vectorised system.
inline Matrix lyapunov_kron(const Matrix& a, const Matrix& q) {
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    Matrix big(n * n, n * n);
    // vec(A X) = (I kron A) vec X,  vec(X A^dag) = (conj(A) kron I) vec X
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            big.block(i * n, j * n, n, n) = id(i, j) * a + std::conj(a(i, j)) * id;
    const Eigen::Map<const Vector> qv(q.data(), n * n);
    const Vector x = big.partialPivLu().solve(-qv);
    return Eigen::Map<const Matrix>(x.data(), n, n);
}

// Sort by (Re, Im) for multiset comparison.
inline std::vector<cplx> sorted(const Vector& v) {
    std::vector<cplx> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

// Greedy multiset distance: every element of a matched to a distinct nearest element of b.
inline double multiset_distance(const Vector& a, const Vector& b) {
    std::vector<cplx> rest(b.data(), b.data() + b.size());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        auto best = std::min_element(rest.begin(), rest.end(),
                                     [&](cplx x, cplx y) { return std::abs(x - a(i)) < std::abs(y - a(i)); });
        worst = std::max(worst, std::abs(*best - a(i)));
        rest.erase(best);
    }
    return worst;
}

} // namespace th
