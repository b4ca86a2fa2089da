#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace topamp;

TEST(Chain, DissipativeAndCoherentBlocks) {
    const LatticeModel m = build_chain({1.0, 1.0, 1.0, pi / 3, 50});
    const Matrix gam = m.net_dissipation();
    const Matrix& g = m.coherent();
    for (int j = 0; j < 50; ++j) {
        EXPECT_NEAR(gam(j, j).real(), -1.0, 1e-15);
        EXPECT_EQ(g(j, j), cplx(0.0));
        if (j + 1 < 50) {
            EXPECT_NEAR(std::abs(gam(j, j + 1) - 1.0), 0.0, 1e-15);
            EXPECT_NEAR(std::abs(gam(j + 1, j) - 1.0), 0.0, 1e-15);
            EXPECT_NEAR(std::abs(g(j, j + 1)), 1.0, 1e-15);
            EXPECT_NEAR(std::abs(g(j, j + 1) - std::polar(1.0, -pi / 3)), 0.0, 1e-15);
            EXPECT_EQ(g(j + 1, j), std::conj(g(j, j + 1)));
        }
    }
    EXPECT_EQ(gam(0, 2), cplx(0.0));
}

TEST(Chain, ZeroRatesGiveZeroMatrix) {
    const CouplingMatrix cm = th::chain_h(0.0, 0.0, 0.0, 0.0, 4);
    EXPECT_EQ(max_abs(cm.h), 0.0);
}

TEST(Chain, PurelyDissipativeDiagonal) {
    const LatticeModel m = build_chain({0.0, 1.0, 0.0, 0.0, 5});
    EXPECT_EQ(m.net_dissipation().diagonal().real(), RealVector::Constant(5, -2.0));
}

TEST(Chain, PumpDecayDecomposition) {
    const LatticeModel m = build_chain({1.0, 0.7, 0.4, 0.3, 6});
    const double kappa = 4 * 0.7 - 0.4;
    EXPECT_LT(max_abs(m.gamma_decay() - kappa * Matrix::Identity(6, 6)), 1e-15);
    for (int j = 0; j < 6; ++j) {
        EXPECT_NEAR(m.gamma_pump()(j, j).real(), 2 * 0.7, 1e-15);
        if (j + 1 < 6) {
            EXPECT_NEAR(m.gamma_pump()(j, j + 1).real(), 0.7, 1e-15);
        }
    }
    EXPECT_GE(smallest_eigenvalue(m.gamma_pump()), -1e-12);
}

TEST(Chain, NegativeKappaWarns) {
    const LatticeModel m = build_chain({1.0, 1.0, 5.0, 0.0, 4});
    EXPECT_FALSE(m.warnings().empty());
    EXPECT_TRUE(build_chain({1.0, 1.0, 1.0, 0.0, 4}).warnings().empty());
}

TEST(Chain, RejectsBadParameters) {
    EXPECT_THROW(build_chain({1.0, 1.0, 1.0, 0.0, 1}), ModelError);
    EXPECT_THROW(build_chain({1.0, -1.0, 1.0, 0.0, 4}), ModelError);
    EXPECT_THROW(build_chain({1.0, 1.0, std::nan(""), 0.0, 4}), ModelError);
}

TEST(Coupling, HandExpandedThreeSiteChain) {
    // phi = pi/2: H_{j,j+1} = t_d - i t_c e^{-i phi} = 0, H_{j+1,j} = t_d - i t_c e^{i phi} = 2
    const CouplingMatrix cm = th::chain_h(1.0, 1.0, 1.0, pi / 2, 3);
    Matrix expect(3, 3);
    expect << -1, 0, 0,
               2, -1, 0,
               0, 2, -1;
    EXPECT_LT(max_abs(cm.h - expect), 1e-15);
}

TEST(Coupling, PureLoss) {
    const LatticeModel m = build_custom(Matrix::Zero(3, 3), 0.5 * Matrix::Identity(3, 3), Matrix::Zero(3, 3));
    EXPECT_LT(max_abs(coupling_matrix(m).h + 0.5 * Matrix::Identity(3, 3)), 1e-15);
}

TEST(Coupling, SingleSiteScalar) {
    Matrix p(1, 1), d(1, 1), g(1, 1);
    p << 1.0;
    d << 3.0;
    g << 0.5;
    EXPECT_EQ(coupling_matrix(build_custom(p, d, g)).h(0, 0), cplx(-2.0, -0.5));
}

TEST(Coupling, DecayEntersTransposed) {
    Matrix d(2, 2);
    d << 1.0, 0.5 * I, -0.5 * I, 1.0;
    const LatticeModel m = build_custom(Matrix::Zero(2, 2), d, Matrix::Zero(2, 2));
    EXPECT_EQ(coupling_matrix(m).h(0, 1), -d(1, 0));
    EXPECT_EQ(coupling_matrix(m).h(1, 0), -d(0, 1));
}

TEST(Coupling, ClosedSystemIsAntiHermitian) {
    std::mt19937_64 rng(11);
    const Matrix g = th::random_hermitian(rng, 6);
    const CouplingMatrix cm = coupling_matrix(build_custom(Matrix::Zero(6, 6), Matrix::Zero(6, 6), g));
    EXPECT_LT(max_abs(cm.h + cm.h.adjoint()), 1e-15);
}

TEST(Custom, MatchesChainBuiltByHand) {
    const ChainParams p{1.3, 0.6, 0.9, 0.4, 5};
    const LatticeModel chain = build_chain(p);
    const LatticeModel same = build_custom(chain.gamma_pump(), chain.gamma_decay(), chain.coherent());
    EXPECT_EQ(coupling_matrix(chain).h, coupling_matrix(same).h);
}

TEST(Custom, ValidatesInput) {
    Matrix h(2, 2);
    h << 1.0, 0.3, 0.1, 1.0;  // not Hermitian
    const Matrix z = Matrix::Zero(2, 2), id = Matrix::Identity(2, 2);
    EXPECT_THROW(build_custom(h, z, z), ModelError);
    EXPECT_THROW(build_custom(z, z, h), ModelError);
    EXPECT_THROW(build_custom(-id, z, z), ModelError);  // not PSD
    EXPECT_THROW(build_custom(id, Matrix::Zero(3, 3), z), ModelError);
    Matrix nan = id;
    nan(0, 0) = std::nan("");
    EXPECT_THROW(build_custom(nan, z, z), ModelError);
}

TEST(Property, ChainEntriesFollowFormula) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const ChainParams p{u(rng), u(rng), u(rng) - 0.5, 3.0 * u(rng), 2 + trial % 9};
        const Matrix h = coupling_matrix(build_chain(p)).h;
        for (int j = 0; j < p.n_sites; ++j) {
            EXPECT_NEAR(std::abs(h(j, j) - (p.gamma_p - 2 * p.t_d)), 0.0, 1e-14);
            if (j + 1 < p.n_sites) {
                EXPECT_NEAR(std::abs(h(j, j + 1) - (p.t_d - I * p.t_c * std::polar(1.0, -p.phi))), 0.0, 1e-14);
                EXPECT_NEAR(std::abs(h(j + 1, j) - (p.t_d - I * p.t_c * std::polar(1.0, p.phi))), 0.0, 1e-14);
            }
        }
    }
}

TEST(Disorder, ZeroSigmaIsBitwiseIdentity) {
    const LatticeModel m = build_chain({1.0, 1.0, 1.0, pi / 2, 20});
    const LatticeModel d = add_diagonal_disorder(m, 0.0, 1234);
    EXPECT_EQ(d.coherent(), m.coherent());
    EXPECT_EQ(d.gamma_pump(), m.gamma_pump());
    EXPECT_EQ(d.gamma_decay(), m.gamma_decay());
}

TEST(Disorder, DeterministicAndHermitian) {
    const LatticeModel m = build_chain({1.0, 1.0, 1.0, pi / 2, 20});
    const Matrix before = m.coherent();
    const LatticeModel a = add_diagonal_disorder(m, 0.4, 99);
    const LatticeModel b = add_diagonal_disorder(m, 0.4, 99);
    const LatticeModel c = add_diagonal_disorder(m, 0.4, 100);
    EXPECT_EQ(a.coherent(), b.coherent());
    EXPECT_NE(a.coherent(), c.coherent());
    EXPECT_EQ(m.coherent(), before);
    EXPECT_EQ(hermiticity_defect(a.coherent()), 0.0);
    const Matrix diff = a.coherent() - m.coherent();
    EXPECT_EQ(max_abs(diff - Matrix(diff.diagonal().asDiagonal())), 0.0);
    EXPECT_THROW(add_diagonal_disorder(m, -0.1, 1), ModelError);
}

TEST(Disorder, OffsetStandardDeviation) {
    const double sigma = 0.3;
    double sum = 0.0, sq = 0.0;
    long count = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const RealVector d = disorder_offsets(100, sigma, seed);
        sum += d.sum();
        sq += d.squaredNorm();
        count += d.size();
    }
    const double mean = sum / count;
    const double sd = std::sqrt(sq / count - mean * mean);
    EXPECT_NEAR(sd, sigma, 0.05 * sigma);
    EXPECT_NEAR(mean, 0.0, 0.01);
}
