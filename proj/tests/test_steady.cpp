#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace topamp;

namespace {

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

// eps' = e_1 means eps = -i e_1
Drive unit_transformed_drive(Eigen::Index n) { return Drive::at_site(n, 0, -I); }

} // namespace

TEST(Svd, NegativeIdentity) {
    const SteadyState st = steady_state_svd(CouplingMatrix{-Matrix::Identity(3, 3)}, unit_transformed_drive(3));
    Vector e1 = Vector::Zero(3);
    e1(0) = 1.0;
    EXPECT_LT((st.alpha - e1).norm(), 1e-15);
    EXPECT_EQ(st.method, SteadyMethod::svd_sum);
}

TEST(Direct, TwoSiteLoss) {
    const Drive d{Vector{{-I, -2.0 * I}}};
    const SteadyState st = steady_state_direct(CouplingMatrix{-Matrix::Identity(2, 2)}, d);
    EXPECT_LT((st.alpha - Vector{{1.0, 2.0}}).norm(), 1e-15);
}

TEST(Direct, ScalarPumpedSite) {
    Matrix p(1, 1), k(1, 1);
    p << 1.0;
    k << 3.0;
    const LatticeModel m = build_custom(p, k, Matrix::Zero(1, 1));
    const SteadyState st = steady_state_direct(m, Drive::at_site(1, 0));
    EXPECT_NEAR(std::abs(st.alpha(0)), 0.5, 1e-15);
}

TEST(CrossCheck, SvdAgreesWithDirect) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + trial;
        const CouplingMatrix cm{th::random_stable(rng, n)};
        Drive d{th::random_matrix(rng, n).col(0)};
        const SteadyState a = steady_state_svd(cm, d);
        const SteadyState b = steady_state_direct(cm, d);
        EXPECT_LT(rel(a.alpha, b.alpha), 1e-8);
        EXPECT_LT(b.residual, 1e-8 * d.epsilon.norm());
    }
    const CouplingMatrix ssh = th::chain_h(1, 1, 0.2, pi / 2, 60);
    EXPECT_LT(rel(steady_state_svd(ssh, Drive::at_site(60, 0)).alpha,
                  steady_state_direct(ssh, Drive::at_site(60, 0)).alpha),
              1e-8);
}

TEST(CrossCheck, AmplifyingChainUsesRefinedEdge) {
    const CouplingMatrix cm = th::chain_h(1, 1, 0.5, pi / 3, 40);
    const Drive d = Drive::at_site(40, 0);
    EXPECT_LT(rel(steady_state_svd(cm, d).alpha, steady_state_direct(cm, d).alpha), 1e-8);
}

TEST(Direct, IllConditionedRefuses) {
    const CouplingMatrix cm = th::chain_h(1, 1, 1, pi / 2, 100);
    try {
        steady_state_direct(cm, Drive::at_site(100, 0));
        FAIL() << "expected ill-conditioned";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.code(), error_code::ill_conditioned);
    }
}

TEST(Svd, TruncationPolicy) {
    const CouplingMatrix cm = th::chain_h(1, 1, 1, pi / 2, 100);
    const Drive d = Drive::at_site(100, 0);
    try {
        steady_state_svd(cm, d);
        FAIL() << "expected singular-beyond-precision";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.code(), error_code::singular_beyond_precision);
    }
    const SteadyState st = steady_state_svd(cm, d, SvdPolicy::truncated);
    EXPECT_FALSE(st.warnings.empty());
    EXPECT_TRUE(st.alpha.allFinite());
}

TEST(Edge, BidiagonalClosedForm) {
    // H lower bidiagonal with diagonal -1 and subdiagonal 2: alpha_j = i 2^(j-1) exactly
    const CouplingMatrix cm = th::chain_h(1, 1, 1, pi / 2, 100);
    const SteadyState st = edge_rank1(cm, Drive::at_site(100, 0));
    EXPECT_NEAR(st.log10_abs(99), 99 * std::log10(2.0), 1e-9);
    EXPECT_NEAR(st.log10_abs(98), 98 * std::log10(2.0), 1e-9);
    EXPECT_EQ(st.form, "parity");
}

TEST(Edge, LocalisedAtFarEdgeAndAgreesWithDirect) {
    const CouplingMatrix cm = th::chain_h(1, 1, 1, pi / 3, 50);
    const Drive d = Drive::at_site(50, 0);
    const SteadyState e = edge_rank1(cm, d);
    const SteadyState x = steady_state_direct(cm, d);
    Eigen::Index peak;
    e.alpha.cwiseAbs().maxCoeff(&peak);
    EXPECT_EQ(peak, 49);
    EXPECT_NEAR(std::abs(e.alpha(49)) / std::abs(x.alpha(49)), 1.0, 1e-4);
}

TEST(Edge, SshPointWithinFifteenPercent) {
    const CouplingMatrix cm = th::chain_h(1, 1, 0.2, pi / 2, 60);
    const Drive d = Drive::at_site(60, 0);
    const double e = std::abs(edge_rank1(cm, d).alpha(59));
    const double x = std::abs(steady_state_direct(cm, d).alpha(59));
    EXPECT_LT(std::abs(e - x) / x, 0.15);
}

TEST(Edge, TrivialChainHasNoEdgeMode) {
    try {
        edge_rank1(th::chain_h(1, 1, 0.0, pi / 3, 50), Drive::at_site(50, 0));
        FAIL() << "expected no-edge-mode";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.code(), error_code::no_edge_mode);
    }
}

TEST(Edge, ParityFormNeedsParitySymmetry) {
    const CouplingMatrix cm = th::patterned_disorder_h(1, pi / 2, 30);
    const Drive d = Drive::at_site(30, 0);
    try {
        edge_rank1(cm, d, EdgeForm::parity);
        FAIL() << "expected not-parity-symmetric";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.code(), error_code::not_parity_symmetric);
    }
    const SteadyState g = edge_rank1(cm, d, EdgeForm::automatic);
    EXPECT_EQ(g.form, "general");
    EXPECT_FALSE(g.warnings.empty());
    const SteadyState x = steady_state_direct(cm, d);
    EXPECT_NEAR(std::abs(g.alpha(29)) / std::abs(x.alpha(29)), 1.0, 1e-6);
}

TEST(Ssh, Analytics) {
    const SshAnalytics a = ssh_analytics(1.0, 1.0, 50);
    EXPECT_NEAR(a.xi, 1.0 / std::log(2.0), 1e-15);
    EXPECT_NEAR(a.s_edge / 1.7763568394002505e-15, 1.0, 1e-12);  // 2 * 2^-50
    EXPECT_THROW(ssh_analytics(1.0, 2.0, 50), ModelError);
    EXPECT_THROW(ssh_analytics(1.0, 4.5, 50), ModelError);
    EXPECT_THROW(ssh_analytics(1.0, -0.1, 50), ModelError);
    EXPECT_THROW(ssh_analytics(0.0, 1.0, 50), ModelError);
}

TEST(Ssh, ClosedFormMatchesSvdSum) {
    const Drive d = Drive::at_site(100, 0);
    const SteadyState a = ssh_analytic_steady_state(1.0, 0.2, 100, d);
    const SteadyState n = steady_state_svd(th::chain_h(1, 1, 0.2, pi / 2, 100), d);
    EXPECT_LT(std::abs(std::abs(a.alpha(99)) - std::abs(n.alpha(99))) / std::abs(n.alpha(99)), 0.2);
    EXPECT_TRUE(a.warnings.empty());
}

TEST(Ssh, ClosedFormShape) {
    const SshAnalytics an = ssh_analytics(1.0, 0.5, 40);
    const SteadyState a = ssh_analytic_steady_state(1.0, 0.5, 40, Drive::at_site(40, 0));
    EXPECT_NEAR(std::abs(a.alpha(39)) / std::abs(a.alpha(0)), std::exp(39 / an.xi), 1e-9 * std::exp(39 / an.xi));
    const SteadyState z = ssh_analytic_steady_state(1.0, 0.5, 40, Drive{Vector::Zero(40)});
    EXPECT_EQ(z.alpha.norm(), 0.0);
    EXPECT_FALSE(ssh_analytic_steady_state(1.0, 1.0, 5, Drive::at_site(5, 0)).warnings.empty());
}

TEST(Property, Linearity) {
    std::mt19937_64 rng(9);
    const CouplingMatrix cm = th::chain_h(1, 1, 0.3, pi / 3, 20);
    const Drive a{th::random_matrix(rng, 20).col(0)}, b{th::random_matrix(rng, 20).col(1)};
    const Drive ab{a.epsilon + b.epsilon};
    for (auto solve : {+[](const CouplingMatrix& c, const Drive& d) { return steady_state_direct(c, d); },
                       +[](const CouplingMatrix& c, const Drive& d) { return steady_state_svd(c, d); }}) {
        const Vector sum = solve(cm, a).alpha + solve(cm, b).alpha;
        EXPECT_LT(rel(solve(cm, ab).alpha, sum), 1e-10);
    }
}

TEST(Property, Directionality) {
    for (double phi : {pi / 2, pi / 3, 2 * pi / 3}) {
        const auto iv = stable_topological_interval(1.0, phi);
        ASSERT_TRUE(iv.has_value());
        for (double frac : {0.3, 0.7}) {
            const ChainParams p{1.0, 1.0, iv->first + frac * (iv->second - iv->first), phi, 30};
            ASSERT_TRUE(topological_window_1d(p.t_c, p.t_d, p.gamma_p, p.phi));
            ASSERT_TRUE(stability_window_1d(p.t_d, p.gamma_p, p.phi));
            const CouplingMatrix cm = coupling_matrix(build_chain(p));
            const GainResult g = gain(cm, Drive::at_site(30, 0));
            EXPECT_EQ(g.output_site, 29);
            // the parity-reversed chain amplifies the other way
            const Matrix par = parity(30);
            const GainResult r = gain(CouplingMatrix{par * cm.h * par}, Drive::at_site(30, 0));
            EXPECT_EQ(r.output_site, 0);
        }
    }
}

TEST(Gain, Values) {
    EXPECT_NEAR(gain(CouplingMatrix{-Matrix::Identity(3, 3)}, Drive::at_site(3, 0)).log10_gain, 0.0, 1e-15);
    const GainResult g = gain(th::chain_h(1, 1, 1, pi / 2, 100), Drive::at_site(100, 0));
    EXPECT_EQ(g.method, SteadyMethod::edge_rank1);
    EXPECT_NEAR(g.log10_gain, 99 * std::log10(2.0), 1e-9);
    EXPECT_THROW(gain(th::chain_h(1, 1, 1, pi / 2, 10), Drive{Vector::Zero(10)}), ModelError);
    EXPECT_THROW(gain(th::chain_h(1, 1, 1, pi / 2, 10), Drive::at_site(9, 0)), ModelError);
}
