#include "shockstab/errors.hpp"
#include "shockstab/model.hpp"
#include "shockstab/spectral.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;
using testbeds::vec;

namespace {

// central differences of the flux against the analytic Jacobian
void expect_jacobian_consistent(const ModelSystem& m, const Vector& u) {
    const Matrix A = m.flux_jacobian(u);
    Matrix fd(m.dim(), m.dim());
    const double h = 1e-6;
    for (int j = 0; j < m.dim(); ++j) {
        Vector up = u, um = u;
        up[j] += h;
        um[j] -= h;
        fd.col(j) = (m.flux(up) - m.flux(um)) / (2 * h);
    }
    EXPECT_LT((A - fd).cwiseAbs().maxCoeff(), 1e-7);
}

}  // namespace

TEST(Models, BuiltinJacobiansMatchDifferences) {
    expect_jacobian_consistent(*make_burgers(), vec({0.3}));
    expect_jacobian_consistent(*make_quadratic_gradient(), vec({0.4, -0.7}));
    expect_jacobian_consistent(*make_psystem(1.0, 0.5), vec({1.3, 0.2}));
}

TEST(Models, PSystemShockSatisfiesRankineHugoniot) {
    const auto sh = psystem_shock(1.0, 2.0);
    EXPECT_NEAR(sh.speed, std::sqrt(0.5), 1e-14);
    const auto m = make_psystem(1.0, sh.speed);
    const auto es = classify_shock(*m, sh.u_minus, sh.u_plus);
    EXPECT_LT(es.rankine_hugoniot_residual, 1e-12);
}

// beta_j = l_j B r_j; for the isothermal p-system both acoustic modes give mu / (2 v)
TEST(Models, PSystemEffectiveDiffusionMatchesClosedForm) {
    const double mu = 1.0;
    const auto sh = psystem_shock(1.0, 2.0);
    const auto m = make_psystem(mu, sh.speed);
    for (const Vector& u : {sh.u_minus, sh.u_plus}) {
        const auto modes = endstate_modes(*m, u);
        const double v = u[0];
        ASSERT_EQ(modes.beta.size(), 2);
        for (int j = 0; j < 2; ++j) {
            EXPECT_NEAR(modes.beta[j], mu / (2.0 * v), 1e-8);
            EXPECT_NEAR(modes.beta_modewise[j], mu / (2.0 * v), 1e-8);
        }
    }
}

TEST(Models, UnknownBuiltinIsRejected) {
    EXPECT_THROW(make_builtin("navier_stokes", {}), ConfigError);
}

TEST(Models, PolynomialShapesAreValidated) {
    PolynomialSpec s;
    s.n = 2;
    s.r = 2;
    s.viscosity = Matrix::Identity(3, 3);
    EXPECT_THROW(make_polynomial(s), StructuralError);
}

TEST(Hypotheses, TestbedsAreClassified) {
    const auto b = testbeds::burgers();
    EXPECT_EQ(b.endstates.shock_class, ShockClass::Lax);
    const auto q = testbeds::quadratic_gradient();
    EXPECT_EQ(q.endstates.shock_class, ShockClass::Undercompressive);
    EXPECT_EQ(q.endstates.i - 2, 0);
    EXPECT_TRUE(check_hypotheses(*b.model, b.endstates).passed());
    EXPECT_TRUE(check_hypotheses(*q.model, q.endstates).passed());
}

TEST(Hypotheses, IdenticalEndstatesAreDegenerate) {
    const auto m = make_burgers();
    EXPECT_THROW(classify_shock(*m, vec({1.0}), vec({1.0})), DegenerateShockError);
}

TEST(Hypotheses, PSystemTakesTheSymmetricBranch) {
    const auto p = testbeds::psystem();
    const auto rep = check_hypotheses(*p.model, p.endstates);
    EXPECT_TRUE(rep.symmetric_branch);
    EXPECT_FALSE(rep.parabolic_branch);
    EXPECT_TRUE(rep.passed());
}
