#include "shockstab/evolution.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

namespace {

struct Setup {
    testbeds::Case c;
    SimGrid grid;
    std::unique_ptr<DiscreteFamily> fam;
    std::unique_ptr<Stepper> st;
    Matrix steady;
};

std::unique_ptr<Setup> burgers_setup(bool calibrate) {
    auto s = std::make_unique<Setup>();
    s->c = testbeds::burgers();
    s->grid = make_grid(20.0, 0.1);
    s->fam = std::make_unique<DiscreteFamily>(s->c.profile, s->grid);
    s->st = std::make_unique<Stepper>(*s->c.model, s->grid, s->c.endstates.u_minus, s->c.endstates.u_plus);
    if (calibrate) s->steady = calibrate_family(*s->st, *s->fam, 20.0);
    return s;
}

}  // namespace

TEST(Stepper, CalibratedSteadyStateIsAFixedPoint) {
    auto s = burgers_setup(true);
    Matrix u = s->steady;
    double t = 0.0;
    for (int k = 0; k < 500; ++k) {
        s->st->step(u, t);
        t += s->st->dt();
    }
    EXPECT_LE((u - s->steady).cwiseAbs().maxCoeff(), 1e-8);
    // the discrete steady state is close to the continuous profile
    EXPECT_LE((s->steady - s->fam->values(0.0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Stepper, MassChangesOnlyThroughTheBoundary) {
    auto s = burgers_setup(false);
    Matrix u = s->fam->values(0.0) + perturbation(s->grid, 1, "sech", 0.01, Vector::Ones(1));
    const Vector m0 = s->st->mass(u);
    Vector inflow = Vector::Zero(1);
    double t = 0.0;
    for (int k = 0; k < 10000; ++k) {
        s->st->step(u, t);
        inflow += s->st->last_boundary_flux();
        t += s->st->dt();
    }
    EXPECT_LE(std::abs((s->st->mass(u) - m0 - inflow)[0]), 1e-8);
}

// Burgers conserves mass, so the front moves by int u0 / (u_- - u_+) = 0.01 pi / 2
TEST(Stepper, BurgersFrontShiftMatchesMassOracle) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    SimulationOptions o;
    o.half_width = 25.0;
    o.t_max = 30.0;
    o.amplitude = 0.01;
    const auto tr = simulate(*c.model, c.profile, b, o);
    const double expected = 0.005 * M_PI;
    EXPECT_NEAR(tr.delta_fit.back(), expected, 0.02 * expected);
    EXPECT_LT(tr.linf.back(), 1e-4);
}

TEST(Residuals, VanishAtTheProfile) {
    auto s = burgers_setup(false);
    const Matrix u = Matrix::Zero(1, s->grid.size());
    const auto r = nonlinear_residuals(*s->c.model, *s->fam, u, u, 0.0, 0.3, 0.1);
    EXPECT_EQ(r.Q.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.R.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.S.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Residuals, ZeroPhaseLeavesOnlyQ) {
    auto s = burgers_setup(false);
    const Matrix u = perturbation(s->grid, 1, "gaussian", 0.1, Vector::Ones(1));
    const auto r = nonlinear_residuals(*s->c.model, *s->fam, u, grid_derivative(s->grid, u), 0.0, 0.7, 0.2);
    EXPECT_LT(r.R.cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(r.S.cwiseAbs().maxCoeff(), 1e-15);
    // Burgers: Q = -u^2 / 2 exactly
    EXPECT_LT((r.Q + 0.5 * u.cwiseProduct(u)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Residuals, QIsQuadraticInThePerturbation) {
    const auto c = testbeds::quadratic_gradient();
    const SimGrid g = make_grid(15.0, 0.1);
    DiscreteFamily fam(c.profile, g);
    Vector dir(2);
    dir << 1.0, -0.5;
    const Matrix u = perturbation(g, 2, "sech", 1.0, dir);
    const Matrix ux = grid_derivative(g, u);
    auto qnorm = [&](double eps) {
        return nonlinear_residuals(*c.model, fam, eps * u, eps * ux, 0.0, 0.0, 0.0).Q.cwiseAbs().maxCoeff();
    };
    EXPECT_NEAR(qnorm(1e-2) / qnorm(1e-3), 100.0, 1e-6);
}

TEST(Phase, RecoversATranslate) {
    auto s = burgers_setup(false);
    const auto fit = extract_phase(*s->fam, s->fam->values(0.3));
    EXPECT_NEAR(fit.delta, 0.3, 1e-6);
    EXPECT_FALSE(fit.ambiguous);
}

TEST(Phase, SmallPerturbationMovesThePhaseSlightly) {
    auto s = burgers_setup(false);
    // odd-in-x bump around the front: no net mass, no first-order shift
    const Matrix u = s->fam->values(0.3) + perturbation(s->grid, 1, "sech_derivative", 1e-4, Vector::Ones(1));
    const auto fit = extract_phase(*s->fam, u, 0.2);
    EXPECT_NEAR(fit.delta, 0.3, 1e-3);
    EXPECT_FALSE(fit.ambiguous);
}

TEST(Phase, FlatStateIsAmbiguous) {
    auto s = burgers_setup(false);
    const Matrix u = Matrix::Constant(1, s->grid.size(), 1.0);
    const auto fit = extract_phase(*s->fam, u);
    EXPECT_TRUE(fit.ambiguous);
    EXPECT_FALSE(fit.warning.empty());
}
