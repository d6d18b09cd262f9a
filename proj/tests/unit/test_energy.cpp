#include "shockstab/evolution.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

namespace {

// Trace of a bump on the constant state 0 for the scalar toy F = u^2 / 2, B = b.
SimulationTrace toy_trace(double b, double t_max) {
    PolynomialSpec s;
    s.n = 1;
    s.r = 1;
    s.quadratic = {Matrix::Constant(1, 1, 0.5)};
    s.viscosity = Matrix::Constant(1, 1, b);
    const auto m = make_polynomial(s);
    SimulationTrace tr;
    tr.grid = make_grid(10.0, 0.1);
    StepperOptions so;
    so.dt = 1e-3;
    Stepper st(*m, tr.grid, Vector::Zero(1), Vector::Zero(1), so);
    Matrix u = perturbation(tr.grid, 1, "sech", 0.005, Vector::Ones(1));
    auto record = [&](double t) {
        tr.t.push_back(t);
        tr.l2.push_back(std::sqrt(sobolev_norm_sq(tr.grid, u, 0)));
        tr.h2_sq.push_back(sobolev_norm_sq(tr.grid, u, 2));
        tr.delta_dot.push_back(0.0);
    };
    record(0.0);
    double t = 0.0;
    const int per_output = 5;
    while (t < t_max - 1e-12) {
        for (int k = 0; k < per_output; ++k) {
            st.step(u, t);
            t += st.dt();
        }
        record(t);
    }
    return tr;
}

}  // namespace

TEST(Energy, DissipativeToyIsFeasible) {
    const auto rep = energy_monitor(toy_trace(1.0, 2.0));
    EXPECT_TRUE(rep.feasible) << rep.detail;
    EXPECT_FALSE(rep.damping_failure);
    EXPECT_GT(rep.theta2, 0.0);
    EXPECT_TRUE(std::isfinite(rep.C));
}

// designed failure: negative viscosity amplifies the grid-scale content exponentially
TEST(Energy, SignFlippedViscosityRaisesDampingFailure) {
    const auto rep = energy_monitor(toy_trace(-1.0, 0.05));
    EXPECT_TRUE(rep.damping_failure) << rep.detail;
    EXPECT_FALSE(rep.feasible);
}

TEST(Energy, BurgersRunIsFeasible) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    SimulationOptions o;
    o.t_max = 20.0;
    o.half_width = 25.0;
    o.amplitude = 0.002;
    const auto rep = energy_monitor(simulate(*c.model, c.profile, b, o));
    EXPECT_TRUE(rep.feasible) << rep.detail;
}
