#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

namespace {

IterationOptions short_run(double amplitude) {
    IterationOptions o;
    o.t_max = 10.0;
    o.amplitude = amplitude;
    return o;
}

std::vector<double> grid_t(double T, double dt) {
    std::vector<double> t;
    for (int k = 0; k * dt <= T + 1e-12; ++k) t.push_back(k * dt);
    return t;
}

}  // namespace

TEST(StarNorm, WeightsAndProperties) {
    const auto t = grid_t(4.0, 0.5);
    std::vector<double> h(t.size()), hd(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        h[i] = 1.0 / std::sqrt(1.0 + t[i]);
        hd[i] = -0.5 / std::pow(1.0 + t[i], 1.5);
    }
    // sup |h| (1+t)^{1/2} = 1 everywhere, sup |h'| (1+t) = 0.5 (1+t)^{-1/2} peaks at t = 0
    EXPECT_NEAR(b1_norm(t, h, hd), 1.5, 1e-14);

    const auto a = seed_history(t);
    const auto z = zero_history(t);
    EXPECT_EQ(star_norm(a, a, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(star_norm(a, z, 1.0), star_norm(z, a, 1.0));
    PhaseHistory c = z;
    c.delta_star = 0.02;
    EXPECT_NEAR(star_norm(c, z, 3.0), 0.06, 1e-15);
    EXPECT_LE(star_norm(a, c, 1.0), star_norm(a, z, 1.0) + star_norm(z, c, 1.0) + 1e-15);
}

TEST(Iteration, ZeroDataIsAFixedPoint) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    IterationProblem prob(*c.model, c.profile, b, short_run(0.0));
    EXPECT_EQ(prob.E0(), 0.0);
    const auto rec = prob.apply(zero_history(prob.times()));
    EXPECT_LT(std::abs(rec.output.delta_star), 1e-12);
    for (double d : rec.output.delta) EXPECT_LT(std::abs(d), 1e-12);
    for (double v : rec.linf) EXPECT_LT(v, 1e-12);
}

// first iterate from (0, 0): delta* = int e(+inf) u0 = (1/2) int u0 for Burgers
TEST(Iteration, FirstIterateShiftMatchesMass) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    const double amp = 0.002;
    IterationProblem prob(*c.model, c.profile, b, short_run(amp));
    const auto rec = prob.apply(zero_history(prob.times()));
    EXPECT_NEAR(rec.output.delta_star, 0.5 * amp * M_PI, 1e-3 * amp);
    EXPECT_EQ(rec.output.t.size(), prob.times().size());
}

TEST(Iteration, LargeDataIsRejected) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    EXPECT_THROW(IterationProblem(*c.model, c.profile, b, short_run(0.1)), IterationAbort);
}

TEST(Iteration, BadOptionsAreConfigErrors) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    IterationOptions o = short_run(0.001);
    o.dt_phase = -1.0;
    EXPECT_THROW(IterationProblem(*c.model, c.profile, b, o), ConfigError);
}

TEST(Iteration, HistoriesInterpolate) {
    const auto t = grid_t(2.0, 1.0);
    const auto h = phase_history(t, [](double s) { return s * s; }, [](double s) { return 2 * s; }, 0.5);
    EXPECT_DOUBLE_EQ(h.delta_at(0.5), 0.5);
    EXPECT_DOUBLE_EQ(h.delta_at(7.0), 4.0);
    EXPECT_DOUBLE_EQ(h.delta_dot_at(1.5), 3.0);
    EXPECT_DOUBLE_EQ(h.delta_star, 0.5);
}
