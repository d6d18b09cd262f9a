#include "shockstab/spectral.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

namespace {

// p-system profile with every sample replaced by u_plus: the hyperbolic block has constant
// speed a = -s and damping eta = -p'(v) / (mu / v) = 1 / (mu v)
struct Frozen {
    testbeds::Case c;
    ShockProfile frozen;
    double speed = 0.0, eta = 0.0;
};

Frozen frozen_psystem(double mu) {
    Frozen f;
    f.c = testbeds::psystem(mu);
    f.frozen = f.c.profile;
    const Vector up = f.c.endstates.u_plus;
    for (int k = 0; k < f.frozen.size(); ++k) {
        f.frozen.values.col(k) = up;
        f.frozen.derivatives.col(k).setZero();
        f.frozen.second.col(k).setZero();
    }
    f.speed = -f.c.model->frame_speed();
    f.eta = 1.0 / (mu * up[0]);
    return f;
}

}  // namespace

TEST(Spectral, FrozenHyperbolicActionFollowsCharacteristics) {
    const double mu = 1.0;
    const auto f = frozen_psystem(mu);
    const auto sd = build_spectral_data(*f.c.model, f.frozen);
    ASSERT_EQ(sd.block_count, 1);
    // the transcribed bracket gives -1/(mu v); the audit against dispersion flips it
    EXPECT_EQ(sd.eta_sign_resolution, "flipped");
    ASSERT_EQ(sd.eta_transcribed_plus.size(), 1);
    EXPECT_NEAR(sd.eta_transcribed_plus[0], -f.eta, 1e-10);
    EXPECT_NEAR(sd.blocks.back()[0].eta(0, 0), f.eta, 1e-10);
    CharacteristicFlow flow(sd);
    auto v0 = [](double x) {
        Vector v(2);
        v << std::exp(-x * x), 0.3 * std::sin(x);
        return v;
    };
    for (double t : {0.5, 3.0}) {
        const auto g = hyperbolic_green_action(flow, std::function<Vector(double)>(v0), t);
        double err = 0.0;
        for (int k = 0; k < f.frozen.size(); ++k) {
            const double x = f.frozen.x[k];
            const double y = x - f.speed * t;
            // only the first component is transported; the parabolic part of ext_R vanishes for B21 = 0
            err = std::max(err, std::abs(g.values(0, k) - std::exp(-f.eta * t) * std::exp(-y * y)));
            err = std::max(err, std::abs(g.values(1, k)));
        }
        EXPECT_LE(err, 1e-6) << "t = " << t;
    }
}

TEST(Spectral, DampingAgreesWithHighFrequencyDispersion) {
    const auto c = testbeds::psystem();
    const auto sd = build_spectral_data(*c.model, c.profile);
    ASSERT_EQ(sd.eta_dispersion_plus.size(), 1);
    EXPECT_NEAR(sd.eta_dispersion_plus[0], 1.0 / c.endstates.u_plus[0], 1e-3);
    EXPECT_NEAR(sd.eta_dispersion_minus[0], 1.0 / c.endstates.u_minus[0], 1e-3);
    EXPECT_LT(sd.static_residual, 1e-10);
}

TEST(Spectral, ParabolicModelsHaveNoHyperbolicBlock) {
    const auto c = testbeds::burgers();
    const auto sd = build_spectral_data(*c.model, c.profile);
    EXPECT_EQ(sd.block_count, 0);
    EXPECT_EQ(sd.eta_sign_resolution, "none");
}

TEST(Spectral, EndstateModesAreBiorthonormal) {
    const auto c = testbeds::quadratic_gradient();
    const auto m = endstate_modes(*c.model, c.endstates.u_minus);
    EXPECT_LT((m.L * m.R - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.speeds[0], -2.0, 1e-12);
    EXPECT_NEAR(m.speeds[1], 2.0, 1e-12);
}
