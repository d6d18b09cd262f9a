#include "shockstab/errors.hpp"
#include "shockstab/profile.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

using namespace shockstab;

TEST(Profile, BurgersMatchesClosedForm) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = testbeds::burgers();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& p = c.profile;
    EXPECT_EQ(p.size(), 2048);
    EXPECT_NEAR(p.half_width(), 20.0, 1e-12);
    double dev = 0.0, ddev = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const double x = p.x[i];
        dev = std::max(dev, std::abs(p.values(0, i) + std::tanh(0.5 * x)));
        const double sech = 1.0 / std::cosh(0.5 * x);
        ddev = std::max(ddev, std::abs(p.derivatives(0, i) + 0.5 * sech * sech));
    }
    EXPECT_LE(dev, 1e-6);
    EXPECT_LE(ddev, 1e-6);
    EXPECT_LT(secs, 5.0);
}

TEST(Profile, QuadraticGradientMatchesClosedForm) {
    const auto c = testbeds::quadratic_gradient();
    const auto& p = c.profile;
    double dev = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        dev = std::max(dev, std::abs(p.values(0, i) + std::tanh(p.x[i])));
        dev = std::max(dev, std::abs(p.values(1, i)));
    }
    EXPECT_LE(dev, 1e-6);
}

// |ubar - u_pm| ~ e^{-alpha |x|}: rate 1 for Burgers (-tanh(x/2)), 2 for (-tanh x, 0)
TEST(Profile, DecayRatesMatchLinearization) {
    EXPECT_NEAR(decay_rate(testbeds::burgers().profile).alpha, 1.0, 1e-2);
    EXPECT_NEAR(decay_rate(testbeds::quadratic_gradient().profile).alpha, 2.0, 2e-2);
}

TEST(Profile, TravelingWaveOdeResidualIsSmall) {
    const auto c = testbeds::psystem();
    EXPECT_LT(profile_residual(*c.model, c.profile), 1e-3);
    EXPECT_GT(c.profile.alpha, 0.0);
}

TEST(Profile, TranslateFamilyDerivative) {
    const auto c = testbeds::burgers();
    const double d = 0.37, xi = 1.1, h = 1e-5;
    const double fd = (c.profile.family(d + h, xi)[0] - c.profile.family(d - h, xi)[0]) / (2 * h);
    EXPECT_NEAR(c.profile.family_ddelta(d, xi)[0], fd, 1e-7);
}

TEST(Profile, CsvRoundTrip) {
    const auto c = testbeds::burgers();
    const std::string path = ::testing::TempDir() + "profile_roundtrip.csv";
    write_profile_csv(c.profile, path);
    const auto back = read_profile_csv(path, c.endstates);
    ASSERT_EQ(back.size(), c.profile.size());
    EXPECT_LT((back.values - c.profile.values).cwiseAbs().maxCoeff(), 1e-12);
    std::remove(path.c_str());
}
