#include "shockstab/templates.hpp"
#include "testbeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

TEST(Templates, ErrfnIsMonotoneBetweenZeroAndOne) {
    EXPECT_NEAR(errfn(0.0), 0.5, 1e-15);
    EXPECT_NEAR(errfn(-8.0), 0.0, 1e-15);
    EXPECT_NEAR(errfn(8.0), 1.0, 1e-15);
    double prev = 0.0;
    for (double z = -5; z <= 5; z += 0.25) {
        EXPECT_GE(errfn(z), prev);
        prev = errfn(z);
    }
    EXPECT_NEAR(errfn(1.0) + errfn(-1.0), 1.0, 1e-15);
}

// Burgers: mass conservation moves the front by int u0 / (u_- - u_+), so e(y, +inf) = 1/2
TEST(Templates, BurgersKernelLimitIsOneHalf) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    ASSERT_TRUE(b.has_kernel);
    for (double y : {-30.0, -3.0, -0.1, 0.1, 2.0, 40.0}) EXPECT_NEAR(e_limit(b, y)(0, 0), 0.5, 1e-6) << y;
    EXPECT_LE(b.kernel.normalization_residual, 1e-6);
}

TEST(Templates, QuadraticGradientKernelIsNormalized) {
    const auto c = testbeds::quadratic_gradient();
    const auto b = make_template_bundle(*c.model, c.profile);
    ASSERT_TRUE(b.has_kernel);
    EXPECT_EQ(b.kernel.ell, 1);
    EXPECT_LE(b.kernel.normalization_residual, 1e-6);

    // independent quadrature of int e(y, +inf) d_delta ubar dy against the closed-form profile
    double acc = 0.0;
    const double h = 1e-3;
    for (double y = -20 + 0.5 * h; y < 20; y += h) {
        const double s = 1.0 / std::cosh(y);
        Vector dd(2);
        dd << s * s, 0.0;  // -d/dx(-tanh x)
        acc += (e_limit(b, y) * dd)(0, 0) * h;
    }
    EXPECT_NEAR(acc, 1.0, 1e-6);
}

TEST(Templates, KernelApproachesItsLimit) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    for (double y : {-2.0, 3.0}) {
        const double late = e_profile(b, y, 1e4)(0, 0);
        EXPECT_NEAR(late, e_limit(b, y)(0, 0), 1e-2);
        EXPECT_NEAR(e_profile(b, y, 1e-6)(0, 0), 0.0, 1e-8);
    }
}

TEST(Templates, ClosedFormDerivativesMatchDifferences) {
    const auto c = testbeds::quadratic_gradient();
    const auto b = make_template_bundle(*c.model, c.profile);
    const double y = -1.7, t = 2.3, h = 1e-5;
    auto e = [&](double yy, double tt) { return e_profile(b, yy, tt); };
    const Matrix et = (e(y, t + h) - e(y, t - h)) / (2 * h);
    const Matrix ey = (e(y + h, t) - e(y - h, t)) / (2 * h);
    EXPECT_LT((e_profile(b, y, t, EDerivative::T) - et).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((e_profile(b, y, t, EDerivative::Y) - ey).cwiseAbs().maxCoeff(), 1e-6);
    const Matrix eyt = (e_profile(b, y, t + h, EDerivative::Y) - e_profile(b, y, t - h, EDerivative::Y)) / (2 * h);
    EXPECT_LT((e_profile(b, y, t, EDerivative::YT) - eyt).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Templates, TemplatesArePositiveAndDecay) {
    const auto c = testbeds::quadratic_gradient();
    const auto b = make_template_bundle(*c.model, c.profile);
    for (double x : {-10.0, 0.0, 5.0}) {
        EXPECT_GT(template_sum(b, x, 1.0), 0.0);
        EXPECT_LT(template_sum(b, x, 400.0), template_sum(b, x, 4.0));
    }
    EXPECT_THROW(e_profile(b, 0.3, 0.0), std::domain_error);
}

TEST(Templates, ConvolutionConstantsAreFinite) {
    const auto c = testbeds::burgers();
    const auto b = make_template_bundle(*c.model, c.profile);
    const auto rep = verify_convolution_lemmas(b, lemma_samples(b, 4));
    ASSERT_EQ(rep.fits.size(), 10u);
    for (const auto& f : rep.fits) {
        EXPECT_TRUE(f.finite) << f.id;
        EXPECT_GT(f.constant, 0.0) << f.id;
    }
    ASSERT_NE(rep.find("flux_eyt"), nullptr);
}
