#include "shockstab/evans.hpp"
#include "testbeds.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <functional>

using namespace shockstab;

namespace {

// Dense finite differences of L v = v'' - (a(x) v)' on [-X, X] with Dirichlet ends, one
// decoupled scalar field at a time (B = I and diagonal dF along both closed-form profiles).
Eigen::VectorXcd fd_spectrum(const std::function<double(double)>& a, double X, int N) {
    const double h = 2 * X / (N + 1);
    Matrix L = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        const double x = -X + (i + 1) * h;
        L(i, i) = -2.0 / (h * h);
        if (i > 0) L(i, i - 1) = 1.0 / (h * h) + a(x - h) / (2 * h);
        if (i + 1 < N) L(i, i + 1) = 1.0 / (h * h) - a(x + h) / (2 * h);
    }
    return Eigen::EigenSolver<Matrix>(L, false).eigenvalues();
}

int count_right_of(const Eigen::VectorXcd& ev, double re, double* closest = nullptr) {
    int k = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i].real() >= re) {
            ++k;
            if (closest) *closest = std::abs(ev[i]);
        }
    return k;
}

void expect_criterion(const testbeds::Case& c) {
    EvansOptionsD o;
    o.R = 5.0;
    o.rho = 1e-3;
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = verify_criterion_D(*c.model, c.profile, o);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(d.winding_number, 0);
    EXPECT_EQ(d.origin_multiplicity, 1);
    EXPECT_EQ(d.ell, 1);
    EXPECT_EQ(d.verdict, Verdict::Pass) << d.detail;
    EXPECT_LT(d.conjugate_residual, 1e-6);
    EXPECT_LT(secs, 120.0);
}

}  // namespace

TEST(Evans, BurgersWindingAndOrigin) { expect_criterion(testbeds::burgers()); }

TEST(Evans, QuadraticGradientWindingAndOrigin) { expect_criterion(testbeds::quadratic_gradient()); }

// Independent cross-check: only the translation eigenvalue sits near the imaginary axis.
TEST(Evans, FiniteDifferenceSpectrumBurgers) {
    const auto ev = fd_spectrum([](double x) { return -std::tanh(0.5 * x); }, 15.0, 400);
    double mod = 1.0;
    EXPECT_EQ(count_right_of(ev, -1e-2, &mod), 1);
    EXPECT_LT(mod, 1e-2);
    EXPECT_EQ(count_right_of(ev, 1e-4), 0);
}

TEST(Evans, FiniteDifferenceSpectrumQuadraticGradient) {
    // dF(ubar) = diag(2 ubar_1, -2 ubar_1) with ubar_1 = -tanh x
    const auto e1 = fd_spectrum([](double x) { return -2.0 * std::tanh(x); }, 15.0, 400);
    const auto e2 = fd_spectrum([](double x) { return 2.0 * std::tanh(x); }, 15.0, 400);
    double mod = 1.0;
    EXPECT_EQ(count_right_of(e1, -1e-2, &mod) + count_right_of(e2, -1e-2), 1);
    EXPECT_LT(mod, 1e-2);
    EXPECT_EQ(count_right_of(e1, 1e-4) + count_right_of(e2, 1e-4), 0);
}

TEST(Evans, EssentialSpectrumIsStable) {
    const auto c = testbeds::quadratic_gradient();
    const auto r = essential_spectrum_guard(*c.model, c.endstates.u_minus, c.endstates.u_plus);
    EXPECT_TRUE(r.ok) << r.detail;
    EXPECT_LE(r.max_real_part, 1e-12);
}
