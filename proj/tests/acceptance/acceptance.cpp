// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "shockstab/evans.hpp"
#include "shockstab/evolution.hpp"
#include "shockstab/hypotheses.hpp"
#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/spectral.hpp"
#include "shockstab/templates.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

using namespace shockstab;

namespace {

struct Case {
    ModelPtr model;
    ShockEndstates endstates;
    ShockProfile profile;
};

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Case make_case(ModelPtr m, const Vector& um, const Vector& up) {
    Case c;
    c.model = std::move(m);
    c.endstates = classify_shock(*c.model, um, up);
    c.profile = solve_profile(*c.model, c.endstates);
    return c;
}

Case burgers() { return make_case(make_burgers(), vec({1.0}), vec({-1.0})); }
Case quadratic_gradient() { return make_case(make_quadratic_gradient(), vec({1.0, 0.0}), vec({-1.0, 0.0})); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// E0 is linear in the amplitude, so one unit-amplitude evaluation on the run's grid fixes it
double amplitude_for(const Case& c, const TemplateBundle& b, const SimulationOptions& o, double target_E0) {
    const SimGrid g = make_grid(default_half_width(b, c.profile, o.t_max), o.dx);
    const int n = c.model->dim();
    return target_E0 / weighted_sobolev_norm(g, perturbation(g, n, o.shape, 1.0, Vector::Ones(n)));
}

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Runs a check; an exception counts as a failure with its message.
void check(const char* id, const std::function<bool(std::ostringstream&)>& body) {
    std::ostringstream os;
    os.precision(4);
    bool ok = false;
    try {
        ok = body(os);
    } catch (const std::exception& e) {
        os << "exception: " << e.what();
    }
    report(id, ok, os.str());
}

// dense finite differences of v'' - (a v)' with Dirichlet ends
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

// eigenvalues with Re >= -1e-2 must be a single near-zero one; none with Re >= 1e-4
bool fd_only_translation(const std::vector<Eigen::VectorXcd>& parts, double& near_zero) {
    int close = 0, unstable = 0;
    near_zero = 1.0;
    for (const auto& ev : parts)
        for (int i = 0; i < ev.size(); ++i) {
            if (ev[i].real() >= 1e-4) ++unstable;
            if (ev[i].real() >= -1e-2) {
                ++close;
                near_zero = std::abs(ev[i]);
            }
        }
    return close == 1 && unstable == 0 && near_zero < 1e-2;
}

struct SimRun {
    SimulationTrace trace;
    DecayReport decay;
    EnergyReport energy;
    double seconds = 0.0;
};

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    std::optional<Case> B, Q;
    try {
        B = burgers();
        Q = quadratic_gradient();
    } catch (const std::exception& e) {
        std::printf("setup failed: %s\n", e.what());
    }

    check("profile_burgers", [&](std::ostringstream& os) {
        const auto t0 = std::chrono::steady_clock::now();
        const Case c = burgers();
        const double secs = seconds_since(t0);
        double dev = 0.0;
        for (int i = 0; i < c.profile.size(); ++i)
            dev = std::max(dev, std::abs(c.profile.values(0, i) + std::tanh(0.5 * c.profile.x[i])));
        os << "max|u + tanh(x/2)| = " << dev << " on [-" << c.profile.half_width() << ", "
           << c.profile.half_width() << "], N = " << c.profile.size() << ", " << secs << " s";
        return dev <= 1e-6 && c.profile.size() == 2048 && std::abs(c.profile.half_width() - 20.0) < 1e-12 &&
               secs < 5.0;
    });

    check("profile_quadratic_gradient", [&](std::ostringstream& os) {
        double dev = 0.0;
        for (int i = 0; i < Q->profile.size(); ++i) {
            dev = std::max(dev, std::abs(Q->profile.values(0, i) + std::tanh(Q->profile.x[i])));
            dev = std::max(dev, std::abs(Q->profile.values(1, i)));
        }
        const int excess = Q->endstates.i - Q->model->dim();
        os << "max deviation from (-tanh x, 0) = " << dev << ", class " << to_string(Q->endstates.shock_class)
           << ", i - n = " << excess;
        return dev <= 1e-6 && Q->endstates.shock_class == ShockClass::Undercompressive && excess == 0;
    });

    check("psystem_effective_diffusion", [&](std::ostringstream& os) {
        const double mu = 1.0;
        const auto sh = psystem_shock(1.0, 2.0);
        const auto m = make_psystem(mu, sh.speed);
        double err = 0.0;
        for (const Vector& u : {sh.u_minus, sh.u_plus}) {
            const auto modes = endstate_modes(*m, u);
            for (int j = 0; j < modes.beta.size(); ++j) err = std::max(err, std::abs(modes.beta[j] - mu / (2 * u[0])));
        }
        os << "max |beta - mu/(2v)| = " << err;
        return err <= 1e-8;
    });

    check("evans_winding", [&](std::ostringstream& os) {
        EvansOptionsD o;
        o.R = 5.0;
        o.rho = 1e-3;
        bool ok = true;
        for (const Case* c : {&*B, &*Q}) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto d = verify_criterion_D(*c->model, c->profile, o);
            const double secs = seconds_since(t0);
            os << c->model->name() << ": winding " << d.winding_number << ", origin " << d.origin_multiplicity
               << " (ell " << d.ell << "), " << secs << " s; ";
            ok = ok && d.winding_number == 0 && d.origin_multiplicity == 1 && d.ell == 1 &&
                 d.verdict == Verdict::Pass && secs < 120.0;
        }
        double zb = 0.0, zq = 0.0;
        const bool fb = fd_only_translation({fd_spectrum([](double x) { return -std::tanh(0.5 * x); }, 15.0, 400)}, zb);
        const bool fq = fd_only_translation({fd_spectrum([](double x) { return -2.0 * std::tanh(x); }, 15.0, 400),
                                             fd_spectrum([](double x) { return 2.0 * std::tanh(x); }, 15.0, 400)},
                                            zq);
        os << "finite differences: single eigenvalue near 0 (" << zb << ", " << zq << ")";
        return ok && fb && fq;
    });

    check("kernel_normalization", [&](std::ostringstream& os) {
        const auto bb = make_template_bundle(*B->model, B->profile);
        const auto bq = make_template_bundle(*Q->model, Q->profile);
        double half = 0.0;
        for (double y = -40.0; y <= 40.0; y += 0.37) half = std::max(half, std::abs(e_limit(bb, y)(0, 0) - 0.5));
        os << "residual burgers " << bb.kernel.normalization_residual << ", quadratic_gradient "
           << bq.kernel.normalization_residual << ", max|e(+inf) - 1/2| burgers " << half;
        return bb.kernel.normalization_residual <= 1e-6 && bq.kernel.normalization_residual <= 1e-6 && half <= 1e-6;
    });

    // long runs shared by the rate, template, phase and energy criteria
    std::optional<SimRun> simQ, simB;
    std::string simQ_error, simB_error;
    try {
        const auto b = make_template_bundle(*Q->model, Q->profile);
        SimulationOptions o;
        o.t_max = 400.0;
        o.amplitude = amplitude_for(*Q, b, o, 5e-3);
        const auto t0 = std::chrono::steady_clock::now();
        SimRun r;
        r.trace = simulate(*Q->model, Q->profile, b, o);
        r.seconds = seconds_since(t0);
        r.decay = verify_decay(r.trace, 40.0, 400.0, 20.0, 200.0);
        r.energy = energy_monitor(r.trace);
        simQ = std::move(r);
    } catch (const std::exception& e) {
        simQ_error = e.what();
    }
    try {
        const auto b = make_template_bundle(*B->model, B->profile);
        SimulationOptions o;
        o.t_max = 200.0;
        o.amplitude = 0.002;
        const auto t0 = std::chrono::steady_clock::now();
        SimRun r;
        r.trace = simulate(*B->model, B->profile, b, o);
        r.seconds = seconds_since(t0);
        r.decay = verify_decay(r.trace, 100.0, 200.0, 20.0, 200.0);
        r.energy = energy_monitor(r.trace);
        simB = std::move(r);
    } catch (const std::exception& e) {
        simB_error = e.what();
    }
    auto need = [](const std::optional<SimRun>& s, const std::string& err) {
        if (!s) throw std::runtime_error("simulation failed: " + err);
        return *s;
    };

    check("lp_decay_rates", [&](std::ostringstream& os) {
        const SimRun& s = need(simQ, simQ_error);
        const auto& d = s.decay;
        os << "E0 " << s.trace.E0 << ", slopes " << d.slope[0] << ", " << d.slope[1] << ", " << d.slope[2]
           << " over [40, 400], " << s.seconds << " s";
        bool ok = s.seconds < 600.0 && std::abs(s.trace.E0 - 5e-3) < 2.5e-3;
        for (int k = 0; k < 3; ++k) ok = ok && std::abs(d.slope[k] - d.expected[k]) <= 0.1;
        return ok;
    });

    check("pointwise_template_bound", [&](std::ostringstream& os) {
        const SimRun& q = need(simQ, simQ_error);
        const SimRun& b = need(simB, simB_error);
        os << "ratio t=20 / t=200: quadratic_gradient " << q.decay.ratio_early << " / " << q.decay.ratio_late
           << ", burgers " << b.decay.ratio_early << " / " << b.decay.ratio_late;
        return q.decay.ratio_late <= 2 * q.decay.ratio_early && b.decay.ratio_late <= 2 * b.decay.ratio_early &&
               std::isfinite(q.decay.ratio_sup) && std::isfinite(b.decay.ratio_sup);
    });

    check("phase_bounds", [&](std::ostringstream& os) {
        bool ok = true;
        for (const auto* s : {&simQ, &simB}) {
            const SimRun& r = need(*s, s == &simQ ? simQ_error : simB_error);
            const auto& d = r.decay;
            os << "[|ddelta|(1+t) " << d.delta_dot_bound << " at t=" << d.t_delta_dot_max << ", |delta|(1+t)^1/2 "
               << d.delta_bound << " at t=" << d.t_delta_max << ", |delta*|/E0 " << d.delta_star_over_E0 << "] ";
            ok = ok && std::isfinite(d.delta_dot_bound) && std::isfinite(d.delta_bound) && d.t_delta_dot_max < 50.0 &&
                 d.t_delta_max < 50.0 && d.delta_star_over_E0 <= 5.0;
        }
        return ok;
    });

    check("iteration_contraction", [&](std::ostringstream& os) {
        const auto b = make_template_bundle(*B->model, B->profile);
        IterationOptions o;
        o.t_max = 100.0;
        o.amplitude = 0.002;
        const auto t0 = std::chrono::steady_clock::now();
        const auto s = contraction_study(*B->model, B->profile, b, o, 4);
        const double secs = seconds_since(t0);
        bool ok = secs < 1200.0 && s.alpha_hat.size() == 4 && std::abs(s.E0 - 5e-3) < 2.5e-3;
        os << "E0 " << s.E0 << ", alpha";
        for (std::size_t n = 0; n < s.alpha_hat.size(); ++n) {
            os << ' ' << s.alpha_hat[n] << (s.at_floor[n] ? "(floor)" : "");
            ok = ok && s.alpha_hat[n] <= 0.8;
        }
        const double d0 = std::abs(s.from_zero.back().output.delta.front());
        os << ", |delta^4(0)| " << d0 << ", " << secs << " s";
        return ok && d0 <= 1e-4;
    });

    check("convolution_constants", [&](std::ostringstream& os) {
        const auto b = make_template_bundle(*B->model, B->profile);
        const auto s = lemma_refinement(b, 20, 80);
        double lo = 1e300, hi = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < s.ratios.size(); ++i) {
            lo = std::min(lo, s.ratios[i]);
            hi = std::max(hi, s.ratios[i]);
            finite = finite && s.coarse.fits[i].finite && s.fine.fits[i].finite;
        }
        os << s.ids.size() << " bounds, fine/coarse ratio in [" << lo << ", " << hi << "]";
        return s.stable && finite && s.ids.size() == 10 && lo > 0.5 && hi < 2.0;
    });

    check("hyperbolic_green_action", [&](std::ostringstream& os) {
        const double mu = 1.0;
        const auto sh = psystem_shock(1.0, 2.0);
        const Case c = make_case(make_psystem(mu, sh.speed), sh.u_minus, sh.u_plus);
        ShockProfile frozen = c.profile;
        for (int k = 0; k < frozen.size(); ++k) {
            frozen.values.col(k) = sh.u_plus;
            frozen.derivatives.col(k).setZero();
            frozen.second.col(k).setZero();
        }
        const auto sd = build_spectral_data(*c.model, frozen);
        CharacteristicFlow flow(sd);
        const double a = -sh.speed, eta = 1.0 / (mu * sh.u_plus[0]), t = 3.0;
        auto v0 = [](double x) {
            Vector v(2);
            v << std::exp(-x * x), 0.3 * std::sin(x);
            return v;
        };
        const auto g = hyperbolic_green_action(flow, std::function<Vector(double)>(v0), t);
        double err = 0.0;
        for (int k = 0; k < frozen.size(); ++k) {
            const double y = frozen.x[k] - a * t;
            err = std::max(err, std::abs(g.values(0, k) - std::exp(-eta * t) * std::exp(-y * y)));
            err = std::max(err, std::abs(g.values(1, k)));
        }
        os << "max error " << err << ", eta sign " << sd.eta_sign_resolution;
        return err <= 1e-6 && sd.eta_sign_resolution != "none";
    });

    check("energy_feasibility", [&](std::ostringstream& os) {
        const SimRun& q = need(simQ, simQ_error);
        const SimRun& b = need(simB, simB_error);
        // anti-test: F = u^2/2, B = -1 on the constant state 0, run short
        PolynomialSpec spec;
        spec.quadratic = {Matrix::Constant(1, 1, 0.5)};
        spec.viscosity = Matrix::Constant(1, 1, -1.0);
        const auto toy = make_polynomial(spec);
        SimulationTrace tr;
        tr.grid = make_grid(10.0, 0.1);
        StepperOptions so;
        so.dt = 1e-3;
        Stepper st(*toy, tr.grid, Vector::Zero(1), Vector::Zero(1), so);
        Matrix u = perturbation(tr.grid, 1, "sech", 0.005, Vector::Ones(1));
        double t = 0.0;
        for (int k = 0; k <= 10; ++k) {
            tr.t.push_back(t);
            tr.l2.push_back(std::sqrt(sobolev_norm_sq(tr.grid, u, 0)));
            tr.h2_sq.push_back(sobolev_norm_sq(tr.grid, u, 2));
            tr.delta_dot.push_back(0.0);
            for (int j = 0; j < 5; ++j) {
                st.step(u, t);
                t += st.dt();
            }
        }
        const auto anti = energy_monitor(tr);
        os << "C, theta2: quadratic_gradient " << q.energy.C << ", " << q.energy.theta2 << "; burgers " << b.energy.C
           << ", " << b.energy.theta2 << "; anti-test damping failure " << (anti.damping_failure ? "raised" : "missed");
        return q.energy.feasible && b.energy.feasible && q.energy.theta2 > 0 && b.energy.theta2 > 0 &&
               std::isfinite(q.energy.C) && std::isfinite(b.energy.C) && anti.damping_failure;
    });

    std::printf("%d of 12 criteria failed, %.1f s\n", failures, seconds_since(start));
    return failures == 0 ? 0 : 1;
}
