#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shockstab {

namespace {

double interp_linear(const std::vector<double>& t, const std::vector<double>& v, double s) {
    if (t.empty()) return 0.0;
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double w = (s - t[i]) / (t[i + 1] - t[i]);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

// column of a grid field at an arbitrary point, linear in x
Vector field_value(const SimGrid& g, const Matrix& f, double y) {
    const int N = g.size();
    if (y <= g.x[0]) return f.col(0);
    if (y >= g.x[N - 1]) return f.col(N - 1);
    const int i = std::min(static_cast<int>((y - g.x[0]) / g.dx), N - 2);
    const double w = (y - g.x[i]) / g.dx;
    return (1.0 - w) * f.col(i) + w * f.col(i + 1);
}

double inner(const Matrix& a, const Matrix& b, double dx) { return a.cwiseProduct(b).sum() * dx; }

// kernel row e(y - d, tau) sampled on the grid, stored as an n x N field
Matrix kernel_field(const TemplateBundle& b, const SimGrid& g, double d, double tau, EDerivative which) {
    Matrix out(b.n, g.size());
    for (int i = 0; i < g.size(); ++i) out.col(i) = e_profile(b, g.x[i] - d, tau, which).row(0).transpose();
    return out;
}

// jump e(0+, tau) - e(0-, tau): the point mass of e_y at the shock
Vector kernel_jump(const TemplateBundle& b, double tau) {
    return (e_profile(b, 1e-300, tau) - e_profile(b, 0.0, tau)).row(0).transpose();
}

struct KernelSpeeds {
    double a = 0.0, beta_min = 1.0, beta_max = 1.0;
};

KernelSpeeds kernel_speeds(const TemplateBundle& b) {
    KernelSpeeds k;
    k.a = std::max(b.speeds_minus.cwiseAbs().maxCoeff(), b.speeds_plus.cwiseAbs().maxCoeff());
    k.beta_min = std::min(b.beta_minus.minCoeff(), b.beta_plus.minCoeff());
    k.beta_max = std::max(b.beta_minus.maxCoeff(), b.beta_plus.maxCoeff());
    return k;
}

// int e_which(y - d, t) f(y) dy with sub-cells resolving the kernel width at small t
double kernel_moment(const TemplateBundle& b, const SimGrid& g, const Matrix& f, double d, double t,
                     EDerivative which) {
    const KernelSpeeds ks = kernel_speeds(b);
    const double width = std::sqrt(ks.beta_min * t);
    if (width >= 4.0 * g.dx) return inner(kernel_field(b, g, d, t, which), f, g.dx);
    const double h = width / 4.0;
    const double reach = ks.a * t + 12.0 * std::sqrt(ks.beta_max * t) + 2.0 * g.dx;
    const int cells = static_cast<int>(std::ceil(2.0 * reach / h));
    const double hh = 2.0 * reach / cells;
    double acc = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double y = d - reach + (c + 0.5) * hh;
        acc += e_profile(b, y - d, t, which).row(0).dot(field_value(g, f, y)) * hh;
    }
    return acc;
}

struct Tail {
    double value = 0.0;
    double error = 0.0;
};

// power-law extrapolation of int_{t_max}^inf I(s) ds from the last decade of samples
Tail fit_tail(const std::vector<double>& t, const std::vector<double>& I, const char* what) {
    double amax = 0.0;
    for (double v : I) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return {};
    const double tm = t.back();
    auto fit = [&](double from, double& p, double& value) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, sgn = 0;
        int m = 0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] < from || t[k] <= 0.0 || std::abs(I[k]) <= 1e-12 * amax) continue;
            const double lx = std::log(t[k]), ly = std::log(std::abs(I[k]));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            sgn += I[k];
            ++m;
        }
        if (m < 4) return false;
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / m;
        p = -slope;
        value = p > 1.0 ? std::copysign(std::exp(icpt) * std::pow(tm, 1.0 - p) / (p - 1.0), sgn) : 0.0;
        return true;
    };
    double p1 = 0, v1 = 0, p2 = 0, v2 = 0;
    if (!fit(0.1 * tm, p1, v1)) return {0.0, std::abs(I.back()) * tm};  // below the rounding floor
    if (!(p1 > 1.0)) {
        std::ostringstream os;
        os << "divergence: the " << what << " integrand decays like t^-" << p1
           << " over the last decade, too slowly for tail extrapolation";
        throw IterationAbort(os.str());
    }
    Tail out{v1, 0.0};
    if (fit(tm / 3.0, p2, v2) && p2 > 1.0) out.error = std::abs(v2 - v1);
    return out;
}

}  // namespace

double PhaseHistory::delta_at(double s) const { return interp_linear(t, delta, s); }
double PhaseHistory::delta_dot_at(double s) const { return interp_linear(t, delta_dot, s); }

PhaseHistory phase_history(const std::vector<double>& t, const std::function<double(double)>& delta,
                           const std::function<double(double)>& delta_dot, double delta_star) {
    PhaseHistory h;
    h.t = t;
    h.delta_star = delta_star;
    for (double s : t) {
        h.delta.push_back(delta(s));
        h.delta_dot.push_back(delta_dot(s));
    }
    return h;
}

PhaseHistory zero_history(const std::vector<double>& t) {
    return phase_history(t, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0);
}

PhaseHistory seed_history(const std::vector<double>& t) {
    return phase_history(
        t, [](double s) { return 0.01 / std::sqrt(1.0 + s); },
        [](double s) { return -0.005 * std::pow(1.0 + s, -1.5); }, 0.0);
}

double b1_norm(const std::vector<double>& t, const std::vector<double>& h, const std::vector<double>& hdot) {
    if (h.size() != t.size() || hdot.size() != t.size()) throw StructuralError("history lengths differ");
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        a = std::max(a, std::abs(h[i]) * std::sqrt(1.0 + t[i]));
        b = std::max(b, std::abs(hdot[i]) * (1.0 + t[i]));
    }
    return a + b;
}

double star_norm(const PhaseHistory& a, const PhaseHistory& b, double weight) {
    std::vector<double> d(a.t.size()), dd(a.t.size());
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        d[i] = a.delta[i] - b.delta_at(a.t[i]);
        dd[i] = a.delta_dot[i] - b.delta_dot_at(a.t[i]);
    }
    return b1_norm(a.t, d, dd) + weight * std::abs(a.delta_star - b.delta_star);
}

IterationProblem::IterationProblem(const ModelSystem& model, const ShockProfile& profile,
                                   const TemplateBundle& bundle, IterationOptions options)
    : model_(&model), profile_(&profile), bundle_(&bundle), opt_(std::move(options)) {
    if (!(opt_.t_max > 0.0) || !(opt_.dt_phase > 0.0) || opt_.dt_phase > opt_.t_max)
        throw ConfigError("iteration horizon and coupling interval must be positive");
    if (!bundle.has_kernel) throw ConfigError("the iteration needs the phase kernel e(y, +inf)");
    if (bundle.kernel.ell != 1) throw UnsupportedCaseError("the iteration supports one-parameter families only");
    const int K = static_cast<int>(std::lround(opt_.t_max / opt_.dt_phase));
    opt_.dt_phase = opt_.t_max / K;
    for (int k = 0; k <= K; ++k) times_.push_back(k * opt_.dt_phase);

    const double X = opt_.half_width > 0.0 ? opt_.half_width : default_half_width(bundle, profile, opt_.t_max);
    grid_ = std::make_unique<SimGrid>(make_grid(X, opt_.dx));
    family_ = std::make_unique<DiscreteFamily>(profile, *grid_);
    const Vector& um = profile.endstates.u_minus;
    const Vector& up = profile.endstates.u_plus;
    const double dt0 = Stepper(model, *grid_, um, up, {opt_.cfl, 0.0}).dt();
    substeps_ = static_cast<int>(std::ceil(opt_.dt_phase / dt0 - 1e-9));
    stepper_ = std::make_unique<Stepper>(model, *grid_, um, up, StepperOptions{opt_.cfl, opt_.dt_phase / substeps_});
    steady_ = calibrate_family(*stepper_, *family_);

    const int n = model.dim();
    Vector dir = Vector::Ones(n);
    if (!opt_.direction.empty()) {
        if (static_cast<int>(opt_.direction.size()) != n) throw ConfigError("perturbation direction has the wrong length");
        dir = Eigen::Map<const Vector>(opt_.direction.data(), n);
    }
    u0_ = perturbation(*grid_, n, opt_.shape, opt_.amplitude, dir);
    E0_ = weighted_sobolev_norm(*grid_, u0_, -0.75, 2);
    if (E0_ > opt_.e0_guard) {
        std::ostringstream os;
        os << "small-data guard: E0 = " << E0_ << " exceeds " << opt_.e0_guard;
        throw IterationAbort(os.str());
    }
}

IterationRecord IterationProblem::apply(const PhaseHistory& prev_in, int n_iter) {
    const SimGrid& g = *grid_;
    const DiscreteFamily& fam = *family_;
    const TemplateBundle& b = *bundle_;
    const int n = model_->dim();
    const int K = static_cast<int>(times_.size()) - 1;
    const double h = opt_.dt_phase;
    const double dx = g.dx;

    IterationRecord rec;
    rec.n = n_iter;
    // resample the input onto the coupling grid
    PhaseHistory prev;
    prev.t = times_;
    prev.delta_star = prev_in.delta_star;
    for (double s : times_) {
        prev.delta.push_back(prev_in.delta_at(s));
        prev.delta_dot.push_back(prev_in.delta_dot_at(s));
    }
    rec.input = prev;
    const double dsp = prev.delta_star;

    // kernels of the operator linearized about ubar^{delta*^{n-1}}: y is measured from dsp
    std::vector<Matrix> E(K + 1), Ey(K + 1), Em(K), Eym(K);
    std::vector<Vector> J(K + 1), Jm(K);
    E[0] = Ey[0] = Matrix::Zero(n, g.size());
    J[0] = Vector::Zero(n);
    for (int j = 1; j <= K; ++j) {
        E[j] = kernel_field(b, g, dsp, j * h, EDerivative::None);
        Ey[j] = kernel_field(b, g, dsp, j * h, EDerivative::Y);
        J[j] = kernel_jump(b, j * h);
    }
    for (int j = 0; j < K; ++j) {
        Em[j] = kernel_field(b, g, dsp, (j + 0.5) * h, EDerivative::None);
        Eym[j] = kernel_field(b, g, dsp, (j + 0.5) * h, EDerivative::Y);
        Jm[j] = kernel_jump(b, (j + 0.5) * h);
    }
    Matrix Einf(n, g.size());
    for (int i = 0; i < g.size(); ++i) Einf.col(i) = e_limit(b, g.x[i] - dsp).row(0).transpose();
    const Vector Jinf = (b.kernel.e_inf_plus - b.kernel.e_inf_minus).row(0).transpose();

    const Matrix u0p = steady_ + u0_ - fam.values(dsp);
    const Matrix tangent = fam.ddelta(dsp);

    // state and histories on the coupling grid
    Matrix ut = fam.values(dsp + prev.delta[0]) + u0p;
    std::vector<Matrix> Sh(K + 1), Ph(K + 1);
    std::vector<Vector> Pc(K + 1);
    std::vector<double> ddot(K + 1, 0.0), incr(K + 1, 0.0), fit_t, fit_d;
    double zeta = 0.0, guess = dsp + prev.delta[0];
    const int template_every = std::max(1, static_cast<int>(std::lround(1.0 / h)));
    const int fit_every = std::max(1, static_cast<int>(std::lround(5.0 / h)));

    // the forced equation carries -(delta_dot^n - delta_dot^{n-1}) d_delta ubar. delta_dot^n is
    // extrapolated linearly from the last two coupling times, and the applied forcing is steered so
    // its running integral matches (delta^n - delta^{n-1})(t) - (delta^n - delta^{n-1})(0) at each coupling time
    double pred0 = 0.0, pred1 = 0.0, t_pred = 0.0, corr = 0.0;
    double applied = 0.0;
    std::function<void(double, Matrix&)> forcing = [&](double s, Matrix& src) {
        src = -(pred0 + (s - t_pred) * pred1 + corr - prev.delta_dot_at(s)) * tangent;
    };

    for (int k = 0; k <= K; ++k) {
        const double t = times_[k];
        if (k > 0) {
            double s = times_[k - 1];
            stepper_->shift_balance(dsp + prev.delta[k - 1]);
            try {
                for (int q = 0; q < substeps_; ++q) {
                    stepper_->step(ut, s, &forcing);
                    s += stepper_->dt();
                }
            } catch (const BlowUpError& e) {
                throw IterationAbort(std::string("blow-up in iterate ") + std::to_string(n_iter) + ": " + e.what());
            }
        }
        const double dp = prev.delta[k], dpd = prev.delta_dot[k];
        const Matrix u = ut - fam.values(dsp + dp);
        const Matrix ux = grid_derivative(g, u);
        const Residuals res = nonlinear_residuals(*model_, fam, u, ux, dp, dpd, dsp);
        Ph[k] = res.Q + res.R;
        Sh[k] = res.S;
        Pc[k] = field_value(g, Ph[k], dsp);

        // delta_dot^n(t_k): the u0 term minus product integration over the history
        double v = kernel_moment(b, g, u0p, dsp, t == 0.0 ? 1e-6 : t, EDerivative::T);
        for (int m = 0; m < k; ++m) {
            const int j = k - m;
            const Matrix WE = E[j] - E[j - 1];
            const Matrix WY = Ey[j] - Ey[j - 1];
            v -= 0.5 * (inner(WE, Sh[m], dx) + inner(WE, Sh[m + 1], dx));
            v -= 0.5 * (inner(WY, Ph[m], dx) + inner(WY, Ph[m + 1], dx));
            v -= 0.5 * (J[j] - J[j - 1]).dot(Pc[m] + Pc[m + 1]);
        }
        ddot[k] = v;

        // delta^n(t_k) - delta^n(0): midpoint weights in s, the u0 term exact in time
        double d = k == 0 ? 0.0 : inner(E[k], u0p, dx);
        for (int m = 0; m < k; ++m) {
            const int j = k - m - 1;
            d -= 0.5 * h * (inner(Em[j], Sh[m], dx) + inner(Em[j], Sh[m + 1], dx));
            d -= 0.5 * h * (inner(Eym[j], Ph[m], dx) + inner(Eym[j], Ph[m + 1], dx));
            d -= 0.5 * h * Jm[j].dot(Pc[m] + Pc[m + 1]);
        }
        incr[k] = d;
        if (k > 0)
            applied += (pred0 + corr) * h + 0.5 * pred1 * h * h - 0.5 * h * (prev.delta_dot[k - 1] + prev.delta_dot[k]);
        t_pred = t;
        pred0 = ddot[k];
        pred1 = k > 0 ? (ddot[k] - ddot[k - 1]) / h : 0.0;
        corr = (incr[k] - (prev.delta[k] - prev.delta[0]) - applied) / h;

        rec.linf.push_back(u.cwiseAbs().maxCoeff());
        if (t >= 1.0 && k % template_every == 0) {
            double r = 0.0;
            for (int i = 0; i < g.size(); ++i) {
                const double a = u.col(i).norm() + ux.col(i).norm();
                if (a > 0.0) r = std::max(r, a / template_sum(b, g.x[i], t));
            }
            zeta = std::max(zeta, r);
        }
        zeta = std::max(zeta, std::abs(ddot[k]) * (1.0 + t));
        if (zeta > opt_.zeta_guard) {
            std::ostringstream os;
            os << "small-data guard: zeta = " << zeta << " exceeds " << opt_.zeta_guard << " at t = " << t
               << " in iterate " << n_iter;
            throw IterationAbort(os.str());
        }
        if (k % fit_every == 0) {
            const PhaseFit fit = extract_phase(fam, ut, guess);
            guess = fit.delta;
            fit_t.push_back(t);
            fit_d.push_back(fit.delta);
            if (fit.ambiguous) rec.warnings.push_back(fit.warning + " (t = " + std::to_string(t) + ")");
        }
    }
    rec.zeta_max = zeta;

    // infinite-time integrals: trapezoid on the horizon plus extrapolated tails
    std::vector<double> IS(K + 1), IP(K + 1);
    for (int k = 0; k <= K; ++k) {
        IS[k] = inner(Einf, Sh[k], dx);
        IP[k] = Jinf.dot(Pc[k]);
    }
    const Tail tS = fit_tail(times_, IS, "S"), tP = fit_tail(times_, IP, "Q + R");
    rec.tail_mass = std::abs(tS.value) + std::abs(tP.value);
    rec.tail_error = tS.error + tP.error;
    std::vector<double> RS(K + 1, 0.0), RP(K + 1, 0.0);  // int_{t_k}^{t_max}
    for (int k = K - 1; k >= 0; --k) {
        RS[k] = RS[k + 1] + 0.5 * h * (IS[k] + IS[k + 1]);
        RP[k] = RP[k + 1] + 0.5 * h * (IP[k] + IP[k + 1]);
    }
    const double u0inf = inner(Einf, u0p, dx);
    const double shift = u0inf - (RS[0] + tS.value) - (RP[0] + tP.value);

    PhaseHistory& out = rec.output;
    out.t = times_;
    out.delta_star = dsp + shift;
    out.delta_dot = ddot;
    out.delta.resize(K + 1);
    // (e(t) - e(+inf)) against u0 and the history, plus the e(+inf) integrals over [t, inf)
    for (int k = 0; k <= K; ++k) out.delta[k] = incr[k] - shift;

    for (int k = 1; k < K; ++k)
        rec.consistency =
            std::max(rec.consistency, std::abs((out.delta[k + 1] - out.delta[k - 1]) / (2.0 * h) - ddot[k]));
    for (int k = 0; k <= K; ++k) rec.forcing_max = std::max(rec.forcing_max, std::abs(ddot[k] - prev.delta_dot[k]));
    for (std::size_t i = 0; i < fit_t.size(); ++i)
        rec.fit_gap = std::max(rec.fit_gap, std::abs(fit_d[i] - out.delta_star - out.delta_at(fit_t[i])));
    rec.star_norm_diff = star_norm(out, prev, opt_.norm_weight);
    return rec;
}

IterationRecord iterate_T(const ModelSystem& model, const ShockProfile& profile, const TemplateBundle& bundle,
                          const PhaseHistory& previous, const IterationOptions& options, int n) {
    IterationProblem problem(model, profile, bundle, options);
    return problem.apply(previous, n);
}

ContractionStudy contraction_study(const ModelSystem& model, const ShockProfile& profile,
                                   const TemplateBundle& bundle, const IterationOptions& options, int iterations) {
    if (iterations < 1) throw ConfigError("the contraction study needs at least one iteration");
    IterationProblem problem(model, profile, bundle, options);
    ContractionStudy cs;
    cs.E0 = problem.E0();
    PhaseHistory a = zero_history(problem.times()), c = seed_history(problem.times());
    cs.distance.push_back(star_norm(a, c, options.norm_weight));
    for (int it = 1; it <= iterations; ++it) {
        IterationRecord ra = problem.apply(a, it);
        IterationRecord rb = problem.apply(c, it);
        if (!cs.from_zero.empty()) {
            const double pa = cs.from_zero.back().star_norm_diff, pb = cs.from_seed.back().star_norm_diff;
            ra.alpha_hat = pa > 0.0 ? ra.star_norm_diff / pa : 0.0;
            rb.alpha_hat = pb > 0.0 ? rb.star_norm_diff / pb : 0.0;
        }
        a = ra.output;
        c = rb.output;
        cs.from_zero.push_back(std::move(ra));
        cs.from_seed.push_back(std::move(rb));
        const double d = star_norm(a, c, options.norm_weight);
        const double last = cs.distance.back();
        cs.at_floor.push_back(last < cs.floor);
        cs.alpha_hat.push_back(last < cs.floor ? 0.0 : d / last);
        cs.distance.push_back(d);
    }
    return cs;
}

std::string iteration_json(const ContractionStudy& s) {
    using nlohmann::json;
    json j;
    j["E0"] = s.E0;
    j["floor"] = s.floor;
    j["distance"] = s.distance;
    j["alpha_hat"] = s.alpha_hat;
    j["at_floor"] = s.at_floor;
    auto seq = [](const std::vector<IterationRecord>& rs) {
        json arr = json::array();
        for (const auto& r : rs) {
            json e;
            e["n"] = r.n;
            e["delta_star_in"] = r.input.delta_star;
            e["delta_star"] = r.output.delta_star;
            e["delta_at_0"] = r.output.delta.front();
            e["delta_at_t_max"] = r.output.delta.back();
            e["star_norm_diff"] = r.star_norm_diff;
            e["alpha_hat"] = r.alpha_hat;
            e["tail_mass"] = r.tail_mass;
            e["tail_error"] = r.tail_error;
            e["consistency"] = r.consistency;
            e["fit_gap"] = r.fit_gap;
            e["forcing_max"] = r.forcing_max;
            e["zeta_max"] = r.zeta_max;
            e["warnings"] = r.warnings;
            arr.push_back(e);
        }
        return arr;
    };
    j["from_zero"] = seq(s.from_zero);
    j["from_seed"] = seq(s.from_seed);
    return j.dump(2);
}

}  // namespace shockstab
