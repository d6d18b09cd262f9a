#include "shockstab/templates.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace shockstab {

const LemmaFit* LemmaReport::find(const std::string& id) const {
    for (const auto& f : fits)
        if (f.id == id) return &f;
    return nullptr;
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Quad {
    double value = 0.0;
    bool ok = true;
};

// Adaptive quadrature over [a, b] split at the given interior points.
Quad integrate(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts, double tol,
               unsigned depth = 10) {
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    Quad q;
    double prev = a;
    double err_sum = 0.0, l1_sum = 0.0;
    for (double c : cuts) {
        if (c <= prev) continue;
        if (c > b) break;
        double err = 0.0;
        double l1 = 0.0;
        const double v = GK::integrate(f, prev, c, depth, tol, &err, &l1);
        if (!std::isfinite(v)) q.ok = false;
        err_sum += err;
        l1_sum += l1;
        q.value += v;
        prev = c;
    }
    if (err_sum > std::max(1e-3 * l1_sum, 1e-14)) q.ok = false;
    return q;
}

double max_speed(const TemplateBundle& b) {
    return std::max(b.speeds_minus.cwiseAbs().maxCoeff(), b.speeds_plus.cwiseAbs().maxCoeff());
}

// spatial window and break points for y-integrals at time t
struct Window {
    double lo, hi;
    std::vector<double> cuts;
};

Window window(const TemplateBundle& b, double x, double t, double s) {
    const auto& c = b.constants;
    const double A = max_speed(b);
    const double spread = 12.0 * std::sqrt(c.M * std::max(t, 1.0)) + 40.0 / std::max(c.eta, 1e-3);
    Window w;
    w.hi = std::max(std::abs(x), A * t) + spread;
    w.lo = -w.hi;
    w.cuts = {0.0, x};
    for (int k = 0; k < b.n; ++k) {
        w.cuts.push_back(x - b.speeds_minus[k] * (t - s));
        w.cuts.push_back(x - b.speeds_plus[k] * (t - s));
        w.cuts.push_back(b.speeds_minus[k] * s);
        w.cuts.push_back(b.speeds_plus[k] * s);
        w.cuts.push_back(-b.speeds_minus[k] * (t - s));
        w.cuts.push_back(-b.speeds_plus[k] * (t - s));
    }
    // geometric layers around each break point resolve the kernel width sqrt(t - s)
    // and the source width sqrt(s)
    const std::vector<double> base = w.cuts;
    for (double width : {std::sqrt(c.M * std::max(t - s, 0.0)), std::sqrt(c.L * std::max(s, 0.0))}) {
        if (width < 1e-8) continue;
        for (double p : base)
            for (double f = 1.0; f * width < w.hi; f *= 4.0) {
                w.cuts.push_back(p - f * width);
                w.cuts.push_back(p + f * width);
            }
    }
    std::vector<double> in;
    for (double v : w.cuts)
        if (v > w.lo && v < w.hi) in.push_back(v);
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    w.cuts = in;
    return w;
}

double norm_row(const Matrix& m) { return m.norm(); }

struct Lemma {
    std::string id;
    std::string statement;
    // returns {lhs, rhs, ok}
    std::function<Quad(double x, double t)> lhs;
    std::function<double(double x, double t)> rhs;
};

}  // namespace

std::vector<LemmaSample> lemma_samples(const TemplateBundle& b, int count, double t_min, double t_max) {
    auto radical = [](int i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    std::vector<double> rays{0.0};
    for (int k = 0; k < b.n; ++k) {
        rays.push_back(b.speeds_minus[k]);
        rays.push_back(b.speeds_plus[k]);
    }
    std::sort(rays.begin(), rays.end());
    rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
    std::vector<LemmaSample> out;
    for (int i = 1; i <= count; ++i) {
        const double t = t_min * std::pow(t_max / t_min, radical(i, 2));
        const double ray = rays[static_cast<std::size_t>(i) % rays.size()];
        const double off = (radical(i, 3) - 0.5) * 4.0 * std::sqrt(b.constants.L * t);
        out.push_back({ray * t + off, t});
    }
    return out;
}

LemmaReport verify_convolution_lemmas(const TemplateBundle& b, const std::vector<LemmaSample>& samples) {
    const double tol = 1e-5;
    auto w32 = [](double y) { return std::pow(1.0 + std::abs(y), -1.5); };

    auto single = [&](const std::function<double(double, double)>& f) {
        return [&, f](double x, double t) {
            const Window w = window(b, x, t, 0.0);
            return integrate([&](double y) { return f(y, t) * w32(y); }, w.lo, w.hi, w.cuts, tol);
        };
    };
    // int_0^t int |K(x, t - s; y)| src(y, s) dy ds
    auto double_int = [&](const std::function<double(double, double, double)>& kernel,
                          const std::function<double(double, double)>& src) {
        return [&, kernel, src](double x, double t) {
            bool ok = true;
            auto inner = [&](double s) {
                if (s >= t) return 0.0;
                const Window w = window(b, x, t, s);
                const Quad q = integrate([&](double y) { return kernel(x, t - s, y) * src(y, s); }, w.lo, w.hi,
                                         w.cuts, tol, 12);
                ok = ok && q.ok;
                return q.value;
            };
            // s = t u^2 near 0 and s = t (1 - u^2) near t remove the integrable endpoint singularities
            const double um = std::sqrt(0.5);
            const Quad q0 = integrate([&](double u) { return inner(t * u * u) * 2.0 * t * u; }, 0.0, um,
                                      {}, 1e-5, 10);
            const Quad q1 = integrate([&](double u) { return inner(t - t * u * u) * 2.0 * t * u; }, 0.0, um,
                                      {}, 1e-5, 10);
            Quad q{q0.value + q1.value, q0.ok && q1.ok};
            q.ok = q.ok && ok;
            return q;
        };
    };

    auto T = [&](double x, double t) { return template_sum(b, x, t); };
    auto e_abs = [&](double y, double t) { return norm_row(e_profile(b, y, t)); };
    auto et_abs = [&](double y, double t) { return norm_row(e_profile(b, y, t, EDerivative::T)); };
    auto ediff = [&](double y, double t) { return norm_row(e_profile(b, y, t) - e_limit(b, y)); };
    auto ey_abs = [&](double y, double t) { return norm_row(e_profile(b, y, t, EDerivative::Y)); };
    auto eyt_abs = [&](double y, double t) { return norm_row(e_profile(b, y, t, EDerivative::YT)); };
    auto phi1 = [&](double y, double s) { return source_phi1(b, y, s); };
    auto phi2 = [&](double y, double s) { return source_phi2(b, y, s); };

    std::vector<Lemma> lemmas = {
        {"initial_green", "int |G~| (1+|y|)^{-3/2} dy <= C (theta+psi1+psi2)",
         [&](double x, double t) {
             const Window w = window(b, x, t, 0.0);
             return integrate([&](double y) { return gtilde_envelope(b, x, t, y, 0, 0) * w32(y); }, w.lo, w.hi,
                              w.cuts, tol);
         },
         T},
        {"initial_et", "int |e_t| (1+|y|)^{-3/2} dy <= C (1+t)^{-3/2}", single(et_abs),
         [](double, double t) { return std::pow(1.0 + t, -1.5); }},
        {"initial_e", "int |e| (1+|y|)^{-3/2} dy <= C", single(e_abs), [](double, double) { return 1.0; }},
        {"initial_e_minus_limit", "int |e - e(+inf)| (1+|y|)^{-3/2} dy <= C (1+t)^{-1/2}", single(ediff),
         [](double, double t) { return std::pow(1.0 + t, -0.5); }},
        {"flux_green_y", "int_0^t int |G~_y| Phi1 <= C (theta+psi1+psi2)",
         double_int([&](double x, double tau, double y) { return gtilde_envelope(b, x, tau, y, 0, 1); }, phi1), T},
        {"flux_eyt", "int_0^t int |e_yt| Phi1 <= C (1+t)^{-1}",
         double_int([&](double, double tau, double y) { return eyt_abs(y, tau); }, phi1),
         [](double, double t) { return 1.0 / (1.0 + t); }},
        {"flux_ey", "int_0^t int |e_y| Phi1 <= C (1+t)^{-1/2}",
         double_int([&](double, double tau, double y) { return ey_abs(y, tau); }, phi1),
         [](double, double t) { return std::pow(1.0 + t, -0.5); }},
        {"source_green", "int_0^t int |G~| Phi2 <= C (theta+psi1+psi2)",
         double_int([&](double x, double tau, double y) { return gtilde_envelope(b, x, tau, y, 0, 0); }, phi2), T},
        {"source_et", "int_0^t int |e_t| Phi2 <= C (1+t)^{-3/2}",
         double_int([&](double, double tau, double y) { return et_abs(y, tau); }, phi2),
         [](double, double t) { return std::pow(1.0 + t, -1.5); }},
        {"source_e_minus_limit", "int_0^t int |e - e(+inf)| Phi2 <= C (1+t)^{-3/2}",
         double_int([&](double, double tau, double y) { return ediff(y, tau); }, phi2),
         [](double, double t) { return std::pow(1.0 + t, -1.5); }},
    };
    LemmaReport rep;
    for (const auto& lem : lemmas) {
        LemmaFit fit;
        fit.id = lem.id;
        fit.statement = lem.statement;
        for (const auto& smp : samples) {
            const Quad q = lem.lhs(smp.x, smp.t);
            const double r = lem.rhs(smp.x, smp.t);
            if (!q.ok || !(r > 0.0)) {
                ++fit.excluded;
                continue;
            }
            fit.constant = std::max(fit.constant, q.value / r);
            ++fit.samples;
        }
        fit.finite = fit.samples > 0 && std::isfinite(fit.constant);
        if (fit.excluded > 0)
            rep.warnings.push_back(lem.id + ": " + std::to_string(fit.excluded) +
                                   " sample(s) excluded, quadrature did not converge");
        rep.fits.push_back(fit);
    }
    return rep;
}

LemmaStability lemma_refinement(const TemplateBundle& b, int coarse, int fine) {
    LemmaStability s;
    s.coarse = verify_convolution_lemmas(b, lemma_samples(b, coarse));
    s.fine = verify_convolution_lemmas(b, lemma_samples(b, fine));
    s.stable = true;
    for (std::size_t i = 0; i < s.coarse.fits.size(); ++i) {
        const auto& c = s.coarse.fits[i];
        const auto& f = s.fine.fits[i];
        s.ids.push_back(c.id);
        double ratio;
        if (c.constant == 0.0 && f.constant == 0.0) {
            ratio = 1.0;  // identically vanishing left side
        } else {
            ratio = c.constant > 0.0 ? f.constant / c.constant : std::numeric_limits<double>::infinity();
        }
        s.ratios.push_back(ratio);
        if (!c.finite || !f.finite || !(ratio >= 0.5 && ratio <= 2.0)) s.stable = false;
    }
    return s;
}

std::string lemma_json(const LemmaStability& s) {
    nlohmann::json j;
    j["stable"] = s.stable;
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
        const auto& c = s.coarse.fits[i];
        const auto& f = s.fine.fits[i];
        arr.push_back({{"id", c.id},
                       {"statement", c.statement},
                       {"constant_coarse", c.constant},
                       {"constant_fine", f.constant},
                       {"samples_coarse", c.samples},
                       {"samples_fine", f.samples},
                       {"excluded_fine", f.excluded},
                       {"ratio", std::isfinite(s.ratios[i]) ? nlohmann::json(s.ratios[i]) : nlohmann::json("inf")}});
    }
    j["fits"] = arr;
    std::vector<std::string> w = s.coarse.warnings;
    w.insert(w.end(), s.fine.warnings.begin(), s.fine.warnings.end());
    j["warnings"] = w;
    return j.dump(2);
}

}  // namespace shockstab
