#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace shockstab {

namespace {

double outgoing_speed(const TemplateBundle& b) {
    double a = 0.0;
    for (int k : b.outgoing_minus) a = std::max(a, std::abs(b.speeds_minus[k]));
    for (int k : b.outgoing_plus) a = std::max(a, std::abs(b.speeds_plus[k]));
    return a;
}

double max_beta(const TemplateBundle& b) {
    return std::max(b.beta_minus.cwiseAbs().maxCoeff(), b.beta_plus.cwiseAbs().maxCoeff());
}

// least-squares slope of log y against log t over [t0, t1]
double loglog_slope(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12 || !(y[i] > 0.0)) continue;
        const double lx = std::log(t[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
    }
    if (k < 3) return std::numeric_limits<double>::quiet_NaN();
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::size_t nearest(const std::vector<double>& t, double s) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - s) < std::abs(t[best] - s)) best = i;
    return best;
}

}  // namespace

double default_half_width(const TemplateBundle& b, const ShockProfile& p, double t_max) {
    const double beta = std::max(max_beta(b), 1e-12);
    return std::max({outgoing_speed(b) * t_max + 10.0 * std::sqrt(beta * t_max) + 20.0 / p.alpha, 40.0 / p.alpha,
                     p.half_width()});
}

SimulationTrace simulate(const ModelSystem& model, const ShockProfile& profile, const TemplateBundle& bundle,
                         const SimulationOptions& opt) {
    if (!(opt.t_max > 0.0) || !(opt.output_every > 0.0) || opt.output_every > opt.t_max)
        throw ConfigError("simulation horizon and output interval must be positive");
    const int n = model.dim();
    SimulationTrace tr;
    const double X = opt.half_width > 0.0 ? opt.half_width : default_half_width(bundle, profile, opt.t_max);
    tr.grid = make_grid(X, opt.dx);
    const SimGrid& g = tr.grid;
    const int N = g.size();
    DiscreteFamily fam(profile, g);
    const Vector& um = profile.endstates.u_minus;
    const Vector& up = profile.endstates.u_plus;

    const double dt0 = Stepper(model, g, um, up, {opt.cfl, 0.0}).dt();
    const int nsub = static_cast<int>(std::ceil(opt.output_every / dt0 - 1e-9));
    Stepper st(model, g, um, up, {opt.cfl, opt.output_every / nsub});
    const Matrix steady = calibrate_family(st, fam);

    Vector dir = Vector::Ones(n);
    if (!opt.direction.empty()) {
        if (static_cast<int>(opt.direction.size()) != n) throw ConfigError("perturbation direction has the wrong length");
        dir = Eigen::Map<const Vector>(opt.direction.data(), n);
    }
    tr.u0 = perturbation(g, n, opt.shape, opt.amplitude, dir);
    tr.E0 = weighted_sobolev_norm(g, tr.u0, -0.75, 2);
    tr.E0_decay_weight = weighted_sobolev_norm(g, tr.u0, 0.75, 2);
    Matrix ut = steady + tr.u0;

    const int nout = static_cast<int>(std::lround(opt.t_max / opt.output_every));
    std::vector<double> snaps = opt.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    bool warned_phase = false, warned_edge = false;
    double guess = 0.0, defect = 0.0;
    const int edge = std::max(2, N / 40);

    auto record = [&](double t) {
        const PhaseFit fit = extract_phase(fam, ut, guess);
        guess = fit.delta;
        st.shift_balance(fit.delta);
        if (fit.ambiguous && !warned_phase) {
            tr.warnings.push_back(fit.warning + " (t = " + std::to_string(t) + ")");
            warned_phase = true;
        }
        const Matrix u = ut - fam.values(fit.delta);
        const Matrix ux = grid_derivative(g, u);
        double l1 = 0, l2 = 0, li = 0, ratio = 0, far = 0;
        std::vector<double> strip(tr.strip_x.size(), 0.0);
        for (int i = 0; i < N; ++i) {
            const double a = u.col(i).norm();
            l1 += a * g.dx;
            l2 += a * a * g.dx;
            li = std::max(li, a);
            if (i < edge || i >= N - edge) far = std::max(far, a);
            if (t >= 1.0 && tr.E0 > 0.0) {
                const double v = a + ux.col(i).norm();
                if (v > 0.0) {
                    const double r = v / (tr.E0 * template_sum(bundle, g.x[i], t));
                    ratio = std::max(ratio, r);
                    double& bin = strip[std::min<std::size_t>(strip.size() - 1, static_cast<std::size_t>(i) * strip.size() / N)];
                    bin = std::max(bin, r);
                }
            }
        }
        if (!warned_edge && li > 0.0 && far > 1e-6 * li) {
            std::ostringstream os;
            os << "horizon warning: the perturbation reached the pinned boundary by t = " << t;
            tr.warnings.push_back(os.str());
            warned_edge = true;
        }
        tr.t.push_back(t);
        tr.delta_fit.push_back(fit.delta);
        tr.l1.push_back(l1);
        tr.l2.push_back(std::sqrt(l2));
        tr.linf.push_back(li);
        tr.h2_sq.push_back(sobolev_norm_sq(g, u, 2));
        tr.ratio_sup.push_back(ratio);
        tr.ratio_strip.push_back(std::move(strip));
        tr.mass.push_back(st.mass(ut));
        tr.conservation_defect.push_back(defect);
        if (!snaps.empty()) {
            const std::size_t k = tr.snapshots.size();
            if (k < snaps.size() && std::abs(t - snaps[k]) <= 0.5 * opt.output_every) tr.snapshots.emplace_back(t, ut);
        }
    };

    const int bins = std::min(N, 120);
    for (int k = 0; k < bins; ++k) tr.strip_x.push_back(g.x[0] + (k + 0.5) * (g.x[N - 1] - g.x[0]) / bins);
    record(0.0);
    double t = 0.0;
    for (int k = 1; k <= nout; ++k) {
        defect = 0.0;
        for (int s = 0; s < nsub; ++s) {
            const Vector before = st.mass(ut);
            st.step(ut, t);
            t += st.dt();
            defect = std::max(defect, (st.mass(ut) - before - st.last_boundary_flux()).cwiseAbs().maxCoeff());
        }
        t = k * opt.output_every;
        record(t);
    }

    const std::size_t T = tr.t.size();
    tr.delta_star = tr.delta_fit.back();
    tr.delta.resize(T);
    tr.delta_dot.resize(T);
    tr.gamma.assign(T, 0.0);
    tr.zeta.resize(T);
    for (std::size_t i = 0; i < T; ++i) tr.delta[i] = tr.delta_fit[i] - tr.delta_star;
    for (std::size_t i = 0; i < T; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == T ? i : i + 1;
        tr.delta_dot[i] = (tr.delta_fit[b] - tr.delta_fit[a]) / (tr.t[b] - tr.t[a]);
    }
    double run = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        run = std::max(run, tr.ratio_sup[i] * tr.E0 + std::abs(tr.delta_dot[i]) * (1.0 + tr.t[i]));
        tr.zeta[i] = run;
    }
    return tr;
}

DecayReport verify_decay(const SimulationTrace& tr, double t_from, double t_to, double t_early, double t_late) {
    DecayReport d;
    if (tr.t.empty()) return d;
    const double tmax = tr.t.back();
    d.slope_window[0] = t_from > 0.0 ? t_from : 0.5 * tmax;
    d.slope_window[1] = t_to > 0.0 ? t_to : tmax;
    d.slope[0] = loglog_slope(tr.t, tr.l1, d.slope_window[0], d.slope_window[1]);
    d.slope[1] = loglog_slope(tr.t, tr.l2, d.slope_window[0], d.slope_window[1]);
    d.slope[2] = loglog_slope(tr.t, tr.linf, d.slope_window[0], d.slope_window[1]);
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        if (tr.t[i] >= 1.0) d.ratio_sup = std::max(d.ratio_sup, tr.ratio_sup[i]);
        const double a = std::abs(tr.delta_dot[i]) * (1.0 + tr.t[i]);
        const double b = std::abs(tr.delta[i]) * std::sqrt(1.0 + tr.t[i]);
        if (a > d.delta_dot_bound) {
            d.delta_dot_bound = a;
            d.t_delta_dot_max = tr.t[i];
        }
        if (b > d.delta_bound) {
            d.delta_bound = b;
            d.t_delta_max = tr.t[i];
        }
    }
    d.t_early = t_early;
    d.t_late = std::min(t_late, tmax);
    d.ratio_early = tr.ratio_sup[nearest(tr.t, t_early)];
    d.ratio_late = tr.ratio_sup[nearest(tr.t, d.t_late)];
    d.delta_star_over_E0 = tr.E0 > 0.0 ? std::abs(tr.delta_star) / tr.E0 : 0.0;
    return d;
}

EnergyReport energy_monitor(const SimulationTrace& tr) {
    EnergyReport rep;
    const std::size_t T = tr.t.size();
    if (T < 2) {
        rep.feasible = true;
        rep.detail = "trace too short";
        return rep;
    }
    const double E0 = tr.h2_sq.front();
    double emax = 0.0;
    for (double e : tr.h2_sq) emax = std::max(emax, e);
    if (emax == 0.0) {
        rep.feasible = true;
        rep.C = 0.0;
        rep.theta2 = 1.0;
        rep.detail = "all functionals vanish";
        return rep;
    }
    std::vector<double> D(T);
    for (std::size_t i = 0; i < T; ++i)
        D[i] = tr.l2[i] * tr.l2[i] + tr.delta_dot[i] * tr.delta_dot[i] + (tr.gamma.empty() ? 0.0 : tr.gamma[i] * tr.gamma[i]);

    // ratio E(t) / (e^{-theta t} E(0) + int_0^t e^{-theta (t - s)} D(s) ds)
    auto ratios = [&](double theta, std::size_t T) {
        std::vector<double> r(T);
        double I = 0.0;
        for (std::size_t i = 0; i < T; ++i) {
            if (i > 0) {
                const double h = tr.t[i] - tr.t[i - 1];
                const double decay = std::exp(-theta * h);
                I = I * decay + 0.5 * h * (D[i - 1] * decay + D[i]);
            }
            const double den = std::exp(-theta * tr.t[i]) * E0 + I;
            r[i] = den > 0.0 ? tr.h2_sq[i] / den : (tr.h2_sq[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        }
        return r;
    };
    // smallest C over a log grid of theta2 (ties go to the larger rate)
    auto fit = [&](std::size_t len, double& theta_out) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 60; ++k) {
            const double theta = 1e-3 * std::pow(10.0, 3.0 * k / 60.0);
            const std::vector<double> r = ratios(theta, len);
            const double C = *std::max_element(r.begin(), r.end());
            if (C <= best * (1.0 + 1e-9)) {
                best = C;
                theta_out = theta;
            }
        }
        return best;
    };
    double thetaHalf = 0.0;
    const double Chalf = fit(std::max<std::size_t>(2, (T + 1) / 2), thetaHalf);
    const double bestC = fit(T, rep.theta2);
    const double bestTheta = rep.theta2;
    rep.C = bestC;
    // a bounded constant does not grow when the horizon doubles
    rep.late_growth = bestC / std::max(Chalf, 1.0);

    // crude bound E(t) <= M e^{M t} E(0)
    auto ok = [&](double M) {
        for (std::size_t i = 0; i < T; ++i)
            if (tr.h2_sq[i] > M * std::exp(M * tr.t[i]) * E0 * (1.0 + 1e-12)) return false;
        return true;
    };
    if (E0 > 0.0) {
        double lo = 0.0, hi = 1.0;
        while (!ok(hi) && hi < 1e6) hi *= 2.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ok(mid) ? hi : lo) = mid;
        }
        rep.crude_M = hi;
    }

    rep.damping_failure = !std::isfinite(bestC) || bestC > 1e6 || rep.late_growth > 10.0;
    rep.feasible = !rep.damping_failure;
    std::ostringstream os;
    os << (rep.feasible ? "high-norm energy slaved to the L2 and phase terms"
                        : "high-norm energy outgrows the L2 and phase terms (damping failure)")
       << "; C = " << bestC << ", theta2 = " << bestTheta << ", C(full) / C(half) = " << rep.late_growth;
    rep.detail = os.str();
    return rep;
}

// ---------------------------------------------------------------------------

void write_trace_csv(const SimulationTrace& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out.precision(12);
    out << "t,delta_fit,delta,delta_dot,delta_star,gamma,l1,l2,linf,h2_sq,ratio_sup,zeta,conservation_defect";
    const int n = tr.mass.empty() ? 0 : static_cast<int>(tr.mass.front().size());
    for (int j = 0; j < n; ++j) out << ",mass_" << j + 1;
    out << "\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        out << tr.t[i] << ',' << tr.delta_fit[i] << ',' << tr.delta[i] << ',' << tr.delta_dot[i] << ',' << tr.delta_star
            << ',' << tr.gamma[i] << ',' << tr.l1[i] << ',' << tr.l2[i] << ',' << tr.linf[i] << ',' << tr.h2_sq[i] << ','
            << tr.ratio_sup[i] << ',' << tr.zeta[i] << ',' << tr.conservation_defect[i];
        for (int j = 0; j < n; ++j) out << ',' << tr.mass[i][j];
        out << "\n";
    }
}

void write_snapshots_csv(const SimulationTrace& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out.precision(12);
    out << "t,x";
    const int n = tr.u0.rows();
    for (int j = 0; j < n; ++j) out << ",u_" << j + 1;
    out << "\n";
    for (const auto& [t, u] : tr.snapshots)
        for (int i = 0; i < tr.grid.size(); ++i) {
            out << t << ',' << tr.grid.x[i];
            for (int j = 0; j < n; ++j) out << ',' << u(j, i);
            out << "\n";
        }
}

std::string decay_json(const DecayReport& d, const EnergyReport& e, const SimulationTrace& tr) {
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["E0"] = tr.E0;
    j["E0_decay_weight"] = tr.E0_decay_weight;
    j["grid"] = {{"half_width", tr.grid.half_width()}, {"dx", tr.grid.dx}, {"nodes", tr.grid.size()}};
    j["t_max"] = tr.t.empty() ? 0.0 : tr.t.back();
    j["delta_star"] = tr.delta_star;
    j["pointwise_ratio"] = {{"sup", d.ratio_sup}, {"t_early", d.t_early}, {"at_t_early", d.ratio_early},
                            {"t_late", d.t_late}, {"at_t_late", d.ratio_late}};
    j["lp_slopes"] = {{"window", {d.slope_window[0], d.slope_window[1]}},
                      {"p", {1, 2, "inf"}},
                      {"measured", {num(d.slope[0]), num(d.slope[1]), num(d.slope[2])}},
                      {"expected", {d.expected[0], d.expected[1], d.expected[2]}}};
    j["phase_bounds"] = {{"delta_dot_weighted_sup", d.delta_dot_bound}, {"attained_at", d.t_delta_dot_max},
                         {"delta_weighted_sup", d.delta_bound}, {"delta_attained_at", d.t_delta_max},
                         {"delta_star_over_E0", d.delta_star_over_E0}};
    j["energy"] = {{"feasible", e.feasible}, {"damping_failure", e.damping_failure}, {"C", num(e.C)},
                   {"theta2", e.theta2}, {"crude_M", e.crude_M}, {"late_growth", num(e.late_growth)},
                   {"detail", e.detail}};
    j["zeta"] = {{"at_t1", tr.zeta.size() > 1 ? tr.zeta[nearest(tr.t, 1.0)] : 0.0},
                 {"final", tr.zeta.empty() ? 0.0 : tr.zeta.back()}};
    double cd = 0.0;
    for (double c : tr.conservation_defect) cd = std::max(cd, c);
    j["conservation_defect_per_step"] = cd;
    j["warnings"] = tr.warnings;
    return j.dump(2);
}

void write_svg_series(const std::string& path, const std::string& title, const std::vector<double>& x,
                      const std::vector<std::vector<double>>& ys, const std::vector<std::string>& labels, bool log_x,
                      bool log_y) {
    const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double a, double b) {
        return std::isfinite(a) && std::isfinite(b) && (!log_x || a > 0) && (!log_y || b > 0);
    };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& y : ys)
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            if (!usable(x[i], y[i])) continue;
            x0 = std::min(x0, tx(x[i]));
            x1 = std::max(x1, tx(x[i]));
            y0 = std::min(y0, ty(y[i]));
            y1 = std::max(y1, ty(y[i]));
        }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-300) x1 = x0 + 1;
    if (y1 - y0 < 1e-300) y1 = y0 + 1;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [&](double v, bool lg) {
        std::ostringstream os;
        os.precision(3);
        os << (lg ? std::pow(10.0, v) : v);
        return os.str();
    };
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\">" << label(x0, log_x) << "</text>\n";
    out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\">" << label(x1, log_x) << "</text>\n";
    out << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\">" << label(y0, log_y) << "</text>\n";
    out << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << label(y1, log_y) << "</text>\n";
    for (std::size_t s = 0; s < ys.size(); ++s) {
        out << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colours[s % 6] << "\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < ys[s].size(); ++i)
            if (usable(x[i], ys[s][i])) out << px(x[i]) << ',' << py(ys[s][i]) << ' ';
        out << "\"/>\n";
        if (s < labels.size())
            out << "<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 14 * s << "\" text-anchor=\"end\" fill=\""
                << colours[s % 6] << "\">" << labels[s] << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

void write_svg_heat_strip(const std::string& path, const std::string& title, const std::vector<double>& t,
                          const std::vector<double>& x, const std::vector<std::vector<double>>& values) {
    const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
    double lo = 1e300, hi = -1e300;
    for (const auto& row : values)
        for (double v : row)
            if (v > 0.0 && std::isfinite(v)) {
                lo = std::min(lo, std::log10(v));
                hi = std::max(hi, std::log10(v));
            }
    if (lo > hi) lo = 0, hi = 1;
    if (hi - lo < 1e-12) hi = lo + 1;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" << title
        << "</text>\n";
    const std::size_t nt = values.size(), nx = x.size();
    if (nt && nx) {
        const double cw = (W - ml - mr) / nx, ch = (H - mt - mb) / nt;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < nx && j < values[i].size(); ++j) {
                const double v = values[i][j];
                const double s = v > 0.0 ? std::clamp((std::log10(v) - lo) / (hi - lo), 0.0, 1.0) : 0.0;
                const int r = static_cast<int>(255 * s), b = static_cast<int>(255 * (1 - s));
                out << "<rect x=\"" << ml + j * cw << "\" y=\"" << H - mb - (i + 1) * ch << "\" width=\"" << cw + 0.5
                    << "\" height=\"" << ch + 0.5 << "\" fill=\"rgb(" << r << ",40," << b << ")\"/>\n";
            }
    }
    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    if (nx) {
        out << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\">x = " << x.front() << "</text>\n";
        out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\">x = " << x.back() << "</text>\n";
    }
    if (!t.empty()) {
        out << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\">t = " << t.front() << "</text>\n";
        out << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">t = " << t.back() << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">log10 ratio from " << lo << " (blue) to "
        << hi << " (red)</text>\n";
    out << "</g>\n</svg>\n";
}

}  // namespace shockstab
