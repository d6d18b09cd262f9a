#include "shockstab/templates.hpp"

#include "shockstab/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace shockstab {

double errfn(double z) { return 0.5 * std::erfc(-z); }

TemplateBundle make_template_bundle(const ModelSystem& model, const ShockProfile& profile,
                                    const TemplateConstants& overrides, bool with_kernel) {
    TemplateBundle b;
    b.n = model.dim();
    const EndstateModes mm = endstate_modes(model, profile.endstates.u_minus);
    const EndstateModes mp = endstate_modes(model, profile.endstates.u_plus);
    b.speeds_minus = mm.speeds;
    b.speeds_plus = mp.speeds;
    b.beta_minus = mm.beta;
    b.beta_plus = mp.beta;
    b.left_minus = mm.L;
    b.left_plus = mp.L;
    b.right_minus = mm.R;
    b.right_plus = mp.R;
    for (int j = 0; j < b.n; ++j) {
        (mm.speeds[j] < 0 ? b.outgoing_minus : b.incoming_minus).push_back(j);
        (mp.speeds[j] > 0 ? b.outgoing_plus : b.incoming_plus).push_back(j);
    }

    TemplateConstants c = overrides;
    const double bmax = std::max(mm.beta.maxCoeff(), mp.beta.maxCoeff());
    if (!(c.L > 0)) c.L = 8.0 * std::max(bmax, 1e-3);
    if (!(c.M > 0)) c.M = 2.0 * c.L;
    if (!(c.eta > 0)) c.eta = 0.5 * profile.alpha;
    if (!(c.a > 0)) {
        double amin = std::numeric_limits<double>::infinity();
        for (int k : b.incoming_minus) amin = std::min(amin, std::abs(mm.speeds[k]));
        for (int k : b.incoming_plus) amin = std::min(amin, std::abs(mp.speeds[k]));
        c.a = std::isfinite(amin) ? 0.5 * amin : 0.5;
        b.notes.push_back("drift rate a is a heuristic default (half the slowest incoming speed)");
    }
    if (!(c.eta0 > 0)) {
        if (model.hyperbolic_dim() > 0) {
            const SpectralData sd = build_spectral_data(model, profile);
            double e = std::numeric_limits<double>::infinity();
            for (const auto& row : sd.blocks)
                for (const auto& blk : row) {
                    const Eigen::VectorXcd ev = blk.eta.eigenvalues();
                    for (int i = 0; i < ev.size(); ++i) e = std::min(e, ev[i].real());
                }
            c.eta0 = (std::isfinite(e) && e > 0) ? e : c.eta;
        } else {
            c.eta0 = c.eta;
        }
    }
    if (!(c.t_floor > 0)) c.t_floor = 1e-8;
    if (!(c.C > 0)) c.C = 1.0;
    b.constants = c;
    if (with_kernel) {
        b.kernel = e_infinity(model, profile);
        b.has_kernel = true;
    }
    return b;
}

double chi(const TemplateBundle& b, double x, double t) {
    const double lo = b.speeds_minus[0] * t;
    const double hi = b.speeds_plus[b.n - 1] * t;
    return (x >= lo && x <= hi) ? 1.0 : 0.0;
}

double theta(const TemplateBundle& b, double x, double t) {
    const double tf = std::max(t, b.constants.t_floor);
    const double pre = 1.0 / std::sqrt(1.0 + tf);
    double s = 0.0;
    for (int j : b.outgoing_minus) {
        const double d = x - b.speeds_minus[j] * tf;
        s += pre * std::exp(-d * d / (b.constants.L * tf));
    }
    for (int j : b.outgoing_plus) {
        const double d = x - b.speeds_plus[j] * tf;
        s += pre * std::exp(-d * d / (b.constants.L * tf));
    }
    return s;
}

double psi1(const TemplateBundle& b, double x, double t) {
    if (chi(b, x, t) == 0.0) return 0.0;
    const double w = 1.0 / std::sqrt(1.0 + std::abs(x) + t);
    double s = 0.0;
    for (int j : b.outgoing_minus) s += w / std::sqrt(1.0 + std::abs(x - b.speeds_minus[j] * t));
    for (int j : b.outgoing_plus) s += w / std::sqrt(1.0 + std::abs(x - b.speeds_plus[j] * t));
    return s;
}

double psi2(const TemplateBundle& b, double x, double t) {
    if (chi(b, x, t) == 1.0) return 0.0;
    const double rt = std::sqrt(std::max(t, 0.0));
    const double l = 1.0 + std::abs(x - b.speeds_minus[0] * t) + rt;
    const double r = 1.0 + std::abs(x - b.speeds_plus[b.n - 1] * t) + rt;
    return std::pow(l, -1.5) + std::pow(r, -1.5);
}

namespace {

struct Incoming {
    double a;     // |a_k|, positive
    double beta;
    const Matrix* l;  // ell x n rows for this mode
};

// incoming modes on the side of y, in the y <= 0 orientation
std::vector<Incoming> incoming_side(const TemplateBundle& b, double y, std::vector<Matrix>& scratch) {
    std::vector<Incoming> out;
    const bool minus = y <= 0.0;
    const auto& idx = minus ? b.incoming_minus : b.incoming_plus;
    const Vector& sp = minus ? b.speeds_minus : b.speeds_plus;
    const Vector& be = minus ? b.beta_minus : b.beta_plus;
    scratch.clear();
    scratch.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (b.has_kernel) {
            scratch.push_back((minus ? b.kernel.l_minus : b.kernel.l_plus)[i]);
        } else {
            scratch.push_back(Matrix::Zero(1, b.n));
        }
    }
    for (std::size_t i = 0; i < idx.size(); ++i) out.push_back({std::abs(sp[idx[i]]), be[idx[i]], &scratch[i]});
    return out;
}

}  // namespace

Matrix e_profile(const TemplateBundle& b, double y, double t, EDerivative d) {
    if (!(t > 0.0)) throw std::domain_error("e_j(y, t) needs t > 0");
    std::vector<Matrix> scratch;
    const auto modes = incoming_side(b, y, scratch);
    const int ell = b.has_kernel ? b.kernel.ell : 1;
    Matrix out = Matrix::Zero(ell, b.n);
    const double yy = y <= 0.0 ? y : -y;  // mirror to the y <= 0 orientation
    const double ysign = y <= 0.0 ? 1.0 : -1.0;
    for (const auto& m : modes) {
        const double s = std::sqrt(4.0 * m.beta * t);
        const double zp = (yy + m.a * t) / s;
        const double zm = (yy - m.a * t) / s;
        const double gp = std::exp(-zp * zp) / std::sqrt(M_PI);  // errfn'
        const double gm = std::exp(-zm * zm) / std::sqrt(M_PI);
        double v = 0.0;
        switch (d) {
            case EDerivative::None:
                v = errfn(zp) - errfn(zm);
                break;
            case EDerivative::Y:
                v = ysign * (gp - gm) / s;
                break;
            case EDerivative::T: {
                // dz/dt = (a t - y) / (2 t s) for zp, (-a t - y) / (2 t s) for zm
                const double dzp = (m.a * t - yy) / (2.0 * t * s);
                const double dzm = (-m.a * t - yy) / (2.0 * t * s);
                v = gp * dzp - gm * dzm;
                break;
            }
            case EDerivative::YT: {
                // d/dt [ (g(zp) - g(zm)) / s ],  g' = -2 z g
                const double dzp = (m.a * t - yy) / (2.0 * t * s);
                const double dzm = (-m.a * t - yy) / (2.0 * t * s);
                const double ds = s / (2.0 * t);
                v = ysign * ((-2.0 * zp * gp * dzp + 2.0 * zm * gm * dzm) / s - (gp - gm) * ds / (s * s));
                break;
            }
        }
        out += v * (*m.l);
    }
    return out;
}

Matrix e_limit(const TemplateBundle& b, double y) {
    if (!b.has_kernel) return Matrix::Zero(1, b.n);
    return y <= 0.0 ? b.kernel.e_inf_minus : b.kernel.e_inf_plus;
}

double e_bracket_sum(const TemplateBundle& b, double y, double t) {
    const double tf = std::max(t, b.constants.t_floor);
    std::vector<Matrix> scratch;
    const auto modes = incoming_side(b, y, scratch);
    const double yy = y <= 0.0 ? y : -y;
    double s = 0.0;
    for (const auto& m : modes) {
        const double w = std::sqrt(4.0 * m.beta * tf);
        s += errfn((yy + m.a * tf) / w) - errfn((yy - m.a * tf) / w);
    }
    return s;
}

double e_gaussian_sum(const TemplateBundle& b, double y, double t) {
    const double tf = std::max(t, b.constants.t_floor);
    std::vector<Matrix> scratch;
    const auto modes = incoming_side(b, y, scratch);
    const double yy = y <= 0.0 ? y : -y;
    double s = 0.0;
    for (const auto& m : modes) {
        const double d = yy + m.a * tf;
        s += std::exp(-d * d / (b.constants.M * tf)) / std::sqrt(tf);
    }
    return s;
}

double gtilde_envelope(const TemplateBundle& b, double x, double t, double y, int alpha_x, int alpha_y) {
    const double tf = std::max(t, b.constants.t_floor);
    const auto& c = b.constants;
    // mirror y > 0 onto y <= 0: (x, y) -> (-x, -y), a^- -> -a^+, a^+ -> -a^-
    const bool minus = y <= 0.0;
    const double X = minus ? x : -x;
    const double Y = minus ? y : -y;
    std::vector<double> near, out_near, out_far;  // all speeds, outgoing on y's side, outgoing on the other
    std::vector<double> inc;
    if (minus) {
        for (int k = 0; k < b.n; ++k) near.push_back(b.speeds_minus[k]);
        for (int k : b.incoming_minus) inc.push_back(b.speeds_minus[k]);
        for (int j : b.outgoing_minus) out_near.push_back(b.speeds_minus[j]);
        for (int j : b.outgoing_plus) out_far.push_back(b.speeds_plus[j]);
    } else {
        for (int k = 0; k < b.n; ++k) near.push_back(-b.speeds_plus[k]);
        for (int k : b.incoming_plus) inc.push_back(-b.speeds_plus[k]);
        for (int j : b.outgoing_plus) out_near.push_back(-b.speeds_plus[j]);
        for (int j : b.outgoing_minus) out_far.push_back(-b.speeds_minus[j]);
    }
    const double xp = std::max(X, 0.0);
    const double xm = std::max(-X, 0.0);
    const double rt = 1.0 / std::sqrt(tf);
    const double ord = alpha_x + alpha_y;
    const double pref = std::pow(tf, -0.5 * ord) + alpha_y * std::exp(-c.eta * std::abs(y)) +
                        alpha_x * std::exp(-c.eta * std::abs(x));
    double sum = 0.0;
    for (double a : near) {
        const double d = X - Y - a * tf;
        sum += rt * std::exp(-d * d / (c.M * tf)) * std::exp(-c.eta * xp);
    }
    for (double ak : inc) {
        if (std::abs(ak * tf) < std::abs(Y)) continue;
        const double tr = tf - std::abs(Y / ak);
        for (double aj : out_near) {
            const double d = X - aj * tr;
            sum += rt * std::exp(-d * d / (c.M * tf)) * std::exp(-c.eta * xp);
        }
        for (double aj : out_far) {
            const double d = X - aj * tr;
            sum += rt * std::exp(-d * d / (c.M * tf)) * std::exp(-c.eta * xm);
        }
    }
    return c.C * (std::exp(-c.eta * (std::abs(x - y) + tf)) + pref * sum);
}

double gtilde_envelope(const TemplateBundle& b, double x, double t, double y, int deriv_order) {
    if (deriv_order < 0 || deriv_order > 2) throw std::domain_error("envelope derivative order must be 0, 1 or 2");
    if (deriv_order == 0) return gtilde_envelope(b, x, t, y, 0, 0);
    const double tf = std::max(t, b.constants.t_floor);
    const auto& c = b.constants;
    // both one-sided weights present, as in the generic |alpha| >= 1 prefactor
    const double base = gtilde_envelope(b, x, t, y, 0, 0) / c.C - std::exp(-c.eta * (std::abs(x - y) + tf));
    const double pref = std::pow(tf, -0.5 * deriv_order) + std::exp(-c.eta * std::abs(y)) + std::exp(-c.eta * std::abs(x));
    return c.C * (std::exp(-c.eta * (std::abs(x - y) + tf)) + pref * base);
}

double source_psi(const TemplateBundle& b, double y, double s) {
    const double sf = std::max(s, b.constants.t_floor);
    const double T = template_sum(b, y, sf);
    return std::sqrt(1.0 + sf) / std::sqrt(sf) * T * T + T / (1.0 + sf);
}

double source_phi1(const TemplateBundle& b, double y, double s) {
    const double sf = std::max(s, b.constants.t_floor);
    return std::exp(-b.constants.eta * std::abs(y)) / std::sqrt(sf) * template_sum(b, y, sf);
}

double source_phi2(const TemplateBundle& b, double y, double s) {
    return std::exp(-b.constants.eta * std::abs(y)) * std::pow(1.0 + std::max(s, 0.0), -1.5);
}

double source_upsilon(const TemplateBundle& b, double y, double s) {
    const double sf = std::max(s, b.constants.t_floor);
    return std::pow(sf, -0.25) * template_sum(b, y, sf) + std::exp(-b.constants.eta * std::abs(y)) / std::sqrt(sf);
}

void write_template_csv(const TemplateBundle& b, const std::vector<double>& xs, const std::vector<double>& ts,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "t,x,theta,psi1,psi2,chi\n" << std::setprecision(12);
    for (double t : ts)
        for (double x : xs)
            out << t << "," << x << "," << theta(b, x, t) << "," << psi1(b, x, t) << "," << psi2(b, x, t) << ","
                << chi(b, x, t) << "\n";
}

namespace {
nlohmann::json vjson(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
nlohmann::json mjson(const Matrix& m) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) j.push_back(vjson(m.row(i).transpose()));
    return j;
}
}  // namespace

std::string template_json(const TemplateBundle& b) {
    nlohmann::json j;
    j["speeds_minus"] = vjson(b.speeds_minus);
    j["speeds_plus"] = vjson(b.speeds_plus);
    j["beta_minus"] = vjson(b.beta_minus);
    j["beta_plus"] = vjson(b.beta_plus);
    j["outgoing_minus"] = b.outgoing_minus;
    j["outgoing_plus"] = b.outgoing_plus;
    j["incoming_minus"] = b.incoming_minus;
    j["incoming_plus"] = b.incoming_plus;
    const auto& c = b.constants;
    j["constants"] = {{"L", c.L}, {"M", c.M}, {"eta", c.eta}, {"a", c.a}, {"eta0", c.eta0}, {"t_floor", c.t_floor},
                      {"C", c.C}};
    j["notes"] = b.notes;
    if (b.has_kernel) {
        const auto& k = b.kernel;
        j["phase_kernel"] = {{"ell", k.ell},
                             {"e_inf_minus", mjson(k.e_inf_minus)},
                             {"e_inf_plus", mjson(k.e_inf_plus)},
                             {"pi_minus", mjson(k.pi_minus)},
                             {"pi_plus", mjson(k.pi_plus)},
                             {"decaying_adjoint_dim", k.decaying_adjoint_dim},
                             {"outgoing_residual", k.outgoing_residual},
                             {"pi_normalization_residual", k.pi_normalization_residual},
                             {"normalization_residual", k.normalization_residual},
                             {"rescale", k.rescale}};
    }
    return j.dump(2);
}

}  // namespace shockstab
