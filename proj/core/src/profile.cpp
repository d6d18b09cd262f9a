#include "shockstab/profile.hpp"

#include "shockstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace odeint = boost::numeric::odeint;

namespace shockstab {

Vector reduce_manifold(const ModelSystem& model, const Vector& u2, const Vector& reference,
                       const Vector& level_state) {
    const int n = model.dim();
    const int r = model.viscous_dim();
    const int h = n - r;
    if (u2.size() != r) throw StructuralError("viscous block state has wrong dimension");
    if (h == 0) return u2;

    Vector u = reference;
    u.tail(r) = u2;
    const Vector target = model.flux(level_state).head(h);
    const double scale = std::max(1.0, target.norm());
    auto residual = [&](const Vector& v) -> Vector { return model.flux(v).head(h) - target; };

    Vector res = residual(u);
    for (int it = 0; it < 60; ++it) {
        if (res.norm() <= 1e-14 * scale) return u;
        const Matrix dF = model.flux_jacobian(u);
        const Matrix J = dF.topLeftCorner(h, h);
        Eigen::JacobiSVD<Matrix> svd(J);
        const double smin = svd.singularValues().minCoeff();
        if (smin <= 1e-10 * std::max(1.0, dF.topRows(h).cwiseAbs().maxCoeff()))
            throw HypothesisError("H1", "(i) dF^I/du^I is singular: cannot solve for u^I on the profile manifold");
        const Vector step = J.fullPivLu().solve(res);
        double lam = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30 && !accepted; ++k, lam *= 0.5) {
            Vector trial = u;
            trial.head(h) -= lam * step;
            try {
                const Vector tres = residual(trial);
                if (tres.norm() < res.norm() || tres.norm() <= 1e-14 * scale) {
                    u = trial;
                    res = tres;
                    accepted = true;
                }
            } catch (const NumericalError&) {
            }
        }
        if (!accepted) break;
    }
    if (res.norm() <= 1e-10 * scale) return u;
    throw NumericalError("Newton iteration for the profile manifold did not converge");
}

ReducedProfileOde::ReducedProfileOde(const ModelSystem& model, Vector u_minus)
    : model_(&model), u_minus_(std::move(u_minus)), level_(model.flux(u_minus_)) {}

Vector ReducedProfileOde::lift(const Vector& u2) const {
    return reduce_manifold(*model_, u2, u_minus_, u_minus_);
}

Vector ReducedProfileOde::full_rhs(const Vector& u) const {
    const int n = model_->dim();
    const int r = model_->viscous_dim();
    const int h = n - r;
    const Matrix dF = model_->flux_jacobian(u);
    const Matrix B = model_->viscosity(u);
    const Vector G = (model_->flux(u) - level_).tail(r);
    Matrix dh(h, r);
    if (h > 0) dh = -dF.topLeftCorner(h, h).fullPivLu().solve(dF.topRightCorner(h, r));
    Matrix M = B.bottomRightCorner(r, r);
    if (h > 0) M += B.bottomLeftCorner(r, h) * dh;
    const Vector d2 = M.fullPivLu().solve(G);
    Vector out(n);
    if (h > 0) out.head(h) = dh * d2;
    out.tail(r) = d2;
    return out;
}

Vector ReducedProfileOde::rhs(const Vector& u2) const {
    return full_rhs(lift(u2)).tail(model_->viscous_dim());
}

Matrix ReducedProfileOde::rest_jacobian(const Vector& u) const {
    const int n = model_->dim();
    const int r = model_->viscous_dim();
    const int h = n - r;
    const Matrix dF = model_->flux_jacobian(u);
    const Matrix B = model_->viscosity(u);
    Matrix dh(h, r);
    if (h > 0) dh = -dF.topLeftCorner(h, h).fullPivLu().solve(dF.topRightCorner(h, r));
    Matrix M = B.bottomRightCorner(r, r);
    Matrix dG = dF.bottomRightCorner(r, r);
    if (h > 0) {
        M += B.bottomLeftCorner(r, h) * dh;
        dG += dF.bottomLeftCorner(r, h) * dh;
    }
    return M.fullPivLu().solve(dG);
}

namespace {

using State = std::vector<double>;

Vector to_vec(const State& s) { return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size())); }
State to_state(const Vector& v) { return State(v.data(), v.data() + v.size()); }

struct RestPoint {
    Vector u;
    Matrix J;
    Matrix basis;  ///< real orthonormal basis of the unstable (u_minus) or stable (u_plus) subspace
    double slowest = 0.0;
};

RestPoint analyse_rest_point(const ReducedProfileOde& ode, const Vector& u, bool unstable) {
    RestPoint rp;
    rp.u = u;
    rp.J = ode.rest_jacobian(u);
    Eigen::EigenSolver<Matrix> es(rp.J, true);
    const CVector ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Vector> cols;
    rp.slowest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < ev.size(); ++j) {
        const double re = ev[j].real();
        if (std::abs(re) <= 1e-8 * scale)
            throw HypothesisError("H2", "endstate is not a hyperbolic rest point of the reduced profile ODE");
        rp.slowest = std::min(rp.slowest, std::abs(re));
        if ((re > 0) != unstable) continue;
        if (ev[j].imag() < 0) continue;
        cols.push_back(es.eigenvectors().col(j).real());
        if (ev[j].imag() > 0) cols.push_back(es.eigenvectors().col(j).imag());
    }
    const int r = static_cast<int>(rp.J.rows());
    Matrix raw(r, static_cast<int>(cols.size()));
    for (int k = 0; k < raw.cols(); ++k) raw.col(k) = cols[k];
    if (raw.cols() > 0) {
        Eigen::HouseholderQR<Matrix> qr(raw);
        rp.basis = qr.householderQ() * Matrix::Identity(r, raw.cols());
    } else {
        rp.basis = Matrix(r, 0);
    }
    return rp;
}

struct BranchResult {
    bool crossed = false;
    Vector seed2;
    double tau_cross = 0.0;
    Vector u_cross;  ///< full state on the phase section
};

class Shooter {
public:
    Shooter(const ReducedProfileOde& ode, int phase, double mid, const ProfileOptions& opt, double tau_max)
        : ode_(ode), phase_(phase), mid_(mid), opt_(opt), tau_max_(tau_max) {}

    Vector lift(const Vector& u2) const { return ode_.lift(u2); }

    // sign = +1 integrates x forward from u_minus, -1 integrates x backward from u_plus
    BranchResult shoot(const Vector& seed2, int sign) const {
        BranchResult br;
        br.seed2 = seed2;
        auto sys = [&](const State& s, State& ds, double) {
            const Vector f = ode_.rhs(to_vec(s));
            ds.resize(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) ds[i] = sign * f[static_cast<Eigen::Index>(i)];
        };
        auto phi = [&](const State& s) { return ode_.lift(to_vec(s))[phase_] - mid_; };
        auto st = odeint::make_dense_output(opt_.ode_tol, opt_.ode_tol, odeint::runge_kutta_dopri5<State>());
        try {
            st.initialize(to_state(seed2), 0.0, 1e-3);
            double prev = phi(to_state(seed2));
            const double bound = 1e3 * (1.0 + std::abs(mid_));
            while (st.current_time() < tau_max_) {
                st.do_step(sys);
                const State& cur = st.current_state();
                const double val = phi(cur);
                if (!std::isfinite(val) || to_vec(cur).norm() > bound) return br;
                if (val == 0.0 || (val > 0) != (prev > 0)) {
                    double a = st.previous_time();
                    double b = st.current_time();
                    State tmp(cur.size());
                    for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, b); ++it) {
                        const double m = 0.5 * (a + b);
                        st.calc_state(m, tmp);
                        if ((phi(tmp) > 0) == (prev > 0)) a = m; else b = m;
                    }
                    const double tc = 0.5 * (a + b);
                    st.calc_state(tc, tmp);
                    br.crossed = true;
                    br.tau_cross = tc;
                    br.u_cross = ode_.lift(to_vec(tmp));
                    return br;
                }
                prev = val;
            }
        } catch (const NumericalError&) {
        } catch (const HypothesisError&) {
        }
        return br;
    }

    // samples the branch at the requested integration times (ascending, >= 0)
    std::vector<Vector> sample(const Vector& seed2, int sign, const std::vector<double>& taus) const {
        std::vector<Vector> out;
        if (taus.empty()) return out;
        auto sys = [&](const State& s, State& ds, double) {
            const Vector f = ode_.rhs(to_vec(s));
            ds.resize(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) ds[i] = sign * f[static_cast<Eigen::Index>(i)];
        };
        std::vector<double> times;
        times.push_back(0.0);
        times.insert(times.end(), taus.begin(), taus.end());
        State s = to_state(seed2);
        std::vector<Vector> all;
        auto obs = [&](const State& x, double) { all.push_back(to_vec(x)); };
        odeint::integrate_times(
            odeint::make_dense_output(opt_.ode_tol, opt_.ode_tol, odeint::runge_kutta_dopri5<State>()), sys, s,
            times.begin(), times.end(), 1e-3, obs);
        out.assign(all.begin() + 1, all.end());
        return out;
    }

private:
    const ReducedProfileOde& ode_;
    int phase_;
    double mid_;
    const ProfileOptions& opt_;
    double tau_max_;
};

// Finds the seed direction on a one- or two-dimensional invariant subspace whose
// trajectory reaches the phase section at `target` (or any crossing if target is empty).
BranchResult find_branch(const Shooter& shooter, const RestPoint& rp, int sign, double eps, int phase, double mid,
                         int h, const std::optional<Vector>& target) {
    const int d = static_cast<int>(rp.basis.cols());
    const Vector rest2 = rp.u.tail(rp.u.size() - h);
    if (d == 1) {
        Vector dir = rp.basis.col(0);
        BranchResult best;
        // try the orientation that moves the phase component toward the midpoint first
        double first = 1.0;
        try {
            const double moved = shooter.lift(rest2 + eps * dir)[phase] - rp.u[phase];
            if (moved * (mid - rp.u[phase]) < 0) first = -1.0;
        } catch (const Error&) {
            first = -1.0;
        }
        for (double orient : {first, -first}) {
            BranchResult br = shooter.shoot(rest2 + orient * eps * dir, sign);
            if (br.crossed) return br;
        }
        return best;
    }
    if (d != 2) throw UnsupportedCaseError("profile shooting supports invariant manifolds of dimension <= 2");
    if (!target) throw UnsupportedCaseError("both profile branches are two-dimensional");

    const int r = static_cast<int>(rest2.size());
    // scalar mismatch along a u^II coordinate other than the phase one
    int q = 0;
    if (phase >= h && phase - h == 0 && r > 1) q = 1;
    auto shoot_angle = [&](double th) {
        return shooter.shoot(rest2 + eps * (std::cos(th) * rp.basis.col(0) + std::sin(th) * rp.basis.col(1)), sign);
    };
    auto mismatch = [&](const BranchResult& br) { return br.u_cross[h + q] - (*target)[h + q]; };

    const int samples = 72;
    std::vector<double> ths(samples + 1);
    std::vector<std::optional<double>> ms(samples + 1);
    for (int k = 0; k <= samples; ++k) {
        ths[k] = 2.0 * M_PI * k / samples;
        BranchResult br = shoot_angle(ths[k]);
        if (br.crossed) ms[k] = mismatch(br);
    }
    BranchResult best;
    double best_norm = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        if (!ms[k] || !ms[k + 1] || (*ms[k] > 0) == (*ms[k + 1] > 0)) continue;
        double a = ths[k], b = ths[k + 1];
        double ma = *ms[k];
        bool ok = true;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            BranchResult br = shoot_angle(m);
            if (!br.crossed) {
                ok = false;
                break;
            }
            const double mm = mismatch(br);
            if ((mm > 0) == (ma > 0)) {
                a = m;
                ma = mm;
            } else {
                b = m;
            }
        }
        if (!ok) continue;
        BranchResult br = shoot_angle(0.5 * (a + b));
        if (br.crossed && (br.u_cross - *target).norm() < best_norm) {
            best_norm = (br.u_cross - *target).norm();
            best = br;
        }
    }
    return best;
}

int locate(const Vector& x, double xi) {
    const double dx = x[1] - x[0];
    int k = static_cast<int>(std::floor((xi - x[0]) / dx));
    return std::clamp(k, 0, static_cast<int>(x.size()) - 2);
}

Vector hermite(const Vector& x, const Matrix& f, const Matrix& df, double xi, bool derivative) {
    const int k = locate(x, xi);
    const double dx = x[1] - x[0];
    const double t = (xi - x[k]) / dx;
    if (!derivative) {
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        const double h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t);
        const double h11 = t * t * (t - 1);
        return h00 * f.col(k) + h10 * dx * df.col(k) + h01 * f.col(k + 1) + h11 * dx * df.col(k + 1);
    }
    const double d00 = 6 * t * t - 6 * t;
    const double d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t;
    const double d11 = 3 * t * t - 2 * t;
    return (d00 * f.col(k) + d01 * f.col(k + 1)) / dx + d10 * df.col(k) + d11 * df.col(k + 1);
}

Matrix central_second(const Vector& x, const Matrix& d) {
    const int N = static_cast<int>(x.size());
    const double dx = x[1] - x[0];
    Matrix s(d.rows(), N);
    for (int k = 1; k + 1 < N; ++k) s.col(k) = (d.col(k + 1) - d.col(k - 1)) / (2 * dx);
    s.col(0) = (d.col(1) - d.col(0)) / dx;
    s.col(N - 1) = (d.col(N - 1) - d.col(N - 2)) / dx;
    return s;
}

}  // namespace

Vector ShockProfile::value(double xi) const {
    if (xi <= x[0]) return endstates.u_minus;
    if (xi >= x[x.size() - 1]) return endstates.u_plus;
    return hermite(x, values, derivatives, xi, false);
}

Vector ShockProfile::derivative(double xi) const {
    if (xi <= x[0] || xi >= x[x.size() - 1]) return Vector::Zero(values.rows());
    return hermite(x, derivatives, second, xi, false);
}

ShockProfile solve_profile(const ModelSystem& model, const ShockEndstates& endstates, const ProfileOptions& opt) {
    const int n = model.dim();
    const int r = model.viscous_dim();
    const int h = n - r;
    const Vector& um = endstates.u_minus;
    const Vector& up = endstates.u_plus;
    const double jump = (up - um).norm();
    if (jump == 0.0) throw DegenerateShockError("u_minus equals u_plus");
    const double rh = (model.flux(up) - model.flux(um)).norm();
    if (rh > 1e-8 * std::max(1.0, model.flux(um).norm()))
        throw NoProfileError("endstates violate the Rankine-Hugoniot condition; they are not both rest points");

    ReducedProfileOde ode(model, um);
    if (h > 0) {
        // u_plus must lie on the same reduced manifold
        const Vector lifted = ode.lift(up.tail(r));
        if ((lifted - up).norm() > 1e-8 * std::max(1.0, up.norm()))
            throw NoProfileError("u_plus is not on the reduced profile manifold through u_minus");
    }
    const RestPoint left = analyse_rest_point(ode, um, true);
    const RestPoint right = analyse_rest_point(ode, up, false);

    ShockProfile prof;
    prof.endstates = endstates;
    prof.unstable_dim = static_cast<int>(left.basis.cols());
    prof.stable_dim = static_cast<int>(right.basis.cols());
    const int count = prof.unstable_dim + prof.stable_dim - r;
    if (prof.unstable_dim == 0 || prof.stable_dim == 0)
        throw NoProfileError("an endstate has no invariant manifold pointing toward the other");
    if (count >= 1) {
        prof.ell = count;
        prof.connection_note = "transversal connection";
    } else {
        prof.ell = 1;
        prof.connection_note = "non-transversal connection (undercompressive); ell = 1";
    }
    if (prof.ell > 1)
        throw UnsupportedCaseError("profile families with ell > 1 are not realized (only translates)");

    Eigen::Index phase = 0;
    (up - um).cwiseAbs().maxCoeff(&phase);
    prof.phase_component = static_cast<int>(phase);
    const double mid = 0.5 * (up[phase] + um[phase]);

    const double slowest = std::min(left.slowest, right.slowest);
    const double X = opt.half_width > 0.0 ? opt.half_width : 20.0 / slowest;
    const double eps = opt.seed_offset * std::max(1.0, jump);
    const double tau_max = 200.0 / slowest;
    Shooter shooter(ode, prof.phase_component, mid, opt, tau_max);

    BranchResult lb, rb;
    if (prof.unstable_dim <= prof.stable_dim) {
        lb = find_branch(shooter, left, +1, eps, prof.phase_component, mid, h, std::nullopt);
        if (!lb.crossed) throw NoProfileError("unstable manifold of u_minus never reaches the phase section");
        rb = find_branch(shooter, right, -1, eps, prof.phase_component, mid, h, lb.u_cross);
    } else {
        rb = find_branch(shooter, right, -1, eps, prof.phase_component, mid, h, std::nullopt);
        if (!rb.crossed) throw NoProfileError("stable manifold of u_plus never reaches the phase section");
        lb = find_branch(shooter, left, +1, eps, prof.phase_component, mid, h, rb.u_cross);
    }
    if (!lb.crossed || !rb.crossed)
        throw NoProfileError("no connection found: branches do not reach the phase section");
    const double miss = (lb.u_cross - rb.u_cross).norm();
    if (miss > opt.match_tol * std::max(1.0, jump)) {
        std::ostringstream os;
        os << "no connection found: branches from u_minus and u_plus miss by " << miss;
        throw NoProfileError(os.str());
    }

    const int N = opt.grid_points;
    if (N < 8) throw StructuralError("profile grid needs at least 8 points");
    prof.x.resize(N);
    for (int k = 0; k < N; ++k) prof.x[k] = -X + 2.0 * X * k / (N - 1);
    prof.values.resize(n, N);
    prof.derivatives.resize(n, N);

    std::vector<int> left_idx, right_idx;
    std::vector<double> left_tau, right_tau;
    for (int k = 0; k < N; ++k) {
        const double xk = prof.x[k];
        if (xk <= 0.0) {
            if (xk >= -lb.tau_cross) {
                left_idx.push_back(k);
                left_tau.push_back(xk + lb.tau_cross);
            } else {
                const Vector u2 = left.u.tail(r) + (left.J * (xk + lb.tau_cross)).exp() * (lb.seed2 - left.u.tail(r));
                prof.values.col(k) = ode.lift(u2);
            }
        } else {
            if (xk <= rb.tau_cross) {
                right_idx.push_back(k);
                right_tau.push_back(rb.tau_cross - xk);
            } else {
                const Vector u2 = right.u.tail(r) + (right.J * (xk - rb.tau_cross)).exp() * (rb.seed2 - right.u.tail(r));
                prof.values.col(k) = ode.lift(u2);
            }
        }
    }
    {
        const auto vals = shooter.sample(lb.seed2, +1, left_tau);
        for (std::size_t i = 0; i < vals.size(); ++i) prof.values.col(left_idx[i]) = ode.lift(vals[i]);
    }
    {
        std::reverse(right_idx.begin(), right_idx.end());
        std::reverse(right_tau.begin(), right_tau.end());
        const auto vals = shooter.sample(rb.seed2, -1, right_tau);
        for (std::size_t i = 0; i < vals.size(); ++i) prof.values.col(right_idx[i]) = ode.lift(vals[i]);
    }

    prof.second.resize(n, N);
    for (int k = 0; k < N; ++k) {
        const Vector u = prof.values.col(k);
        const Vector du = ode.full_rhs(u);
        prof.derivatives.col(k) = du;
        const double mag = du.tail(r).norm();
        if (mag == 0.0) {
            prof.second.col(k).setZero();
            continue;
        }
        const double eta = 1e-6 / mag;
        const Vector up2 = u.tail(r) + eta * du.tail(r);
        const Vector um2 = u.tail(r) - eta * du.tail(r);
        prof.second.col(k) = (ode.full_rhs(ode.lift(up2)) - ode.full_rhs(ode.lift(um2))) / (2 * eta);
    }

    const DecayFit fit = decay_rate(prof);
    prof.alpha = fit.alpha;
    prof.alpha_minus = fit.alpha_minus;
    prof.alpha_plus = fit.alpha_plus;
    prof.decay_constant = fit.constant;
    return prof;
}

namespace {

// least squares y = a + b t; returns (a, b)
std::pair<double, double> line_fit(const std::vector<double>& t, const std::vector<double>& y) {
    const double m = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double den = m * stt - st * st;
    const double b = (m * sty - st * sy) / den;
    return {(sy - b * st) / m, b};
}

std::pair<double, double> side_fit(const ShockProfile& p, bool plus, bool deriv) {
    const double X = p.half_width();
    const Vector& target = plus ? p.endstates.u_plus : p.endstates.u_minus;
    std::vector<double> t, y;
    for (int k = 0; k < p.size(); ++k) {
        const double xk = p.x[k];
        if (plus ? xk < X / 3.0 : xk > -X / 3.0) continue;
        const double dev = deriv ? p.derivatives.col(k).norm() : (p.values.col(k) - target).norm();
        if (!(dev > 0.0) || !std::isfinite(dev)) continue;
        t.push_back(std::abs(xk));
        y.push_back(std::log(dev));
    }
    if (t.size() < 3) throw DecayFailureError("profile does not vary on the outer grid; nothing to fit");
    const auto [a, b] = line_fit(t, y);
    if (!(b < 0.0)) {
        std::ostringstream os;
        os << "non-negative decay slope " << b << " on the " << (plus ? "right" : "left") << " outer third";
        throw DecayFailureError(os.str());
    }
    return {-b, std::exp(a)};
}

}  // namespace

DecayFit decay_rate(const ShockProfile& profile) {
    if (profile.size() < 8) throw DecayFailureError("profile grid too short to fit a decay rate");
    DecayFit fit;
    const auto [am, cm] = side_fit(profile, false, false);
    const auto [ap, cp] = side_fit(profile, true, false);
    fit.alpha_minus = am;
    fit.alpha_plus = ap;
    fit.alpha = std::min(am, ap);
    fit.constant = std::max(cm, cp);
    fit.alpha_derivative = std::min(side_fit(profile, false, true).first, side_fit(profile, true, true).first);
    return fit;
}

double profile_residual(const ModelSystem& model, const ShockProfile& p) {
    const Vector Fm = model.flux(p.endstates.u_minus);
    const double dx = p.dx();
    double worst = 0.0;
    for (int k = 1; k + 1 < p.size(); ++k) {
        const Vector u = p.values.col(k);
        const Vector du = (p.values.col(k + 1) - p.values.col(k - 1)) / (2 * dx);
        worst = std::max(worst, (model.viscosity(u) * du - (model.flux(u) - Fm)).norm());
    }
    return worst;
}

void write_profile_csv(const ShockProfile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    const int n = p.dim();
    out << "x";
    for (int i = 0; i < n; ++i) out << ",u" << i + 1;
    for (int i = 0; i < n; ++i) out << ",du" << i + 1;
    out << "\n" << std::setprecision(17);
    for (int k = 0; k < p.size(); ++k) {
        out << p.x[k];
        for (int i = 0; i < n; ++i) out << "," << p.values(i, k);
        for (int i = 0; i < n; ++i) out << "," << p.derivatives(i, k);
        out << "\n";
    }
}

ShockProfile read_profile_csv(const std::string& path, const ShockEndstates& endstates) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open profile '" + path + "'");
    const int n = static_cast<int>(endstates.u_minus.size());
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != 1 + 2 * n)
            throw Error("profile CSV row has " + std::to_string(row.size()) + " columns, expected " +
                        std::to_string(1 + 2 * n));
        rows.push_back(std::move(row));
    }
    const int N = static_cast<int>(rows.size());
    if (N < 8) throw Error("profile CSV has too few rows");
    ShockProfile p;
    p.endstates = endstates;
    p.ell = endstates.ell_expected;
    p.x.resize(N);
    p.values.resize(n, N);
    p.derivatives.resize(n, N);
    for (int k = 0; k < N; ++k) {
        p.x[k] = rows[k][0];
        for (int i = 0; i < n; ++i) {
            p.values(i, k) = rows[k][1 + i];
            p.derivatives(i, k) = rows[k][1 + n + i];
        }
    }
    p.second = central_second(p.x, p.derivatives);
    Eigen::Index phase = 0;
    (endstates.u_plus - endstates.u_minus).cwiseAbs().maxCoeff(&phase);
    p.phase_component = static_cast<int>(phase);
    const DecayFit fit = decay_rate(p);
    p.alpha = fit.alpha;
    p.alpha_minus = fit.alpha_minus;
    p.alpha_plus = fit.alpha_plus;
    p.decay_constant = fit.constant;
    p.connection_note = "imported";
    return p;
}

}  // namespace shockstab
