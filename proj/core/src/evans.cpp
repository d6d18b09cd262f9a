#include "shockstab/evans.hpp"

#include "shockstab/errors.hpp"
#include "shockstab/spectral.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace shockstab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

struct Split {
    CVector group;
    CVector rest;
    CMatrix P;
    CMatrix V;  // group eigenvectors
};

// Assigns the eigenvalues of `a` to the previous (group, rest) labels by nearest matching,
// or, without history, takes the k eigenvalues of largest (unstable) or smallest real part.
Split split(const CMatrix& a, int k, bool unstable, const CVector* prev_group, const CVector* prev_rest) {
    const int N = static_cast<int>(a.rows());
    Eigen::ComplexEigenSolver<CMatrix> es(a, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed for the Evans limit matrix");
    const CVector ev = es.eigenvalues();
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> in_group(N, 0);
    if (!prev_group) {
        std::sort(order.begin(), order.end(), [&](int i, int j) {
            return unstable ? ev[i].real() > ev[j].real() : ev[i].real() < ev[j].real();
        });
        for (int i = 0; i < k; ++i) in_group[order[i]] = 1;
    } else {
        std::vector<Complex> old;
        for (int i = 0; i < prev_group->size(); ++i) old.push_back((*prev_group)[i]);
        for (int i = 0; i < prev_rest->size(); ++i) old.push_back((*prev_rest)[i]);
        // perm[i] = index of the new eigenvalue assigned to old label i
        std::vector<int> perm(N), best;
        std::iota(perm.begin(), perm.end(), 0);
        if (N <= 7) {
            double best_cost = std::numeric_limits<double>::infinity();
            do {
                double c = 0.0;
                for (int i = 0; i < N && c < best_cost; ++i) c += std::abs(ev[perm[i]] - old[i]);
                if (c < best_cost) {
                    best_cost = c;
                    best = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        } else {
            std::vector<int> used(N, 0);
            best.assign(N, -1);
            for (int i = 0; i < N; ++i) {
                int arg = -1;
                double d = std::numeric_limits<double>::infinity();
                for (int j = 0; j < N; ++j)
                    if (!used[j] && std::abs(ev[j] - old[i]) < d) {
                        d = std::abs(ev[j] - old[i]);
                        arg = j;
                    }
                used[arg] = 1;
                best[i] = arg;
            }
        }
        for (int i = 0; i < k; ++i) in_group[best[i]] = 1;
    }
    Split s;
    s.group.resize(k);
    s.rest.resize(N - k);
    std::vector<int> gi, ri;
    for (int i = 0; i < N; ++i) (in_group[i] ? gi : ri).push_back(i);
    const CMatrix V = es.eigenvectors();
    const CMatrix W = V.inverse();
    s.P = CMatrix::Zero(N, N);
    s.V.resize(N, k);
    for (int i = 0; i < k; ++i) {
        s.group[i] = ev[gi[i]];
        s.P += V.col(gi[i]) * W.row(gi[i]);
        s.V.col(i) = V.col(gi[i]);
    }
    for (int i = 0; i < N - k; ++i) s.rest[i] = ev[ri[i]];
    return s;
}

double gap(const Split& s) {
    double g = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.group.size(); ++i)
        for (int j = 0; j < s.rest.size(); ++j) g = std::min(g, std::abs(s.group[i] - s.rest[j]));
    return g;
}

// real basis of a conjugation-invariant eigenvector set
CMatrix real_basis(const CMatrix& V, const CVector& vals) {
    const int N = static_cast<int>(V.rows());
    const int k = static_cast<int>(V.cols());
    Matrix raw(N, k);
    int c = 0;
    std::vector<int> taken(k, 0);
    for (int i = 0; i < k && c < k; ++i) {
        if (taken[i]) continue;
        taken[i] = 1;
        if (std::abs(vals[i].imag()) <= 1e-12 * std::max(1.0, std::abs(vals[i]))) {
            CVector v = V.col(i);
            Eigen::Index p = 0;
            v.cwiseAbs().maxCoeff(&p);
            v /= v[p] / std::abs(v[p]);
            raw.col(c++) = v.real();
        } else {
            raw.col(c++) = V.col(i).real();
            if (c < k) raw.col(c++) = V.col(i).imag();
            for (int j = i + 1; j < k; ++j)
                if (!taken[j] && std::abs(vals[j] - std::conj(vals[i])) < 1e-8 * std::max(1.0, std::abs(vals[i]))) {
                    taken[j] = 1;
                    break;
                }
        }
    }
    Eigen::HouseholderQR<Matrix> qr(raw);
    const Matrix Q = qr.householderQ() * Matrix::Identity(N, k);
    return Q.cast<Complex>();
}

// combinatorics for the exterior power
struct Wedge {
    int N = 0, k = 0;
    std::vector<unsigned> sets;         // bitmasks, ascending order
    std::vector<int> index;             // bitmask -> position
    struct Term {
        int row, col, m, ip;
        double sign;
    };
    std::vector<Term> terms;

    Wedge(int N_, int k_) : N(N_), k(k_) {
        index.assign(1u << N, -1);
        for (unsigned s = 0; s < (1u << N); ++s)
            if (__builtin_popcount(s) == k) {
                index[s] = static_cast<int>(sets.size());
                sets.push_back(s);
            }
        for (std::size_t col = 0; col < sets.size(); ++col) {
            const std::vector<int> I = members(sets[col]);
            for (int p = 0; p < k; ++p) {
                const int ip = I[p];
                for (int m = 0; m < N; ++m) {
                    if (m == ip) {
                        terms.push_back({static_cast<int>(col), static_cast<int>(col), m, ip, 1.0});
                        continue;
                    }
                    if (sets[col] & (1u << m)) continue;
                    const unsigned S = (sets[col] & ~(1u << ip)) | (1u << m);
                    int less = 0;
                    for (int q = 0; q < k; ++q)
                        if (q != p && I[q] < m) ++less;
                    const double sg = ((std::abs(p - less) % 2) == 0) ? 1.0 : -1.0;
                    terms.push_back({index[S], static_cast<int>(col), m, ip, sg});
                }
            }
        }
    }
    static std::vector<int> members(unsigned s) {
        std::vector<int> v;
        for (int i = 0; s; ++i, s >>= 1)
            if (s & 1u) v.push_back(i);
        return v;
    }
    int size() const { return static_cast<int>(sets.size()); }
    CMatrix lift(const CMatrix& a) const {
        CMatrix out = CMatrix::Zero(size(), size());
        for (const auto& t : terms) out(t.row, t.col) += t.sign * a(t.m, t.ip);
        return out;
    }
    CVector plucker(const CMatrix& Y) const {
        CVector w(size());
        for (int i = 0; i < size(); ++i) {
            const std::vector<int> I = members(sets[i]);
            CMatrix sub(k, k);
            for (int a = 0; a < k; ++a) sub.row(a) = Y.row(I[a]);
            w[i] = k == 0 ? Complex(1.0) : sub.determinant();
        }
        return w;
    }
};

Complex wedge_pair(const Wedge& wa, const CVector& a, const Wedge& wb, const CVector& b) {
    Complex d = 0.0;
    const unsigned full = (1u << wa.N) - 1u;
    for (int i = 0; i < wa.size(); ++i) {
        const unsigned I = wa.sets[i];
        const int j = wb.index[full & ~I];
        // sign of the permutation (I, complement) -> sorted
        const std::vector<int> mem = Wedge::members(I);
        int s = 0;
        for (int q = 0; q < static_cast<int>(mem.size()); ++q) s += mem[q] - q;
        d += ((s % 2) ? -1.0 : 1.0) * a[i] * b[j];
    }
    return d;
}

}  // namespace

EvansSystem::Coeff EvansSystem::limit_coeff(const ModelSystem& model, const Vector& u) const {
    const int h = n_ - r_;
    const Matrix A = model.flux_jacobian(u);
    const Matrix B = model.viscosity(u);
    Matrix M(n_, n_);
    M.topRows(h) = A.topRows(h);
    M.bottomRows(r_) = B.bottomRows(r_);
    Matrix E0 = Matrix::Zero(n_, N_);
    E0.bottomLeftCorner(r_, n_) = A.bottomRows(r_);
    E0.bottomRightCorner(r_, r_) = Matrix::Identity(r_, r_);
    Matrix E1 = Matrix::Zero(n_, N_);
    E1.topLeftCorner(h, h) = -Matrix::Identity(h, h);
    const auto lu = M.fullPivLu();
    if (!lu.isInvertible()) throw HypothesisError("H1", "[A11 A12; B21 B22] is singular: A_* has a zero eigenvalue");
    Coeff c;
    c.C0 = Matrix::Zero(N_, N_);
    c.C1 = Matrix::Zero(N_, N_);
    c.C0.topRows(n_) = lu.solve(E0);
    c.C1.topRows(n_) = lu.solve(E1);
    c.C1.block(n_, h, r_, r_) = Matrix::Identity(r_, r_);
    return c;
}

EvansSystem::Coeff EvansSystem::coefficients_at(const ModelSystem& model, const ShockProfile& profile,
                                                double x) const {
    const int h = n_ - r_;
    const Vector u = profile.value(x);
    const Matrix A = linearized_convection(model, u, profile.derivative(x));
    const Matrix B = model.viscosity(u);
    Matrix M(n_, n_);
    M.topRows(h) = A.topRows(h);
    M.bottomRows(r_) = B.bottomRows(r_);
    Matrix E0 = Matrix::Zero(n_, N_);
    if (h > 0) {
        const double d = 1e-4;
        const Matrix dA = (model.flux_jacobian(profile.value(x + d)) - model.flux_jacobian(profile.value(x - d))) / (2 * d);
        E0.topLeftCorner(h, n_) = -dA.topRows(h);
    }
    E0.bottomLeftCorner(r_, n_) = A.bottomRows(r_);
    E0.bottomRightCorner(r_, r_) = Matrix::Identity(r_, r_);
    Matrix E1 = Matrix::Zero(n_, N_);
    E1.topLeftCorner(h, h) = -Matrix::Identity(h, h);
    const auto lu = M.fullPivLu();
    if (!lu.isInvertible()) {
        std::ostringstream os;
        os << "A_* is singular at x = " << x;
        throw HypothesisError("H1", os.str());
    }
    Coeff c;
    c.C0 = Matrix::Zero(N_, N_);
    c.C1 = Matrix::Zero(N_, N_);
    c.C0.topRows(n_) = lu.solve(E0);
    c.C1.topRows(n_) = lu.solve(E1);
    c.C1.block(n_, h, r_, r_) = Matrix::Identity(r_, r_);
    return c;
}

CMatrix EvansSystem::assemble(const Coeff& c, Complex lambda) const {
    return c.C0.cast<Complex>() + lambda * c.C1.cast<Complex>();
}

EvansSystem::EvansSystem(const ModelSystem& model, const ShockProfile& profile, EvansOptions options)
    : n_(model.dim()), r_(model.viscous_dim()), N_(model.dim() + model.viscous_dim()), options_(options) {
    X_ = profile.half_width();
    const int M = static_cast<int>(std::ceil(X_ / profile.dx()));
    h_ = X_ / (2.0 * M);
    fine_.resize(4 * M + 1);
    for (int j = 0; j <= 4 * M; ++j) fine_[j] = coefficients_at(model, profile, -X_ + j * h_);
    minus_ = limit_coeff(model, profile.endstates.u_minus);
    plus_ = limit_coeff(model, profile.endstates.u_plus);

    const Complex lr(options_.lambda_ref, 0.0);
    const CMatrix am = assemble(minus_, lr);
    const CMatrix ap = assemble(plus_, lr);
    const CVector em = Eigen::ComplexEigenSolver<CMatrix>(am, false).eigenvalues();
    const CVector ep = Eigen::ComplexEigenSolver<CMatrix>(ap, false).eigenvalues();
    for (int i = 0; i < N_; ++i) {
        if (std::abs(em[i].real()) < 1e-12 || std::abs(ep[i].real()) < 1e-12)
            throw EssentialSpectrumError("purely imaginary spatial eigenvalue at the reference spectral parameter");
        if (em[i].real() > 0) ++k_minus_;
        if (ep[i].real() < 0) ++k_plus_;
    }
    if (k_minus_ + k_plus_ != N_) {
        std::ostringstream os;
        os << "decaying subspaces have dimensions " << k_minus_ << " + " << k_plus_ << " != " << N_;
        throw EssentialSpectrumError(os.str());
    }
}

CMatrix EvansSystem::matrix(double x, Complex lambda) const {
    if (x <= -X_) return assemble(minus_, lambda);
    if (x >= X_) return assemble(plus_, lambda);
    const double pos = (x + X_) / h_;
    const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, static_cast<int>(fine_.size()) - 2);
    const double w = pos - j;
    return (1 - w) * fine(j, lambda) + w * fine(j + 1, lambda);
}

CMatrix EvansSystem::limit_matrix(bool plus, Complex lambda) const {
    return assemble(plus ? plus_ : minus_, lambda);
}

AsymptoticBases EvansSystem::bases(Complex lambda) const {
    const Complex lr(options_.lambda_ref, 0.0);
    AsymptoticBases b;
    b.lambda = lr;
    const Split sm = split(limit_matrix(false, lr), k_minus_, true, nullptr, nullptr);
    const Split sp = split(limit_matrix(true, lr), k_plus_, false, nullptr, nullptr);
    b.minus = real_basis(sm.V, sm.group);
    b.plus = real_basis(sp.V, sp.group);
    b.group_minus = sm.group;
    b.rest_minus = sm.rest;
    b.group_plus = sp.group;
    b.rest_plus = sp.rest;
    if (lambda == lr) return b;
    return continue_bases(b, lambda);
}

AsymptoticBases EvansSystem::continue_bases(const AsymptoticBases& from, Complex target) const {
    AsymptoticBases cur = from;
    const Complex start = from.lambda;
    const Complex delta = target - start;
    const double len = std::abs(delta);
    if (len == 0.0) return cur;
    const double c1 = std::max({1.0, minus_.C1.norm(), plus_.C1.norm()});
    double s = 0.0;
    int guard = 0;
    while (s < 1.0) {
        if (++guard > 200000) throw NumericalError("Kato continuation of the asymptotic bases stalled");
        const Split now_m = split(limit_matrix(false, cur.lambda), k_minus_, true, &cur.group_minus, &cur.rest_minus);
        const Split now_p = split(limit_matrix(true, cur.lambda), k_plus_, false, &cur.group_plus, &cur.rest_plus);
        const double g = std::min(gap(now_m), gap(now_p));
        if (!(g > 1e-14)) throw EssentialSpectrumError("decaying and growing spatial eigenvalues collide");
        const double hs = std::min(1.0 - s, std::max(1e-12, options_.gap_fraction * g / (c1 * len)));
        const double eps = std::min(0.25 * hs, 1e-5 * g / (c1 * len));

        auto projector = [&](bool plus, double ss, const AsymptoticBases& ref) {
            const Complex lam = start + ss * delta;
            if (plus) return split(limit_matrix(true, lam), k_plus_, false, &ref.group_plus, &ref.rest_plus).P;
            return split(limit_matrix(false, lam), k_minus_, true, &ref.group_minus, &ref.rest_minus).P;
        };
        auto rhs = [&](bool plus, double ss, const CMatrix& R) {
            const CMatrix P = projector(plus, ss, cur);
            const CMatrix dP = (projector(plus, ss + eps, cur) - projector(plus, ss - eps, cur)) / (2 * eps);
            return CMatrix((dP * P - P * dP) * R);
        };
        auto rk4 = [&](bool plus, const CMatrix& R) {
            const CMatrix k1 = rhs(plus, s, R);
            const CMatrix k2 = rhs(plus, s + 0.5 * hs, R + 0.5 * hs * k1);
            const CMatrix k3 = rhs(plus, s + 0.5 * hs, R + 0.5 * hs * k2);
            const CMatrix k4 = rhs(plus, s + hs, R + hs * k3);
            return CMatrix(R + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
        };
        CMatrix Rm = rk4(false, cur.minus);
        CMatrix Rp = rk4(true, cur.plus);
        s = (1.0 - s <= hs) ? 1.0 : s + hs;
        const Complex lam = s >= 1.0 ? target : start + s * delta;
        const Split nm = split(limit_matrix(false, lam), k_minus_, true, &cur.group_minus, &cur.rest_minus);
        const Split np = split(limit_matrix(true, lam), k_plus_, false, &cur.group_plus, &cur.rest_plus);
        cur.lambda = lam;
        cur.minus = nm.P * Rm;
        cur.plus = np.P * Rp;
        cur.group_minus = nm.group;
        cur.rest_minus = nm.rest;
        cur.group_plus = np.group;
        cur.rest_plus = np.rest;
    }
    return cur;
}

Complex EvansSystem::frames(const AsymptoticBases& b, Complex lambda) const {
    const int M2 = static_cast<int>(fine_.size()) - 1;  // 4M
    const int mid = M2 / 2;
    Complex logdet = 0.0;
    auto integrate = [&](CMatrix Y, bool forward) {
        const double step = 2.0 * h_ * (forward ? 1.0 : -1.0);
        int j = forward ? 0 : M2;
        while (j != mid) {
            const int jn = forward ? j + 2 : j - 2;
            const int jm = forward ? j + 1 : j - 1;
            const CMatrix A0 = fine(j, lambda);
            const CMatrix Am = fine(jm, lambda);
            const CMatrix A1 = fine(jn, lambda);
            const CMatrix k1 = A0 * Y;
            const CMatrix k2 = Am * (Y + 0.5 * step * k1);
            const CMatrix k3 = Am * (Y + 0.5 * step * k2);
            const CMatrix k4 = A1 * (Y + step * k3);
            Y += step * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            Eigen::HouseholderQR<CMatrix> qr(Y);
            const CMatrix R = qr.matrixQR().topRows(Y.cols()).triangularView<Eigen::Upper>();
            for (int i = 0; i < Y.cols(); ++i) logdet += std::log(R(i, i));
            Y = qr.householderQ() * CMatrix::Identity(Y.rows(), Y.cols());
            j = jn;
        }
        return Y;
    };
    const CMatrix Ym = integrate(b.minus, true);
    const CMatrix Yp = integrate(b.plus, false);
    CMatrix W(N_, N_);
    W.leftCols(k_minus_) = Ym;
    W.rightCols(k_plus_) = Yp;
    const Complex gm = b.group_minus.sum();
    const Complex gp = b.group_plus.sum();
    return W.determinant() * std::exp(logdet - gm * X_ + gp * X_);
}

Complex EvansSystem::compound(const AsymptoticBases& b, Complex lambda) const {
    const Wedge wm(N_, k_minus_);
    const Wedge wp(N_, k_plus_);
    const int M2 = static_cast<int>(fine_.size()) - 1;
    const int mid = M2 / 2;
    auto integrate = [&](const Wedge& wg, CVector w, Complex gamma, bool forward) {
        const double step = 2.0 * h_ * (forward ? 1.0 : -1.0);
        const CMatrix shift = gamma * CMatrix::Identity(wg.size(), wg.size());
        int j = forward ? 0 : M2;
        while (j != mid) {
            const int jn = forward ? j + 2 : j - 2;
            const int jm = forward ? j + 1 : j - 1;
            const CMatrix A0 = wg.lift(fine(j, lambda)) - shift;
            const CMatrix Am = wg.lift(fine(jm, lambda)) - shift;
            const CMatrix A1 = wg.lift(fine(jn, lambda)) - shift;
            const CVector k1 = A0 * w;
            const CVector k2 = Am * (w + 0.5 * step * k1);
            const CVector k3 = Am * (w + 0.5 * step * k2);
            const CVector k4 = A1 * (w + step * k3);
            w += step * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            j = jn;
        }
        return w;
    };
    const CVector om = integrate(wm, wm.plucker(b.minus), b.group_minus.sum(), true);
    const CVector op = integrate(wp, wp.plucker(b.plus), b.group_plus.sum(), false);
    return wedge_pair(wm, om, wp, op);
}

Complex EvansSystem::evaluate(const AsymptoticBases& b, Complex lambda, EvansMethod method) const {
    return method == EvansMethod::Frames ? frames(b, lambda) : compound(b, lambda);
}

Complex EvansSystem::evaluate_at_origin(EvansMethod method) const {
    return evaluate(bases(Complex(1e-10, 0.0)), Complex(0.0, 0.0), method);
}

std::vector<Complex> EvansSystem::evaluate_path(const std::vector<Complex>& path) const {
    std::vector<Complex> out;
    if (path.empty()) return out;
    AsymptoticBases b = bases(path[0]);
    out.push_back(evaluate(b, options_.method));
    for (std::size_t i = 1; i < path.size(); ++i) {
        b = continue_bases(b, path[i]);
        out.push_back(evaluate(b, options_.method));
    }
    return out;
}

EssentialSpectrumReport essential_spectrum_guard(const ModelSystem& model, const Vector& u_minus,
                                                 const Vector& u_plus) {
    EssentialSpectrumReport rep;
    rep.max_real_part = -std::numeric_limits<double>::infinity();
    for (const Vector* u : {&u_minus, &u_plus}) {
        const Matrix A = model.flux_jacobian(*u);
        const Matrix B = model.viscosity(*u);
        for (int i = 0; i <= 400; ++i) {
            const double xi = std::pow(10.0, -3.0 + 6.0 * i / 400.0);
            for (double sgn : {1.0, -1.0}) {
                const CMatrix Mx = Complex(0.0, -sgn * xi) * A.cast<Complex>() - (xi * xi) * B.cast<Complex>();
                const CVector ev = Eigen::ComplexEigenSolver<CMatrix>(Mx, false).eigenvalues();
                for (int j = 0; j < ev.size(); ++j) {
                    if (ev[j].real() > rep.max_real_part) rep.max_real_part = ev[j].real();
                    if (ev[j].real() >= 0.0 && rep.ok) {
                        rep.ok = false;
                        std::ostringstream os;
                        os << "dispersion curve reaches Re lambda = " << ev[j].real() << " at xi = " << sgn * xi;
                        rep.detail = os.str();
                    }
                }
            }
        }
    }
    if (rep.ok) rep.detail = "dispersion curves stay in Re lambda < 0 for xi != 0";
    return rep;
}

namespace {

struct Node {
    double s;
    Complex lambda;
    AsymptoticBases bases;
    Complex value;
};

double phase_step(Complex a, Complex b) { return std::abs(std::arg(b / a)); }

// Samples the closed path, refining until consecutive phase increments are below the bound.
bool sweep(const EvansSystem& es, const std::function<Complex(double)>& path, std::vector<double> params,
           const EvansOptionsD& opt, std::vector<Node>& nodes, double& total_phase, double& max_inc) {
    nodes.clear();
    AsymptoticBases b = es.bases(path(params.front()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Complex lam = path(params[i]);
        if (i > 0) b = es.continue_bases(b, lam);
        nodes.push_back({params[i], lam, b, es.evaluate(b, es.options().method)});
    }
    for (int pass = 0; pass < 40; ++pass) {
        bool refined = false;
        std::vector<Node> next;
        next.reserve(nodes.size() * 2);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            next.push_back(nodes[i]);
            if (phase_step(nodes[i].value, nodes[i + 1].value) > opt.max_phase_step) {
                const double sm = 0.5 * (nodes[i].s + nodes[i + 1].s);
                const Complex lam = path(sm);
                const AsymptoticBases bm = es.continue_bases(nodes[i].bases, lam);
                next.push_back({sm, lam, bm, es.evaluate(bm, es.options().method)});
                refined = true;
            }
        }
        next.push_back(nodes.back());
        nodes.swap(next);
        if (!refined) break;
        if (static_cast<int>(nodes.size()) > opt.max_samples) break;
    }
    total_phase = 0.0;
    max_inc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double d = std::arg(nodes[i + 1].value / nodes[i].value);
        total_phase += d;
        max_inc = std::max(max_inc, std::abs(d));
    }
    return max_inc <= opt.max_phase_step;
}

}  // namespace

EvansData verify_criterion_D(const ModelSystem& model, const ShockProfile& profile, const EvansOptionsD& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    EvansData data;
    data.ell = profile.ell;
    data.rho = opt.rho;
    data.essential = essential_spectrum_guard(model, profile.endstates.u_minus, profile.endstates.u_plus);
    if (!data.essential.ok) throw EssentialSpectrumError(data.essential.detail);

    double R = opt.R;
    if (!(R > 0.0)) {
        const EndstateModes mm = endstate_modes(model, profile.endstates.u_minus);
        const EndstateModes mp = endstate_modes(model, profile.endstates.u_plus);
        const double amax = std::max(mm.speeds.cwiseAbs().maxCoeff(), mp.speeds.cwiseAbs().maxCoeff());
        const double bmin = std::max(1e-6, std::min(mm.beta.minCoeff(), mp.beta.minCoeff()));
        R = std::max(2.0, 2.0 * amax * amax / bmin);
    }
    data.R = R;
    const double rho = opt.rho;
    const EvansSystem es(model, profile, opt.evans);

    // indented contour parametrized by arc length, starting at lambda = R
    const double L1 = 0.5 * M_PI * R, L2 = R - rho, L3 = M_PI * rho;
    const double total = 2 * L1 + 2 * L2 + L3;
    auto contour = [=](double s) -> Complex {
        if (s <= L1) return std::polar(R, s / R);
        s -= L1;
        if (s <= L2) return Complex(0.0, R - s);
        s -= L2;
        if (s <= L3) return std::polar(rho, 0.5 * M_PI - s / rho);
        s -= L3;
        if (s <= L2) return Complex(0.0, -rho - s);
        s -= L2;
        return std::polar(R, -0.5 * M_PI + s / R);
    };
    std::vector<double> params;
    const double lens[5] = {L1, L2, L3, L2, L1};
    double acc = 0.0;
    for (int seg = 0; seg < 5; ++seg) {
        const int m = std::max(16, static_cast<int>(std::lround(opt.initial_samples * lens[seg] / total)));
        for (int i = 0; i < m; ++i) params.push_back(acc + lens[seg] * i / m);
        acc += lens[seg];
    }
    params.push_back(total);

    std::vector<Node> nodes;
    double phase = 0.0, maxinc = 0.0;
    bool ok = sweep(es, contour, params, opt, nodes, phase, maxinc);
    for (const auto& nd : nodes) data.contour.push_back({nd.lambda, nd.value});
    data.winding_raw = phase / (2 * M_PI);
    data.winding_number = static_cast<int>(std::lround(data.winding_raw));
    data.max_phase_increment = maxinc;

    std::vector<double> cparams;
    for (int i = 0; i <= opt.circle_samples; ++i) cparams.push_back(2 * M_PI * i / opt.circle_samples);
    auto circle = [=](double th) { return std::polar(rho, th); };
    std::vector<Node> cnodes;
    double cphase = 0.0, cmax = 0.0;
    const bool cok = sweep(es, circle, cparams, opt, cnodes, cphase, cmax);
    for (const auto& nd : cnodes) data.circle.push_back({nd.lambda, nd.value});
    data.origin_raw = cphase / (2 * M_PI);
    data.origin_multiplicity = static_cast<int>(std::lround(data.origin_raw));
    data.circle_closure = std::abs(cnodes.back().value - cnodes.front().value) / std::abs(cnodes.front().value);
    data.max_phase_increment = std::max(data.max_phase_increment, cmax);

    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (const auto& c : data.contour) {
        dmax = std::max(dmax, std::abs(c.value));
        dmin = std::min(dmin, std::abs(c.value));
    }
    // conjugate symmetry at a few direct evaluations
    double cres = 0.0;
    for (int i = 1; i <= 4; ++i) {
        const Complex lam = contour(total * i / 10.0);
        if (std::abs(lam.imag()) < 1e-12) continue;
        const Complex a = es.evaluate(lam);
        const Complex b = es.evaluate(std::conj(lam));
        cres = std::max(cres, std::abs(b - std::conj(a)) / std::max(std::abs(a), 1e-300));
    }
    data.conjugate_residual = cres;
    data.value_at_origin = es.evaluate_at_origin(opt.evans.method);

    std::ostringstream os;
    if (!ok || !cok || std::abs(data.winding_raw - data.winding_number) > 0.05 ||
        std::abs(data.origin_raw - data.origin_multiplicity) > 0.05 || dmin < 1e-12 * dmax) {
        data.verdict = Verdict::Inconclusive;
        os << "phase accumulation not resolved (max increment " << data.max_phase_increment << ", winding "
           << data.winding_raw << ", origin " << data.origin_raw << ")";
    } else if (data.winding_number == 0 && data.origin_multiplicity == data.ell) {
        data.verdict = Verdict::Pass;
        os << "no zeros in Re lambda >= 0 away from the origin; zero of order " << data.origin_multiplicity
           << " at the origin";
    } else {
        data.verdict = Verdict::Fail;
        os << data.winding_number << " zero(s) in the indented region, order " << data.origin_multiplicity
           << " at the origin (expected 0 and " << data.ell << ")";
    }
    data.detail = os.str();
    data.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return data;
}

void write_contour_csv(const EvansData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "curve,re_lambda,im_lambda,re_D,im_D\n" << std::setprecision(17);
    for (const auto& c : data.contour)
        out << "contour," << c.lambda.real() << "," << c.lambda.imag() << "," << c.value.real() << ","
            << c.value.imag() << "\n";
    for (const auto& c : data.circle)
        out << "origin_circle," << c.lambda.real() << "," << c.lambda.imag() << "," << c.value.real() << ","
            << c.value.imag() << "\n";
}

std::string evans_json(const EvansData& d) {
    nlohmann::json j;
    j["verdict"] = to_string(d.verdict);
    j["detail"] = d.detail;
    j["R"] = d.R;
    j["rho"] = d.rho;
    j["ell"] = d.ell;
    j["winding_number"] = d.winding_number;
    j["winding_raw"] = d.winding_raw;
    j["origin_multiplicity"] = d.origin_multiplicity;
    j["origin_raw"] = d.origin_raw;
    j["max_phase_increment"] = d.max_phase_increment;
    j["conjugate_residual"] = d.conjugate_residual;
    j["circle_closure"] = d.circle_closure;
    j["abs_D_at_origin"] = std::abs(d.value_at_origin);
    j["contour_samples"] = d.contour.size();
    j["circle_samples"] = d.circle.size();
    j["essential_spectrum"] = {{"ok", d.essential.ok}, {"max_real_part", d.essential.max_real_part},
                               {"detail", d.essential.detail}};
    j["seconds"] = d.seconds;
    return j.dump(2);
}

}  // namespace shockstab
