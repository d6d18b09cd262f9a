#include "shockstab/hypotheses.hpp"

#include "shockstab/errors.hpp"
#include "shockstab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shockstab {

std::string to_string(ShockClass c) {
    switch (c) {
        case ShockClass::Undercompressive: return "undercompressive";
        case ShockClass::Lax: return "lax";
        case ShockClass::Overcompressive: return "overcompressive";
    }
    return "unknown";
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Unchecked: return "unchecked";
    }
    return "unknown";
}

const HypothesisCheck& HypothesisReport::get(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no hypothesis check named '" + name + "'");
}

namespace {

Vector sorted_real(const CVector& v) {
    Vector out = v.real();
    std::sort(out.data(), out.data() + out.size());
    return out;
}

std::vector<Vector> segment_states(const Vector& a, const Vector& b, int samples) {
    std::vector<Vector> out;
    const int m = std::max(samples, 2);
    for (int k = 0; k < m; ++k) {
        const double t = static_cast<double>(k) / (m - 1);
        out.push_back((1.0 - t) * a + t * b);
    }
    return out;
}

bool is_symmetric(const Matrix& m, double tol) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_sym_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::string fmt_state(const Vector& u) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
    os << ")";
    return os.str();
}

// Hyperbolic block of the symmetrized system: A~_* = A~_11 (A~0_11)^{-1}.
Matrix hyperbolic_block(const ModelSystem& model, const Vector& u) {
    const int h = model.hyperbolic_dim();
    const Matrix dF = model.flux_jacobian(u);
    if (const auto& sym = model.symmetrizer()) {
        const Matrix a = sym->a(u, dF);
        const Matrix a0 = sym->a0(u);
        return a.topLeftCorner(h, h) * a0.topLeftCorner(h, h).inverse();
    }
    return dF.topLeftCorner(h, h);
}

HypothesisCheck check_a1(const ModelSystem& model, const ShockEndstates& e,
                         const std::vector<Vector>& states, double tol) {
    HypothesisCheck c{"A1", CheckStatus::Pass, ""};
    const auto& sym = *model.symmetrizer();
    const int h = model.hyperbolic_dim();
    for (const auto& u : states) {
        const Matrix a0 = sym.a0(u);
        if (!is_symmetric(a0, tol) || min_sym_eig(a0) <= 0.0) {
            c.status = CheckStatus::Fail;
            c.detail = "A~0 not symmetric positive definite at " + fmt_state(u);
            return c;
        }
        const Matrix a = sym.a(u, model.flux_jacobian(u));
        if (h > 0 && !is_symmetric(a.topLeftCorner(h, h), tol)) {
            c.status = CheckStatus::Fail;
            c.detail = "A~_11 not symmetric at " + fmt_state(u);
            return c;
        }
    }
    for (const Vector* u : {&e.u_minus, &e.u_plus}) {
        if (!is_symmetric(sym.a(*u, model.flux_jacobian(*u)), tol)) {
            c.status = CheckStatus::Fail;
            c.detail = "A~ not symmetric at endstate " + fmt_state(*u);
            return c;
        }
    }
    c.detail = "A~0 > 0 and symmetric blocks on sampled states";
    return c;
}

HypothesisCheck check_a2(const ModelSystem& model, const ShockEndstates& e) {
    HypothesisCheck c{"A2", CheckStatus::Pass, ""};
    double margin = std::numeric_limits<double>::infinity();
    for (const Vector* u : {&e.u_minus, &e.u_plus})
        margin = std::min(margin, genuine_coupling_margin(model, *u));
    std::ostringstream os;
    os << "min |B r|/|r| over eigenvectors of dF at endstates = " << margin;
    c.detail = os.str();
    if (!(margin > 1e-10)) c.status = CheckStatus::Fail;
    return c;
}

HypothesisCheck check_a3(const ModelSystem& model, const std::vector<Vector>& states, double tol) {
    HypothesisCheck c{"A3", CheckStatus::Pass, ""};
    const auto& sym = *model.symmetrizer();
    const int h = model.hyperbolic_dim();
    const int r = model.viscous_dim();
    double theta = std::numeric_limits<double>::infinity();
    for (const auto& u : states) {
        const Matrix bt = sym.b(u, model.viscosity(u));
        const double scale = std::max(1.0, bt.cwiseAbs().maxCoeff());
        if (h > 0 && (bt.topRows(h).cwiseAbs().maxCoeff() > tol * scale ||
                      bt.leftCols(h).cwiseAbs().maxCoeff() > tol * scale)) {
            c.status = CheckStatus::Fail;
            c.detail = "B~ lacks block-diagonal form at " + fmt_state(u);
            return c;
        }
        theta = std::min(theta, min_sym_eig(bt.bottomRightCorner(r, r)));
    }
    std::ostringstream os;
    os << "Re b~ >= " << theta << " on sampled states";
    c.detail = os.str();
    if (!(theta > 0.0)) c.status = CheckStatus::Fail;
    return c;
}

HypothesisCheck check_b1(const ModelSystem& model, const std::vector<Vector>& states) {
    HypothesisCheck c{"B1", CheckStatus::Pass, ""};
    if (!model.strictly_parabolic()) {
        c.status = CheckStatus::Fail;
        c.detail = "r < n: viscosity is degenerate";
        return c;
    }
    double theta = std::numeric_limits<double>::infinity();
    for (const auto& u : states) theta = std::min(theta, eigenvalues(model.viscosity(u)).real().minCoeff());
    std::ostringstream os;
    os << "min Re sigma(B) = " << theta;
    c.detail = os.str();
    if (!(theta > 0.0)) c.status = CheckStatus::Fail;
    return c;
}

HypothesisCheck check_h1(const ModelSystem& model, const std::vector<Vector>& states,
                         const HypothesisOptions& opt) {
    HypothesisCheck c{"H1", CheckStatus::Pass, ""};
    if (model.hyperbolic_dim() == 0) {
        c.detail = "no hyperbolic block";
        return c;
    }
    int sign = 0;
    std::vector<int> multiplicities;
    for (const auto& u : states) {
        const Matrix astar = hyperbolic_block(model, u);
        const CVector ev = eigenvalues(astar);
        const double scale = std::max(spectral_radius(model.flux_jacobian(u)), 1e-300);
        for (int j = 0; j < ev.size(); ++j) {
            if (std::abs(ev[j].imag()) > opt.eigen_rel_tol * scale) {
                c.status = CheckStatus::Fail;
                c.detail = "(i) complex eigenvalue of A~_* at " + fmt_state(u);
                return c;
            }
            const double a = ev[j].real();
            if (std::abs(a) <= opt.eigen_rel_tol * scale) {
                c.status = CheckStatus::Fail;
                c.detail = "(i) zero eigenvalue of A~_* at " + fmt_state(u);
                return c;
            }
            const int sg = a > 0 ? 1 : -1;
            if (sign == 0) sign = sg;
            if (sg != sign) {
                c.status = CheckStatus::Fail;
                c.detail = "(ii) eigenvalues of A~_* change sign at " + fmt_state(u);
                return c;
            }
        }
        std::vector<int> mult;
        for (auto [b, e] : cluster_sorted(sorted_real(ev), opt.multiplicity_gap)) mult.push_back(e - b);
        if (multiplicities.empty()) multiplicities = mult;
        if (mult != multiplicities) {
            c.status = CheckStatus::Fail;
            c.detail = "(iii) multiplicity of A~_* eigenvalues changes at " + fmt_state(u);
            return c;
        }
    }
    c.detail = std::string("eigenvalues of A~_* nonzero, ") + (sign > 0 ? "positive" : "negative") +
               ", constant multiplicity";
    return c;
}

HypothesisCheck check_h2(const ModelSystem& model, const ShockEndstates& e, const HypothesisOptions& opt) {
    HypothesisCheck c{"H2", CheckStatus::Pass, "eigenvalues of dF(u+-) real, distinct, nonzero"};
    for (const Vector* u : {&e.u_minus, &e.u_plus}) {
        const Matrix dF = model.flux_jacobian(*u);
        try {
            const auto es = real_eigensystem(dF, opt.eigen_rel_tol, "H2");
            const double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
            if (es.values.cwiseAbs().minCoeff() <= opt.eigen_rel_tol * scale) {
                c.status = CheckStatus::Fail;
                c.detail = "zero characteristic speed at " + fmt_state(*u);
                return c;
            }
        } catch (const HypothesisError& err) {
            c.status = CheckStatus::Fail;
            c.detail = std::string(err.what()) + " at " + fmt_state(*u);
            return c;
        }
    }
    return c;
}

}  // namespace

void require_block_structure(const ModelSystem& model, const Vector& u) {
    const Matrix B = model.viscosity(u);
    const int h = model.hyperbolic_dim();
    if (B.rows() != model.dim() || B.cols() != model.dim())
        throw StructuralError("viscosity matrix is not n x n");
    if (h > 0 && B.topRows(h).cwiseAbs().maxCoeff() != 0.0)
        throw StructuralError("first n - r rows of B(u) are not zero at " + fmt_state(u));
}

double genuine_coupling_margin(const ModelSystem& model, const Vector& u) {
    const Matrix dF = model.flux_jacobian(u);
    const Matrix B = model.viscosity(u);
    Eigen::EigenSolver<Matrix> es(dF, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed at " + fmt_state(u));
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < dF.rows(); ++j) {
        const CVector r = es.eigenvectors().col(j);
        const CVector br = B.cast<std::complex<double>>() * r;
        margin = std::min(margin, br.norm() / r.norm());
    }
    return margin;
}

ShockEndstates classify_shock(const ModelSystem& model, const Vector& u_minus, const Vector& u_plus,
                              double tol) {
    const int n = model.dim();
    if (u_minus.size() != n || u_plus.size() != n)
        throw StructuralError("endstate dimension does not match model dimension");
    if ((u_minus - u_plus).norm() <= 1e-14 * std::max(1.0, u_minus.norm()))
        throw DegenerateShockError("u_minus equals u_plus");
    ShockEndstates e;
    e.u_minus = u_minus;
    e.u_plus = u_plus;
    e.speeds_minus = sorted_real(eigenvalues(model.flux_jacobian(u_minus)));
    e.speeds_plus = sorted_real(eigenvalues(model.flux_jacobian(u_plus)));
    for (const Vector* sp : {&e.speeds_minus, &e.speeds_plus}) {
        const double scale = std::max(sp->cwiseAbs().maxCoeff(), 1e-300);
        if (sp->cwiseAbs().minCoeff() <= tol * scale)
            throw HypothesisError("H2", "characteristic speed within tolerance of zero at an endstate");
    }
    e.i_minus = static_cast<int>((e.speeds_minus.array() > 0.0).count());
    e.i_plus = static_cast<int>((e.speeds_plus.array() < 0.0).count());
    e.i = e.i_minus + e.i_plus;
    const int excess = e.i - n;
    if (excess < 1) {
        e.shock_class = ShockClass::Undercompressive;
        e.ell_expected = 1;
    } else {
        e.shock_class = excess == 1 ? ShockClass::Lax : ShockClass::Overcompressive;
        e.ell_expected = excess;
    }
    e.rankine_hugoniot_residual = (model.flux(u_plus) - model.flux(u_minus)).norm();
    return e;
}

HypothesisReport check_hypotheses(const ModelSystem& model, const ShockEndstates& endstates,
                                  const HypothesisOptions& options) {
    const auto states = segment_states(endstates.u_minus, endstates.u_plus, options.segment_samples);
    for (const auto& u : states) require_block_structure(model, u);

    HypothesisReport rep;
    const double sym_tol = 1e-10;
    if (model.symmetrizer()) {
        rep.checks.push_back(check_a1(model, endstates, states, sym_tol));
        rep.checks.push_back(check_a2(model, endstates));
        rep.checks.push_back(check_a3(model, states, sym_tol));
    } else {
        for (const char* name : {"A1", "A2", "A3"})
            rep.checks.push_back({name, CheckStatus::Unchecked, "A-branch unchecked: no symmetrizer supplied"});
        // dissipativity is meaningful without a symmetrizer
        rep.checks[1] = check_a2(model, endstates);
    }
    rep.checks.push_back(check_b1(model, states));
    rep.checks.push_back(check_h1(model, states, options));
    rep.checks.push_back(check_h2(model, endstates, options));

    HypothesisCheck rh{"RH", CheckStatus::Pass, ""};
    const double scale = std::max(1.0, model.flux(endstates.u_minus).norm());
    std::ostringstream os;
    os << "|F(u+) - F(u-)| = " << endstates.rankine_hugoniot_residual;
    rh.detail = os.str();
    if (endstates.rankine_hugoniot_residual > options.rh_tol * scale) rh.status = CheckStatus::Fail;
    rep.checks.push_back(rh);

    rep.symmetric_branch = rep.status("A1") == CheckStatus::Pass && rep.status("A2") == CheckStatus::Pass &&
                           rep.status("A3") == CheckStatus::Pass;
    rep.parabolic_branch = rep.status("B1") == CheckStatus::Pass;
    rep.technical = rep.status("H1") == CheckStatus::Pass && rep.status("H2") == CheckStatus::Pass &&
                    rep.status("RH") == CheckStatus::Pass;
    return rep;
}

}  // namespace shockstab
