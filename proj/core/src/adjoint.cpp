#include "shockstab/errors.hpp"
#include "shockstab/templates.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace shockstab {

namespace {

// Stationary adjoint A^t pi' + (B^t pi')' = 0 written for p = pi'.  Since B^t p only
// involves z = p^II, it reads (C z)' + A^t p = 0 with C = B^t(:, II), which splits into
// p^I = P(x) z and z' = K(x) z.
struct AdjointCoefficients {
    Matrix K;  // r x r
    Matrix P;  // h x r
};

AdjointCoefficients adjoint_coefficients(const ModelSystem& model, const Vector& u, const Vector& ux) {
    const int n = model.dim();
    const int r = model.viscous_dim();
    const int h = n - r;
    const Matrix At = linearized_convection(model, u, ux).transpose();
    const Matrix Bt = model.viscosity(u).transpose();
    const Matrix dBt = model.viscosity_derivative(u, ux).transpose();
    Matrix G(n, n);
    G.leftCols(h) = At.leftCols(h);
    G.rightCols(r) = Bt.rightCols(r);
    const auto lu = G.fullPivLu();
    if (!lu.isInvertible()) throw HypothesisError("H1", "adjoint coefficient matrix is singular along the profile");
    const Matrix sol = -lu.solve(dBt.rightCols(r) + At.rightCols(r));
    return {sol.bottomRows(r), sol.topRows(h)};
}

// Real basis for the eigenvalues of K with Re > 0 (unstable) or Re < 0.
Matrix real_subspace(const Matrix& K, bool unstable) {
    Eigen::EigenSolver<Matrix> es(K);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const Eigen::MatrixXcd V = es.eigenvectors();
    std::vector<Vector> cols;
    for (int i = 0; i < ev.size(); ++i) {
        const bool pick = unstable ? ev[i].real() > 1e-12 : ev[i].real() < -1e-12;
        if (!pick) continue;
        if (std::abs(ev[i].imag()) < 1e-12) {
            cols.push_back(V.col(i).real());
        } else if (ev[i].imag() > 0) {
            cols.push_back(V.col(i).real());
            cols.push_back(V.col(i).imag());
        }
    }
    Matrix out(K.rows(), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<int>(i)) = cols[i].normalized();
    return out;
}

// Null space of m (columns), relative tolerance tol.
Matrix null_space(const Matrix& m, int cols, double tol) {
    if (m.rows() == 0) return Matrix::Identity(cols, cols);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Vector s = svd.singularValues();
    const double smax = std::max(s.size() ? s[0] : 0.0, 1.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > tol * smax) ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

PhaseKernel e_infinity(const ModelSystem& model, const ShockProfile& profile) {
    const int n = model.dim();
    const int r = model.viscous_dim();
    const int h = n - r;
    const int N = profile.size();
    const double dx = profile.dx();
    const Vector& xs = profile.x;
    PhaseKernel pk;
    pk.ell = profile.ell;
    pk.x = xs;
    if (pk.ell != 1) throw UnsupportedCaseError("phase kernel is implemented for a one-parameter profile family");

    auto coeff = [&](double x) { return adjoint_coefficients(model, profile.value(x), profile.derivative(x)); };
    const AdjointCoefficients cm = adjoint_coefficients(model, profile.endstates.u_minus, Vector::Zero(n));
    const AdjointCoefficients cp = adjoint_coefficients(model, profile.endstates.u_plus, Vector::Zero(n));
    const Matrix U = real_subspace(cm.K, true);   // decays toward -inf
    const Matrix S = real_subspace(cp.K, false);  // decays toward +inf
    const int ku = static_cast<int>(U.cols());
    const int ks = static_cast<int>(S.cols());
    const int mid = (N - 1) / 2;

    // normalized columns with accumulated log growth
    auto march = [&](Matrix Z, int from, int to, std::vector<Matrix>& store, std::vector<Vector>& logs) {
        store.assign(N, Matrix());
        logs.assign(N, Vector());
        Vector lg = Vector::Zero(Z.cols());
        store[from] = Z;
        logs[from] = lg;
        const int dir = to > from ? 1 : -1;
        for (int i = from; i != to; i += dir) {
            const double hstep = dir * dx;
            const double x0 = xs[i];
            const Matrix K0 = coeff(x0).K;
            const Matrix Km = coeff(x0 + 0.5 * hstep).K;
            const Matrix K1 = coeff(xs[i + dir]).K;
            const Matrix k1 = K0 * Z;
            const Matrix k2 = Km * (Z + 0.5 * hstep * k1);
            const Matrix k3 = Km * (Z + 0.5 * hstep * k2);
            const Matrix k4 = K1 * (Z + hstep * k3);
            Z += hstep * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
            for (int c = 0; c < Z.cols(); ++c) {
                const double nrm = Z.col(c).norm();
                Z.col(c) /= nrm;
                lg[c] += std::log(nrm);
            }
            store[i + dir] = Z;
            logs[i + dir] = lg;
        }
    };

    std::vector<Matrix> zm, zp;
    std::vector<Vector> lm, lp;
    march(U, 0, mid, zm, lm);
    march(S, N - 1, mid, zp, lp);

    Matrix match(r, ku + ks);
    match.leftCols(ku) = zm[mid];
    match.rightCols(ks) = -zp[mid];
    const Matrix coeffs = (ku + ks > 0) ? null_space(match, ku + ks, 1e-7) : Matrix(0, 0);
    const int dp = static_cast<int>(coeffs.cols());
    pk.decaying_adjoint_dim = dp;

    // derivative solutions p_m on the grid and their primitives P_m
    std::vector<Matrix> prim(dp, Matrix::Zero(n, N));
    for (int m = 0; m < dp; ++m) {
        Matrix p(n, N);
        for (int i = 0; i < N; ++i) {
            Vector z;
            if (i <= mid) {
                const Vector w = (lm[i] - lm[mid]).array().exp();
                z = zm[i] * (w.asDiagonal() * coeffs.col(m).head(ku));
            } else {
                const Vector w = (lp[i] - lp[mid]).array().exp();
                z = zp[i] * (w.asDiagonal() * coeffs.col(m).tail(ks));
            }
            const AdjointCoefficients c = coeff(xs[i]);
            p.col(i).head(h) = c.P * z;
            p.col(i).tail(r) = z;
        }
        for (int i = 1; i < N; ++i) prim[m].col(i) = prim[m].col(i - 1) + 0.5 * dx * (p.col(i - 1) + p.col(i));
    }

    // pi = c + sum a_m P_m; outgoing components of the limits must vanish
    const TemplateBundle bare = make_template_bundle(model, profile, {}, false);
    const int rows = static_cast<int>(bare.outgoing_minus.size() + bare.outgoing_plus.size());
    Matrix con = Matrix::Zero(rows, n + dp);
    int row = 0;
    for (int k : bare.outgoing_minus) con.row(row++).head(n) = bare.right_minus.col(k).transpose();
    for (int k : bare.outgoing_plus) {
        con.row(row).head(n) = bare.right_plus.col(k).transpose();
        for (int m = 0; m < dp; ++m) con(row, n + m) = prim[m].col(N - 1).dot(bare.right_plus.col(k));
        ++row;
    }
    const Matrix sol = null_space(con, n + dp, 1e-9);
    if (sol.cols() != pk.ell) {
        std::ostringstream os;
        os << "bounded adjoint solutions with incoming limits form a space of dimension " << sol.cols()
           << ", expected " << pk.ell << " (inconsistent with the Evans count)";
        throw NumericalError(os.str());
    }

    Matrix pi(n, N);
    for (int i = 0; i < N; ++i) {
        Vector v = sol.col(0).head(n);
        for (int m = 0; m < dp; ++m) v += sol(n + m, 0) * prim[m].col(i);
        pi.col(i) = v;
    }
    auto pairing = [&](const Matrix& f) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            const double w = (i == 0 || i == N - 1) ? 0.5 : 1.0;
            acc += w * dx * f.col(i).dot(-profile.derivatives.col(i));
        }
        return acc;
    };
    const double nrm = pairing(pi);
    if (std::abs(nrm) < 1e-12) throw NumericalError("normalization of the adjoint solution is singular");
    pi /= nrm;
    pk.pi_normalization_residual = std::abs(pairing(pi) - 1.0);
    pk.pi = {pi};
    pk.pi_minus = pi.col(0).transpose();
    pk.pi_plus = pi.col(N - 1).transpose();

    double outres = 0.0;
    for (int k : bare.outgoing_minus) outres = std::max(outres, std::abs(pk.pi_minus.row(0).dot(bare.right_minus.col(k))));
    for (int k : bare.outgoing_plus) outres = std::max(outres, std::abs(pk.pi_plus.row(0).dot(bare.right_plus.col(k))));
    pk.outgoing_residual = outres;

    pk.e_inf_minus = Matrix::Zero(1, n);
    pk.e_inf_plus = Matrix::Zero(1, n);
    for (int k : bare.incoming_minus) {
        const Matrix l = pk.pi_minus.row(0).dot(bare.right_minus.col(k)) * bare.left_minus.row(k);
        pk.l_minus.push_back(l);
        pk.e_inf_minus += l;
    }
    for (int k : bare.incoming_plus) {
        const Matrix l = pk.pi_plus.row(0).dot(bare.right_plus.col(k)) * bare.left_plus.row(k);
        pk.l_plus.push_back(l);
        pk.e_inf_plus += l;
    }
    // exact normalization of the piecewise-constant limit
    const Vector u0 = profile.value(0.0);
    const double ne = pk.e_inf_minus.row(0).dot(profile.endstates.u_minus - u0) +
                      pk.e_inf_plus.row(0).dot(u0 - profile.endstates.u_plus);
    if (std::abs(ne) < 1e-12) throw NumericalError("normalization of e(+inf) is singular");
    pk.rescale = 1.0 / ne;
    pk.e_inf_minus *= pk.rescale;
    pk.e_inf_plus *= pk.rescale;
    for (auto& l : pk.l_minus) l *= pk.rescale;
    for (auto& l : pk.l_plus) l *= pk.rescale;
    // independent check: trapezoid rule for e(+inf) . (-ubar'), the cell containing 0 split in two
    auto e_at = [&](double y) { return Vector((y <= 0 ? pk.e_inf_minus : pk.e_inf_plus).row(0).transpose()); };
    double acc = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
        const double a0 = xs[i], a1 = xs[i + 1];
        if (a0 < 0.0 && a1 > 0.0) {
            const Vector d0 = profile.derivative(0.0);
            acc -= 0.5 * (0.0 - a0) * e_at(a0).dot(profile.derivatives.col(i) + d0);
            acc -= 0.5 * (a1 - 0.0) * e_at(a1).dot(d0 + profile.derivatives.col(i + 1));
        } else {
            acc -= 0.5 * (a1 - a0) * (e_at(a0).dot(profile.derivatives.col(i)) + e_at(a1).dot(profile.derivatives.col(i + 1)));
        }
    }
    acc += pk.e_inf_minus.row(0).dot(profile.endstates.u_minus - profile.values.col(0));
    acc += pk.e_inf_plus.row(0).dot(profile.values.col(N - 1) - profile.endstates.u_plus);
    pk.normalization_residual = std::abs(acc - 1.0);
    return pk;
}

}  // namespace shockstab
