#include "shockstab/spectral.hpp"

#include "shockstab/errors.hpp"
#include "shockstab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace shockstab {

EndstateModes endstate_modes(const ModelSystem& model, const Vector& u) {
    EndstateModes m;
    m.state = u;
    m.A = model.flux_jacobian(u);
    m.B = model.viscosity(u);
    const RealEigensystem es = real_eigensystem(m.A, 1e-8, "H2");
    m.speeds = es.values;
    m.R = es.right;
    m.L = es.left;
    const int n = model.dim();
    m.beta = (m.L * m.B * m.R).diagonal();
    m.beta_modewise.resize(n);
    for (int j = 0; j < n; ++j) m.beta_modewise[j] = m.L.row(j).dot(m.B * m.R.col(j));
    m.biorthonormality_residual = (m.L * m.R - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    return m;
}

Matrix linearized_convection(const ModelSystem& model, const Vector& u, const Vector& ux) {
    const int n = model.dim();
    Matrix A = model.flux_jacobian(u);
    Vector e = Vector::Zero(n);
    for (int k = 0; k < n; ++k) {
        e.setZero();
        e[k] = 1.0;
        A.col(k) -= model.viscosity_derivative(u, e) * ux;
    }
    return A;
}

namespace {

double tail_rate(const Vector& x, const std::vector<Matrix>& M, const Matrix& limit, bool plus) {
    const double X = x[x.size() - 1];
    std::vector<double> t, y;
    for (int k = 0; k < x.size(); ++k) {
        if (plus ? x[k] < X / 3.0 : x[k] > -X / 3.0) continue;
        const double d = (M[k] - limit).norm();
        if (!(d > 0.0)) continue;
        t.push_back(std::abs(x[k]));
        y.push_back(std::log(d));
    }
    if (t.size() < 3) return std::numeric_limits<double>::infinity();
    const double m = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    return -(m * sty - st * sy) / (m * stt - st * st);
}

struct Decomposition {
    Vector speeds;
    std::vector<int> mult;
    std::vector<Matrix> R;
    std::vector<Matrix> P;
};

Decomposition decompose_star(const Matrix& As, double x) {
    const int h = static_cast<int>(As.rows());
    Eigen::EigenSolver<Matrix> es(As, true);
    const CVector ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    std::ostringstream where;
    where << " at x = " << x;
    for (int j = 0; j < h; ++j) {
        if (std::abs(ev[j].imag()) > 1e-8 * scale)
            throw HypothesisError("H1", "complex eigenvalue of A_*" + where.str());
        if (std::abs(ev[j].real()) <= 1e-8 * std::max(scale, 1.0))
            throw HypothesisError("H1", "(i) eigenvalue of A_* vanishes" + where.str());
    }
    std::vector<int> order(h);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ev[a].real() < ev[b].real(); });
    Vector sorted(h);
    Matrix Rall(h, h);
    for (int k = 0; k < h; ++k) {
        sorted[k] = ev[order[k]].real();
        Vector col = es.eigenvectors().col(order[k]).real();
        if (col.norm() < 1e-8) col = es.eigenvectors().col(order[k]).imag();
        Eigen::Index p = 0;
        col.cwiseAbs().maxCoeff(&p);
        if (col[p] < 0) col = -col;
        Rall.col(k) = col.normalized();
    }
    const Matrix Lall = Rall.inverse();
    Decomposition d;
    for (auto [b, e] : cluster_sorted(sorted, 1e-6)) {
        const int m = e - b;
        d.speeds.conservativeResize(d.speeds.size() + 1);
        d.speeds[d.speeds.size() - 1] = sorted.segment(b, m).mean();
        d.mult.push_back(m);
        d.R.push_back(Rall.middleCols(b, m));
        d.P.push_back(Rall.middleCols(b, m) * Lall.middleRows(b, m));
    }
    return d;
}

Matrix interp(const Matrix& a, const Matrix& b, double w) { return (1.0 - w) * a + w * b; }

}  // namespace

LinearizedCoefficients linearized_coefficients(const ModelSystem& model, const ShockProfile& profile) {
    LinearizedCoefficients c;
    c.x = profile.x;
    const int N = profile.size();
    c.A.resize(N);
    c.B.resize(N);
    for (int k = 0; k < N; ++k) {
        const Vector u = profile.values.col(k);
        c.A[k] = linearized_convection(model, u, profile.derivatives.col(k));
        c.B[k] = model.viscosity(u);
    }
    c.A_minus = model.flux_jacobian(profile.endstates.u_minus);
    c.A_plus = model.flux_jacobian(profile.endstates.u_plus);
    c.B_minus = model.viscosity(profile.endstates.u_minus);
    c.B_plus = model.viscosity(profile.endstates.u_plus);
    c.tail_rate_minus = std::min(tail_rate(c.x, c.A, c.A_minus, false), tail_rate(c.x, c.B, c.B_minus, false));
    c.tail_rate_plus = std::min(tail_rate(c.x, c.A, c.A_plus, true), tail_rate(c.x, c.B, c.B_plus, true));
    return c;
}

Vector dispersion_damping(const Matrix& A, const Matrix& B, int hdim) {
    if (hdim == 0) return Vector(0);
    const int n = static_cast<int>(A.rows());
    const double bmin = std::max(1e-12, B.cwiseAbs().maxCoeff());
    const double xi1 = 1e3 * std::max(1.0, A.cwiseAbs().maxCoeff() / bmin);
    auto branch = [&](double xi) {
        const CMatrix M = std::complex<double>(0.0, -xi) * A.cast<std::complex<double>>() -
                          (xi * xi) * B.cast<std::complex<double>>();
        Eigen::ComplexEigenSolver<CMatrix> es(M, false);
        Vector re = es.eigenvalues().real();
        std::sort(re.data(), re.data() + n, std::greater<double>());
        Vector out = -re.head(hdim);
        std::sort(out.data(), out.data() + hdim);
        return out;
    };
    // O(xi^-2) corrections removed by Richardson extrapolation
    return (4.0 * branch(2.0 * xi1) - branch(xi1)) / 3.0;
}

SpectralData build_spectral_data(const ModelSystem& model, const ShockProfile& profile) {
    SpectralData sd;
    sd.n = model.dim();
    sd.r = model.viscous_dim();
    sd.minus = endstate_modes(model, profile.endstates.u_minus);
    sd.plus = endstate_modes(model, profile.endstates.u_plus);
    sd.coefficients = linearized_coefficients(model, profile);
    const int h = sd.n - sd.r;
    const int N = profile.size();
    sd.A_star.assign(N, Matrix());
    sd.D_star.assign(N, Matrix());
    sd.blocks.assign(N, {});
    if (h == 0) return sd;

    const auto& Ac = sd.coefficients.A;
    const auto& Bc = sd.coefficients.B;
    const double dx = profile.dx();
    std::vector<Matrix> K(N);  // B22^{-1} B21
    for (int k = 0; k < N; ++k) {
        const Matrix B22 = Bc[k].bottomRightCorner(sd.r, sd.r);
        K[k] = B22.fullPivLu().solve(Bc[k].bottomLeftCorner(sd.r, h));
        sd.A_star[k] = Ac[k].topLeftCorner(h, h) - Ac[k].topRightCorner(h, sd.r) * K[k];
    }
    for (int k = 0; k < N; ++k) {
        Matrix dK;
        if (k == 0) dK = (K[1] - K[0]) / dx;
        else if (k == N - 1) dK = (K[N - 1] - K[N - 2]) / dx;
        else dK = (K[k + 1] - K[k - 1]) / (2.0 * dx);
        const Matrix B22 = Bc[k].bottomRightCorner(sd.r, sd.r);
        const Matrix A12 = Ac[k].topRightCorner(h, sd.r);
        const Matrix A21 = Ac[k].bottomLeftCorner(sd.r, h);
        const Matrix A22 = Ac[k].bottomRightCorner(sd.r, sd.r);
        // the A_* term is placed to the right of B22^{-1} B21 so that the product is r x h
        const Matrix bracket = A21 - A22 * K[k] + K[k] * sd.A_star[k] + B22 * dK;
        sd.D_star[k] = A12 * B22.fullPivLu().solve(bracket);
    }

    // eigen-decomposition along the grid and transport of R_j by the Kato ODE
    std::vector<Decomposition> dec(N);
    for (int k = 0; k < N; ++k) dec[k] = decompose_star(sd.A_star[k], profile.x[k]);
    sd.multiplicities = dec[0].mult;
    sd.block_count = static_cast<int>(dec[0].mult.size());
    for (int k = 1; k < N; ++k) {
        if (dec[k].mult != sd.multiplicities) {
            std::ostringstream os;
            os << "(iii) multiplicity of A_* eigenvalues changes at x = " << profile.x[k];
            throw HypothesisError("H1", os.str());
        }
    }
    double sign = 0.0;
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < dec[k].speeds.size(); ++j) {
            const double sg = dec[k].speeds[j] > 0 ? 1.0 : -1.0;
            if (sign == 0.0) sign = sg;
            if (sg != sign) throw HypothesisError("H1", "(ii) eigenvalues of A_* change sign along the profile");
        }
    }

    const int J = sd.block_count;
    std::vector<std::vector<Matrix>> R(N, std::vector<Matrix>(J));
    for (int j = 0; j < J; ++j) R[0][j] = dec[0].R[j];
    for (int k = 0; k + 1 < N; ++k) {
        for (int j = 0; j < J; ++j) {
            const Matrix Pm = 0.5 * (dec[k].P[j] + dec[k + 1].P[j]);
            const Matrix dP = (dec[k + 1].P[j] - dec[k].P[j]) / dx;
            const Matrix Km = dP * Pm - Pm * dP;
            const Matrix I = Matrix::Identity(h, h);
            Matrix next = (I - 0.5 * dx * Km).fullPivLu().solve((I + 0.5 * dx * Km) * R[k][j]);
            R[k + 1][j] = dec[k + 1].P[j] * next;
        }
    }
    std::vector<std::vector<Matrix>> L(N, std::vector<Matrix>(J));
    for (int k = 0; k < N; ++k) {
        Matrix Rall(h, h);
        int c = 0;
        for (int j = 0; j < J; ++j) {
            Rall.middleCols(c, R[k][j].cols()) = R[k][j];
            c += static_cast<int>(R[k][j].cols());
        }
        const Matrix Lt = Rall.inverse();
        c = 0;
        for (int j = 0; j < J; ++j) {
            const int m = static_cast<int>(R[k][j].cols());
            L[k][j] = Lt.middleRows(c, m).transpose();
            sd.static_residual =
                std::max(sd.static_residual, (L[k][j].transpose() * R[k][j] - Matrix::Identity(m, m)).cwiseAbs().maxCoeff());
            c += m;
        }
    }
    for (int k = 1; k + 1 < N; ++k)
        for (int j = 0; j < J; ++j)
            sd.normalization_residual =
                std::max(sd.normalization_residual,
                         (L[k][j].transpose() * (R[k + 1][j] - R[k - 1][j]) / (2 * dx)).cwiseAbs().maxCoeff());

    for (int k = 0; k < N; ++k) {
        const Matrix B22 = Bc[k].bottomRightCorner(sd.r, sd.r);
        sd.blocks[k].resize(J);
        for (int j = 0; j < J; ++j) {
            HyperbolicBlock& b = sd.blocks[k][j];
            const int m = dec[k].mult[j];
            b.speed = dec[k].speeds[j];
            b.multiplicity = m;
            b.R = R[k][j];
            b.L = L[k][j];
            b.ext_L = Matrix::Zero(sd.n, m);
            b.ext_L.topRows(h) = b.L;
            b.ext_R.resize(sd.n, m);
            b.ext_R.topRows(h) = b.R;
            b.ext_R.bottomRows(sd.r) = -K[k] * b.R;
            b.eta_transcribed = -b.L.transpose() * sd.D_star[k] * b.R;
        }
    }

    // sign audit against the high-frequency damping of the frozen endstate operators
    auto block_eigs = [&](int k) {
        std::vector<double> v;
        for (const auto& b : sd.blocks[k]) {
            const CVector e = eigenvalues(b.eta_transcribed);
            for (int i = 0; i < e.size(); ++i) v.push_back(e[i].real());
        }
        std::sort(v.begin(), v.end());
        return Vector(Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    sd.eta_transcribed_minus = block_eigs(0);
    sd.eta_transcribed_plus = block_eigs(N - 1);
    sd.eta_dispersion_minus = dispersion_damping(sd.minus.A, sd.minus.B, h);
    sd.eta_dispersion_plus = dispersion_damping(sd.plus.A, sd.plus.B, h);
    const double tr = sd.eta_transcribed_minus.sum() + sd.eta_transcribed_plus.sum();
    const double disp = sd.eta_dispersion_minus.sum() + sd.eta_dispersion_plus.sum();
    const double tiny = 1e-10 * std::max({1.0, std::abs(tr), std::abs(disp)});
    double factor = 1.0;
    if (std::abs(tr) <= tiny || std::abs(disp) <= tiny) {
        sd.eta_sign_resolution = "as_transcribed";
    } else if ((tr > 0) == (disp > 0)) {
        sd.eta_sign_resolution = "as_transcribed";
    } else {
        sd.eta_sign_resolution = "flipped";
        factor = -1.0;
    }
    for (auto& row : sd.blocks)
        for (auto& b : row) b.eta = factor * b.eta_transcribed;
    return sd;
}

HyperbolicBlocksAt hyperbolic_blocks(const SpectralData& sd, double x) {
    HyperbolicBlocksAt out;
    if (sd.hyperbolic_dim() == 0) return out;
    const Vector& xs = sd.coefficients.x;
    const int N = static_cast<int>(xs.size());
    int k;
    double w;
    if (x <= xs[0]) {
        k = 0;
        w = 0.0;
    } else if (x >= xs[N - 1]) {
        k = N - 2;
        w = 1.0;
    } else {
        const double dx = xs[1] - xs[0];
        k = std::clamp(static_cast<int>(std::floor((x - xs[0]) / dx)), 0, N - 2);
        w = (x - xs[k]) / dx;
    }
    out.A_star = interp(sd.A_star[k], sd.A_star[k + 1], w);
    out.D_star = interp(sd.D_star[k], sd.D_star[k + 1], w);
    for (int j = 0; j < sd.block_count; ++j) {
        const auto& a = sd.blocks[k][j];
        const auto& b = sd.blocks[k + 1][j];
        HyperbolicBlock hb;
        hb.speed = (1 - w) * a.speed + w * b.speed;
        hb.multiplicity = a.multiplicity;
        hb.L = interp(a.L, b.L, w);
        hb.R = interp(a.R, b.R, w);
        hb.ext_L = interp(a.ext_L, b.ext_L, w);
        hb.ext_R = interp(a.ext_R, b.ext_R, w);
        hb.eta_transcribed = interp(a.eta_transcribed, b.eta_transcribed, w);
        hb.eta = interp(a.eta, b.eta, w);
        out.blocks.push_back(std::move(hb));
    }
    return out;
}

DissipationAt dissipation_data(const SpectralData& sd, double x) {
    DissipationAt d;
    const HyperbolicBlocksAt hb = hyperbolic_blocks(sd, x);
    d.D_star = hb.D_star;
    for (const auto& b : hb.blocks) {
        d.eta_transcribed.push_back(b.eta_transcribed);
        d.eta.push_back(b.eta);
    }
    return d;
}

}  // namespace shockstab
