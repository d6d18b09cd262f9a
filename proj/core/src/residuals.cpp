#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"
#include "shockstab/spectral.hpp"

namespace shockstab {

Matrix grid_derivative(const SimGrid& grid, const Matrix& u) {
    const int N = static_cast<int>(u.cols());
    Matrix d(u.rows(), N);
    const double dx = grid.dx;
    for (int i = 1; i < N - 1; ++i) d.col(i) = (u.col(i + 1) - u.col(i - 1)) / (2.0 * dx);
    d.col(0) = (u.col(1) - u.col(0)) / dx;
    d.col(N - 1) = (u.col(N - 1) - u.col(N - 2)) / dx;
    return d;
}

Residuals nonlinear_residuals(const ModelSystem& model, const DiscreteFamily& family, const Matrix& u,
                              const Matrix& ux, double delta, double delta_dot, double delta_star) {
    const ShockProfile& p = family.profile();
    const Vector& x = family.grid().x;
    const int n = model.dim();
    const int N = static_cast<int>(x.size());
    if (u.rows() != n || u.cols() != N || ux.rows() != n || ux.cols() != N)
        throw StructuralError("residual fields do not match the grid");
    Residuals res{Matrix::Zero(n, N), Matrix::Zero(n, N), Matrix::Zero(n, N)};
    const bool shifted = delta != 0.0;
    for (int i = 0; i < N; ++i) {
        const Vector ub = p.value(x[i] - delta_star);
        const Vector ubx = p.derivative(x[i] - delta_star);
        const Vector ui = u.col(i);
        const Vector uxi = ux.col(i);
        if (ui.cwiseAbs().maxCoeff() > 0.0 || uxi.cwiseAbs().maxCoeff() > 0.0) {
            const Vector w = ub + ui;
            const Matrix Bb = model.viscosity(ub);
            const Matrix Bw = model.viscosity(w);
            // Taylor remainder of F(ub + u) - B(ub + u)(ub + u)_x about ub, linear part A(ub) u - B(ub) u_x;
            // the last term vanishes for constant viscosity
            res.Q.col(i) = model.flux(ub) + linearized_convection(model, ub, ubx) * ui - model.flux(w) +
                           (Bw - Bb) * uxi + (Bw - Bb - model.viscosity_derivative(ub, ui)) * ubx;
            if (shifted) {
                const Vector us = p.value(x[i] - delta_star - delta);
                const Vector usx = p.derivative(x[i] - delta_star - delta);
                res.R.col(i) = (linearized_convection(model, ub, ubx) - linearized_convection(model, us, usx)) * ui;
            }
        }
        if (shifted && delta_dot != 0.0)
            res.S.col(i) = delta_dot * (-p.derivative(x[i] - delta_star - delta) + ubx);
    }
    return res;
}

}  // namespace shockstab
