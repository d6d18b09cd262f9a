#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace shockstab {

namespace {

double max_speed(const ModelSystem& model, const Vector& u) {
    Eigen::EigenSolver<Matrix> es(model.flux_jacobian(u), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// B is treated as constant when it agrees at a handful of states and has no derivative there
bool viscosity_is_constant(const ModelSystem& model, const Vector& a, const Vector& b) {
    const int n = model.dim();
    const std::vector<Vector> probes = {a, b, 0.5 * (a + b), 0.75 * a + 0.25 * b};
    const Matrix B0 = model.viscosity(a);
    for (const Vector& p : probes) {
        if ((model.viscosity(p) - B0).cwiseAbs().maxCoeff() > 1e-14) return false;
        for (int k = 0; k < n; ++k) {
            Vector e = Vector::Zero(n);
            e[k] = 1.0;
            if (model.viscosity_derivative(p, e).cwiseAbs().maxCoeff() > 1e-12) return false;
        }
    }
    return true;
}

}  // namespace

Stepper::Stepper(const ModelSystem& model, const SimGrid& grid, Vector u_left, Vector u_right, StepperOptions opt)
    : model_(&model), grid_(&grid), ul_(std::move(u_left)), ur_(std::move(u_right)), n_(model.dim()) {
    if (grid.size() < 5) throw ConfigError("grid too small for time stepping");
    if (ul_.size() != n_ || ur_.size() != n_) throw ConfigError("boundary states have the wrong dimension");
    const double amax = std::max({max_speed(model, ul_), max_speed(model, ur_), max_speed(model, 0.5 * (ul_ + ur_)), 1e-12});
    if (!(opt.cfl > 0.0)) throw ConfigError("cfl must be positive");
    dt_ = opt.dt > 0.0 ? opt.dt : opt.cfl * grid.dx / amax;
    if (dt_ * amax / grid.dx > 1.0) {
        std::ostringstream os;
        os << "time step " << dt_ << " violates the CFL restriction (Courant number " << dt_ * amax / grid.dx << " > 1)";
        throw ConfigError(os.str());
    }
    constant_b_ = viscosity_is_constant(model, ul_, ur_);
    boundary_flux_ = Vector::Zero(n_);
}

Vector Stepper::mass(const Matrix& u) const {
    return u.middleCols(1, u.cols() - 2).rowwise().sum() * grid_->dx;
}

void Stepper::advective_rhs(const Matrix& u, Matrix& out, Vector* left_flux, Vector* right_flux) const {
    const int N = static_cast<int>(u.cols());
    const double dx = grid_->dx;
    Matrix F(n_, N);
    for (int i = 0; i < N; ++i)
        model_->flux(std::span<const double>(u.col(i).data(), n_), std::span<double>(F.col(i).data(), n_));
    out.resize(n_, N);
    out.col(0).setZero();
    out.col(N - 1).setZero();
    const double h = 0.5 / dx;
    for (int i = 1; i < N - 1; ++i)
        for (int q = 0; q < n_; ++q) out(q, i) = -h * (F(q, i + 1) - F(q, i - 1));
    if (left_flux) *left_flux = 0.5 * (F.col(0) + F.col(1));
    if (right_flux) *right_flux = 0.5 * (F.col(N - 2) + F.col(N - 1));
}

namespace {

// y = M x for a column-major n x n block
inline void gemv(int n, const double* M, const double* x, double* y) {
    for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c) acc += M[c * n + r] * x[c];
        y[r] = acc;
    }
}

}  // namespace

void Stepper::factor(const Matrix& u, double tau) {
    const int N = static_cast<int>(u.cols());
    const int m = N - 2;
    const int nn = n_ * n_;
    const double c = tau / (2.0 * grid_->dx * grid_->dx);
    iface_b_.resize(static_cast<std::size_t>((N - 1) * nn));
    for (int i = 0; i + 1 < N; ++i) {
        const Matrix B = model_->viscosity(Vector(0.5 * (u.col(i) + u.col(i + 1))));
        std::copy(B.data(), B.data() + nn, iface_b_.data() + i * nn);
    }
    lower_.assign(static_cast<std::size_t>(m * nn), 0.0);
    inv_diag_.assign(static_cast<std::size_t>(m * nn), 0.0);
    using MapM = Eigen::Map<Matrix>;
    using CMapM = Eigen::Map<const Matrix>;
    const Matrix I = Matrix::Identity(n_, n_);
    // unknown k is node k + 1; its left interface is k, right interface k + 1
    for (int k = 0; k < m; ++k) {
        const CMapM Bl(iface_b_.data() + k * nn, n_, n_), Br(iface_b_.data() + (k + 1) * nn, n_, n_);
        Matrix D = I + c * (Bl + Br);
        if (k > 0) {
            MapM low(lower_.data() + k * nn, n_, n_);
            low = (-c * Bl) * CMapM(inv_diag_.data() + (k - 1) * nn, n_, n_);
            D -= low * (-c * Bl);
        }
        MapM(inv_diag_.data() + k * nn, n_, n_) = D.partialPivLu().inverse();
    }
    factored_tau_ = tau;
}

void Stepper::diffuse(Matrix& u, double tau, Vector* left_flux, Vector* right_flux) {
    const int N = static_cast<int>(u.cols());
    const int m = N - 2;
    const int n = n_;
    const int nn = n * n;
    const double dx = grid_->dx;
    const double c = tau / (2.0 * dx * dx);
    if (!constant_b_ || factored_tau_ != tau) factor(u, tau);
    const double* B = iface_b_.data();

    // flux B_{i+1/2} (u_{i+1} - u_i) / dx at the interfaces
    std::vector<double> g(static_cast<std::size_t>((N - 1) * n)), diff(n);
    auto faces = [&](const Matrix& v) {
        for (int i = 0; i + 1 < N; ++i) {
            for (int r = 0; r < n; ++r) diff[r] = (v(r, i + 1) - v(r, i)) / dx;
            gemv(n, B + i * nn, diff.data(), g.data() + i * n);
        }
    };
    faces(u);
    Vector fl0 = Eigen::Map<Vector>(g.data(), n);
    Vector fr0 = Eigen::Map<Vector>(g.data() + (N - 2) * n, n);

    // explicit half plus the pinned end values
    std::vector<double> r(static_cast<std::size_t>(m * n)), tmp(n);
    for (int k = 0; k < m; ++k)
        for (int q = 0; q < n; ++q) r[k * n + q] = u(q, k + 1) + 0.5 * tau * (g[(k + 1) * n + q] - g[k * n + q]) / dx;
    gemv(n, B, ul_.data(), tmp.data());
    for (int q = 0; q < n; ++q) r[q] += c * tmp[q];
    gemv(n, B + (N - 2) * nn, ur_.data(), tmp.data());
    for (int q = 0; q < n; ++q) r[(m - 1) * n + q] += c * tmp[q];

    // block Thomas
    for (int k = 1; k < m; ++k) {
        gemv(n, lower_.data() + k * nn, r.data() + (k - 1) * n, tmp.data());
        for (int q = 0; q < n; ++q) r[k * n + q] -= tmp[q];
    }
    gemv(n, inv_diag_.data() + (m - 1) * nn, r.data() + (m - 1) * n, u.col(m).data());
    std::vector<double> rhs(n);
    for (int k = m - 2; k >= 0; --k) {
        gemv(n, B + (k + 1) * nn, u.col(k + 2).data(), tmp.data());
        for (int q = 0; q < n; ++q) rhs[q] = r[k * n + q] + c * tmp[q];
        gemv(n, inv_diag_.data() + k * nn, rhs.data(), u.col(k + 1).data());
    }
    u.col(0) = ul_;
    u.col(N - 1) = ur_;

    // time-integrated diffusive flux through the end interfaces (trapezoid, as in the scheme)
    faces(u);
    if (left_flux) *left_flux = 0.5 * tau * (fl0 + Eigen::Map<Vector>(g.data(), n));
    if (right_flux) *right_flux = 0.5 * tau * (fr0 + Eigen::Map<Vector>(g.data() + (N - 2) * n, n));
}

Matrix Stepper::residual(const Matrix& u) const {
    const int N = static_cast<int>(u.cols());
    const double dx = grid_->dx;
    Matrix out;
    advective_rhs(u, out, nullptr, nullptr);
    Matrix D(n_, N - 1);
    for (int i = 0; i + 1 < N; ++i)
        D.col(i) = model_->viscosity(Vector(0.5 * (u.col(i) + u.col(i + 1)))) * (u.col(i + 1) - u.col(i)) / dx;
    for (int i = 1; i < N - 1; ++i) out.col(i) += (D.col(i) - D.col(i - 1)) / dx;
    return out;
}

Eigen::SparseMatrix<double> Stepper::jacobian(const Matrix& u) const {
    // banded finite-difference Jacobian of the interior residual, three-colouring of the nodes
    const int N = static_cast<int>(u.cols());
    const int dim = n_ * (N - 2);
    const Matrix r0 = residual(u);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * n_ * dim));
    for (int colour = 0; colour < 3; ++colour)
        for (int comp = 0; comp < n_; ++comp) {
            Matrix up = u;
            const double eps = 1e-7;
            for (int i = 1 + colour; i < N - 1; i += 3) up(comp, i) += eps;
            const Matrix rp = residual(up);
            for (int i = 1 + colour; i < N - 1; i += 3)
                for (int j = std::max(1, i - 1); j <= std::min(N - 2, i + 1); ++j)
                    for (int row = 0; row < n_; ++row) {
                        const double v = (rp(row, j) - r0(row, j)) / eps;
                        if (v != 0.0) trip.emplace_back((j - 1) * n_ + row, (i - 1) * n_ + comp, v);
                    }
        }
    Eigen::SparseMatrix<double> J(dim, dim);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

Matrix Stepper::steady_state(const Matrix& guess, double tol) const {
    const int N = static_cast<int>(guess.cols());
    const int m = N - 2;
    const int dim = n_ * m;
    Matrix u = guess;
    u.col(0) = ul_;
    u.col(N - 1) = ur_;
    const double scale = std::max(1.0, (ul_ - ur_).cwiseAbs().maxCoeff());
    double rn = residual(u).cwiseAbs().maxCoeff();
    for (int it = 0; it < 12 && rn > tol * scale; ++it) {
        const Matrix r0 = residual(u);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(jacobian(u));
        if (lu.info() != Eigen::Success) throw NumericalError("discrete steady state: singular Jacobian");
        Vector rhs(dim);
        for (int i = 0; i < m; ++i) rhs.segment(i * n_, n_) = -r0.col(i + 1);
        const Vector du = lu.solve(rhs);
        for (int i = 0; i < m; ++i) u.col(i + 1) += du.segment(i * n_, n_);
        rn = residual(u).cwiseAbs().maxCoeff();
    }
    if (!(rn <= tol * scale * 1e3)) {
        std::ostringstream os;
        os << "discrete steady state did not converge (residual " << rn << ")";
        throw NumericalError(os.str());
    }
    return u;
}

Matrix Stepper::slow_mode(const Matrix& steady, const Matrix& guess) const {
    const int N = static_cast<int>(steady.cols());
    const int m = N - 2;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jacobian(steady));
    if (lu.info() != Eigen::Success) throw NumericalError("slow mode: singular Jacobian");
    Vector g(n_ * m);
    for (int i = 0; i < m; ++i) g.segment(i * n_, n_) = guess.col(i + 1);
    Vector v = lu.solve(g);
    v *= g.dot(g) / v.dot(g);
    Matrix out = Matrix::Zero(n_, N);
    for (int i = 0; i < m; ++i) out.col(i + 1) = v.segment(i * n_, n_);
    return out;
}

void Stepper::set_balance(const Matrix& steady) {
    balance_.resize(0, 0);
    balance_base_.resize(0, 0);
    Matrix v = steady;
    step(v, 0.0, nullptr);
    balance_ = v - steady;
    balance_base_ = balance_;
    balance_flux_ = boundary_flux_;
}

void Stepper::shift_balance(double delta) {
    if (balance_base_.size()) balance_ = delta == 0.0 ? balance_base_ : translate(*grid_, balance_base_, delta);
}

void Stepper::step(Matrix& u, double t, const std::function<void(double, Matrix&)>* forcing) {
    const int N = static_cast<int>(u.cols());
    if (u.rows() != n_ || N != grid_->size()) throw StructuralError("state does not match the grid");
    boundary_flux_.setZero();
    Vector dl, dr;

    // mass balance is tracked as (inflow at left) - (outflow at right)
    diffuse(u, 0.5 * dt_, &dl, &dr);
    boundary_flux_ += -dl + dr;

    const double h = dt_;
    Matrix L, u1, u2, src;
    Vector fl, fr;
    auto rhs = [&](const Matrix& v, double tv, double w) {
        advective_rhs(v, L, &fl, &fr);
        boundary_flux_ += w * h * (fl - fr);
        if (forcing) {
            src = Matrix::Zero(n_, N);
            (*forcing)(tv, src);
            src.col(0).setZero();
            src.col(N - 1).setZero();
            L += src;
        }
    };
    rhs(u, t, 1.0 / 6.0);
    u1 = u + h * L;
    rhs(u1, t + h, 1.0 / 6.0);
    u2 = 0.75 * u + 0.25 * (u1 + h * L);
    rhs(u2, t + 0.5 * h, 2.0 / 3.0);
    u = (u + 2.0 * (u2 + h * L)) / 3.0;

    diffuse(u, 0.5 * dt_, &dl, &dr);
    boundary_flux_ += -dl + dr;
    if (balance_.size()) {
        u -= balance_;
        boundary_flux_ -= balance_flux_;
    }

    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 1e12) {
        std::ostringstream os;
        os << "solution blew up at t = " << t + dt_;
        throw BlowUpError(t + dt_, os.str());
    }
}

Matrix calibrate_family(Stepper& st, DiscreteFamily& fam, double relax_time) {
    const SimGrid& g = fam.grid();
    const Matrix base = fam.values(0.0);
    const Matrix steady = st.steady_state(base);
    fam.set_correction(steady - base);
    const Matrix tangent = fam.ddelta(0.0);
    fam.set_mode_defect(st.slow_mode(steady, tangent) - tangent);
    st.set_balance(steady);

    // central difference of the relaxed states; the fast modes die out along the way
    const double eps = 1e-3;
    const int steps = static_cast<int>(std::ceil(relax_time / st.dt()));
    Matrix relaxed[2];
    for (int side = 0; side < 2; ++side) {
        const double d = side == 0 ? eps : -eps;
        Matrix u = fam.values(d);
        st.shift_balance(d);
        double t = 0.0;
        for (int k = 0; k < steps; ++k) {
            st.step(u, t);
            t += st.dt();
        }
        relaxed[side] = u;
    }
    st.shift_balance(0.0);
    Matrix v = (relaxed[0] - relaxed[1]) / (2.0 * eps);
    // outgoing transients that left the core are not part of the tangent
    const double core = std::min(g.half_width(), 40.0 / fam.profile().alpha);
    for (int i = 0; i < g.size(); ++i)
        if (std::abs(g.x[i]) > core) v.col(i) = tangent.col(i);
    fam.set_mode_defect(v - tangent);
    return steady;
}

}  // namespace shockstab
