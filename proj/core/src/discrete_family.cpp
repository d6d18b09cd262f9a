#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace shockstab {

SimGrid make_grid(double half_width, double dx) {
    if (!(half_width > 0.0) || !(dx > 0.0) || !std::isfinite(half_width) || !std::isfinite(dx))
        throw ConfigError("grid half width and spacing must be positive");
    const long cells = std::lround(std::ceil(2.0 * half_width / dx));
    if (cells < 4) throw ConfigError("grid needs at least four cells");
    SimGrid g;
    g.dx = 2.0 * half_width / static_cast<double>(cells);
    g.x = Vector::LinSpaced(cells + 1, -half_width, half_width);
    return g;
}

namespace {

// fourth-order central slopes, second order next to the ends
Matrix node_slopes(const Matrix& c, double dx) {
    const int N = static_cast<int>(c.cols());
    Matrix d = Matrix::Zero(c.rows(), N);
    for (int i = 1; i < N - 1; ++i) {
        if (i >= 2 && i <= N - 3)
            d.col(i) = (c.col(i - 2) - 8.0 * c.col(i - 1) + 8.0 * c.col(i + 1) - c.col(i + 2)) / (12.0 * dx);
        else
            d.col(i) = (c.col(i + 1) - c.col(i - 1)) / (2.0 * dx);
    }
    return d;
}

}  // namespace

void DiscreteFamily::set_correction(Matrix c) {
    if (c.rows() != profile_->dim() || c.cols() != grid_->size()) throw StructuralError("correction does not match the grid");
    correction_ = std::move(c);
    correction_x_ = node_slopes(correction_, grid_->dx);
}

void DiscreteFamily::set_mode_defect(Matrix w) {
    if (w.rows() != profile_->dim() || w.cols() != grid_->size()) throw StructuralError("mode defect does not match the grid");
    defect_ = std::move(w);
    defect_x_ = node_slopes(defect_, grid_->dx);
}

Vector DiscreteFamily::field_at(const Matrix& c, const Matrix& cx, double xi, bool derivative) const {
    const Vector& x = grid_->x;
    const int N = grid_->size();
    const double h = grid_->dx;
    if (xi <= x[0] || xi >= x[N - 1]) return Vector::Zero(c.rows());
    const int i = std::min(static_cast<int>((xi - x[0]) / h), N - 2);
    const double s = (xi - x[i]) / h;
    if (!derivative) {
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return h00 * c.col(i) + h10 * h * cx.col(i) + h01 * c.col(i + 1) + h11 * h * cx.col(i + 1);
    }
    const double d00 = 6 * s * (s - 1), d10 = (1 - s) * (1 - 3 * s);
    const double d01 = -6 * s * (s - 1), d11 = s * (3 * s - 2);
    return (d00 * c.col(i) + d01 * c.col(i + 1)) / h + d10 * cx.col(i) + d11 * cx.col(i + 1);
}

Vector DiscreteFamily::value_at(double delta, double xi) const {
    const double z = xi - delta;
    Vector v = profile_->value(z);
    if (correction_.size()) v += field_at(correction_, correction_x_, z, false);
    if (defect_.size() && delta != 0.0) v += delta * field_at(defect_, defect_x_, z, false);
    return v;
}

Vector DiscreteFamily::ddelta_at(double delta, double xi) const {
    const double z = xi - delta;
    Vector v = -profile_->derivative(z);
    if (correction_.size()) v -= field_at(correction_, correction_x_, z, true);
    if (defect_.size()) v += field_at(defect_, defect_x_, z, false) - delta * field_at(defect_, defect_x_, z, true);
    return v;
}

Matrix DiscreteFamily::values(double delta) const {
    const Vector& x = grid_->x;
    Matrix out(profile_->dim(), x.size());
    if (delta == 0.0) {
        for (int i = 0; i < x.size(); ++i) out.col(i) = profile_->value(x[i]);
        if (correction_.size()) out += correction_;
        return out;
    }
    for (int i = 0; i < x.size(); ++i) out.col(i) = value_at(delta, x[i]);
    return out;
}

Matrix DiscreteFamily::ddelta(double delta) const {
    const Vector& x = grid_->x;
    Matrix out(profile_->dim(), x.size());
    for (int i = 0; i < x.size(); ++i) out.col(i) = ddelta_at(delta, x[i]);
    return out;
}

Matrix translate(const SimGrid& grid, const Matrix& u, double delta) {
    const int N = grid.size();
    Matrix out = Matrix::Zero(u.rows(), N);
    const double sh = delta / grid.dx;
    for (int k = 0; k < N; ++k) {
        const double s = k - sh;
        if (s <= 0.0 || s >= N - 1) continue;
        const int i = std::clamp(static_cast<int>(s), 1, N - 3);
        const double f = s - i;
        out.col(k) = -f * (f - 1.0) * (f - 2.0) / 6.0 * u.col(i - 1) + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * u.col(i) -
                     (f + 1.0) * f * (f - 2.0) / 2.0 * u.col(i + 1) + (f + 1.0) * f * (f - 1.0) / 6.0 * u.col(i + 2);
    }
    return out;
}

Matrix perturbation(const SimGrid& grid, int n, const std::string& shape, double amplitude, const Vector& direction) {
    if (direction.size() != n) throw ConfigError("perturbation direction must have one entry per component");
    Matrix u(n, grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.x[i];
        double f = 0.0;
        if (shape == "sech") {
            f = 1.0 / std::cosh(x);
        } else if (shape == "gaussian") {
            f = std::exp(-x * x);
        } else if (shape == "sech_derivative") {
            f = -std::tanh(x) / std::cosh(x);
        } else {
            throw ConfigError("unknown perturbation shape '" + shape + "'");
        }
        u.col(i) = amplitude * f * direction;
    }
    // ends stay pinned
    u.col(0).setZero();
    u.col(grid.size() - 1).setZero();
    return u;
}

namespace {

// sum over difference orders 0..order of || D^k v ||^2 dx, forward differences
double difference_energy(const Matrix& v, double dx, int order) {
    double acc = 0.0;
    Matrix d = v;
    for (int k = 0; k <= order; ++k) {
        if (d.cols() == 0) break;
        acc += d.squaredNorm() * dx;
        if (k == order) break;
        Matrix next(d.rows(), d.cols() - 1);
        for (int i = 0; i + 1 < d.cols(); ++i) next.col(i) = (d.col(i + 1) - d.col(i)) / dx;
        d = std::move(next);
    }
    return acc;
}

}  // namespace

double weighted_sobolev_norm(const SimGrid& grid, const Matrix& u, double exponent, int order) {
    Matrix v = u;
    for (int i = 0; i < grid.size(); ++i) v.col(i) *= std::pow(1.0 + grid.x[i] * grid.x[i], exponent);
    return std::sqrt(difference_energy(v, grid.dx, order));
}

double sobolev_norm_sq(const SimGrid& grid, const Matrix& u, int order) {
    return difference_energy(u, grid.dx, order);
}

}  // namespace shockstab
