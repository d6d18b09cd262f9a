#include "shockstab/model.hpp"

#include "shockstab/errors.hpp"

#include <vector>

namespace shockstab {

Matrix SymmetrizerData::du_dw(const Vector& u) const {
    if (coordinate_jacobian) return coordinate_jacobian(u);
    return Matrix::Identity(u.size(), u.size());
}

Matrix SymmetrizerData::a0(const Vector& u) const { return left_multiplier(u) * du_dw(u); }

Matrix SymmetrizerData::a(const Vector& u, const Matrix& flux_jacobian) const {
    return left_multiplier(u) * flux_jacobian * du_dw(u);
}

Matrix SymmetrizerData::b(const Vector& u, const Matrix& viscosity) const {
    return left_multiplier(u) * viscosity * du_dw(u);
}

ModelSystem::ModelSystem(std::string name, int n, int r, double frame_speed)
    : name_(std::move(name)), n_(n), r_(r), frame_speed_(frame_speed) {
    if (n < 1) throw StructuralError("model dimension must be positive");
    if (r < 1 || r > n) throw StructuralError("viscous block dimension must satisfy 1 <= r <= n");
}

void ModelSystem::flux(std::span<const double> u, std::span<double> out) const {
    physical_flux(u, out);
    if (frame_speed_ != 0.0) {
        for (int i = 0; i < n_; ++i) out[i] -= frame_speed_ * u[i];
    }
}

void ModelSystem::flux_jacobian(std::span<const double> u, std::span<double> out) const {
    physical_flux_jacobian(u, out);
    if (frame_speed_ != 0.0) {
        for (int i = 0; i < n_; ++i) out[i + i * n_] -= frame_speed_;
    }
}

void ModelSystem::viscosity(std::span<const double> u, std::span<double> out) const {
    viscosity_matrix(u, out);
}

void ModelSystem::viscosity_derivative(std::span<const double> u, std::span<const double> dir,
                                       std::span<double> out) const {
    viscosity_matrix_derivative(u, dir, out);
}

void ModelSystem::viscosity_matrix_derivative(std::span<const double> u,
                                              std::span<const double> dir,
                                              std::span<double> out) const {
    const double h = 1e-6;
    std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
    for (int i = 0; i < n_; ++i) {
        up[i] += h * dir[i];
        um[i] -= h * dir[i];
    }
    std::vector<double> bp(n_ * n_), bm(n_ * n_);
    viscosity_matrix(up, bp);
    viscosity_matrix(um, bm);
    for (int k = 0; k < n_ * n_; ++k) out[k] = (bp[k] - bm[k]) / (2.0 * h);
}

Vector ModelSystem::flux(const Vector& u) const {
    Vector out(n_);
    flux(std::span<const double>(u.data(), n_), std::span<double>(out.data(), n_));
    return out;
}

Matrix ModelSystem::flux_jacobian(const Vector& u) const {
    Matrix out(n_, n_);
    flux_jacobian(std::span<const double>(u.data(), n_), std::span<double>(out.data(), n_ * n_));
    return out;
}

Matrix ModelSystem::viscosity(const Vector& u) const {
    Matrix out(n_, n_);
    viscosity(std::span<const double>(u.data(), n_), std::span<double>(out.data(), n_ * n_));
    return out;
}

Matrix ModelSystem::viscosity_derivative(const Vector& u, const Vector& dir) const {
    Matrix out(n_, n_);
    viscosity_derivative(std::span<const double>(u.data(), n_),
                         std::span<const double>(dir.data(), n_),
                         std::span<double>(out.data(), n_ * n_));
    return out;
}

}  // namespace shockstab
