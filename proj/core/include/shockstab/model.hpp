#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace shockstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Optional symmetrizer data (w(u), S(w)) for the partially symmetric
/// hyperbolic-parabolic form. Both callables take the conserved state u.
struct SymmetrizerData {
    /// S(w(u)), the nonsingular left multiplier.
    std::function<Matrix(const Vector&)> left_multiplier;
    /// du/dw evaluated at u; an empty function means w = u.
    std::function<Matrix(const Vector&)> coordinate_jacobian;

    Matrix du_dw(const Vector& u) const;
    /// Ã⁰ = S du/dw
    Matrix a0(const Vector& u) const;
    /// Ã = S dF du/dw, with dF the frame-absorbed flux Jacobian.
    Matrix a(const Vector& u, const Matrix& flux_jacobian) const;
    /// B̃ = S B du/dw
    Matrix b(const Vector& u, const Matrix& viscosity) const;
};

/// A system u_t + F(u)_x = (B(u) u_x)_x with viscosity of block form
///
///     B = [ 0   0  ]   (first n - r rows vanish)
///         [ b1  b2 ]
///
/// The physical shock speed s is absorbed at construction: every public
/// flux evaluation returns F_phys(u) - s u, so downstream code always sees a
/// standing wave.
///
/// Matrices crossing the span interface are column-major n x n.
class ModelSystem {
public:
    ModelSystem(std::string name, int n, int r, double frame_speed);
    virtual ~ModelSystem() = default;

    ModelSystem(const ModelSystem&) = delete;
    ModelSystem& operator=(const ModelSystem&) = delete;

    const std::string& name() const noexcept { return name_; }
    int dim() const noexcept { return n_; }
    int viscous_dim() const noexcept { return r_; }
    int hyperbolic_dim() const noexcept { return n_ - r_; }
    bool strictly_parabolic() const noexcept { return n_ == r_; }
    double frame_speed() const noexcept { return frame_speed_; }
    /// Declared differentiability of F, B (the analysis wants at least 5).
    int smoothness_order() const noexcept { return smoothness_order_; }

    void flux(std::span<const double> u, std::span<double> out) const;
    void flux_jacobian(std::span<const double> u, std::span<double> out) const;
    void viscosity(std::span<const double> u, std::span<double> out) const;
    /// dB(u)[dir]: derivative of B at u in direction dir.
    void viscosity_derivative(std::span<const double> u, std::span<const double> dir,
                              std::span<double> out) const;

    Vector flux(const Vector& u) const;
    Matrix flux_jacobian(const Vector& u) const;
    Matrix viscosity(const Vector& u) const;
    Matrix viscosity_derivative(const Vector& u, const Vector& dir) const;

    const std::optional<SymmetrizerData>& symmetrizer() const noexcept { return symmetrizer_; }

protected:
    virtual void physical_flux(std::span<const double> u, std::span<double> out) const = 0;
    virtual void physical_flux_jacobian(std::span<const double> u, std::span<double> out) const = 0;
    virtual void viscosity_matrix(std::span<const double> u, std::span<double> out) const = 0;
    /// Default: centered differences of viscosity_matrix.
    virtual void viscosity_matrix_derivative(std::span<const double> u,
                                             std::span<const double> dir,
                                             std::span<double> out) const;

    void set_symmetrizer(SymmetrizerData data) { symmetrizer_ = std::move(data); }
    void set_smoothness_order(int order) { smoothness_order_ = order; }

private:
    std::string name_;
    int n_;
    int r_;
    double frame_speed_;
    int smoothness_order_ = 5;
    std::optional<SymmetrizerData> symmetrizer_;
};

using ModelPtr = std::shared_ptr<const ModelSystem>;

// ---------------------------------------------------------------------------
// Built-in testbeds

/// Scalar viscous Burgers, F = u^2/2, B = 1.
ModelPtr make_burgers(double frame_speed = 0.0);

/// F(u, v) = (u^2 - v^2, -2uv), B = I. Standing profile (-tanh x, 0) between (1,0) and (-1,0).
ModelPtr make_quadratic_gradient(double frame_speed = 0.0);

/// Isothermal p-system in Lagrangian coordinates,
///   v_t - u_x = 0,  u_t + p(v)_x = ((mu / v) u_x)_x,  p(v) = kappa / v,
/// state (v, u), r = 1. Carries the symmetrizer S = diag(-p'(v), 1).
ModelPtr make_psystem(double mu, double frame_speed, double kappa = 1.0);

/// Rankine-Hugoniot speed s = sqrt(-(p(v+) - p(v-)) / (v+ - v-)) of the
/// isothermal p-system, and the matching u+ given u-:  u+ = u- - s (v+ - v-).
struct PSystemShock {
    double speed;
    Vector u_minus;
    Vector u_plus;
};
PSystemShock psystem_shock(double v_minus, double v_plus, double u_minus = 0.0,
                           double kappa = 1.0, bool right_moving = true);

/// Quadratic polynomial flux F_i = c_i + sum_j L_ij u_j + sum_jk Q_ijk u_j u_k
/// with a constant viscosity matrix.
struct PolynomialSpec {
    int n = 1;
    int r = 1;
    Vector constant;
    Matrix linear;
    std::vector<Matrix> quadratic;  // quadratic[i](j, k) = Q_ijk
    Matrix viscosity;
    std::optional<Matrix> symmetrizer;  // constant S, w = u
    double frame_speed = 0.0;
    std::string name = "polynomial";
};
ModelPtr make_polynomial(const PolynomialSpec& spec);

/// Named built-in lookup: "burgers", "quadratic_gradient", "psystem".
/// Recognised parameters: frame_speed, mu, kappa.
ModelPtr make_builtin(const std::string& name, const std::map<std::string, double>& params);

}  // namespace shockstab
