#include "shockstab/errors.hpp"
#include "shockstab/model.hpp"

#include <cmath>

namespace shockstab {

namespace {

class Burgers final : public ModelSystem {
public:
    explicit Burgers(double s) : ModelSystem("burgers", 1, 1, s) {}

protected:
    void physical_flux(std::span<const double> u, std::span<double> out) const override {
        out[0] = 0.5 * u[0] * u[0];
    }
    void physical_flux_jacobian(std::span<const double> u, std::span<double> out) const override {
        out[0] = u[0];
    }
    void viscosity_matrix(std::span<const double>, std::span<double> out) const override {
        out[0] = 1.0;
    }
    void viscosity_matrix_derivative(std::span<const double>, std::span<const double>,
                                     std::span<double> out) const override {
        out[0] = 0.0;
    }
};

class QuadraticGradient final : public ModelSystem {
public:
    explicit QuadraticGradient(double s) : ModelSystem("quadratic_gradient", 2, 2, s) {}

protected:
    void physical_flux(std::span<const double> u, std::span<double> out) const override {
        out[0] = u[0] * u[0] - u[1] * u[1];
        out[1] = -2.0 * u[0] * u[1];
    }
    void physical_flux_jacobian(std::span<const double> u, std::span<double> out) const override {
        // column-major [[2u, -2v], [-2v, -2u]]
        out[0] = 2.0 * u[0];
        out[1] = -2.0 * u[1];
        out[2] = -2.0 * u[1];
        out[3] = -2.0 * u[0];
    }
    void viscosity_matrix(std::span<const double>, std::span<double> out) const override {
        out[0] = 1.0;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = 1.0;
    }
    void viscosity_matrix_derivative(std::span<const double>, std::span<const double>,
                                     std::span<double> out) const override {
        for (int k = 0; k < 4; ++k) out[k] = 0.0;
    }
};

class PSystem final : public ModelSystem {
public:
    PSystem(double mu, double s, double kappa)
        : ModelSystem("psystem", 2, 1, s), mu_(mu), kappa_(kappa) {
        if (!(mu > 0.0)) throw StructuralError("p-system viscosity mu must be positive");
        if (!(kappa > 0.0)) throw StructuralError("p-system pressure constant must be positive");
        SymmetrizerData sym;
        sym.left_multiplier = [kappa](const Vector& u) {
            Matrix S = Matrix::Zero(2, 2);
            S(0, 0) = kappa / (u[0] * u[0]);  // -p'(v)
            S(1, 1) = 1.0;
            return S;
        };
        set_symmetrizer(std::move(sym));
    }

protected:
    void check_state(std::span<const double> u) const {
        if (!(u[0] > 0.0)) throw NumericalError("p-system evaluated at non-positive specific volume");
    }
    void physical_flux(std::span<const double> u, std::span<double> out) const override {
        check_state(u);
        out[0] = -u[1];
        out[1] = kappa_ / u[0];
    }
    void physical_flux_jacobian(std::span<const double> u, std::span<double> out) const override {
        check_state(u);
        out[0] = 0.0;
        out[1] = -kappa_ / (u[0] * u[0]);
        out[2] = -1.0;
        out[3] = 0.0;
    }
    void viscosity_matrix(std::span<const double> u, std::span<double> out) const override {
        check_state(u);
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = mu_ / u[0];
    }
    void viscosity_matrix_derivative(std::span<const double> u, std::span<const double> dir,
                                     std::span<double> out) const override {
        check_state(u);
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = -mu_ * dir[0] / (u[0] * u[0]);
    }

private:
    double mu_;
    double kappa_;
};

class Polynomial final : public ModelSystem {
public:
    explicit Polynomial(PolynomialSpec spec)
        : ModelSystem(spec.name, spec.n, spec.r, spec.frame_speed), spec_(std::move(spec)) {
        const int n = spec_.n;
        if (spec_.constant.size() == 0) spec_.constant = Vector::Zero(n);
        if (spec_.linear.size() == 0) spec_.linear = Matrix::Zero(n, n);
        if (spec_.quadratic.empty()) spec_.quadratic.assign(n, Matrix::Zero(n, n));
        if (spec_.constant.size() != n || spec_.linear.rows() != n || spec_.linear.cols() != n ||
            static_cast<int>(spec_.quadratic.size()) != n) {
            throw StructuralError("polynomial flux coefficients have inconsistent shapes");
        }
        for (const auto& q : spec_.quadratic) {
            if (q.rows() != n || q.cols() != n)
                throw StructuralError("quadratic flux coefficient block must be n x n");
        }
        if (spec_.viscosity.rows() != n || spec_.viscosity.cols() != n)
            throw StructuralError("viscosity matrix must be n x n");
        if (spec_.symmetrizer) {
            if (spec_.symmetrizer->rows() != n || spec_.symmetrizer->cols() != n)
                throw StructuralError("symmetrizer must be n x n");
            SymmetrizerData sym;
            Matrix S = *spec_.symmetrizer;
            sym.left_multiplier = [S](const Vector&) { return S; };
            set_symmetrizer(std::move(sym));
        }
    }

protected:
    void physical_flux(std::span<const double> u, std::span<double> out) const override {
        const int n = spec_.n;
        for (int i = 0; i < n; ++i) {
            double acc = spec_.constant[i];
            for (int j = 0; j < n; ++j) {
                acc += spec_.linear(i, j) * u[j];
                for (int k = 0; k < n; ++k) acc += spec_.quadratic[i](j, k) * u[j] * u[k];
            }
            out[i] = acc;
        }
    }
    void physical_flux_jacobian(std::span<const double> u, std::span<double> out) const override {
        const int n = spec_.n;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double acc = spec_.linear(i, j);
                for (int k = 0; k < n; ++k)
                    acc += (spec_.quadratic[i](j, k) + spec_.quadratic[i](k, j)) * u[k];
                out[i + j * n] = acc;
            }
        }
    }
    void viscosity_matrix(std::span<const double>, std::span<double> out) const override {
        const int n = spec_.n;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[i + j * n] = spec_.viscosity(i, j);
    }
    void viscosity_matrix_derivative(std::span<const double>, std::span<const double>,
                                     std::span<double> out) const override {
        for (int k = 0; k < spec_.n * spec_.n; ++k) out[k] = 0.0;
    }

private:
    PolynomialSpec spec_;
};

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace

ModelPtr make_burgers(double frame_speed) { return std::make_shared<Burgers>(frame_speed); }

ModelPtr make_quadratic_gradient(double frame_speed) {
    return std::make_shared<QuadraticGradient>(frame_speed);
}

ModelPtr make_psystem(double mu, double frame_speed, double kappa) {
    return std::make_shared<PSystem>(mu, frame_speed, kappa);
}

PSystemShock psystem_shock(double v_minus, double v_plus, double u_minus, double kappa,
                           bool right_moving) {
    if (!(v_minus > 0.0) || !(v_plus > 0.0))
        throw StructuralError("specific volumes must be positive");
    if (v_minus == v_plus) throw DegenerateShockError("identical specific volumes");
    const double dp = kappa / v_plus - kappa / v_minus;
    const double s2 = -dp / (v_plus - v_minus);
    if (!(s2 > 0.0)) throw NoProfileError("Rankine-Hugoniot speed is not real");
    const double s = right_moving ? std::sqrt(s2) : -std::sqrt(s2);
    PSystemShock shock;
    shock.speed = s;
    shock.u_minus = Vector(2);
    shock.u_plus = Vector(2);
    shock.u_minus << v_minus, u_minus;
    // -u - s v is continuous across the shock
    shock.u_plus << v_plus, u_minus - s * (v_plus - v_minus);
    return shock;
}

ModelPtr make_polynomial(const PolynomialSpec& spec) { return std::make_shared<Polynomial>(spec); }

ModelPtr make_builtin(const std::string& name, const std::map<std::string, double>& params) {
    const double s = param_or(params, "frame_speed", 0.0);
    if (name == "burgers") return make_burgers(s);
    if (name == "quadratic_gradient") return make_quadratic_gradient(s);
    if (name == "psystem") return make_psystem(param_or(params, "mu", 1.0), s, param_or(params, "kappa", 1.0));
    throw ConfigError("unknown built-in model '" + name + "'");
}

}  // namespace shockstab
