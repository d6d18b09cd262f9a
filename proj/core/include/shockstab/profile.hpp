#pragma once

#include "shockstab/hypotheses.hpp"
#include "shockstab/model.hpp"

#include <string>

namespace shockstab {

/// Solves F^I(u^I, u^II) = F^I(level_state) for u^I by damped Newton seeded at `reference`.
/// Returns the full state (h(u^II), u^II). Identity when r = n.
/// Throws HypothesisError("H1") if dF^I/du^I is singular, NumericalError if Newton stalls.
Vector reduce_manifold(const ModelSystem& model, const Vector& u2, const Vector& reference,
                       const Vector& level_state);
inline Vector reduce_manifold(const ModelSystem& model, const Vector& u2, const Vector& reference) {
    return reduce_manifold(model, u2, reference, reference);
}

/// Right side of the reduced profile ODE (u^II)' = f(u^II) on the manifold F^I = F^I(u_minus).
class ReducedProfileOde {
public:
    ReducedProfileOde(const ModelSystem& model, Vector u_minus);

    int dim() const { return model_->viscous_dim(); }
    Vector lift(const Vector& u2) const;  ///< full state on the manifold
    Vector rhs(const Vector& u2) const;
    /// Full-state derivative u' at a state on the manifold.
    Vector full_rhs(const Vector& u) const;
    /// Jacobian of rhs at a rest point (where F(u) = F(u_minus)).
    Matrix rest_jacobian(const Vector& u) const;

private:
    const ModelSystem* model_;
    Vector u_minus_;
    Vector level_;
};

struct ProfileOptions {
    double half_width = 0.0;  ///< 0: use 20 / (slowest endstate rate)
    int grid_points = 2048;
    double seed_offset = 1e-7;  ///< distance of the shooting seed from the rest point
    double ode_tol = 1e-13;
    double match_tol = 1e-6;  ///< relative mismatch allowed where the two branches meet
};

/// Sampled standing profile ubar on a uniform grid, with its translate family ubar(x - delta).
struct ShockProfile {
    Vector x;
    Matrix values;       ///< n x N
    Matrix derivatives;  ///< n x N, ubar'
    Matrix second;       ///< n x N, ubar''
    ShockEndstates endstates;
    double alpha = 0.0;
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double decay_constant = 0.0;
    int ell = 1;
    int unstable_dim = 0;  ///< at u_minus, reduced ODE
    int stable_dim = 0;    ///< at u_plus, reduced ODE
    int phase_component = 0;
    std::string connection_note;

    int dim() const { return static_cast<int>(values.rows()); }
    int size() const { return static_cast<int>(x.size()); }
    double dx() const { return x[1] - x[0]; }
    double half_width() const { return x[x.size() - 1]; }

    /// Cubic Hermite interpolation; constant endstates outside the grid.
    Vector value(double xi) const;
    Vector derivative(double xi) const;

    /// Translate family: ubar^delta(x) = ubar(x - delta), d/d delta = -ubar'(x - delta).
    Vector family(double delta, double xi) const { return value(xi - delta); }
    Vector family_ddelta(double delta, double xi) const { return -derivative(xi - delta); }
};

/// Shooting from the unstable manifold of u_minus and the stable manifold of u_plus,
/// matched on the section where the component of largest jump equals its midpoint.
/// Throws NoProfileError (Rankine-Hugoniot fails or branches miss), HypothesisError
/// (endstate not a hyperbolic rest point), UnsupportedCaseError (manifold dims > 2).
ShockProfile solve_profile(const ModelSystem& model, const ShockEndstates& endstates,
                           const ProfileOptions& options = {});

struct DecayFit {
    double alpha = 0.0;
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double constant = 0.0;
    double alpha_derivative = 0.0;  ///< same fit applied to ubar'
};

/// Least-squares slope of log|ubar - u_pm| against |x| on the outer thirds of the grid.
/// Throws DecayFailureError if a slope is non-negative or nothing is left to fit.
DecayFit decay_rate(const ShockProfile& profile);

/// max_k |B(ubar) ubar' - (F(ubar) - F(u_minus))| with ubar' from central differences.
double profile_residual(const ModelSystem& model, const ShockProfile& profile);

void write_profile_csv(const ShockProfile& profile, const std::string& path);
/// Reads columns x, u_1..u_n, u'_1..u'_n; recomputes ubar'' and the decay fit.
ShockProfile read_profile_csv(const std::string& path, const ShockEndstates& endstates);

}  // namespace shockstab
