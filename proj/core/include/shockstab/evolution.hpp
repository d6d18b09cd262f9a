#pragma once

#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/templates.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace shockstab {

// ---------------------------------------------------------------------------
// Grid and profile family

struct SimGrid {
    Vector x;  ///< uniform nodes on [-X, X]; the end nodes are pinned to u_-, u_+
    double dx = 0.0;
    int size() const { return static_cast<int>(x.size()); }
    double half_width() const { return x[x.size() - 1]; }
};
SimGrid make_grid(double half_width, double dx);

/// Samples of the translate family on a simulation grid.
class DiscreteFamily {
public:
    DiscreteFamily(const ShockProfile& profile, const SimGrid& grid) : profile_(&profile), grid_(&grid) {}
    /// ubar^delta(x) = ubar(x - delta), n x N
    Matrix values(double delta) const;
    /// d ubar^delta / d delta = -ubar'(x - delta)
    Matrix ddelta(double delta) const;
    /// Grid correction c (n x N) so the family becomes (ubar + c)(x - delta); c is
    /// translated with the profile by linear interpolation.
    void set_correction(Matrix c);
    /// Defect w = v - d_delta(ubar + c) of the discrete slow mode v; the family becomes
    /// T_delta(ubar + c) + delta T_delta(w) with T_delta the translate.
    void set_mode_defect(Matrix w);
    /// Pointwise member and delta-derivative at xi.
    Vector value_at(double delta, double xi) const;
    Vector ddelta_at(double delta, double xi) const;
    const Matrix& correction() const { return correction_; }
    const ShockProfile& profile() const { return *profile_; }
    const SimGrid& grid() const { return *grid_; }

private:
    // cubic Hermite interpolation of a grid field with node slopes cx
    Vector field_at(const Matrix& c, const Matrix& cx, double xi, bool derivative) const;

    const ShockProfile* profile_;
    const SimGrid* grid_;
    Matrix correction_, correction_x_, defect_, defect_x_;
};

/// Samples of u(x - delta) on the same grid (four-point cubic interpolation, zero outside).
Matrix translate(const SimGrid& grid, const Matrix& u, double delta);

/// Named perturbation shapes: "sech", "gaussian", "sech_derivative".
Matrix perturbation(const SimGrid& grid, int n, const std::string& shape, double amplitude,
                    const Vector& direction);

/// Discrete surrogate of || (1+|x|^2)^{-3/4} u0 ||_{H^k} (differences up to order k).
double weighted_sobolev_norm(const SimGrid& grid, const Matrix& u, double exponent = -0.75, int order = 2);
/// Unweighted discrete H^k norm squared.
double sobolev_norm_sq(const SimGrid& grid, const Matrix& u, int order);

// ---------------------------------------------------------------------------
// Time stepping

struct StepperOptions {
    double cfl = 0.4;  ///< dt = cfl dx / max |a| when dt is not given
    double dt = 0.0;
};

/// Conservative central finite volumes for u_t + F(u)_x = (B(u) u_x)_x + c(t) phi(x):
/// Strang splitting of Crank-Nicolson diffusion (lagged B, block tridiagonal solve)
/// around three-stage SSP Runge-Kutta advection. Ends pinned to u_-, u_+.
class Stepper {
public:
    Stepper(const ModelSystem& model, const SimGrid& grid, Vector u_left, Vector u_right, StepperOptions opt = {});

    double dt() const { return dt_; }
    /// Advance u (n x N) by one step; `forcing` is added to the advective stage when non-null.
    void step(Matrix& u, double t, const std::function<void(double, Matrix&)>* forcing = nullptr);
    /// Discrete steady state near `guess` (Newton on the semi-discrete equations).
    /// Throws NumericalError when Newton stalls.
    Matrix steady_state(const Matrix& guess, double tol = 1e-12) const;
    /// Corrector pass: records the one-step defect of `steady` and subtracts it from every
    /// later step, so `steady` becomes an exact fixed point of the discrete map.
    void set_balance(const Matrix& steady);
    /// Moves the recorded defect with the front (the defect travels with ubar^delta).
    void shift_balance(double delta);
    /// Slow (translation) mode of the linearization at `steady`: one inverse iteration
    /// from `guess`, scaled to match it in the least-squares sense.
    Matrix slow_mode(const Matrix& steady, const Matrix& guess) const;
    /// Semi-discrete right side without forcing (zero at the pinned ends).
    Matrix residual(const Matrix& u) const;
    /// Discrete mass sum_i u_i dx over interior nodes.
    Vector mass(const Matrix& u) const;
    /// Net flux into the interior through both ends over the last step (time integrated).
    const Vector& last_boundary_flux() const { return boundary_flux_; }

private:
    void advective_rhs(const Matrix& u, Matrix& out, Vector* left_flux, Vector* right_flux) const;
    void diffuse(Matrix& u, double tau, Vector* left_flux, Vector* right_flux);
    void factor(const Matrix& u, double tau);
    Eigen::SparseMatrix<double> jacobian(const Matrix& u) const;

    const ModelSystem* model_;
    const SimGrid* grid_;
    Vector ul_, ur_;
    double dt_ = 0.0;
    int n_ = 0;
    bool constant_b_ = false;
    double factored_tau_ = -1.0;
    // flattened n x n blocks (column-major): B at interfaces i+1/2, Thomas factors
    std::vector<double> iface_b_, lower_, inv_diag_;
    Vector boundary_flux_;
    Matrix balance_, balance_base_;
    Vector balance_flux_;
};

/// Builds the discrete translate family used for phase fits: discrete steady state, corrector
/// pass on `st`, and the slow tangent calibrated by relaxing ubar_h +- eps v0 under the step map.
/// Returns the discrete steady state.
Matrix calibrate_family(Stepper& st, DiscreteFamily& fam, double relax_time = 60.0);

// ---------------------------------------------------------------------------
// Nonlinear residuals

struct Residuals {
    Matrix Q, R, S;  ///< n x N each
};

/// Q = F(ub) + A(ub) u - F(ub + u) + (B(ub + u) - B(ub)) u_x with ub = ubar^{delta_*},
/// R = (A(ubar^{delta_*}) - A(ubar^{delta_* + delta})) u,
/// S = delta_dot (d_delta ubar at delta_* + delta - d_delta ubar at delta_*).
Residuals nonlinear_residuals(const ModelSystem& model, const DiscreteFamily& family, const Matrix& u,
                              const Matrix& ux, double delta, double delta_dot, double delta_star);

/// Centered first differences, one-sided at the ends.
Matrix grid_derivative(const SimGrid& grid, const Matrix& u);

// ---------------------------------------------------------------------------
// Phase

struct PhaseFit {
    double delta = 0.0;
    double residual = 0.0;  ///< weighted L2 misfit at the optimum
    bool ambiguous = false;
    std::string warning;
};

/// argmin_delta || (u - ubar^delta) w ||, w = exp(-|x - center| / W), W = 4 / alpha.
PhaseFit extract_phase(const DiscreteFamily& family, const Matrix& u, double guess = 0.0);

// ---------------------------------------------------------------------------
// Plain simulation

struct SimulationOptions {
    double half_width = 0.0;  ///< 0: sized from the outgoing speeds and t_max
    double dx = 0.1;
    double t_max = 200.0;
    double output_every = 1.0;
    double cfl = 0.4;
    std::string shape = "sech";
    double amplitude = 0.005;
    std::vector<double> direction;  ///< empty: all ones
    std::vector<double> snapshot_times;
};

struct SimulationTrace {
    SimGrid grid;
    Matrix u0;           ///< initial perturbation
    double E0 = 0.0;     ///< weighted norm with the (1+|x|^2)^{-3/4} weight
    double E0_decay_weight = 0.0;  ///< same with (1+|x|^2)^{+3/4}
    std::vector<double> t;
    std::vector<double> delta_fit;  ///< least-squares location of the front
    std::vector<double> delta, delta_dot;  ///< delta_fit - delta_*, and its time derivative
    double delta_star = 0.0;
    std::vector<double> gamma;  ///< forcing coefficient (0 for plain runs)
    std::vector<double> l1, l2, linf;  ///< norms of u = u~ - ubar^{delta_* + delta(t)}
    std::vector<double> h2_sq;         ///< discrete H^2 surrogate squared
    std::vector<double> ratio_sup;     ///< sup_x (|u| + |u_x|) / (E0 (theta + psi1 + psi2))
    std::vector<double> strip_x;       ///< bin centres of ratio_strip
    std::vector<std::vector<double>> ratio_strip;  ///< per output, the same ratio maximised over x bins
    std::vector<double> zeta;          ///< running sup of the template ratio plus |delta_dot| (1+t)
    std::vector<Vector> mass;          ///< int u~ dx
    std::vector<double> conservation_defect;  ///< per-output max over steps of |d mass - boundary flux|
    std::vector<std::pair<double, Matrix>> snapshots;  ///< (t, u~)
    std::vector<std::string> warnings;
};

/// Half width covering the outgoing waves over [0, t_max] with Gaussian margin.
double default_half_width(const TemplateBundle& b, const ShockProfile& p, double t_max);

/// Runs the unforced problem from ubar + u0. Throws BlowUpError on NaN/overflow.
SimulationTrace simulate(const ModelSystem& model, const ShockProfile& profile, const TemplateBundle& bundle,
                         const SimulationOptions& options);

// ---------------------------------------------------------------------------
// Monitors

struct DecayReport {
    double ratio_sup = 0.0;        ///< sup over t in [1, t_max]
    double ratio_early = 0.0;      ///< at t_early
    double ratio_late = 0.0;       ///< at t_late
    double t_early = 20.0, t_late = 200.0;
    double slope_window[2] = {0.0, 0.0};
    double slope[3] = {0.0, 0.0, 0.0};     ///< p = 1, 2, inf
    double expected[3] = {0.0, -0.25, -0.5};
    double delta_dot_bound = 0.0;  ///< sup |delta_dot| (1+t)
    double delta_bound = 0.0;      ///< sup |delta| (1+t)^{1/2}
    double t_delta_dot_max = 0.0, t_delta_max = 0.0;
    double delta_star_over_E0 = 0.0;
};

/// Slopes over [t_from, t_to] (default: second half of the horizon).
DecayReport verify_decay(const SimulationTrace& trace, double t_from = -1.0, double t_to = -1.0,
                         double t_early = 20.0, double t_late = 200.0);

struct EnergyReport {
    bool feasible = false;
    bool damping_failure = false;
    double C = 0.0;
    double theta2 = 0.0;
    double crude_M = 0.0;  ///< smallest M with the M e^{Mt} envelope
    double late_growth = 0.0;  ///< fitted C on the full trace / on its first half
    std::string detail;
};

/// Fits the discrete analogue of the high-norm energy inequality to the trace.
EnergyReport energy_monitor(const SimulationTrace& trace);

// ---------------------------------------------------------------------------
// The iteration map

/// A phase history on the coupling grid t_m = m * dt_phase.
struct PhaseHistory {
    std::vector<double> t;
    std::vector<double> delta;
    std::vector<double> delta_dot;
    double delta_star = 0.0;
    /// linear interpolation; constant extension past the end
    double delta_at(double s) const;
    double delta_dot_at(double s) const;
};
PhaseHistory phase_history(const std::vector<double>& t, const std::function<double(double)>& delta,
                           const std::function<double(double)>& delta_dot, double delta_star);

struct IterationOptions {
    double half_width = 0.0;  ///< 0: sized from the speeds and horizon
    double dx = 0.1;
    double t_max = 100.0;
    double dt_phase = 0.25;  ///< coupling interval for delta_dot and the quadrature history
    double cfl = 0.4;
    double e0_guard = 1e-2;
    double zeta_guard = 0.5;
    double norm_weight = 1.0;  ///< M in |(d, d*)|_* = |d|_{B1} + M |d*|
    std::string shape = "sech";
    double amplitude = 0.002;
    std::vector<double> direction;  ///< empty: all ones
};

struct IterationRecord {
    int n = 0;
    PhaseHistory input;
    PhaseHistory output;
    double star_norm_diff = 0.0;  ///< |(delta^n - delta^{n-1}, delta*^n - delta*^{n-1})|_*
    double alpha_hat = 0.0;       ///< ratio to the previous difference (0 before two records exist)
    double tail_mass = 0.0;       ///< extrapolated part of the infinite-time integrals
    double tail_error = 0.0;      ///< change of that part between two fit windows
    double consistency = 0.0;     ///< max |d/dt delta^n - delta_dot^n| on interior samples
    double fit_gap = 0.0;         ///< max |delta_fit - delta*^n - delta^n| on the sampled trace
    double forcing_max = 0.0;     ///< sup |delta_dot^n - delta_dot^{n-1}|
    double zeta_max = 0.0;
    std::vector<double> linf;     ///< sup |u^n| at the coupling times
    std::vector<std::string> warnings;
};

/// |h|_{B1} = sup |h| (1+t)^{1/2} + sup |h'| (1+t) on the sampled horizon.
double b1_norm(const std::vector<double>& t, const std::vector<double>& h, const std::vector<double>& hdot);
double star_norm(const PhaseHistory& a, const PhaseHistory& b, double weight);

/// Grid, calibrated family, stepper and data shared by the iterates of one initial value problem.
class IterationProblem {
public:
    /// Throws IterationAbort when E0 exceeds the guard.
    IterationProblem(const ModelSystem& model, const ShockProfile& profile, const TemplateBundle& bundle,
                     IterationOptions options);
    IterationProblem(const IterationProblem&) = delete;
    IterationProblem& operator=(const IterationProblem&) = delete;

    const SimGrid& grid() const { return *grid_; }
    const DiscreteFamily& family() const { return *family_; }
    const IterationOptions& options() const { return opt_; }
    const Matrix& steady() const { return steady_; }
    const Matrix& u0() const { return u0_; }  ///< perturbation of the discrete steady state
    double E0() const { return E0_; }
    /// coupling times 0, dt_phase, ..., t_max
    const std::vector<double>& times() const { return times_; }

    /// (delta^{n-1}, delta*^{n-1}) -> (delta^n, delta*^n)
    IterationRecord apply(const PhaseHistory& previous, int n = 1);

private:
    const ModelSystem* model_;
    const ShockProfile* profile_;
    const TemplateBundle* bundle_;
    IterationOptions opt_;
    std::unique_ptr<SimGrid> grid_;
    std::unique_ptr<DiscreteFamily> family_;
    std::unique_ptr<Stepper> stepper_;
    Matrix steady_, u0_;
    double E0_ = 0.0;
    int substeps_ = 1;
    std::vector<double> times_;
};

/// One application of the iteration map on a fresh problem.
IterationRecord iterate_T(const ModelSystem& model, const ShockProfile& profile, const TemplateBundle& bundle,
                          const PhaseHistory& previous, const IterationOptions& options, int n = 1);

/// The two starting points: (0, 0) and (0.01 (1+t)^{-1/2}, 0).
PhaseHistory zero_history(const std::vector<double>& t);
PhaseHistory seed_history(const std::vector<double>& t);

struct ContractionStudy {
    double E0 = 0.0;
    std::vector<IterationRecord> from_zero, from_seed;
    std::vector<double> distance;  ///< |A_n - B_n|_*, index 0 is the seed distance
    std::vector<double> alpha_hat; ///< distance[n] / distance[n-1]
    std::vector<bool> at_floor;    ///< previous distance below the numerical floor
    double floor = 1e-10;
};

/// Runs the map from (0, 0) and from the seed side by side.
ContractionStudy contraction_study(const ModelSystem& model, const ShockProfile& profile,
                                   const TemplateBundle& bundle, const IterationOptions& options, int iterations = 4);

// ---------------------------------------------------------------------------
// Output

void write_trace_csv(const SimulationTrace& trace, const std::string& path);
void write_snapshots_csv(const SimulationTrace& trace, const std::string& path);
std::string decay_json(const DecayReport& d, const EnergyReport& e, const SimulationTrace& trace);
std::string iteration_json(const ContractionStudy& s);
void write_svg_series(const std::string& path, const std::string& title, const std::vector<double>& x,
                      const std::vector<std::vector<double>>& ys, const std::vector<std::string>& labels,
                      bool log_x, bool log_y);
/// Heat strip of values[t][x] on a log colour scale.
void write_svg_heat_strip(const std::string& path, const std::string& title, const std::vector<double>& t,
                          const std::vector<double>& x, const std::vector<std::vector<double>>& values);

}  // namespace shockstab
