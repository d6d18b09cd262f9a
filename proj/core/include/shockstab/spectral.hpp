#pragma once

#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"

#include <functional>
#include <string>
#include <vector>

namespace shockstab {

/// Characteristic data of the limiting convection matrix at an endstate.
struct EndstateModes {
    Vector state;
    Matrix A;       ///< dF(u)
    Matrix B;       ///< B(u)
    Vector speeds;  ///< a_1 < ... < a_n
    Matrix L;       ///< rows are left modes l_j
    Matrix R;       ///< columns are right modes r_j
    Vector beta;    ///< diag(L B R)
    Vector beta_modewise;  ///< l_j . (B r_j), computed independently
    double biorthonormality_residual = 0.0;
};

/// Throws HypothesisError("H2") for complex or repeated speeds.
EndstateModes endstate_modes(const ModelSystem& model, const Vector& u);

/// A(x) v = dF(u) v - (dB(u) v) u_x, evaluated at a profile state u with derivative u_x.
Matrix linearized_convection(const ModelSystem& model, const Vector& u, const Vector& ux);

struct LinearizedCoefficients {
    Vector x;
    std::vector<Matrix> A;
    std::vector<Matrix> B;
    Matrix A_minus, A_plus, B_minus, B_plus;
    /// fitted exponential rate of |A(x) - A_pm| on the outer thirds; infinity if identically equal
    double tail_rate_minus = 0.0;
    double tail_rate_plus = 0.0;
};

LinearizedCoefficients linearized_coefficients(const ModelSystem& model, const ShockProfile& profile);

/// One eigenvalue group of A_* = A11 - A12 B22^{-1} B21.
struct HyperbolicBlock {
    double speed = 0.0;  ///< a_j^*
    int multiplicity = 1;
    Matrix L;      ///< (n-r) x m, L^t R = I
    Matrix R;      ///< (n-r) x m
    Matrix ext_L;  ///< n x m, (L; 0)
    Matrix ext_R;  ///< n x m, (R; -B22^{-1} B21 R)
    Matrix eta_transcribed;  ///< -L^t D_* R exactly as written
    Matrix eta;              ///< dissipation coefficient with the audited sign
};

struct HyperbolicBlocksAt {
    Matrix A_star;
    Matrix D_star;
    std::vector<HyperbolicBlock> blocks;
};

struct SpectralData {
    int n = 0;
    int r = 0;
    EndstateModes minus;
    EndstateModes plus;
    LinearizedCoefficients coefficients;

    std::vector<Matrix> A_star;  ///< per grid point, empty matrices when r = n
    std::vector<Matrix> D_star;
    std::vector<std::vector<HyperbolicBlock>> blocks;  ///< [grid][j]
    int block_count = 0;
    std::vector<int> multiplicities;

    /// max over interior grid points and blocks of |L^t dR/dx|
    double normalization_residual = 0.0;
    /// max over grid of |L^t R - I|
    double static_residual = 0.0;

    /// "as_transcribed", "flipped" or "none" (no hyperbolic block).
    std::string eta_sign_resolution = "none";
    Vector eta_transcribed_minus, eta_transcribed_plus;  ///< eigenvalues at the endstates
    Vector eta_dispersion_minus, eta_dispersion_plus;    ///< high-frequency damping of -i xi A - xi^2 B

    int hyperbolic_dim() const { return n - r; }
};

/// Sweeps the profile grid: coefficients, blocks with transport normalization, D_*, eta.
/// Throws HypothesisError("H1") if an eigenvalue of A_* vanishes, turns complex,
/// or changes multiplicity along the profile.
SpectralData build_spectral_data(const ModelSystem& model, const ShockProfile& profile);

/// Blocks at x, linearly interpolated between grid points (endstate values outside the grid).
HyperbolicBlocksAt hyperbolic_blocks(const SpectralData& spectral, double x);

struct DissipationAt {
    Matrix D_star;
    std::vector<Matrix> eta_transcribed;
    std::vector<Matrix> eta;
};
DissipationAt dissipation_data(const SpectralData& spectral, double x);

/// High-frequency damping rates: minus the real parts of the n - r bounded eigenvalue
/// branches of -i xi A - xi^2 B as xi grows, sorted ascending.
Vector dispersion_damping(const Matrix& A, const Matrix& B, int hyperbolic_dim);

/// Backward characteristics and dissipative flow of each hyperbolic block.
class CharacteristicFlow {
public:
    explicit CharacteristicFlow(const SpectralData& spectral, int steps_per_unit = 64);

    struct Trace {
        double foot = 0.0;           ///< z_j^*(0)
        double mean_speed = 0.0;     ///< time average of a_j^* along the path
        Matrix zeta;                 ///< dissipation matrix at time t
        bool clamped = false;        ///< the path left the grid
    };

    /// Path with z(t) = x; zeta solves d zeta/ds = -eta(z(s)) zeta from s = 0.
    Trace trace(int block, double x, double t) const;
    int block_count() const { return spectral_->block_count; }
    const SpectralData& spectral() const { return *spectral_; }

private:
    double speed_at(int block, double z) const;
    Matrix eta_at(int block, double z) const;
    const SpectralData* spectral_;
    int steps_per_unit_;
};

struct GreenAction {
    Matrix values;  ///< n x N on the profile grid
    bool truncated = false;
};

/// (H v0)(x) = sum_j a_j(x)^{-1} a_j(y_j) ext_R_j(x) zeta_j ext_L_j(y_j)^t v0(y_j), y_j the foot point.
/// v0 is sampled on the profile grid and interpolated linearly.
GreenAction hyperbolic_green_action(const CharacteristicFlow& flow, const Matrix& v0, double t);
/// Same with v0 given as a function of x.
GreenAction hyperbolic_green_action(const CharacteristicFlow& flow, const std::function<Vector(double)>& v0,
                                    double t);

/// JSON summary: speeds, betas, eta samples and sign resolution.
std::string spectral_summary_json(const SpectralData& spectral, int eta_samples = 9);

}  // namespace shockstab
