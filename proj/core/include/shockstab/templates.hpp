#pragma once

#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/spectral.hpp"

#include <string>
#include <vector>

namespace shockstab {

/// (1 + erf z) / 2: increases from 0 to 1.
double errfn(double z);

/// Free constants of the template and envelope functions. Zero means "use the default".
struct TemplateConstants {
    double L = 0.0;    ///< Gaussian width of theta; default 8 max beta
    double M = 0.0;    ///< envelope width; default 2 L
    double eta = 0.0;  ///< exponential weight rate; default alpha / 2
    double a = 0.0;    ///< drift rate in the e - e(+inf) bound; default min |incoming speed| / 2
    double eta0 = 0.0; ///< decay rate of the hyperbolic kernel; default min eigenvalue of eta_* (or eta)
    double t_floor = 1e-8;
    double C = 1.0;    ///< multiplier of the G~ envelope
};

/// Stationary adjoint solutions and the phase-kernel coefficients built from them.
struct PhaseKernel {
    int ell = 1;
    Vector x;                       ///< profile grid
    std::vector<Matrix> pi;         ///< pi[j]: n x N samples of the bounded adjoint solution, normalized
    Matrix pi_minus, pi_plus;       ///< ell x n limits
    /// incoming modes: l_minus[j](k, :) is the row vector l_jk^- for the k-th incoming mode at -inf
    std::vector<Matrix> l_minus, l_plus;
    Matrix e_inf_minus, e_inf_plus; ///< ell x n, piecewise-constant e(y, +inf) for y < 0, y > 0
    int decaying_adjoint_dim = 0;   ///< dimension of the decaying derivative solutions
    double outgoing_residual = 0.0; ///< |pi(+-inf) . r_k| over outgoing modes k, before projection
    double pi_normalization_residual = 0.0;  ///< |int pi d_delta u - I|
    double normalization_residual = 0.0;     ///< |int e(+inf) d_delta u - I|
    double rescale = 1.0;           ///< final scalar applied to the projected limits
};

struct TemplateBundle {
    int n = 0;
    Vector speeds_minus, speeds_plus;  ///< a_1 < ... < a_n at each endstate
    Vector beta_minus, beta_plus;
    Matrix left_minus, left_plus;      ///< rows L_k
    Matrix right_minus, right_plus;    ///< columns R_k
    std::vector<int> outgoing_minus;   ///< indices with a_j^- < 0
    std::vector<int> outgoing_plus;    ///< indices with a_j^+ > 0
    std::vector<int> incoming_minus;   ///< a_k^- > 0
    std::vector<int> incoming_plus;    ///< a_k^+ < 0
    TemplateConstants constants;       ///< resolved values (no zeros)
    std::vector<std::string> notes;    ///< heuristic defaults flagged for reports
    bool has_kernel = false;
    PhaseKernel kernel;
};

/// Endstate data and constants; installs the phase kernel via e_infinity when `with_kernel`.
TemplateBundle make_template_bundle(const ModelSystem& model, const ShockProfile& profile,
                                    const TemplateConstants& overrides = {}, bool with_kernel = true);

/// Bounded solutions of the stationary adjoint problem, normalized against d_delta u-bar.
/// Throws NumericalError when the normalization is singular or the solution space has the
/// wrong dimension (inconsistent with the Evans count).
PhaseKernel e_infinity(const ModelSystem& model, const ShockProfile& profile);

double chi(const TemplateBundle& b, double x, double t);
double theta(const TemplateBundle& b, double x, double t);
double psi1(const TemplateBundle& b, double x, double t);
double psi2(const TemplateBundle& b, double x, double t);
inline double template_sum(const TemplateBundle& b, double x, double t) {
    return theta(b, x, t) + psi1(b, x, t) + psi2(b, x, t);
}

enum class EDerivative { None, T, Y, YT };

/// Rows e_j(y, t) (ell x n); derivatives in closed form. Throws std::domain_error for t <= 0.
Matrix e_profile(const TemplateBundle& b, double y, double t, EDerivative d = EDerivative::None);
/// Rows e_j(y, +inf).
Matrix e_limit(const TemplateBundle& b, double y);
/// Sum over incoming modes of the erf-fn bracket: the majorant of |e_j|.
double e_bracket_sum(const TemplateBundle& b, double y, double t);
/// Sum over incoming modes of t^{-1/2} exp(-|y + a_k t|^2 / (M t)) (mirrored for y > 0).
double e_gaussian_sum(const TemplateBundle& b, double y, double t);

/// Majorant of |d^alpha G~(x, t; y)| with alpha = (alpha_x, alpha_y).
double gtilde_envelope(const TemplateBundle& b, double x, double t, double y, int alpha_x, int alpha_y);
/// deriv_order 0 is the plain envelope; order k >= 1 carries t^{-k/2} + e^{-eta|y|} + e^{-eta|x|}.
double gtilde_envelope(const TemplateBundle& b, double x, double t, double y, int deriv_order);

double source_psi(const TemplateBundle& b, double y, double s);
double source_phi1(const TemplateBundle& b, double y, double s);
double source_phi2(const TemplateBundle& b, double y, double s);
double source_upsilon(const TemplateBundle& b, double y, double s);

/// CSV of theta, psi1, psi2, chi on an (x, t) grid.
void write_template_csv(const TemplateBundle& b, const std::vector<double>& xs, const std::vector<double>& ts,
                        const std::string& path);
/// Bundle summary (speeds, constants, kernel limits and residuals).
std::string template_json(const TemplateBundle& b);

// ---------------------------------------------------------------------------
// Numerical verification of the convolution estimates

struct LemmaSample {
    double x = 0.0;
    double t = 0.0;
};

/// Deterministic sample set: t log-spaced over [t_min, t_max], x on and off the
/// characteristics, nested so the first k samples of a longer set are the k-sample set.
std::vector<LemmaSample> lemma_samples(const TemplateBundle& b, int count, double t_min = 1.0, double t_max = 60.0);

struct LemmaFit {
    std::string id;         ///< e.g. "initial_green"
    std::string statement;  ///< left side vs right side, in words
    double constant = 0.0;  ///< max LHS / RHS over converged samples
    int samples = 0;
    int excluded = 0;       ///< quadrature failures
    bool finite = false;
};

struct LemmaReport {
    std::vector<LemmaFit> fits;
    std::vector<std::string> warnings;
    const LemmaFit* find(const std::string& id) const;
};

/// Fits the constants of the single and space-time convolution bounds on the sample set.
LemmaReport verify_convolution_lemmas(const TemplateBundle& b, const std::vector<LemmaSample>& samples);

struct LemmaStability {
    LemmaReport coarse, fine;
    std::vector<std::string> ids;
    std::vector<double> ratios;  ///< fine / coarse constant
    bool stable = false;         ///< all finite and every ratio within [1/2, 2]
};
LemmaStability lemma_refinement(const TemplateBundle& b, int coarse = 20, int fine = 80);

std::string lemma_json(const LemmaStability& s);

}  // namespace shockstab
