#pragma once

#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"

#include <complex>
#include <string>
#include <vector>

namespace shockstab {

using Complex = std::complex<double>;

enum class EvansMethod { Frames, Compound };

struct EvansOptions {
    EvansMethod method = EvansMethod::Frames;
    double lambda_ref = 1.0;  ///< real point where the asymptotic bases are fixed
    double gap_fraction = 0.05;  ///< Kato step <= gap_fraction * spectral gap
};

/// Bases of the decaying subspaces: unstable at -infinity, stable at +infinity.
struct AsymptoticBases {
    Complex lambda;
    CMatrix minus;  ///< N x k_minus
    CMatrix plus;   ///< N x k_plus
    CVector group_minus, rest_minus;  ///< tracked spatial eigenvalues
    CVector group_plus, rest_plus;
};

/// First-order form of lambda v + (A v)' = (B v')' in the unknowns (v, w^II),
/// w = B v' - A v, so the dimension is n + r.
class EvansSystem {
public:
    EvansSystem(const ModelSystem& model, const ShockProfile& profile, EvansOptions options = {});

    int dim() const { return N_; }
    int unstable_dim() const { return k_minus_; }
    int stable_dim() const { return k_plus_; }
    double half_width() const { return X_; }
    const EvansOptions& options() const { return options_; }

    /// Coefficient matrix at x (endstate values outside the grid).
    CMatrix matrix(double x, Complex lambda) const;
    CMatrix limit_matrix(bool plus, Complex lambda) const;

    /// Bases at lambda, continued from lambda_ref along the straight segment.
    AsymptoticBases bases(Complex lambda) const;
    /// Continues bases to a nearby lambda along the straight segment (Kato transport).
    AsymptoticBases continue_bases(const AsymptoticBases& from, Complex lambda) const;

    /// D(lambda) with the given bases (their lambda is used for the subspaces,
    /// `lambda` for the ODE; they coincide except at the origin).
    Complex evaluate(const AsymptoticBases& bases, Complex lambda, EvansMethod method) const;
    Complex evaluate(const AsymptoticBases& bases, EvansMethod method) const {
        return evaluate(bases, bases.lambda, method);
    }
    Complex evaluate(Complex lambda) const { return evaluate(bases(lambda), options_.method); }
    /// D(0), using subspaces continued to lambda = 1e-10.
    Complex evaluate_at_origin(EvansMethod method) const;

    /// Values along a path; bases are continued from sample to sample.
    std::vector<Complex> evaluate_path(const std::vector<Complex>& path) const;

private:
    struct Coeff {
        Matrix C0;  // lambda-independent part
        Matrix C1;  // coefficient of lambda
    };
    Coeff coefficients_at(const ModelSystem& model, const ShockProfile& profile, double x) const;
    Coeff limit_coeff(const ModelSystem& model, const Vector& u) const;
    CMatrix assemble(const Coeff& c, Complex lambda) const;
    CMatrix fine(int j, Complex lambda) const { return assemble(fine_[j], lambda); }

    Complex frames(const AsymptoticBases& b, Complex lambda) const;
    Complex compound(const AsymptoticBases& b, Complex lambda) const;

    int n_, r_, N_;
    int k_minus_ = 0, k_plus_ = 0;
    double X_ = 0.0;
    double h_ = 0.0;  // fine-grid spacing (half the profile spacing)
    std::vector<Coeff> fine_;
    Coeff minus_, plus_;
    EvansOptions options_;
};

struct EssentialSpectrumReport {
    bool ok = true;
    double max_real_part = 0.0;  ///< max over sampled xi != 0 of Re lambda(xi), both endstates
    std::string detail;
};

/// Samples the dispersion curves lambda(xi) = eig(-i xi A_pm - xi^2 B_pm).
EssentialSpectrumReport essential_spectrum_guard(const ModelSystem& model, const Vector& u_minus,
                                                 const Vector& u_plus);

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct ContourSample {
    Complex lambda;
    Complex value;
};

struct EvansOptionsD {
    double R = 0.0;      ///< 0: scaled default max(2, 2 max|A|^2 / min beta)
    double rho = 1e-3;
    int initial_samples = 256;
    int circle_samples = 64;
    int max_samples = 20000;
    double max_phase_step = 0.7853981633974483;  ///< pi / 4
    EvansOptions evans;
};

struct EvansData {
    double R = 0.0;
    double rho = 0.0;
    std::vector<ContourSample> contour;  ///< indented contour, counterclockwise
    std::vector<ContourSample> circle;   ///< |lambda| = rho
    int winding_number = 0;
    int origin_multiplicity = 0;
    int ell = 1;
    double winding_raw = 0.0;  ///< accumulated phase / 2 pi
    double origin_raw = 0.0;
    double max_phase_increment = 0.0;
    double conjugate_residual = 0.0;  ///< max |D(conj l) - conj D(l)| / max|D| at check points
    double circle_closure = 0.0;      ///< |D(end) - D(start)| / |D(start)| on the small circle
    Complex value_at_origin;
    EssentialSpectrumReport essential;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
    double seconds = 0.0;
};

/// Argument-principle check: zero winding on the indented contour and multiplicity ell at 0.
EvansData verify_criterion_D(const ModelSystem& model, const ShockProfile& profile, const EvansOptionsD& options = {});

void write_contour_csv(const EvansData& data, const std::string& path);
std::string evans_json(const EvansData& data);

}  // namespace shockstab
