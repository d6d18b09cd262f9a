#pragma once

#include "shockstab/model.hpp"

#include <string>
#include <vector>

namespace shockstab {

enum class ShockClass { Undercompressive, Lax, Overcompressive };

std::string to_string(ShockClass c);

/// Endstates of an ideal shock with its characteristic count.
struct ShockEndstates {
    Vector u_minus;
    Vector u_plus;
    Vector speeds_minus;  ///< eigenvalues of dF(u_minus), ascending
    Vector speeds_plus;   ///< eigenvalues of dF(u_plus), ascending
    int i_minus = 0;      ///< dim of center-unstable subspace of dF(u_minus)
    int i_plus = 0;       ///< dim of center-stable subspace of dF(u_plus)
    int i = 0;
    ShockClass shock_class = ShockClass::Lax;
    int ell_expected = 1;

    /// |F(u_plus) - F(u_minus)| in the standing frame.
    double rankine_hugoniot_residual = 0.0;
};

/// Counts incoming characteristics and classifies the shock (i - n < 1, = 1, > 1).
/// Throws DegenerateShockError for u_minus == u_plus and HypothesisError("H2")
/// when an endstate speed is within tol * spectral radius of zero.
ShockEndstates classify_shock(const ModelSystem& model, const Vector& u_minus, const Vector& u_plus,
                              double tol = 1e-8);

enum class CheckStatus { Pass, Fail, Unchecked };

std::string to_string(CheckStatus s);

struct HypothesisCheck {
    std::string name;
    CheckStatus status = CheckStatus::Unchecked;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool symmetric_branch = false;  ///< A1-A3 all pass
    bool parabolic_branch = false;  ///< B1 passes
    bool technical = false;         ///< H1, H2 and Rankine-Hugoniot pass

    bool passed() const { return (symmetric_branch || parabolic_branch) && technical; }
    const HypothesisCheck& get(const std::string& name) const;
    CheckStatus status(const std::string& name) const { return get(name).status; }
};

struct HypothesisOptions {
    double eigen_rel_tol = 1e-8;     ///< nonzero/distinct threshold relative to spectral radius
    double multiplicity_gap = 1e-6;  ///< clustering of A* eigenvalues
    double rh_tol = 1e-10;
    int segment_samples = 9;         ///< states sampled on the segment [u_minus, u_plus]
};

/// Structural checks A1-A3 (when a symmetrizer is supplied) or B1, plus the
/// technical hypotheses H1-H2 and the Rankine-Hugoniot condition.
/// Throws StructuralError if B(u) has non-zero rows in its hyperbolic block.
HypothesisReport check_hypotheses(const ModelSystem& model, const ShockEndstates& endstates,
                                  const HypothesisOptions& options = {});

/// Brute-force dissipativity margin: min over eigenvectors r of dF(u) of |B(u) r| / |r|.
double genuine_coupling_margin(const ModelSystem& model, const Vector& u);

/// Throws StructuralError if any of the first n - r rows of B(u) is non-zero.
void require_block_structure(const ModelSystem& model, const Vector& u);

}  // namespace shockstab
