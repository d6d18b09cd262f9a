#pragma once

#include "shockstab/model.hpp"

#include <complex>
#include <vector>

namespace shockstab {

/// Eigenvalues of a real matrix, complex in general.
CVector eigenvalues(const Matrix& a);

/// Real diagonalization with ascending eigenvalues: a = right * diag(values) * left,
/// left = right^{-1}, so rows of `left` are left eigenvectors with l_j . r_k = delta_jk.
struct RealEigensystem {
    Vector values;
    Matrix right;
    Matrix left;
};

/// Throws HypothesisError(hypothesis) if an eigenvalue is complex, or two
/// eigenvalues are closer than rel_gap * spectral radius.
RealEigensystem real_eigensystem(const Matrix& a, double rel_gap, const std::string& hypothesis);

/// Group sorted real values into clusters with relative gap < rel_gap.
/// Returns index ranges [begin, end).
std::vector<std::pair<int, int>> cluster_sorted(const Vector& sorted, double rel_gap);

double spectral_radius(const Matrix& a);

}  // namespace shockstab
