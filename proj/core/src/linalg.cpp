#include "shockstab/linalg.hpp"

#include "shockstab/errors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace shockstab {

CVector eigenvalues(const Matrix& a) {
    if (a.rows() == 1) {
        CVector v(1);
        v[0] = a(0, 0);
        return v;
    }
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigen-solver failed for matrix\n" << a;
        throw NumericalError(os.str());
    }
    return solver.eigenvalues();
}

double spectral_radius(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return eigenvalues(a).cwiseAbs().maxCoeff();
}

RealEigensystem real_eigensystem(const Matrix& a, double rel_gap, const std::string& hypothesis) {
    const int n = static_cast<int>(a.rows());
    Eigen::EigenSolver<Matrix> solver(a, true);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigen-solver failed for matrix\n" << a;
        throw NumericalError(os.str());
    }
    const CVector vals = solver.eigenvalues();
    const CMatrix vecs = solver.eigenvectors();
    const double scale = std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
    for (int j = 0; j < n; ++j) {
        if (std::abs(vals[j].imag()) > rel_gap * scale) {
            std::ostringstream os;
            os << "complex eigenvalue " << vals[j] << " where real spectrum is required";
            throw HypothesisError(hypothesis, os.str());
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return vals[i].real() < vals[j].real(); });
    RealEigensystem es;
    es.values.resize(n);
    es.right.resize(n, n);
    for (int k = 0; k < n; ++k) {
        es.values[k] = vals[order[k]].real();
        Vector col = vecs.col(order[k]).real();
        // eigenvectors of a real eigenvalue may carry an arbitrary complex phase
        if (col.norm() < 1e-8 * vecs.col(order[k]).norm()) col = vecs.col(order[k]).imag();
        const int pivot = [&] {
            int p = 0;
            col.cwiseAbs().maxCoeff(&p);
            return p;
        }();
        if (col[pivot] < 0) col = -col;
        es.right.col(k) = col.normalized();
    }
    for (int k = 0; k + 1 < n; ++k) {
        if (es.values[k + 1] - es.values[k] < rel_gap * scale) {
            std::ostringstream os;
            os << "repeated eigenvalue " << es.values[k] << " (gap below " << rel_gap
               << " x spectral radius)";
            throw HypothesisError(hypothesis, os.str());
        }
    }
    es.left = es.right.inverse();
    return es;
}

std::vector<std::pair<int, int>> cluster_sorted(const Vector& sorted, double rel_gap) {
    std::vector<std::pair<int, int>> out;
    const int n = static_cast<int>(sorted.size());
    if (n == 0) return out;
    const double scale = std::max(sorted.cwiseAbs().maxCoeff(), 1e-300);
    int begin = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || sorted[k] - sorted[k - 1] >= rel_gap * scale) {
            out.emplace_back(begin, k);
            begin = k;
        }
    }
    return out;
}

}  // namespace shockstab
