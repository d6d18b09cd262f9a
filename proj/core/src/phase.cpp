#include "shockstab/errors.hpp"
#include "shockstab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shockstab {

namespace {

struct FitLandscape {
    const DiscreteFamily& fam;
    const Vector& x;
    const Matrix& u;
    std::vector<int> nodes;
    std::vector<double> w2;

    // misfit, first derivative and Gauss-Newton curvature
    void eval(double d, double& f, double& g, double& h) const {
        f = g = h = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const int i = nodes[k];
            const Vector diff = u.col(i) - fam.value_at(d, x[i]);
            const Vector der = -fam.ddelta_at(d, x[i]);
            f += w2[k] * diff.squaredNorm();
            g += 2.0 * w2[k] * diff.dot(der);
            h += 2.0 * w2[k] * der.squaredNorm();
        }
    }
    double value(double d) const {
        double f, g, h;
        eval(d, f, g, h);
        return f;
    }
};

}  // namespace

PhaseFit extract_phase(const DiscreteFamily& family, const Matrix& u, double guess) {
    const ShockProfile& p = family.profile();
    const SimGrid& grid = family.grid();
    if (u.cols() != grid.size() || u.rows() != p.dim()) throw StructuralError("state does not match the grid");
    const double W = 4.0 / p.alpha;
    FitLandscape fl{family, grid.x, u, {}, {}};
    for (int i = 0; i < grid.size(); ++i) {
        const double w = std::exp(-std::abs(grid.x[i]) / W);
        if (w < 1e-16) continue;
        fl.nodes.push_back(i);
        fl.w2.push_back(w * w * grid.dx);
    }

    PhaseFit fit;
    double d = guess;
    double f, g, h;
    fl.eval(d, f, g, h);
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        if (!(h > 0.0)) break;
        double step = -g / h;
        step = std::clamp(step, -W, W);
        double lam = 1.0, fn = 0.0, gn = 0.0, hn = 0.0;
        for (int bt = 0; bt < 40; ++bt) {
            fl.eval(d + lam * step, fn, gn, hn);
            if (fn <= f) break;
            lam *= 0.5;
        }
        d += lam * step;
        const bool small = std::abs(lam * step) < 1e-13 * std::max(1.0, std::abs(d));
        f = fn;
        g = gn;
        h = hn;
        if (small || std::abs(g) < 1e-15 * h) {
            converged = true;
            break;
        }
    }
    fit.delta = d;
    fit.residual = std::sqrt(std::max(f, 0.0));

    // landscape scan for competing minima
    const double span = 2.5 * W;
    const int M = 41;
    std::vector<double> ds(M), fs(M);
    for (int k = 0; k < M; ++k) {
        ds[k] = d - span + 2.0 * span * k / (M - 1);
        fs[k] = fl.value(ds[k]);
    }
    const double fmin = *std::min_element(fs.begin(), fs.end());
    const double fmax = *std::max_element(fs.begin(), fs.end());
    int minima = 0;
    for (int k = 1; k + 1 < M; ++k)
        if (fs[k] < fs[k - 1] && fs[k] <= fs[k + 1]) ++minima;
    const bool boundary_min = fs.front() <= fmin || fs.back() <= fmin;
    const bool flat = fmax - fmin <= 1e-12 * std::max(fmax, 1e-300);
    if (!converged || minima != 1 || boundary_min || flat) {
        fit.ambiguous = true;
        std::ostringstream os;
        os << "ambiguous phase: " << (flat ? "flat misfit" : boundary_min ? "misfit decreases toward the scan edge"
                                                              : !converged ? "Newton iteration did not settle"
                                                                           : "several local minima")
           << " near delta = " << d;
        fit.warning = os.str();
    }
    return fit;
}

}  // namespace shockstab
