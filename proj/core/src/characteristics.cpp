#include "shockstab/errors.hpp"
#include "shockstab/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace shockstab {

CharacteristicFlow::CharacteristicFlow(const SpectralData& spectral, int steps_per_unit)
    : spectral_(&spectral), steps_per_unit_(std::max(4, steps_per_unit)) {}

double CharacteristicFlow::speed_at(int block, double z) const {
    return hyperbolic_blocks(*spectral_, z).blocks[block].speed;
}

Matrix CharacteristicFlow::eta_at(int block, double z) const {
    return hyperbolic_blocks(*spectral_, z).blocks[block].eta;
}

CharacteristicFlow::Trace CharacteristicFlow::trace(int block, double x, double t) const {
    if (block < 0 || block >= block_count()) throw std::out_of_range("hyperbolic block index out of range");
    const int m = spectral_->blocks.front()[block].multiplicity;
    Trace tr;
    tr.zeta = Matrix::Identity(m, m);
    tr.foot = x;
    if (t <= 0.0) {
        tr.mean_speed = speed_at(block, x);
        return tr;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(t * steps_per_unit_)));
    const double hs = t / steps;
    // backward path z(s), s from t down to 0, stored at half steps
    std::vector<double> z(2 * steps + 1);
    z[2 * steps] = x;
    const double hh = 0.5 * hs;
    for (int i = 2 * steps; i > 0; --i) {
        const double zi = z[i];
        const double k1 = speed_at(block, zi);
        const double k2 = speed_at(block, zi - 0.5 * hh * k1);
        const double k3 = speed_at(block, zi - 0.5 * hh * k2);
        const double k4 = speed_at(block, zi - hh * k3);
        z[i - 1] = zi - hh * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
    tr.foot = z[0];
    tr.mean_speed = (x - tr.foot) / t;
    const Vector& xs = spectral_->coefficients.x;
    tr.clamped = tr.foot < xs[0] || tr.foot > xs[xs.size() - 1];
    // dissipative flow forward along the path
    Matrix zeta = Matrix::Identity(m, m);
    for (int i = 0; i < steps; ++i) {
        const Matrix e0 = eta_at(block, z[2 * i]);
        const Matrix e1 = eta_at(block, z[2 * i + 1]);
        const Matrix e2 = eta_at(block, z[2 * i + 2]);
        const Matrix k1 = -e0 * zeta;
        const Matrix k2 = -e1 * (zeta + 0.5 * hs * k1);
        const Matrix k3 = -e1 * (zeta + 0.5 * hs * k2);
        const Matrix k4 = -e2 * (zeta + hs * k3);
        zeta += hs * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
    tr.zeta = zeta;
    return tr;
}

GreenAction hyperbolic_green_action(const CharacteristicFlow& flow, const std::function<Vector(double)>& v0,
                                    double t) {
    const SpectralData& sd = flow.spectral();
    const Vector& xs = sd.coefficients.x;
    const int N = static_cast<int>(xs.size());
    GreenAction out;
    out.values = Matrix::Zero(sd.n, N);
    if (sd.hyperbolic_dim() == 0) return out;
    for (int k = 0; k < N; ++k) {
        const HyperbolicBlocksAt at_x = hyperbolic_blocks(sd, xs[k]);
        for (int j = 0; j < flow.block_count(); ++j) {
            const auto tr = flow.trace(j, xs[k], t);
            out.truncated = out.truncated || tr.clamped;
            const HyperbolicBlocksAt at_y = hyperbolic_blocks(sd, tr.foot);
            const auto& bx = at_x.blocks[j];
            const auto& by = at_y.blocks[j];
            out.values.col(k) += (by.speed / bx.speed) * bx.ext_R * tr.zeta * by.ext_L.transpose() * v0(tr.foot);
        }
    }
    return out;
}

GreenAction hyperbolic_green_action(const CharacteristicFlow& flow, const Matrix& v0, double t) {
    const Vector& xs = flow.spectral().coefficients.x;
    const int N = static_cast<int>(xs.size());
    if (v0.cols() != N || v0.rows() != flow.spectral().n)
        throw StructuralError("initial data must be sampled on the profile grid");
    const double dx = xs[1] - xs[0];
    auto sample = [&](double y) -> Vector {
        if (y <= xs[0]) return v0.col(0);
        if (y >= xs[N - 1]) return v0.col(N - 1);
        const int k = std::clamp(static_cast<int>(std::floor((y - xs[0]) / dx)), 0, N - 2);
        const double w = (y - xs[k]) / dx;
        return (1 - w) * v0.col(k) + w * v0.col(k + 1);
    };
    return hyperbolic_green_action(flow, std::function<Vector(double)>(sample), t);
}

namespace {

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json modes_json(const EndstateModes& m) {
    nlohmann::json j;
    j["state"] = vec_json(m.state);
    j["speeds"] = vec_json(m.speeds);
    j["beta"] = vec_json(m.beta);
    j["beta_modewise"] = vec_json(m.beta_modewise);
    j["biorthonormality_residual"] = m.biorthonormality_residual;
    return j;
}

}  // namespace

std::string spectral_summary_json(const SpectralData& sd, int eta_samples) {
    nlohmann::json j;
    j["n"] = sd.n;
    j["r"] = sd.r;
    j["minus"] = modes_json(sd.minus);
    j["plus"] = modes_json(sd.plus);
    j["tail_rate_minus"] = std::isfinite(sd.coefficients.tail_rate_minus) ? nlohmann::json(sd.coefficients.tail_rate_minus)
                                                                          : nlohmann::json("exact");
    j["tail_rate_plus"] = std::isfinite(sd.coefficients.tail_rate_plus) ? nlohmann::json(sd.coefficients.tail_rate_plus)
                                                                        : nlohmann::json("exact");
    j["hyperbolic_blocks"] = sd.block_count;
    j["multiplicities"] = sd.multiplicities;
    j["eta_sign_resolution"] = sd.eta_sign_resolution;
    if (sd.hyperbolic_dim() > 0) {
        j["eta_transcribed_minus"] = vec_json(sd.eta_transcribed_minus);
        j["eta_transcribed_plus"] = vec_json(sd.eta_transcribed_plus);
        j["eta_dispersion_minus"] = vec_json(sd.eta_dispersion_minus);
        j["eta_dispersion_plus"] = vec_json(sd.eta_dispersion_plus);
        j["normalization_residual"] = sd.normalization_residual;
        j["static_residual"] = sd.static_residual;
        nlohmann::json samples = nlohmann::json::array();
        const Vector& xs = sd.coefficients.x;
        const int N = static_cast<int>(xs.size());
        const int m = std::max(2, eta_samples);
        for (int i = 0; i < m; ++i) {
            const int k = static_cast<int>(std::lround(static_cast<double>(i) * (N - 1) / (m - 1)));
            nlohmann::json s;
            s["x"] = xs[k];
            std::vector<double> speeds, eta;
            for (const auto& b : sd.blocks[k]) {
                speeds.push_back(b.speed);
                eta.push_back(b.eta.trace() / b.multiplicity);
            }
            s["speed"] = speeds;
            s["eta"] = eta;
            samples.push_back(s);
        }
        j["eta_samples"] = samples;
    }
    return j.dump(2);
}

}  // namespace shockstab
