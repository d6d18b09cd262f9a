#pragma once

#include "shockstab/hypotheses.hpp"
#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"

namespace testbeds {

using namespace shockstab;

struct Case {
    ModelPtr model;
    ShockEndstates endstates;
    ShockProfile profile;
};

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline Case burgers() {
    Case c;
    c.model = make_burgers();
    c.endstates = classify_shock(*c.model, vec({1.0}), vec({-1.0}));
    c.profile = solve_profile(*c.model, c.endstates);
    return c;
}

inline Case quadratic_gradient() {
    Case c;
    c.model = make_quadratic_gradient();
    c.endstates = classify_shock(*c.model, vec({1.0, 0.0}), vec({-1.0, 0.0}));
    c.profile = solve_profile(*c.model, c.endstates);
    return c;
}

inline Case psystem(double mu = 1.0) {
    const auto sh = psystem_shock(1.0, 2.0);
    Case c;
    c.model = make_psystem(mu, sh.speed);
    c.endstates = classify_shock(*c.model, sh.u_minus, sh.u_plus);
    c.profile = solve_profile(*c.model, c.endstates);
    return c;
}

}  // namespace testbeds
