#include "shockstab/config.hpp"
#include "shockstab/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shockstab;

namespace {

const char* kBurgers = R"({
  "model": {"name": "burgers"},
  "endstates": {"u_minus": [1.0], "u_plus": [-1.0]},
  "perturbation": {"shape": "sech", "amplitude": 0.002},
  "simulation": {"t_max": 50.0}
})";

}  // namespace

TEST(Config, ParsesAndFillsSections) {
    const auto c = parse_config(kBurgers);
    EXPECT_EQ(c.model_name, "burgers");
    EXPECT_DOUBLE_EQ(c.simulation.t_max, 50.0);
    EXPECT_DOUBLE_EQ(c.simulation.amplitude, 0.002);
    EXPECT_DOUBLE_EQ(c.iteration.amplitude, 0.002);
    const auto setup = build_model(c);
    EXPECT_EQ(setup.model->name(), "burgers");
    EXPECT_DOUBLE_EQ(setup.u_minus[0], 1.0);
}

TEST(Config, OverridesApplyBeforeValidation) {
    const auto c = parse_config(kBurgers, {"simulation.t_max=12.5", "perturbation.shape=gaussian"});
    EXPECT_DOUBLE_EQ(c.simulation.t_max, 12.5);
    EXPECT_EQ(c.simulation.shape, "gaussian");
    EXPECT_THROW(parse_config(kBurgers, {"simulation.t_max=-1"}), ConfigError);
}

TEST(Config, SplitOverride) {
    const auto kv = split_override("iteration.dx=0.05");
    EXPECT_EQ(kv.first, "iteration.dx");
    EXPECT_EQ(kv.second, "0.05");
    EXPECT_THROW(split_override("no_equals_sign"), ConfigError);
}

TEST(Config, StrictSchemaRejectsUnknownKeys) {
    EXPECT_THROW(parse_config(R"({"model": {"name": "burgers", "viscosity": 2}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": {"name": "burgers"}, "extras": {}})"), ConfigError);
    EXPECT_THROW(parse_config(kBurgers, {"simulation.dt=1"}), ConfigError);
}

TEST(Config, MalformedInputIsAConfigError) {
    EXPECT_THROW(parse_config("{ not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"endstates": {"u_minus": [1]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": {"name": "burgers"}, "simulation": {"dx": "fine"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": {"name": "burgers"}, "perturbation": {"shape": "square"}})"),
                 ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, PSystemDefaultsToTheShockFrame) {
    const auto c = parse_config(R"({"model": {"name": "psystem"}, "endstates": {"v_minus": 1.0, "v_plus": 2.0}})");
    const auto setup = build_model(c);
    EXPECT_NEAR(setup.model->frame_speed(), std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(setup.u_plus[0], 2.0, 1e-14);
}

TEST(Config, PolynomialModel) {
    const auto c = parse_config(R"({
      "model": {"name": "polynomial"},
      "polynomial": {"n": 1, "r": 1, "quadratic": [[[0.5]]], "viscosity": [[1.0]]},
      "endstates": {"u_minus": [1.0], "u_plus": [-1.0]}
    })");
    const auto setup = build_model(c);
    EXPECT_EQ(setup.model->dim(), 1);
    EXPECT_NEAR(setup.model->flux(setup.u_minus)[0], 0.5, 1e-15);
}

TEST(Config, ManifestCarriesTheCanonicalConfig) {
    const auto c = parse_config(kBurgers, {"simulation.t_max=7"});
    const std::string m = run_manifest(c, "simulate", {"trace.csv"});
    EXPECT_NE(m.find("\"command\": \"simulate\""), std::string::npos);
    EXPECT_NE(m.find("trace.csv"), std::string::npos);
    EXPECT_NE(m.find("7"), std::string::npos);
}
