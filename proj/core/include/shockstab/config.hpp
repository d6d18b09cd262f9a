#pragma once

#include "shockstab/evans.hpp"
#include "shockstab/evolution.hpp"
#include "shockstab/hypotheses.hpp"
#include "shockstab/model.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/templates.hpp"

#include <string>
#include <utility>
#include <vector>

namespace shockstab {

/// Everything a batch run needs, parsed from a strict JSON document.
///
/// Top-level sections (all optional except `model`):
///   model         { name, frame_speed, mu, kappa, polynomial{...} }
///   endstates     { u_minus, u_plus } or { v_minus, v_plus, u_minus_velocity } for the p-system
///   profile       { half_width, grid_points, seed_offset, ode_tol, match_tol }
///   templates     { L, M, eta, a, eta0, C, t_floor }
///   evans         { R, rho, initial_samples, circle_samples, max_samples }
///   perturbation  { shape, amplitude, direction }
///   simulation    { half_width, dx, t_max, output_every, cfl, snapshot_times }
///   iteration     { iterations, half_width, dx, t_max, dt_phase, cfl, e0_guard, zeta_guard, norm_weight }
///   lemmas        { coarse, fine }
///   output        { dir }
struct RunConfig {
    std::string model_name;
    std::map<std::string, double> model_params;
    std::optional<PolynomialSpec> polynomial;
    Vector u_minus, u_plus;
    bool frame_speed_given = false;

    ProfileOptions profile;
    TemplateConstants templates;
    EvansOptionsD evans;
    SimulationOptions simulation;
    IterationOptions iteration;
    int iterations = 4;
    int lemma_coarse = 20;
    int lemma_fine = 80;
    std::string output_dir = "out";

    std::string source;  ///< canonical JSON after overrides, for the manifest
};

/// Parses and validates; throws ConfigError with the offending key on any schema violation.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Splits KEY=VALUE with a dotted key path.
std::pair<std::string, std::string> split_override(const std::string& kv);

struct ModelSetup {
    ModelPtr model;
    Vector u_minus, u_plus;
};
ModelSetup build_model(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// File output

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& text);
/// Manifest: tool version, model, canonical configuration and the produced files.
std::string run_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files);

}  // namespace shockstab
