#include "shockstab/config.hpp"
#include "shockstab/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace shockstab {

namespace {

using nlohmann::json;

enum class Kind { Positive, NonNegative, Finite, Count, Text, NumberList, Matrix, Cube };

// strict schema: section -> key -> kind
const std::map<std::string, std::map<std::string, Kind>>& schema() {
    static const std::map<std::string, std::map<std::string, Kind>> s = {
        {"model",
         {{"name", Kind::Text}, {"frame_speed", Kind::Finite}, {"mu", Kind::Positive}, {"kappa", Kind::Positive}}},
        {"polynomial",
         {{"n", Kind::Count},
          {"r", Kind::Count},
          {"constant", Kind::NumberList},
          {"linear", Kind::Matrix},
          {"quadratic", Kind::Cube},
          {"viscosity", Kind::Matrix},
          {"symmetrizer", Kind::Matrix},
          {"frame_speed", Kind::Finite}}},
        {"endstates",
         {{"u_minus", Kind::NumberList},
          {"u_plus", Kind::NumberList},
          {"v_minus", Kind::Positive},
          {"v_plus", Kind::Positive},
          {"velocity_minus", Kind::Finite}}},
        {"profile",
         {{"half_width", Kind::NonNegative},
          {"grid_points", Kind::Count},
          {"seed_offset", Kind::Positive},
          {"ode_tol", Kind::Positive},
          {"match_tol", Kind::Positive}}},
        {"templates",
         {{"L", Kind::NonNegative},
          {"M", Kind::NonNegative},
          {"eta", Kind::NonNegative},
          {"a", Kind::NonNegative},
          {"eta0", Kind::NonNegative},
          {"C", Kind::Positive},
          {"t_floor", Kind::Positive}}},
        {"evans",
         {{"R", Kind::NonNegative},
          {"rho", Kind::Positive},
          {"initial_samples", Kind::Count},
          {"circle_samples", Kind::Count},
          {"max_samples", Kind::Count}}},
        {"perturbation", {{"shape", Kind::Text}, {"amplitude", Kind::NonNegative}, {"direction", Kind::NumberList}}},
        {"simulation",
         {{"half_width", Kind::NonNegative},
          {"dx", Kind::Positive},
          {"t_max", Kind::Positive},
          {"output_every", Kind::Positive},
          {"cfl", Kind::Positive},
          {"snapshot_times", Kind::NumberList}}},
        {"iteration",
         {{"iterations", Kind::Count},
          {"half_width", Kind::NonNegative},
          {"dx", Kind::Positive},
          {"t_max", Kind::Positive},
          {"dt_phase", Kind::Positive},
          {"cfl", Kind::Positive},
          {"e0_guard", Kind::Positive},
          {"zeta_guard", Kind::Positive},
          {"norm_weight", Kind::Positive}}},
        {"lemmas", {{"coarse", Kind::Count}, {"fine", Kind::Count}}},
        {"output", {{"dir", Kind::Text}}},
    };
    return s;
}

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

void check_value(const std::string& key, const json& v, Kind kind) {
    auto fail = [&](const std::string& what) { throw ConfigError("config key '" + key + "': " + what); };
    auto number_list = [&](const json& a) {
        if (!a.is_array() || a.empty()) return false;
        for (const auto& e : a)
            if (!finite_number(e)) return false;
        return true;
    };
    switch (kind) {
        case Kind::Positive:
            if (!finite_number(v) || !(v.get<double>() > 0.0)) fail("expected a positive number");
            break;
        case Kind::NonNegative:
            if (!finite_number(v) || v.get<double>() < 0.0) fail("expected a non-negative number");
            break;
        case Kind::Finite:
            if (!finite_number(v)) fail("expected a finite number");
            break;
        case Kind::Count:
            if (!v.is_number_integer() || v.get<long>() < 1) fail("expected a positive integer");
            break;
        case Kind::Text:
            if (!v.is_string() || v.get<std::string>().empty()) fail("expected a non-empty string");
            break;
        case Kind::NumberList:
            if (!number_list(v)) fail("expected a non-empty list of numbers");
            break;
        case Kind::Matrix:
            if (!v.is_array() || v.empty()) fail("expected a list of rows");
            for (const auto& r : v)
                if (!number_list(r) || r.size() != v[0].size()) fail("expected rows of equal length");
            break;
        case Kind::Cube:
            if (!v.is_array() || v.empty()) fail("expected a list of matrices");
            for (const auto& m : v) check_value(key, m, Kind::Matrix);
            break;
    }
}

void validate(const json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [section, body] : doc.items()) {
        const auto it = schema().find(section);
        if (it == schema().end()) throw ConfigError("unknown config section '" + section + "'");
        if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            const auto k = it->second.find(key);
            if (k == it->second.end()) throw ConfigError("unknown config key '" + section + "." + key + "'");
            check_value(section + "." + key, value, k->second);
        }
    }
    if (!doc.contains("model") || !doc["model"].contains("name")) throw ConfigError("config key 'model.name' is required");
}

Vector to_vector(const json& a) {
    Vector v(static_cast<int>(a.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = a[i].get<double>();
    return v;
}

Matrix to_matrix(const json& a) {
    Matrix m(static_cast<int>(a.size()), static_cast<int>(a[0].size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = a[i][j].get<double>();
    return m;
}

template <class T>
void read(const json& doc, const char* section, const char* key, T& out) {
    if (doc.contains(section) && doc[section].contains(key)) out = doc[section][key].get<T>();
}

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);
    }
}

}  // namespace

std::pair<std::string, std::string> split_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not KEY=VALUE");
    return {kv.substr(0, eq), kv.substr(eq + 1)};
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& o : overrides) {
        const auto [key, value] = split_override(o);
        const auto dot = key.find('.');
        if (dot == std::string::npos) throw ConfigError("override key '" + key + "' must be SECTION.KEY");
        doc[key.substr(0, dot)][key.substr(dot + 1)] = parse_value(value);
    }
    validate(doc);

    RunConfig c;
    c.source = doc.dump(2);
    const json& m = doc["model"];
    c.model_name = m["name"].get<std::string>();
    for (const char* k : {"frame_speed", "mu", "kappa"})
        if (m.contains(k)) c.model_params[k] = m[k].get<double>();
    c.frame_speed_given = m.contains("frame_speed");

    if (c.model_name == "polynomial") {
        if (!doc.contains("polynomial")) throw ConfigError("model 'polynomial' needs a 'polynomial' section");
        const json& p = doc["polynomial"];
        PolynomialSpec spec;
        read(doc, "polynomial", "n", spec.n);
        spec.r = spec.n;
        read(doc, "polynomial", "r", spec.r);
        const int n = spec.n;
        spec.constant = p.contains("constant") ? to_vector(p["constant"]) : Vector::Zero(n);
        spec.linear = p.contains("linear") ? to_matrix(p["linear"]) : Matrix::Zero(n, n);
        if (p.contains("quadratic"))
            for (const auto& q : p["quadratic"]) spec.quadratic.push_back(to_matrix(q));
        if (!p.contains("viscosity")) throw ConfigError("config key 'polynomial.viscosity' is required");
        spec.viscosity = to_matrix(p["viscosity"]);
        if (p.contains("symmetrizer")) spec.symmetrizer = to_matrix(p["symmetrizer"]);
        read(doc, "polynomial", "frame_speed", spec.frame_speed);
        if (spec.constant.size() != n || spec.linear.rows() != n || spec.linear.cols() != n ||
            spec.viscosity.rows() != n || spec.viscosity.cols() != n ||
            (!spec.quadratic.empty() && static_cast<int>(spec.quadratic.size()) != n))
            throw ConfigError("polynomial coefficients do not match n");
        for (const auto& q : spec.quadratic)
            if (q.rows() != n || q.cols() != n) throw ConfigError("polynomial quadratic blocks must be n x n");
        if (spec.r > n) throw ConfigError("polynomial r must not exceed n");
        c.polynomial = spec;
    } else if (c.model_name != "burgers" && c.model_name != "quadratic_gradient" && c.model_name != "psystem") {
        throw ConfigError("unknown model '" + c.model_name + "'");
    }

    if (doc.contains("endstates")) {
        const json& e = doc["endstates"];
        if (e.contains("u_minus") != e.contains("u_plus"))
            throw ConfigError("endstates need both u_minus and u_plus");
        if (e.contains("u_minus")) {
            c.u_minus = to_vector(e["u_minus"]);
            c.u_plus = to_vector(e["u_plus"]);
            if (c.u_minus.size() != c.u_plus.size()) throw ConfigError("endstates have different lengths");
        }
    }

    read(doc, "profile", "half_width", c.profile.half_width);
    read(doc, "profile", "grid_points", c.profile.grid_points);
    read(doc, "profile", "seed_offset", c.profile.seed_offset);
    read(doc, "profile", "ode_tol", c.profile.ode_tol);
    read(doc, "profile", "match_tol", c.profile.match_tol);
    if (c.profile.grid_points < 16) throw ConfigError("config key 'profile.grid_points': needs at least 16 points");

    read(doc, "templates", "L", c.templates.L);
    read(doc, "templates", "M", c.templates.M);
    read(doc, "templates", "eta", c.templates.eta);
    read(doc, "templates", "a", c.templates.a);
    read(doc, "templates", "eta0", c.templates.eta0);
    read(doc, "templates", "C", c.templates.C);
    read(doc, "templates", "t_floor", c.templates.t_floor);

    read(doc, "evans", "R", c.evans.R);
    read(doc, "evans", "rho", c.evans.rho);
    read(doc, "evans", "initial_samples", c.evans.initial_samples);
    read(doc, "evans", "circle_samples", c.evans.circle_samples);
    read(doc, "evans", "max_samples", c.evans.max_samples);

    std::string shape = "sech";
    double amplitude = c.simulation.amplitude;
    std::vector<double> direction;
    read(doc, "perturbation", "shape", shape);
    read(doc, "perturbation", "amplitude", amplitude);
    read(doc, "perturbation", "direction", direction);
    if (shape != "sech" && shape != "gaussian" && shape != "sech_derivative")
        throw ConfigError("config key 'perturbation.shape': expected sech, gaussian or sech_derivative");
    c.simulation.shape = c.iteration.shape = shape;
    c.simulation.amplitude = c.iteration.amplitude = amplitude;
    c.simulation.direction = c.iteration.direction = direction;

    read(doc, "simulation", "half_width", c.simulation.half_width);
    read(doc, "simulation", "dx", c.simulation.dx);
    read(doc, "simulation", "t_max", c.simulation.t_max);
    read(doc, "simulation", "output_every", c.simulation.output_every);
    read(doc, "simulation", "cfl", c.simulation.cfl);
    read(doc, "simulation", "snapshot_times", c.simulation.snapshot_times);
    if (c.simulation.output_every > c.simulation.t_max)
        throw ConfigError("config key 'simulation.output_every': exceeds t_max");

    read(doc, "iteration", "iterations", c.iterations);
    read(doc, "iteration", "half_width", c.iteration.half_width);
    read(doc, "iteration", "dx", c.iteration.dx);
    read(doc, "iteration", "t_max", c.iteration.t_max);
    read(doc, "iteration", "dt_phase", c.iteration.dt_phase);
    read(doc, "iteration", "cfl", c.iteration.cfl);
    read(doc, "iteration", "e0_guard", c.iteration.e0_guard);
    read(doc, "iteration", "zeta_guard", c.iteration.zeta_guard);
    read(doc, "iteration", "norm_weight", c.iteration.norm_weight);
    if (c.iteration.dt_phase > c.iteration.t_max) throw ConfigError("config key 'iteration.dt_phase': exceeds t_max");

    read(doc, "lemmas", "coarse", c.lemma_coarse);
    read(doc, "lemmas", "fine", c.lemma_fine);
    read(doc, "output", "dir", c.output_dir);

    // p-system endstates from specific volumes; the shock speed becomes the frame speed
    if (c.model_name == "psystem" && c.u_minus.size() == 0) {
        double vm = 1.0, vp = 2.0, um = 0.0;
        read(doc, "endstates", "v_minus", vm);
        read(doc, "endstates", "v_plus", vp);
        read(doc, "endstates", "velocity_minus", um);
        const auto kappa = c.model_params.count("kappa") ? c.model_params.at("kappa") : 1.0;
        const PSystemShock sh = psystem_shock(vm, vp, um, kappa);
        c.u_minus = sh.u_minus;
        c.u_plus = sh.u_plus;
        if (!c.frame_speed_given) c.model_params["frame_speed"] = sh.speed;
    }
    return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

ModelSetup build_model(const RunConfig& cfg) {
    ModelSetup s;
    s.model = cfg.polynomial ? make_polynomial(*cfg.polynomial) : make_builtin(cfg.model_name, cfg.model_params);
    const int n = s.model->dim();
    if (cfg.u_minus.size()) {
        s.u_minus = cfg.u_minus;
        s.u_plus = cfg.u_plus;
    } else if (cfg.model_name == "burgers") {
        s.u_minus = Vector::Constant(1, 1.0);
        s.u_plus = Vector::Constant(1, -1.0);
    } else if (cfg.model_name == "quadratic_gradient") {
        s.u_minus = Vector::Zero(2);
        s.u_plus = Vector::Zero(2);
        s.u_minus[0] = 1.0;
        s.u_plus[0] = -1.0;
    } else {
        throw ConfigError("config needs endstates.u_minus and endstates.u_plus");
    }
    if (s.u_minus.size() != n) throw ConfigError("endstates do not match the model dimension");
    return s;
}

}  // namespace shockstab
