/**
 * @file io.hpp
 * @brief JSON configuration documents (strict: unknown keys and wrong types are
 *        config errors) and JSON reports.
 */
#pragma once

#include <array>
#include <cctype>
#include <exception>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "essmc/chatter.hpp"
#include "essmc/controllers.hpp"
#include "essmc/core.hpp"
#include "essmc/scenarios.hpp"
#include "essmc/sim.hpp"
#include "essmc/surface.hpp"
#include "essmc/tuner.hpp"

namespace essmc {

using json = nlohmann::json;

/// Recursively rounds every number to the output precision.
inline json rounded(const json& j)
{
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v)) return json(format_number(v));
        return json(round_output(v));
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(rounded(v));
        return out;
    }
    return j;
}

inline std::string dump_json(const json& j)
{
    return rounded(j).dump(2) + "\n";
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
}

/// Object reader that rejects unknown keys and reports the offending path.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    ~ObjectReader() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0) return;
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
        }
    }

    bool has(const std::string& key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string child(const std::string& key) const { return path_ + "." + key; }

    void number(const std::string& key, double& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(child(key) + ": expected a number");
        out = v.get<double>();
    }

    void optional_number(const std::string& key, std::optional<double>& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (v.is_null()) {
            out.reset();
            return;
        }
        if (!v.is_number()) throw ConfigError(child(key) + ": expected a number or null");
        out = v.get<double>();
    }

    void integer(const std::string& key, int& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(child(key) + ": expected an integer");
        out = v.get<int>();
    }

    void seed(const std::string& key, std::uint64_t& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError(child(key) + ": expected a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }

    void boolean(const std::string& key, bool& out)
    {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(child(key) + ": expected a boolean");
        out = v.get<bool>();
    }

    bool string(const std::string& key, std::string& out)
    {
        if (!has(key)) return false;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(child(key) + ": expected a string");
        out = v.get<std::string>();
        return true;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

inline void read_plant(const json& j, const std::string& path, PlantParams& p)
{
    ObjectReader r(j, path);
    r.number("delta", p.delta);
    r.number("u_max", p.u_max);
    r.number("gamma_m", p.gamma_m);
    r.number("gamma_M", p.gamma_M);
    r.number("mu", p.mu);
}

inline void read_detector(const json& j, const std::string& path, DetectorSettings& d)
{
    ObjectReader r(j, path);
    r.integer("confirm_window", d.confirm_window);
    r.number("hysteresis", d.hysteresis);
}

/// Controller fields except u_max, which always comes from the plant.
inline void read_controller(const json& j, const std::string& path, ControllerParams& c, std::string* label = nullptr)
{
    ObjectReader r(j, path);
    std::string s;
    if (label) r.string("label", *label);
    if (r.string("kind", s)) c.kind = controller_kind_from(s);
    r.number("beta1", c.beta1);
    r.number("beta2", c.beta2);
    r.number("alpha_star", c.alpha_star);
    r.number("K", c.K);
    if (r.has("detector")) read_detector(r.at("detector"), r.child("detector"), c.detector);
}

inline void read_disturbance(const json& j, const std::string& path, DisturbanceSpec& d)
{
    ObjectReader r(j, path);
    std::string s;
    if (r.string("kind", s)) d.kind = disturbance_kind_from(s);
    r.number("amplitude", d.amplitude);
    r.number("omega", d.omega);
    r.number("phase", d.phase);
    r.number("hold", d.hold);
    r.seed("seed", d.seed);
    if (r.string("flip", s)) d.flip = flip_mode_from(s);
    r.boolean("invert", d.invert);
    if (d.kind == DisturbanceKind::SurfaceDriven) {
        throw ConfigError(path + ": surface-driven disturbances are produced by the scenario runner");
    }
}

inline void read_simulation(const json& j, const std::string& path, SimConfig& c)
{
    ObjectReader r(j, path);
    r.number("dt", c.dt);
    r.number("t_end", c.t_end);
    r.number("sigma0", c.sigma0);
    r.number("dsigma0", c.dsigma0);
    r.number("v0", c.v0);
    r.integer("record_stride", c.record_stride);
    r.optional_number("gain", c.gain);
    r.number("sigma_floor", c.sigma_floor);
    if (r.has("plant")) read_plant(r.at("plant"), r.child("plant"), c.plant);
    if (r.has("disturbance")) read_disturbance(r.at("disturbance"), r.child("disturbance"), c.disturbance);
    if (r.has("controller")) read_controller(r.at("controller"), r.child("controller"), c.controller);
    c.controller.u_max = c.plant.u_max;
}

inline void read_surface(const json& j, const std::string& path, SurfaceParams& s)
{
    ObjectReader r(j, path);
    r.number("R", s.R);
    r.number("nu", s.nu);
    r.number("v0", s.v0);
    r.seed("seed", s.seed);
    r.number("dt", s.dt);
    r.number("duration", s.duration);
}

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Scan;
    MechanicalParams mech;
    ScenarioTiming timing;
    std::vector<ScenarioController> controllers;
};

inline ScenarioConfig scenario_defaults(ScenarioKind kind)
{
    ScenarioConfig c;
    c.kind = kind;
    c.mech = kind == ScenarioKind::Scan ? MechanicalParams{} : machining_defaults();
    c.controllers = default_comparison_set(c.mech.U_force);
    return c;
}

inline void read_mechanical(const json& j, const std::string& path, MechanicalParams& m)
{
    ObjectReader r(j, path);
    r.number("m", m.m);
    r.number("k", m.k);
    r.number("b", m.b);
    r.number("F", m.F);
    if (r.has("Phi")) {
        r.number("Phi", m.Phi);
        m.phi.amplitude = m.Phi;
    }
    r.number("U_force", m.U_force);
    r.number("X", m.X);
    r.number("x_ref", m.x_ref);
    r.number("clamp_tolerance", m.clamp_tolerance);
    r.optional_number("delta_ratio_override", m.delta_ratio_override);
    r.number("target_p2p", m.target_p2p);
    r.boolean("calibrate", m.calibrate);
    if (r.has("phi")) read_disturbance(r.at("phi"), r.child("phi"), m.phi);
}

inline void read_timing(const json& j, const std::string& path, ScenarioTiming& t)
{
    ObjectReader r(j, path);
    r.number("dt", t.dt);
    r.number("t_end", t.t_end);
    r.integer("record_stride", t.record_stride);
    r.number("settle_time", t.settle_time);
    r.number("eps_sigma", t.eps_sigma);
}

inline ScenarioConfig read_scenario(const json& j, const std::string& path)
{
    ScenarioKind kind = ScenarioKind::Scan;
    if (j.is_object() && j.contains("kind")) {
        if (!j.at("kind").is_string()) throw ConfigError(path + ".kind: expected a string");
        kind = scenario_kind_from(j.at("kind").get<std::string>());
    }
    ScenarioConfig c = scenario_defaults(kind);
    ObjectReader r(j, path);
    r.has("kind");
    if (r.has("mechanical")) read_mechanical(r.at("mechanical"), r.child("mechanical"), c.mech);
    if (r.has("surface")) read_surface(r.at("surface"), r.child("surface"), c.mech.surface);
    if (r.has("timing")) read_timing(r.at("timing"), r.child("timing"), c.timing);
    if (r.has("controllers")) {
        const auto& arr = r.at("controllers");
        if (!arr.is_array() || arr.empty()) throw ConfigError(r.child("controllers") + ": expected a non-empty array");
        c.controllers.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ScenarioController sc;
            sc.params.kind = ControllerKind::Sosmc;
            read_controller(arr[i], r.child("controllers") + "[" + std::to_string(i) + "]", sc.params, &sc.label);
            if (sc.label.empty()) sc.label = std::string(to_string(sc.params.kind)) + "-" + std::to_string(i);
            c.controllers.push_back(sc);
        }
    }
    for (auto& sc : c.controllers) sc.params.u_max = c.mech.U_force;
    std::set<std::string> labels;
    for (const auto& sc : c.controllers) {
        if (!labels.insert(sc.label).second) throw ConfigError(path + ".controllers: duplicate label '" + sc.label + "'");
        for (char ch : sc.label) {
            if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) {
                throw ConfigError(path + ".controllers: label '" + sc.label + "' must match [A-Za-z0-9_-]+");
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline json to_json(const PlantParams& p)
{
    return {{"delta", p.delta}, {"u_max", p.u_max}, {"gamma_m", p.gamma_m}, {"gamma_M", p.gamma_M}, {"mu", p.mu}};
}

inline json to_json(const ControllerParams& c)
{
    return {{"kind", std::string(to_string(c.kind))},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"alpha_star", c.alpha_star},
            {"K", c.K},
            {"detector", {{"confirm_window", c.detector.confirm_window}, {"hysteresis", c.detector.hysteresis}}}};
}

inline json to_json(const DisturbanceSpec& d)
{
    return {{"kind", std::string(to_string(d.kind))}, {"amplitude", d.amplitude}, {"omega", d.omega},
            {"phase", d.phase}, {"hold", d.hold}, {"seed", d.seed}, {"flip", std::string(to_string(d.flip))},
            {"invert", d.invert}};
}

inline json to_json(const SimConfig& c)
{
    json j = {{"dt", c.dt},
              {"t_end", c.t_end},
              {"sigma0", c.sigma0},
              {"dsigma0", c.dsigma0},
              {"v0", c.v0},
              {"record_stride", c.record_stride},
              {"sigma_floor", c.sigma_floor},
              {"plant", to_json(c.plant)},
              {"disturbance", to_json(c.disturbance)},
              {"controller", to_json(c.controller)}};
    j["gain"] = c.gain ? json(*c.gain) : json(nullptr);
    return j;
}

inline json to_json(const SurfaceParams& s)
{
    return {{"R", s.R}, {"nu", s.nu}, {"v0", s.v0}, {"seed", s.seed}, {"dt", s.dt}, {"duration", s.duration}};
}

inline json to_json(const ScenarioConfig& c)
{
    const auto& m = c.mech;
    json mech = {{"m", m.m},
                 {"k", m.k},
                 {"b", m.b},
                 {"F", m.F},
                 {"Phi", m.Phi},
                 {"U_force", m.U_force},
                 {"X", m.X},
                 {"x_ref", m.x_ref},
                 {"clamp_tolerance", m.clamp_tolerance},
                 {"target_p2p", m.target_p2p},
                 {"calibrate", m.calibrate},
                 {"phi", to_json(m.phi)}};
    mech["delta_ratio_override"] = m.delta_ratio_override ? json(*m.delta_ratio_override) : json(nullptr);
    json ctrls = json::array();
    for (const auto& sc : c.controllers) {
        json cj = to_json(sc.params);
        cj["label"] = sc.label;
        ctrls.push_back(cj);
    }
    return {{"kind", std::string(to_string(c.kind))},
            {"mechanical", mech},
            {"surface", to_json(m.surface)},
            {"timing",
             {{"dt", c.timing.dt},
              {"t_end", c.timing.t_end},
              {"record_stride", c.timing.record_stride},
              {"settle_time", c.timing.settle_time},
              {"eps_sigma", c.timing.eps_sigma}}},
            {"controllers", ctrls}};
}

inline json to_json(const ValidationReport& r)
{
    return {{"feasible", r.feasible},
            {"twisting", r.twisting},
            {"monotonic", r.monotonic},
            {"recovery", r.recovery},
            {"violations", r.violations}};
}

inline json to_json(const ConvergenceReport& r)
{
    json j = {{"converged", r.converged}, {"zero_crossings", r.zero_crossings}, {"final_E", r.final_E}};
    j["t_converge"] = r.converged ? json(r.t_converge) : json(nullptr);
    return j;
}

inline json to_json(const ChatterPrediction& p)
{
    json j = {{"method", std::string(to_string(p.method))},
              {"phase_deg", p.phase_deg},
              {"mu", p.mu},
              {"beta1", p.beta1},
              {"beta2", p.beta2},
              {"U", p.U},
              {"valid", p.valid}};
    j["omega_c"] = p.valid ? json(p.omega_c) : json(nullptr);
    j["sigma_A"] = p.valid ? json(p.sigma_A) : json(nullptr);
    return j;
}

inline json to_json(const ComparisonEntry& e)
{
    json j = {{"label", e.label},
              {"kind", std::string(to_string(e.kind))},
              {"beta1", e.beta1},
              {"beta2", e.beta2},
              {"final_E", e.final_E},
              {"fuel_ratio", e.fuel_ratio},
              {"tracking_max", e.tracking_max},
              {"tracking_rms", e.tracking_rms},
              {"converged", e.converged},
              {"fuel_below_bound", e.fuel_below_bound},
              {"clamp_count", e.clamp_count}};
    j["t_converge"] = e.converged ? json(e.t_converge) : json(nullptr);
    j["t_reach"] = std::isfinite(e.t_reach) ? json(e.t_reach) : json(nullptr);
    return j;
}

inline json to_json(const ScenarioInfo& i)
{
    return {{"kind", std::string(to_string(i.kind))},
            {"natural_frequency", i.natural_frequency},
            {"delta_physical", i.delta_physical},
            {"u_normalized", i.u_normalized},
            {"delta_ratio_physical", i.delta_ratio_physical},
            {"delta_ratio_used", i.delta_ratio_used},
            {"surface_accel_bound", i.surface_accel_bound},
            {"surface_p2p", i.surface_p2p},
            {"surface_R", i.surface_R},
            {"surface_omega0", i.surface_omega0},
            {"warnings", i.warnings}};
}

inline json trace_sidecar(const Trace& t, const ConvergenceReport& r, const Tolerances& tol)
{
    return {{"config_digest", t.config_digest},
            {"seed", t.seed},
            {"rng", std::string(kRngName)},
            {"dt", t.dt},
            {"record_dt", t.record_dt},
            {"records", t.size()},
            {"warnings", t.warnings},
            {"tolerances", {{"eps_sigma", tol.eps_sigma}, {"eps_dsigma", tol.eps_dsigma}}},
            {"convergence", to_json(r)}};
}

// ---------------------------------------------------------------------------
// Per-command sections
// ---------------------------------------------------------------------------

struct TuneConfig {
    double delta_ratio = 0.3;
    TuningOptions options;
};

struct ChatterConfig {
    double mu = 0.01;
    double beta1 = 0.85;
    double beta2 = 0.27;
    double U = 1.0;
    bool simulate = false;  ///< cross-check against a lagged closed-loop run
    double dt = 1e-5;
    double t_end = 6.0;
    double sigma0 = 0.01;
};

struct SurfaceConfig {
    SurfaceParams params;
    int segments = 8;
    std::optional<double> target_p2p;  ///< rescales R when set
};

struct FuelOptimalConfig {
    double K = 2.0;
    double U = 1.0;
    double dt = 1e-4;
    double t_end = 100.0;
    int record_stride = 10;
    std::vector<std::array<double, 2>> starts{{1.0, 1.0}, {-1.5, 0.5}};
};

inline void read_tune(const json& j, const std::string& path, TuneConfig& c)
{
    ObjectReader r(j, path);
    std::string s;
    r.number("delta_ratio", c.delta_ratio);
    r.integer("grid", c.options.resolution);
    r.optional_number("jhat_max", c.options.jhat_max);
    r.number("jhat_max_factor", c.options.jhat_max_factor);
    if (r.string("model", s)) c.options.model = worst_case_model_from(s);
}

inline void read_chatter(const json& j, const std::string& path, ChatterConfig& c)
{
    ObjectReader r(j, path);
    r.number("mu", c.mu);
    r.number("beta1", c.beta1);
    r.number("beta2", c.beta2);
    r.number("U", c.U);
    r.boolean("simulate", c.simulate);
    r.number("dt", c.dt);
    r.number("t_end", c.t_end);
    r.number("sigma0", c.sigma0);
}

inline void read_surface_section(const json& j, const std::string& path, SurfaceConfig& c)
{
    ObjectReader r(j, path);
    r.number("R", c.params.R);
    r.number("nu", c.params.nu);
    r.number("v0", c.params.v0);
    r.seed("seed", c.params.seed);
    r.number("dt", c.params.dt);
    r.number("duration", c.params.duration);
    r.integer("segments", c.segments);
    r.optional_number("target_p2p", c.target_p2p);
}

inline void read_fueloptimal(const json& j, const std::string& path, FuelOptimalConfig& c)
{
    ObjectReader r(j, path);
    r.number("K", c.K);
    r.number("U", c.U);
    r.number("dt", c.dt);
    r.number("t_end", c.t_end);
    r.integer("record_stride", c.record_stride);
    if (r.has("starts")) {
        const auto& arr = r.at("starts");
        if (!arr.is_array() || arr.empty()) throw ConfigError(r.child("starts") + ": expected a non-empty array");
        c.starts.clear();
        for (const auto& p : arr) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ConfigError(r.child("starts") + ": each start must be [x1, x2]");
            }
            c.starts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
}

inline json to_json(const TuneConfig& c)
{
    json j = {{"delta_ratio", c.delta_ratio},
              {"grid", c.options.resolution},
              {"jhat_max_factor", c.options.jhat_max_factor},
              {"model", std::string(to_string(c.options.model))}};
    j["jhat_max"] = c.options.jhat_max ? json(*c.options.jhat_max) : json(nullptr);
    return j;
}

inline json to_json(const ChatterConfig& c)
{
    return {{"mu", c.mu},       {"beta1", c.beta1}, {"beta2", c.beta2},   {"U", c.U},
            {"simulate", c.simulate}, {"dt", c.dt}, {"t_end", c.t_end}, {"sigma0", c.sigma0}};
}

inline json to_json(const SurfaceConfig& c)
{
    json j = to_json(c.params);
    j["segments"] = c.segments;
    j["target_p2p"] = c.target_p2p ? json(*c.target_p2p) : json(nullptr);
    return j;
}

inline json to_json(const FuelOptimalConfig& c)
{
    json starts = json::array();
    for (const auto& p : c.starts) starts.push_back({p[0], p[1]});
    return {{"K", c.K}, {"U", c.U}, {"dt", c.dt}, {"t_end", c.t_end}, {"record_stride", c.record_stride},
            {"starts", starts}};
}

/// Parsed configuration document. Every section present is validated.
struct ConfigDocument {
    std::optional<SimConfig> simulation;
    std::optional<ScenarioConfig> scenario;
    std::optional<TuneConfig> tune;
    std::optional<ChatterConfig> chatter;
    std::optional<SurfaceConfig> surface;
    std::optional<FuelOptimalConfig> fueloptimal;
};

inline ConfigDocument read_document(const json& j)
{
    ConfigDocument doc;
    ObjectReader r(j, "$");
    r.has("$schema");
    r.has("description");
    if (r.has("simulation")) read_simulation(r.at("simulation"), "$.simulation", doc.simulation.emplace());
    if (r.has("scenario")) doc.scenario = read_scenario(r.at("scenario"), "$.scenario");
    if (r.has("tune")) read_tune(r.at("tune"), "$.tune", doc.tune.emplace());
    if (r.has("chatter")) read_chatter(r.at("chatter"), "$.chatter", doc.chatter.emplace());
    if (r.has("surface")) read_surface_section(r.at("surface"), "$.surface", doc.surface.emplace());
    if (r.has("fueloptimal")) read_fueloptimal(r.at("fueloptimal"), "$.fueloptimal", doc.fueloptimal.emplace());
    return doc;
}

inline json to_json(const ConfigDocument& d)
{
    json j = json::object();
    if (d.simulation) j["simulation"] = to_json(*d.simulation);
    if (d.scenario) j["scenario"] = to_json(*d.scenario);
    if (d.tune) j["tune"] = to_json(*d.tune);
    if (d.chatter) j["chatter"] = to_json(*d.chatter);
    if (d.surface) j["surface"] = to_json(*d.surface);
    if (d.fueloptimal) j["fueloptimal"] = to_json(*d.fueloptimal);
    return j;
}

}  // namespace essmc
