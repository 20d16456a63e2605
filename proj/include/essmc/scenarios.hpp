/**
 * @file scenarios.hpp
 * @brief Scanning (x -> x0 + X) and machining (x -> x_ref) of a moving rough
 *        surface, and the controller comparison harness.
 *
 * The full mechanical equation m x'' = k(x0 - x) + b(x0' - x') + u + phi is
 * integrated; controllers only see the measured sliding variable.
 */
#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "essmc/controllers.hpp"
#include "essmc/core.hpp"
#include "essmc/disturbance.hpp"
#include "essmc/sim.hpp"
#include "essmc/surface.hpp"

namespace essmc {

enum class ScenarioKind { Scan, Stabilization };

inline std::string_view to_string(ScenarioKind k)
{
    return k == ScenarioKind::Scan ? "scan" : "stabilization";
}

inline ScenarioKind scenario_kind_from(std::string_view s)
{
    if (s == "scan") return ScenarioKind::Scan;
    if (s == "stabilization" || s == "machining") return ScenarioKind::Stabilization;
    throw ConfigError("unknown scenario kind '" + std::string(s) + "'");
}

inline DisturbanceSpec default_phi()
{
    DisturbanceSpec d;
    d.kind = DisturbanceKind::SeededNoise;
    d.amplitude = 0.00002;
    d.hold = 1e-3;
    d.seed = 7;
    return d;
}

struct MechanicalParams {
    double m = 0.0005;
    double k = 0.73;
    double b = 0.0001;
    double F = 0.00001;
    double Phi = 0.00002;
    double U_force = 0.2;
    double X = 0.2e-6;      ///< scan offset
    double x_ref = 0.0;     ///< stabilization reference
    double clamp_tolerance = 0.05;  ///< coupling beyond (1 + tol) F is an error
    std::optional<double> delta_ratio_override = 0.3;
    double target_p2p = 0.5e-6;     ///< surface calibration target when R is not given
    bool calibrate = true;
    SurfaceParams surface;
    DisturbanceSpec phi = default_phi();

    double natural_frequency() const { return std::sqrt(k / m); }

    void validate() const
    {
        if (!(m > 0.0) || !(k > 0.0)) throw ConfigError("mechanical m and k must be > 0");
        if (!(b >= 0.0) || !(F >= 0.0) || !(Phi >= 0.0)) throw ConfigError("mechanical b, F, Phi must be >= 0");
        if (!(U_force > F + Phi)) throw ConfigError("U_force must exceed F + Phi");
        if (!(clamp_tolerance >= 0.0)) throw ConfigError("clamp_tolerance must be >= 0");
        if (delta_ratio_override && !(*delta_ratio_override >= 0.0 && *delta_ratio_override < 1.0)) {
            throw ConfigError("delta_ratio_override must lie in [0, 1)");
        }
        surface.validate();
    }
};

/// Machining variant: stiffer tool, heavier mover, authority and bounds scaled alike.
inline MechanicalParams machining_defaults()
{
    MechanicalParams p;
    p.k *= 100.0;
    p.m *= 2.0;
    p.b *= 10.0;
    p.F *= 100.0;
    p.Phi *= 100.0;
    p.U_force *= 100.0;
    p.phi.amplitude = p.Phi;
    p.x_ref = 0.0;
    return p;
}

struct ScenarioTiming {
    double dt = 1e-6;
    double t_end = 10.0;
    int record_stride = 1000;
    double settle_time = 0.05;  ///< metrics exclude [0, settle_time)
    double eps_sigma = 1e-9;    ///< convergence band on |sigma|, m
};

struct ScenarioController {
    std::string label;
    ControllerParams params;  ///< u_max in newtons, equal to U_force
};

struct ScenarioTrace {
    std::vector<double> t, x, x0, rel, sigma, u, E;
};

struct ComparisonEntry {
    std::string label;
    ControllerKind kind = ControllerKind::Off;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double final_E = 0.0;
    double fuel_ratio = 0.0;      ///< E(t_end)/(U t_end)
    double tracking_max = 0.0;    ///< max |sigma| after settle_time
    double tracking_rms = 0.0;
    bool converged = false;
    double t_converge = std::nan("");
    double t_reach = std::nan("");  ///< first extremum (main phase entry)
    bool fuel_below_bound = true;   ///< E(t) <= U t after the reaching phase
    long clamp_count = 0;
};

struct ScenarioInfo {
    ScenarioKind kind = ScenarioKind::Scan;
    double natural_frequency = 0.0;
    double delta_physical = 0.0;        ///< (F + Phi)/m + surface acceleration bound
    double u_normalized = 0.0;          ///< U_force/m
    double delta_ratio_physical = 0.0;
    double delta_ratio_used = 0.0;
    double surface_accel_bound = 0.0;   ///< max |x0''| of the realization (second differences)
    double surface_p2p = 0.0;
    double surface_R = 0.0;
    double surface_omega0 = 0.0;
    std::vector<std::string> warnings;
};

struct ComparisonReport {
    ScenarioInfo info;
    std::vector<ComparisonEntry> entries;
    std::vector<ScenarioTrace> traces;
};

inline double surface_accel_bound(const SurfaceProfile& s)
{
    double peak = 0.0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        peak = std::fmax(peak, std::fabs(s.x0[k + 1] - 2.0 * s.x0[k] + s.x0[k - 1]));
    }
    return peak / (s.dt * s.dt);
}

/// Surface realization shared by every controller of a run.
inline SurfaceParams scenario_surface_params(const MechanicalParams& mech, const ScenarioTiming& timing)
{
    SurfaceParams sp = mech.surface;
    sp.duration = std::fmax(sp.duration, timing.t_end);
    if (mech.calibrate) sp = calibrate_surface(sp, mech.target_p2p);
    return sp;
}

inline ScenarioInfo scenario_info(ScenarioKind kind, const MechanicalParams& mech, const SurfaceParams& sp,
                                  const SurfaceProfile& surface)
{
    ScenarioInfo info;
    info.kind = kind;
    info.natural_frequency = mech.natural_frequency();
    info.surface_accel_bound = kind == ScenarioKind::Scan ? surface_accel_bound(surface) : 0.0;
    info.delta_physical = (mech.F + mech.Phi) / mech.m + info.surface_accel_bound;
    info.u_normalized = mech.U_force / mech.m;
    info.delta_ratio_physical = info.delta_physical / info.u_normalized;
    info.delta_ratio_used = mech.delta_ratio_override.value_or(info.delta_ratio_physical);
    info.surface_p2p = peak_to_peak(surface.x0);
    info.surface_R = sp.R;
    info.surface_omega0 = sp.omega0();
    return info;
}

/// Normalized plant used for controller validation.
inline PlantParams scenario_plant(const ScenarioInfo& info)
{
    PlantParams p;
    p.u_max = info.u_normalized;
    p.delta = info.delta_ratio_used * info.u_normalized;
    return p;
}

inline void validate_scenario_controller(const ScenarioController& c, const MechanicalParams& mech,
                                         const ScenarioInfo& info)
{
    if (c.params.u_max != mech.U_force) throw ConfigError("controller '" + c.label + "': u_max must equal U_force");
    if (c.params.kind == ControllerKind::Off) return;
    ControllerParams normalized = c.params;
    normalized.u_max = info.u_normalized;
    const auto report = validate_params(normalized, scenario_plant(info));
    if (!report.feasible) {
        std::string msg = "controller '" + c.label + "' infeasible at delta/U = " + format_number(info.delta_ratio_used) + ":";
        for (const auto& v : report.violations) msg += " [" + v + "]";
        throw InfeasibleError(msg);
    }
}

/// One controller on a precomputed surface.
inline std::pair<ScenarioTrace, ComparisonEntry> run_scenario_on(ScenarioKind kind, const MechanicalParams& mech,
                                                                  const SurfaceProfile& surface,
                                                                  const ScenarioController& ctrl,
                                                                  const ScenarioTiming& timing)
{
    if (!(timing.dt > 0.0) || !(timing.t_end >= timing.dt) || timing.record_stride < 1) {
        throw ConfigError("scenario timing needs dt > 0, t_end >= dt, record_stride >= 1");
    }
    Controller controller(ctrl.params);
    Disturbance phi(mech.phi, mech.Phi, timing.dt);
    const double offset = kind == ScenarioKind::Scan ? mech.X : mech.x_ref;
    const bool tracks_surface = kind == ScenarioKind::Scan;
    const std::int64_t n = step_count(timing.t_end, timing.dt);
    const double U = ctrl.params.u_max;

    ScenarioTrace tr;
    ComparisonEntry e;
    e.label = ctrl.label;
    e.kind = ctrl.params.kind;
    e.beta1 = ctrl.params.beta1;
    e.beta2 = ctrl.params.kind == ControllerKind::EsSosmc ? ctrl.params.beta2 : ctrl.params.beta1;

    double x = 0.0, dx = 0.0, E = 0.0;
    double sq = 0.0;
    std::int64_t counted = 0;
    double last_violation = -1.0;
    bool reached = false;
    for (std::int64_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * timing.dt;
        const auto [x0, dx0] = surface.at(t);
        const double ref = tracks_surface ? x0 + offset : offset;
        const double dref = tracks_surface ? dx0 : 0.0;
        const double sigma = x - ref;
        const double u = controller(sigma, dx - dref);

        if (!reached && controller.state().phase == Phase::Main) {
            reached = true;
            e.t_reach = t;
        }
        if (std::fabs(sigma) > timing.eps_sigma) last_violation = t;
        if (t >= timing.settle_time) {
            e.tracking_max = std::fmax(e.tracking_max, std::fabs(sigma));
            sq += sigma * sigma;
            ++counted;
        }
        if (reached && E > U * t * (1.0 + 1e-12)) e.fuel_below_bound = false;
        if (k % timing.record_stride == 0) {
            tr.t.push_back(t);
            tr.x.push_back(x);
            tr.x0.push_back(x0);
            tr.rel.push_back(x - x0);
            tr.sigma.push_back(sigma);
            tr.u.push_back(u);
            tr.E.push_back(E);
        }
        if (k == n) break;

        double coupling = mech.k * (x0 - x) + mech.b * (dx0 - dx);
        if (std::fabs(coupling) > mech.F) {
            if (std::fabs(coupling) > (1.0 + mech.clamp_tolerance) * mech.F) {
                throw DomainError("surface coupling " + format_number(coupling) + " N exceeds the declared bound F = " +
                                  format_number(mech.F) + " N at t = " + format_number(t));
            }
            ++e.clamp_count;
            coupling = std::copysign(mech.F, coupling);
        }
        PlantState s{x, dx, 0.0};
        const double f = phi.sample(t, s, u);
        const double acc = (coupling + u + f) / mech.m;
        dx += acc * timing.dt;
        x += dx * timing.dt;
        E += std::fabs(u) * timing.dt;
        if (!std::isfinite(x) || !std::isfinite(dx)) throw InvalidStateError("scenario state diverged");
    }
    e.final_E = E;
    e.fuel_ratio = E / (U * timing.t_end);
    e.tracking_rms = counted > 0 ? std::sqrt(sq / static_cast<double>(counted)) : 0.0;
    e.converged = last_violation < timing.t_end;
    if (e.converged) e.t_converge = last_violation < 0.0 ? 0.0 : last_violation + timing.dt;
    return {std::move(tr), e};
}

inline ComparisonReport compare_controllers(ScenarioKind kind, const MechanicalParams& mech,
                                            const std::vector<ScenarioController>& controllers,
                                            const ScenarioTiming& timing)
{
    mech.validate();
    const SurfaceParams sp = scenario_surface_params(mech, timing);
    const SurfaceProfile surface = generate_surface(sp);
    ComparisonReport report;
    report.info = scenario_info(kind, mech, sp, surface);
    if (report.info.delta_ratio_physical >= 1.0) {
        report.info.warnings.emplace_back("physical delta/U >= 1: the plant is not controllable by U_force");
    }
    for (const auto& c : controllers) validate_scenario_controller(c, mech, report.info);
    for (const auto& c : controllers) {
        auto [trace, entry] = run_scenario_on(kind, mech, surface, c, timing);
        report.traces.push_back(std::move(trace));
        report.entries.push_back(std::move(entry));
    }
    return report;
}

inline ComparisonReport run_scan_scenario(const MechanicalParams& mech, const ScenarioController& controller,
                                          const ScenarioTiming& timing)
{
    return compare_controllers(ScenarioKind::Scan, mech, {controller}, timing);
}

inline ComparisonReport run_stabilization_scenario(const MechanicalParams& mech, const ScenarioController& controller,
                                                   const ScenarioTiming& timing)
{
    return compare_controllers(ScenarioKind::Stabilization, mech, {controller}, timing);
}

/// Default comparison set: SOSMC (0.65) and ES-SOSMC (0.85, 0.27), (0.97, 0.05).
inline std::vector<ScenarioController> default_comparison_set(double U_force)
{
    ControllerParams sosmc;
    sosmc.kind = ControllerKind::Sosmc;
    sosmc.u_max = U_force;
    sosmc.beta1 = 0.65;
    sosmc.beta2 = 0.65;
    ControllerParams es1 = sosmc;
    es1.kind = ControllerKind::EsSosmc;
    es1.beta1 = 0.85;
    es1.beta2 = 0.27;
    ControllerParams es2 = es1;
    es2.beta1 = 0.97;
    es2.beta2 = 0.05;
    return {{"sosmc", sosmc}, {"es-sosmc-i", es1}, {"es-sosmc-ii", es2}};
}

inline void write_scenario_csv(std::ostream& os, const ScenarioTrace& tr)
{
    os << "t,x,x0,x_minus_x0,sigma,u,E\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << format_number(tr.t[k]) << ',' << format_number(tr.x[k]) << ',' << format_number(tr.x0[k]) << ','
           << format_number(tr.rel[k]) << ',' << format_number(tr.sigma[k]) << ',' << format_number(tr.u[k]) << ','
           << format_number(tr.E[k]) << '\n';
    }
}

}  // namespace essmc
