// essmc: command-line front end.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "essmc/essmc.hpp"

namespace fs = std::filesystem;
using namespace essmc;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kInfeasible = 3, kDomain = 4, kRuntime = 5 };

void report_error(int code, std::string_view kind, const std::string& message)
{
    json line = {{"error", std::string(kind)}, {"exit_code", code}, {"message", message}};
    std::cerr << line.dump() << std::endl;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help)
{
    cmd->add_option("--config", c.config, "JSON config document or a previous run manifest");
    cmd->add_option("--seed", c.seed, "RNG seed overriding the config");
    cmd->add_option("--out", c.out, out_help);
    cmd->add_flag("--dry-run", c.dry_run, "validate the resolved config and write only the manifest");
}

std::string default_out_dir()
{
    if (const char* env = std::getenv("ESSMC_OUT_DIR"); env && *env) return env;
    return "essmc-out";
}

class Run {
public:
    Run(std::string command, std::vector<std::string> argv) : command_(std::move(command)), argv_(std::move(argv)) {}

    ConfigDocument load(const Common& c)
    {
        if (c.config.empty()) return {};
        json j = read_json_file(c.config);
        if (j.is_object() && j.contains("manifest_version")) {
            if (!j.contains("command") || j.at("command") != command_) {
                throw ConfigError("manifest was written by a different command");
            }
            if (!j.contains("config")) throw ConfigError("manifest has no config");
            j = j.at("config");
        }
        return read_document(j);
    }

    void set_dir(const fs::path& dir, const std::string& manifest_name = "manifest.json")
    {
        dir_ = dir;
        manifest_ = dir / manifest_name;
    }

    void write(const std::string& name, const std::string& content)
    {
        fs::create_directories(dir_);
        const fs::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        os << content;
        os.close();
        if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
        outputs_.push_back(name);
    }

    template <class F>
    void write_with(const std::string& name, F&& fill)
    {
        std::ostringstream os;
        fill(os);
        write(name, os.str());
    }

    void finish(const json& config, std::optional<std::uint64_t> seed, bool dry_run)
    {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json m = {{"manifest_version", 1},
                  {"command", command_},
                  {"argv", argv_},
                  {"config", config},
                  {"version", std::string(kVersion)},
                  {"rng", std::string(kRngName)},
                  {"dry_run", dry_run},
                  {"outputs", outputs_},
                  {"wall_clock_seconds", wall}};
        m["seed"] = seed ? json(*seed) : json(nullptr);
        fs::create_directories(dir_);
        std::ofstream os(manifest_, std::ios::binary);
        os << dump_json(m);
        if (!os) throw std::runtime_error("cannot write '" + manifest_.string() + "'");
    }

private:
    std::string command_;
    std::vector<std::string> argv_;
    fs::path dir_;
    fs::path manifest_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path out_dir(const Common& c)
{
    return c.out.empty() ? fs::path(default_out_dir()) : fs::path(c.out);
}

void write_origin_csv(std::ostream& os, const OriginRun& r)
{
    os << "t,x1,x2,u,E\n";
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        os << format_number(r.t[k]) << ',' << format_number(r.sigma[k]) << ',' << format_number(r.dsigma[k]) << ','
           << format_number(r.u[k]) << ',' << format_number(r.E[k]) << '\n';
    }
}

// ---------------------------------------------------------------------------

struct SimFlags {
    std::optional<double> dt, t_end, sigma0, dsigma0, beta1, beta2, alpha_star, K, delta, u_max, mu, amplitude;
    std::optional<std::string> controller, disturbance, flip, scenario, label;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f, bool closed_loop, bool scenario)
{
    cmd->add_option("--dt", f.dt, "integration step");
    cmd->add_option("--t-end", f.t_end, "horizon");
    if (scenario) cmd->add_option("--scenario", f.scenario, "scan | stabilization | machining");
    if (!closed_loop) return;
    if (scenario) cmd->add_option("--label", f.label, "scenario controller to run (default: first)");
    cmd->add_option("--sigma0", f.sigma0);
    cmd->add_option("--dsigma0", f.dsigma0);
    cmd->add_option("--controller", f.controller, "off | time-optimal | fuel-optimal | sosmc | es-sosmc");
    cmd->add_option("--beta1", f.beta1);
    cmd->add_option("--beta2", f.beta2);
    cmd->add_option("--alpha-star", f.alpha_star);
    cmd->add_option("--K", f.K);
    cmd->add_option("--delta", f.delta);
    cmd->add_option("--u-max", f.u_max);
    cmd->add_option("--mu", f.mu);
    cmd->add_option("--disturbance", f.disturbance, "constant | sinusoid | seeded-noise | worst-case-flip");
    cmd->add_option("--amplitude", f.amplitude);
    cmd->add_option("--flip", f.flip, "oppose-control | aid-motion | outer-envelope");
}

void apply(SimConfig& c, const SimFlags& f, std::optional<std::uint64_t> seed)
{
    if (f.dt) c.dt = *f.dt;
    if (f.t_end) c.t_end = *f.t_end;
    if (f.sigma0) c.sigma0 = *f.sigma0;
    if (f.dsigma0) c.dsigma0 = *f.dsigma0;
    if (f.controller) c.controller.kind = controller_kind_from(*f.controller);
    if (f.beta1) c.controller.beta1 = *f.beta1;
    if (f.beta2) c.controller.beta2 = *f.beta2;
    if (f.alpha_star) c.controller.alpha_star = *f.alpha_star;
    if (f.K) c.controller.K = *f.K;
    if (f.delta) c.plant.delta = *f.delta;
    if (f.u_max) c.plant.u_max = *f.u_max;
    if (f.mu) c.plant.mu = *f.mu;
    if (f.disturbance) c.disturbance.kind = disturbance_kind_from(*f.disturbance);
    if (f.amplitude) c.disturbance.amplitude = *f.amplitude;
    if (f.flip) c.disturbance.flip = flip_mode_from(*f.flip);
    if (seed) c.disturbance.seed = *seed;
    c.controller.u_max = c.plant.u_max;
}

ScenarioConfig resolve_scenario(ConfigDocument& doc, const SimFlags& f, std::optional<std::uint64_t> seed)
{
    ScenarioConfig sc;
    if (doc.scenario) {
        sc = *doc.scenario;
        if (f.scenario && scenario_kind_from(*f.scenario) != sc.kind) {
            throw ConfigError("--scenario disagrees with the config scenario kind");
        }
    } else {
        sc = scenario_defaults(f.scenario ? scenario_kind_from(*f.scenario) : ScenarioKind::Scan);
    }
    if (f.dt) sc.timing.dt = *f.dt;
    if (f.t_end) sc.timing.t_end = *f.t_end;
    if (seed) {
        sc.mech.surface.seed = *seed;
        sc.mech.phi.seed = *seed + 1;
    }
    sc.mech.validate();
    return sc;
}

json scenario_summary(const ComparisonReport& r)
{
    json entries = json::array();
    for (const auto& e : r.entries) entries.push_back(to_json(e));
    return {{"scenario", to_json(r.info)}, {"controllers", entries}};
}

int cmd_simulate(Run& run, const Common& common, const SimFlags& flags)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    const bool scenario = doc.scenario.has_value() || flags.scenario.has_value();
    if (scenario && doc.simulation) throw ConfigError("simulate takes either a simulation or a scenario section");

    if (scenario) {
        ConfigDocument resolved;
        resolved.scenario = resolve_scenario(doc, flags, common.seed);
        auto& sc = *resolved.scenario;
        if (flags.label) {
            std::erase_if(sc.controllers, [&](const ScenarioController& c) { return c.label != *flags.label; });
            if (sc.controllers.empty()) throw ConfigError("no scenario controller labelled '" + *flags.label + "'");
        }
        sc.controllers.resize(1);
        const json cfg = to_json(resolved);
        if (!common.dry_run) {
            const ComparisonReport r = compare_controllers(sc.kind, sc.mech, sc.controllers, sc.timing);
            run.write_with("scenario_" + sc.controllers[0].label + ".csv",
                           [&](std::ostream& os) { write_scenario_csv(os, r.traces[0]); });
            run.write("summary.json", dump_json(scenario_summary(r)));
        } else {
            const SurfaceParams sp = scenario_surface_params(sc.mech, sc.timing);
            validate_scenario_controller(sc.controllers[0], sc.mech,
                                         scenario_info(sc.kind, sc.mech, sp, generate_surface(sp)));
        }
        run.finish(cfg, common.seed ? common.seed : std::optional<std::uint64_t>(sc.mech.surface.seed), common.dry_run);
        return kOk;
    }

    ConfigDocument resolved;
    SimConfig& c = resolved.simulation.emplace(doc.simulation.value_or(SimConfig{}));
    apply(c, flags, common.seed);
    const auto warnings = validate_config(c);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!common.dry_run) {
        const Trace trace = run_closed_loop(c);
        const Tolerances tol = default_tolerances(c.sigma0, c.plant.u_max * c.gain.value_or(c.plant.gamma_m), c.dt);
        const ConvergenceReport rep = detect_convergence(trace, tol.eps_sigma, tol.eps_dsigma);
        run.write_with("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
        run.write("trace.json", dump_json(trace_sidecar(trace, rep, tol)));
    }
    run.finish(to_json(resolved), c.disturbance.seed, common.dry_run);
    return kOk;
}

int cmd_compare(Run& run, const Common& common, const SimFlags& flags)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    ConfigDocument resolved;
    resolved.scenario = resolve_scenario(doc, flags, common.seed);
    const auto& sc = *resolved.scenario;
    if (!common.dry_run) {
        const ComparisonReport r = compare_controllers(sc.kind, sc.mech, sc.controllers, sc.timing);
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            run.write_with(r.entries[i].label + ".csv", [&](std::ostream& os) { write_scenario_csv(os, r.traces[i]); });
        }
        run.write("comparison.json", dump_json(scenario_summary(r)));
    } else {
        const SurfaceParams sp = scenario_surface_params(sc.mech, sc.timing);
        const ScenarioInfo info = scenario_info(sc.kind, sc.mech, sp, generate_surface(sp));
        for (const auto& c : sc.controllers) validate_scenario_controller(c, sc.mech, info);
    }
    run.finish(to_json(resolved), sc.mech.surface.seed, common.dry_run);
    return kOk;
}

struct TuneFlags {
    std::optional<double> delta_ratio, jhat_max, jhat_max_factor;
    std::optional<int> grid;
    std::optional<std::string> model;
};

int cmd_tune(Run& run, const Common& common, const TuneFlags& f)
{
    ConfigDocument doc = run.load(common);
    ConfigDocument resolved;
    TuneConfig& c = resolved.tune.emplace(doc.tune.value_or(TuneConfig{}));
    if (f.delta_ratio) c.delta_ratio = *f.delta_ratio;
    if (f.grid) c.options.resolution = *f.grid;
    if (f.jhat_max) c.options.jhat_max = *f.jhat_max;
    if (f.jhat_max_factor) c.options.jhat_max_factor = *f.jhat_max_factor;
    if (f.model) c.options.model = worst_case_model_from(*f.model);

    const fs::path csv = common.out.empty() ? fs::path(default_out_dir()) / "tuning.csv" : fs::path(common.out);
    const std::string stem = csv.stem().string();
    run.set_dir(csv.parent_path().empty() ? fs::path(".") : csv.parent_path(), stem + ".manifest.json");

    if (!(c.delta_ratio >= 0.0 && c.delta_ratio < 1.0)) throw ConfigError("delta_ratio must lie in [0, 1)");
    if (c.options.resolution < 50) throw ConfigError("grid resolution must be >= 50");
    if (!common.dry_run) {
        const TuneOutput out = tune(c.delta_ratio, c.options);
        const auto& r = out.result;
        run.write_with(csv.filename().string(), [&](std::ostream& os) { write_tuning_csv(os, out.grid); });
        json columns = json::array();
        for (const auto& col : r.columns) {
            columns.push_back({{"beta1", col.beta1}, {"beta2", col.beta2}, {"objective", col.objective}});
        }
        json opt = {{"delta_ratio", c.delta_ratio},
                    {"found", r.found},
                    {"negative_cells", r.negative_cells},
                    {"jhat_min", r.jhat_min},
                    {"jhat_max", r.jhat_max},
                    {"columns", columns}};
        opt["optimum"] = r.found ? json{{"beta1", r.beta1}, {"beta2", r.beta2}, {"objective", r.objective},
                                        {"J", r.J}, {"Jhat", r.Jhat}}
                                 : json(nullptr);
        const std::string text = dump_json(opt);
        run.write(stem + ".optimum.json", text);
        std::cout << text;
    }
    run.finish(to_json(resolved), common.seed, common.dry_run);
    return kOk;
}

struct ChatterFlags {
    std::optional<double> mu, beta1, beta2, U, dt, t_end, sigma0;
    bool simulate = false;
};

int cmd_chatter(Run& run, const Common& common, const ChatterFlags& f)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    ConfigDocument resolved;
    ChatterConfig& c = resolved.chatter.emplace(doc.chatter.value_or(ChatterConfig{}));
    if (f.mu) c.mu = *f.mu;
    if (f.beta1) c.beta1 = *f.beta1;
    if (f.beta2) c.beta2 = *f.beta2;
    if (f.U) c.U = *f.U;
    if (f.dt) c.dt = *f.dt;
    if (f.t_end) c.t_end = *f.t_end;
    if (f.sigma0) c.sigma0 = *f.sigma0;
    if (f.simulate) c.simulate = true;

    if (!(c.mu > 0.0)) throw ConfigError("chatter.mu must be > 0");
    if (!(c.U > 0.0)) throw ConfigError("chatter.U must be > 0");
    if (!(std::fabs(c.beta1) <= 1.0 && std::fabs(c.beta2) <= 1.0)) throw ConfigError("|beta| must be <= 1");

    SimConfig sim;
    sim.dt = c.dt;
    sim.t_end = c.t_end;
    sim.sigma0 = c.sigma0;
    sim.plant.delta = 0.0;
    sim.plant.u_max = c.U;
    sim.plant.mu = c.mu;
    sim.controller.kind = ControllerKind::EsSosmc;
    sim.controller.u_max = c.U;
    sim.controller.beta1 = c.beta1;
    sim.controller.beta2 = c.beta2;
    if (c.simulate) validate_config(sim);

    if (!common.dry_run) {
        const ChatterPrediction closed = predict_chatter_closed_form(c.mu, c.beta1, c.beta2, c.U);
        const ChatterPrediction numeric = solve_harmonic_balance(c.mu, c.beta1, c.beta2, c.U);
        json report = {{"closed_form", to_json(closed)}, {"numeric", to_json(numeric)}};
        report["omega_c"] = numeric.valid ? json(numeric.omega_c) : json(nullptr);
        report["sigma_A"] = numeric.valid ? json(numeric.sigma_A) : json(nullptr);
        if (c.simulate) {
            const Trace trace = run_closed_loop(sim);
            const OscillationMeasurement m = measure_oscillation(trace.t, trace.sigma);
            json measured = {{"valid", m.valid}, {"crossings", m.crossings}};
            measured["omega"] = m.valid ? json(m.omega) : json(nullptr);
            measured["amplitude"] = m.valid ? json(m.amplitude) : json(nullptr);
            if (m.valid && numeric.valid) {
                measured["omega_ratio"] = m.omega / numeric.omega_c;
                measured["amplitude_ratio"] = m.amplitude / numeric.sigma_A;
            }
            report["simulation"] = measured;
            run.write_with("chatter_trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
        }
        const std::string text = dump_json(report);
        run.write("chatter.json", text);
        std::cout << text;
    }
    run.finish(to_json(resolved), common.seed, common.dry_run);
    return kOk;
}

struct SurfaceFlags {
    std::optional<double> R, nu, v0, dt, duration, target_p2p;
    std::optional<int> segments;
};

int cmd_surface(Run& run, const Common& common, const SurfaceFlags& f)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    ConfigDocument resolved;
    SurfaceConfig& c = resolved.surface.emplace(doc.surface.value_or(SurfaceConfig{}));
    if (f.R) c.params.R = *f.R;
    if (f.nu) c.params.nu = *f.nu;
    if (f.v0) c.params.v0 = *f.v0;
    if (f.dt) c.params.dt = *f.dt;
    if (f.duration) c.params.duration = *f.duration;
    if (f.segments) c.segments = *f.segments;
    if (f.target_p2p) c.target_p2p = *f.target_p2p;
    if (common.seed) c.params.seed = *common.seed;
    c.params.validate();
    if (c.segments < 4) throw ConfigError("surface.segments must be >= 4");

    if (!common.dry_run) {
        SurfaceParams p = c.target_p2p ? calibrate_surface(c.params, *c.target_p2p) : c.params;
        const SurfaceProfile profile = generate_surface(p);
        const PsdEstimate psd = estimate_psd(profile.x0, p.dt, c.segments);
        double mean = 0.0, var = 0.0;
        for (double x : profile.x0) mean += x;
        mean /= static_cast<double>(profile.size());
        for (double x : profile.x0) var += (x - mean) * (x - mean);
        var /= static_cast<double>(profile.size());
        run.write_with("profile.csv", [&](std::ostream& os) { write_profile_csv(os, profile); });
        run.write_with("psd.csv", [&](std::ostream& os) { write_psd_csv(os, psd, p); });
        json summary = {{"R", p.R},
                        {"omega0", p.omega0()},
                        {"variance_theory", surface_variance(p)},
                        {"variance_measured", var},
                        {"peak_to_peak", peak_to_peak(profile.x0)},
                        {"samples", profile.size()}};
        run.write("surface.json", dump_json(summary));
    }
    run.finish(to_json(resolved), c.params.seed, common.dry_run);
    return kOk;
}

struct FuelFlags {
    std::optional<double> K, U, dt, t_end;
    std::vector<double> start;
};

int cmd_fueloptimal(Run& run, const Common& common, const FuelFlags& f)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    ConfigDocument resolved;
    FuelOptimalConfig& c = resolved.fueloptimal.emplace(doc.fueloptimal.value_or(FuelOptimalConfig{}));
    if (f.K) c.K = *f.K;
    if (f.U) c.U = *f.U;
    if (f.dt) c.dt = *f.dt;
    if (f.t_end) c.t_end = *f.t_end;
    if (!f.start.empty()) {
        if (f.start.size() % 2 != 0) throw ConfigError("--start takes pairs x1 x2");
        c.starts.clear();
        for (std::size_t i = 0; i < f.start.size(); i += 2) c.starts.push_back({f.start[i], f.start[i + 1]});
    }
    if (!(c.K > 1.0)) throw ConfigError("fueloptimal.K must be > 1");
    if (!(c.U > 0.0) || !(c.dt > 0.0) || !(c.t_end > c.dt) || c.record_stride < 1) {
        throw ConfigError("fueloptimal needs U > 0, dt > 0, t_end > dt, record_stride >= 1");
    }

    if (!common.dry_run) {
        json runs = json::array();
        for (std::size_t i = 0; i < c.starts.size(); ++i) {
            SimConfig sim;
            sim.dt = c.dt;
            sim.t_end = c.t_end;
            sim.sigma0 = c.starts[i][0];
            sim.dsigma0 = c.starts[i][1];
            sim.plant.delta = 0.0;
            sim.plant.u_max = c.U;
            sim.controller.u_max = c.U;
            sim.controller.K = c.K;
            sim.record_stride = c.record_stride;
            sim.controller.kind = ControllerKind::TimeOptimal;
            const OriginRun to = run_to_origin(sim, 2.0 * c.dt);
            sim.controller.kind = ControllerKind::FuelOptimal;
            const OriginRun fo = run_to_origin(sim, 2.0 * c.dt);
            const std::string tag = "s" + std::to_string(i + 1);
            run.write_with(tag + "_time_optimal.csv", [&](std::ostream& os) { write_origin_csv(os, to); });
            run.write_with(tag + "_fuel_optimal.csv", [&](std::ostream& os) { write_origin_csv(os, fo); });
            const double t_star = minimum_time(c.starts[i][0], c.starts[i][1], c.U);
            json entry = {{"start", {c.starts[i][0], c.starts[i][1]}},
                          {"t_star", t_star},
                          {"time_optimal", {{"reached", to.reached}, {"fuel", to.fuel}}},
                          {"fuel_optimal", {{"reached", fo.reached}, {"fuel", fo.fuel}, {"coasted", fo.coasted}}}};
            entry["time_optimal"]["response_time"] = to.reached ? json(to.response_time) : json(nullptr);
            entry["fuel_optimal"]["response_time"] = fo.reached ? json(fo.response_time) : json(nullptr);
            runs.push_back(entry);
        }
        json summary = {{"K", c.K}, {"psi", fuel_optimal_psi(c.K)}, {"runs", runs}};
        run.write("fueloptimal.json", dump_json(summary));
    }
    run.finish(to_json(resolved), common.seed, common.dry_run);
    return kOk;
}

int cmd_validate(Run& run, const Common& common, const SimFlags& flags)
{
    ConfigDocument doc = run.load(common);
    run.set_dir(out_dir(common));
    ConfigDocument resolved;
    SimConfig& c = resolved.simulation.emplace(doc.simulation.value_or(SimConfig{}));
    apply(c, flags, common.seed);
    const ValidationReport report = validate_params(c.controller, c.plant);
    const std::string text = dump_json(to_json(report));
    std::cout << text;
    if (!common.dry_run) run.write("validation.json", text);
    run.finish(to_json(resolved), common.seed, common.dry_run);
    if (!report.feasible) {
        std::string joined;
        for (const auto& v : report.violations) joined += (joined.empty() ? "" : "; ") + v;
        report_error(kInfeasible, "infeasible", joined);
        return kInfeasible;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-saving second-order sliding mode control toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    SimFlags sim_flags, cmp_flags, val_flags;
    TuneFlags tune_flags;
    ChatterFlags chat_flags;
    SurfaceFlags surf_flags;
    FuelFlags fuel_flags;

    auto* simulate = app.add_subcommand("simulate", "closed-loop run or a scenario with one controller");
    add_common(simulate, common, "output directory");
    add_sim_flags(simulate, sim_flags, true, true);

    auto* compare = app.add_subcommand("compare", "scenario comparison across controllers on a shared surface");
    add_common(compare, common, "output directory");
    add_sim_flags(compare, cmp_flags, false, true);

    auto* tune_cmd = app.add_subcommand("tune", "grid search of J - Jhat over the feasibility triangle");
    add_common(tune_cmd, common, "CSV output path");
    tune_cmd->add_option("--delta-ratio", tune_flags.delta_ratio);
    tune_cmd->add_option("--grid", tune_flags.grid, "grid resolution n");
    tune_cmd->add_option("--jhat-max", tune_flags.jhat_max);
    tune_cmd->add_option("--jhat-max-factor", tune_flags.jhat_max_factor);
    tune_cmd->add_option("--model", tune_flags.model, "outer-envelope | per-arc");

    auto* chatter = app.add_subcommand("chatter", "describing-function chattering prediction");
    add_common(chatter, common, "output directory");
    chatter->add_option("--mu", chat_flags.mu, "actuator lag time constant");
    chatter->add_option("--beta1", chat_flags.beta1);
    chatter->add_option("--beta2", chat_flags.beta2);
    chatter->add_option("--U", chat_flags.U);
    chatter->add_option("--dt", chat_flags.dt);
    chatter->add_option("--t-end", chat_flags.t_end);
    chatter->add_option("--sigma0", chat_flags.sigma0);
    chatter->add_flag("--simulate", chat_flags.simulate, "cross-check against a lagged closed-loop run");

    auto* surface = app.add_subcommand("surface", "rough surface profile and PSD estimate");
    add_common(surface, common, "output directory");
    surface->add_option("--R", surf_flags.R);
    surface->add_option("--nu", surf_flags.nu);
    surface->add_option("--v0", surf_flags.v0);
    surface->add_option("--dt", surf_flags.dt);
    surface->add_option("--duration", surf_flags.duration);
    surface->add_option("--segments", surf_flags.segments);
    surface->add_option("--target-p2p", surf_flags.target_p2p);

    auto* fuel = app.add_subcommand("fueloptimal", "time- and fuel-optimal phase-plane trajectories");
    add_common(fuel, common, "output directory");
    fuel->add_option("--K", fuel_flags.K);
    fuel->add_option("--U", fuel_flags.U);
    fuel->add_option("--dt", fuel_flags.dt);
    fuel->add_option("--t-end", fuel_flags.t_end);
    fuel->add_option("--start", fuel_flags.start, "initial state x1 x2 (repeatable)")->type_size(2)->expected(1, CLI::detail::expected_max_vector_size);

    auto* validate = app.add_subcommand("validate", "check controller parameters against the plant bounds");
    add_common(validate, common, "output directory");
    add_sim_flags(validate, val_flags, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(kUsage, "usage", e.what());
        return kUsage;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        CLI::App* cmd = app.get_subcommands().front();
        Run run(cmd->get_name(), args);
        if (cmd == simulate) return cmd_simulate(run, common, sim_flags);
        if (cmd == compare) return cmd_compare(run, common, cmp_flags);
        if (cmd == tune_cmd) return cmd_tune(run, common, tune_flags);
        if (cmd == chatter) return cmd_chatter(run, common, chat_flags);
        if (cmd == surface) return cmd_surface(run, common, surf_flags);
        if (cmd == fuel) return cmd_fueloptimal(run, common, fuel_flags);
        if (cmd == validate) return cmd_validate(run, common, val_flags);
        return kUsage;
    } catch (const ConfigError& e) {
        report_error(kConfig, "config", e.what());
        return kConfig;
    } catch (const InfeasibleError& e) {
        report_error(kInfeasible, "infeasible", e.what());
        return kInfeasible;
    } catch (const DomainError& e) {
        report_error(kDomain, "domain", e.what());
        return kDomain;
    } catch (const InvalidStateError& e) {
        report_error(kDomain, "invalid-state", e.what());
        return kDomain;
    } catch (const std::exception& e) {
        report_error(kRuntime, "runtime", e.what());
        return kRuntime;
    }
}
