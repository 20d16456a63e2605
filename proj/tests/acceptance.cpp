// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [--allow-fail N]...  (listed criteria still print FAIL but do not set the exit status)

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "essmc/essmc.hpp"

namespace fs = std::filesystem;
using namespace essmc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4)
{
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

double first_sigma_M(const Trace& tr)
{
    for (double m : tr.sigma_M) {
        if (!std::isnan(m)) return m;
    }
    return std::nan("");
}

// 1 -------------------------------------------------------------------------
Outcome recovery_equivalence()
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int identical = 0;
    const int total = 100;
    for (int i = 0; i < total; ++i) {
        SimConfig es;
        es.dt = 1e-4;
        es.t_end = 10.0;
        es.plant.delta = 0.4 * uni(rng);
        es.sigma0 = (uni(rng) < 0.5 ? -1.0 : 1.0) * (0.2 + 1.8 * uni(rng));
        es.dsigma0 = 2.0 * uni(rng) - 1.0;
        const double beta = es.plant.delta + 0.01 + (0.98 - es.plant.delta) * uni(rng);
        es.controller.kind = ControllerKind::EsSosmc;
        es.controller.beta1 = es.controller.beta2 = beta;
        auto& d = es.disturbance;
        d.seed = rng();
        d.amplitude = es.plant.delta;
        switch (i % 4) {
            case 0: d.kind = DisturbanceKind::SeededNoise; d.hold = 0.01 * uni(rng); break;
            case 1: d.kind = DisturbanceKind::Sinusoid; d.omega = 0.5 + 10.0 * uni(rng); break;
            case 2: d.kind = DisturbanceKind::WorstCaseFlip; d.flip = static_cast<FlipMode>(i % 3); break;
            default: d.kind = DisturbanceKind::Constant; d.amplitude *= 2.0 * uni(rng) - 1.0; break;
        }
        SimConfig so = es;
        so.controller.kind = ControllerKind::Sosmc;
        so.controller.alpha_star = 1.0;
        const Trace a = run_closed_loop(es);
        const Trace b = run_closed_loop(so);
        identical += a.u == b.u;
    }
    return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                    " randomized configs give bitwise identical control sequences"};
}

// 2 -------------------------------------------------------------------------
Outcome finite_time_convergence()
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double margin = 0.02;
    int runs = 0, converged = 0, within = 0;
    double worst_ratio = 0.0;
    std::string first_failure;
    for (double ratio : {0.2, 0.3}) {
        for (int i = 0; i < 100; ++i) {
            double b1, b2;
            do {
                b1 = margin + (1.0 - 2.0 * margin) * uni(rng);
                b2 = -1.0 + margin + (b1 - margin + 1.0 - margin) * uni(rng);
            } while (!(b1 + b2 > 2.0 * ratio + margin));
            const CycleFactors factors = compute_cycle_factors(1.0, ratio, b1, b2, ControlLaw::EsSosmc);

            for (int variant = 0; variant < 2; ++variant) {
                SimConfig c;
                c.dt = 1e-4;
                c.sigma0 = 1.0;
                c.plant.delta = ratio;
                c.controller.kind = ControllerKind::EsSosmc;
                c.controller.beta1 = b1;
                c.controller.beta2 = b2;
                if (variant == 0) {
                    c.disturbance.kind = DisturbanceKind::WorstCaseFlip;
                    c.disturbance.flip = static_cast<FlipMode>(i % 3);
                } else {
                    c.disturbance.kind = DisturbanceKind::SeededNoise;
                    c.disturbance.amplitude = ratio;
                    c.disturbance.hold = 0.01;
                    c.disturbance.seed = rng();
                }
                const double a_priori = convergence_time_bound(
                    1.0, ratio, c.dsigma0, first_extremum_bound(1.0, ratio, c.sigma0, c.dsigma0), factors);
                c.t_end = std::fmin(1.5 * a_priori + 1.0, 200.0);
                const Trace tr = run_closed_loop(c);
                const Tolerances tol = default_tolerances(c.sigma0, 1.0, c.dt);
                const ConvergenceReport r = detect_convergence(tr, tol.eps_sigma, tol.eps_dsigma);
                ++runs;
                if (!r.converged) {
                    if (first_failure.empty()) first_failure = "no convergence at (" + fmt(b1) + ", " + fmt(b2) + ")";
                    continue;
                }
                ++converged;
                const double bound =
                    convergence_time_bound(1.0, ratio, c.dsigma0, first_sigma_M(tr), factors);
                worst_ratio = std::fmax(worst_ratio, r.t_converge / bound);
                if (r.t_converge <= bound) {
                    ++within;
                } else if (first_failure.empty()) {
                    first_failure = "t_c " + fmt(r.t_converge) + " > bound " + fmt(bound) + " at (" + fmt(b1) +
                                    ", " + fmt(b2) + ")";
                }
            }
        }
    }
    std::string detail = std::to_string(converged) + "/" + std::to_string(runs) + " converged, " +
                         std::to_string(within) + "/" + std::to_string(runs) +
                         " within the bound (max t_c/bound " + fmt(worst_ratio) + ")";
    if (!first_failure.empty()) detail += "; first failure: " + first_failure;
    return {within == runs, detail};
}

// 3 -------------------------------------------------------------------------
Outcome monotonic_convergence()
{
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int worst = 0, ok = 0;
    const int total = 50;
    for (int i = 0; i < total; ++i) {
        SimConfig c;
        c.dt = 1e-4;
        c.t_end = 20.0;
        c.plant.delta = 0.3;
        c.sigma0 = (uni(rng) < 0.5 ? -1.0 : 1.0) * (0.2 + 1.8 * uni(rng));
        c.controller.kind = ControllerKind::Sosmc;
        c.controller.beta1 = 0.66;
        auto& d = c.disturbance;
        d.amplitude = 0.3;
        d.seed = rng();
        if (i % 2 == 0) {
            d.kind = DisturbanceKind::SeededNoise;
            d.hold = 0.02 * uni(rng);
        } else {
            d.kind = DisturbanceKind::WorstCaseFlip;
            d.flip = static_cast<FlipMode>((i / 2) % 3);
        }
        const Trace tr = run_closed_loop(c);
        const Tolerances tol = default_tolerances(c.sigma0, 1.0, c.dt);
        const int crossings = count_zero_crossings(tr.sigma, tol.eps_sigma);
        worst = std::max(worst, crossings);
        ok += crossings <= 1;
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                             " runs with at most one zero crossing of sigma outside the band (max " +
                             std::to_string(worst) + ")"};
}

// 4 -------------------------------------------------------------------------
Outcome energy_saving()
{
    const auto t0 = std::chrono::steady_clock::now();
    const MechanicalParams mech;
    const ScenarioTiming timing;
    const ComparisonReport r =
        compare_controllers(ScenarioKind::Scan, mech, default_comparison_set(mech.U_force), timing);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& so = r.entries[0];
    const auto& es1 = r.entries[1];
    const auto& es2 = r.entries[2];
    const double f1 = es1.final_E / so.final_E;
    const double f2 = es2.final_E / so.final_E;
    const bool fuel_ok = f1 < 0.95 && f2 < 0.95;
    const bool below = so.fuel_below_bound && es1.fuel_below_bound && es2.fuel_below_bound;
    double lo = so.tracking_rms, hi = so.tracking_rms;
    for (const auto& e : r.entries) {
        lo = std::fmin(lo, e.tracking_rms);
        hi = std::fmax(hi, e.tracking_rms);
    }
    const bool rms_ok = hi <= 1.25 * lo;
    const bool fast = secs < 60.0;
    std::string detail = "fuel ratios vs SOSMC " + fmt(f1) + ", " + fmt(f2) + (fuel_ok ? " (<0.95)" : " (NOT <0.95)") +
                         "; E <= U t after reaching: " + (below ? "yes" : "no") + "; tracking RMS " +
                         fmt(so.tracking_rms) + "/" + fmt(es1.tracking_rms) + "/" + fmt(es2.tracking_rms) +
                         " m, spread " + fmt(hi / lo) + (rms_ok ? " (within 25%)" : " (NOT within 25%)") +
                         "; runtime " + fmt(secs, 3) + " s";
    return {fuel_ok && below && rms_ok && fast, detail};
}

// 5 -------------------------------------------------------------------------
Outcome tuning_optima()
{
    const TuneOutput t3 = tune(0.3);
    const auto c85 = t3.result.column(0.85);
    const auto c97 = t3.result.column(0.97);
    bool ok = c85 && c97 && std::fabs(c85->beta2 - 0.27) <= 0.15 && std::fabs(c97->beta2 - 0.05) <= 0.15;
    bool negative = true;
    for (const auto& e : t3.grid.entries) {
        if (e.feasible && !(e.J - e.Jhat < 0.0)) negative = false;
    }
    const auto n2 = tune(0.2).result.negative_cells;
    const auto n3 = t3.result.negative_cells;
    const auto n4 = tune(0.4).result.negative_cells;
    const bool trend = n2 > n3 && n3 > n4;
    std::string detail = "column optima beta2(0.85) = " + (c85 ? fmt(c85->beta2) : std::string("none")) +
                         ", beta2(0.97) = " + (c97 ? fmt(c97->beta2) : std::string("none")) +
                         "; all reported cells negative: " + (negative ? "yes" : "no") + "; negative cells " +
                         std::to_string(n2) + " > " + std::to_string(n3) + " > " + std::to_string(n4);
    return {ok && negative && trend, detail};
}

// 6 -------------------------------------------------------------------------
Outcome chattering()
{
    int grid = 0, agree = 0;
    double worst = 0.0;
    for (double mu : {0.001, 0.01, 0.1}) {
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const double b1 = 0.05 + 0.1 * i;
                const double b2 = -0.9 + 0.2 * j;
                const auto c = predict_chatter_closed_form(mu, b1, b2);
                const auto n = solve_harmonic_balance(mu, b1, b2);
                if (!c.valid && !n.valid) continue;
                ++grid;
                const double rel = std::fabs(n.omega_c / c.omega_c - 1.0);
                worst = std::fmax(worst, std::isnan(rel) ? 1.0 : rel);
                agree += rel <= 1e-3;
            }
        }
    }

    struct Case {
        double b1, b2;
        OscillationMeasurement m;
        ChatterPrediction p;
    };
    std::vector<Case> cases{{0.85, 0.27, {}, {}}, {0.85, 0.85, {}, {}}, {0.97, 0.05, {}, {}}, {0.97, 0.97, {}, {}}};
    bool sim_ok = true;
    double w_err = 0.0, a_err = 0.0;
    for (auto& cs : cases) {
        SimConfig c;
        c.dt = 1e-5;
        c.t_end = 6.0;
        c.sigma0 = 0.01;
        c.plant.mu = 0.01;
        c.controller.kind = ControllerKind::EsSosmc;
        c.controller.beta1 = cs.b1;
        c.controller.beta2 = cs.b2;
        c.record_stride = 5;
        const Trace tr = run_closed_loop(c);
        cs.m = measure_oscillation(tr.t, tr.sigma);
        cs.p = solve_harmonic_balance(0.01, cs.b1, cs.b2);
        if (!cs.m.valid || !cs.p.valid) {
            sim_ok = false;
            continue;
        }
        const double we = std::fabs(cs.m.omega / cs.p.omega_c - 1.0);
        const double ae = std::fabs(cs.m.amplitude / cs.p.sigma_A - 1.0);
        w_err = std::fmax(w_err, we);
        a_err = std::fmax(a_err, ae);
        sim_ok = sim_ok && we <= 0.25 && ae <= 0.40;
    }
    const bool order = cases[0].m.omega < cases[1].m.omega && cases[0].m.amplitude > cases[1].m.amplitude &&
                       cases[2].m.omega < cases[3].m.omega && cases[2].m.amplitude > cases[3].m.amplitude;
    std::string detail = std::to_string(agree) + "/" + std::to_string(grid) +
                         " grid points agree to 0.1% (max rel " + fmt(worst, 3) + "); simulation max error omega " +
                         fmt(100.0 * w_err, 3) + "%, sigma_A " + fmt(100.0 * a_err, 3) + "% (ES 0.85/0.27: omega " +
                         fmt(cases[0].m.omega) + " vs " + fmt(cases[0].p.omega_c) + "); ES slower and larger than SOSMC: " +
                         (order ? "yes" : "no");
    return {agree == grid && grid > 0 && sim_ok && order, detail};
}

// 7 -------------------------------------------------------------------------
Outcome fuel_optimal()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    const double K = 2.0, dt = 1e-4;
    int ok = 0;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        SimConfig c;
        c.dt = dt;
        c.t_end = 100.0;
        c.sigma0 = uni(rng);
        c.dsigma0 = uni(rng);
        c.controller.K = K;
        c.controller.kind = ControllerKind::TimeOptimal;
        const OriginRun to = run_to_origin(c, 2.0 * dt);
        c.controller.kind = ControllerKind::FuelOptimal;
        const OriginRun fo = run_to_origin(c, 2.0 * dt);
        const double t_star = minimum_time(c.sigma0, c.dsigma0, 1.0);
        const double ratio = fo.response_time / t_star;
        worst = std::fmax(worst, ratio);
        ok += to.reached && fo.reached && fo.response_time <= K * t_star * 1.02 && fo.fuel < to.fuel && fo.coasted;
    }
    const double psi1 = fuel_optimal_psi(1.0);
    const double psi2 = fuel_optimal_psi(2.0);
    const bool psi_ok = std::fabs(psi1 - 0.5) <= 1e-9 && std::fabs(psi2 - (5.5 + 4.0 * std::numbers::sqrt2)) <= 1e-9 &&
                        std::fabs(psi2 - 11.15685) <= 5e-6;
    return {ok == 20 && psi_ok, std::to_string(ok) + "/20 starts meet T <= K t* (1.02 slack), lower fuel and a coast" +
                                    " segment (max T/t* " + fmt(worst, 6) + "); psi(1) = " + fmt(psi1, 10) +
                                    ", psi(2) = " + fmt(psi2, 10)};
}

// 8 -------------------------------------------------------------------------
Outcome surface_spectrum()
{
    SurfaceParams p;
    p.dt = 0.01;
    p.duration = 20000.0;
    const SurfaceProfile s = generate_surface(p);
    const PsdEstimate e = estimate_psd(s.x0, p.dt, 64);
    double worst_db = 0.0;
    for (std::size_t k = 0; k < e.omega.size(); ++k) {
        if (e.omega[k] < p.omega0() || e.omega[k] > 0.2 * std::numbers::pi / p.dt) continue;
        worst_db = std::fmax(worst_db, std::fabs(10.0 * std::log10(e.S[k] / essmc::surface_psd(e.omega[k], p.R, p.nu,
                                                                                         p.omega0()))));
    }
    double mean = 0.0, var = 0.0;
    for (double x : s.x0) mean += x;
    mean /= static_cast<double>(s.size());
    for (double x : s.x0) var += (x - mean) * (x - mean);
    var /= static_cast<double>(s.size());
    const double var_err = std::fabs(var / surface_variance(p) - 1.0);

    const MechanicalParams mech;
    const SurfaceParams sp = scenario_surface_params(mech, ScenarioTiming{});
    const double p2p = peak_to_peak(generate_surface(sp).x0);
    const bool p2p_ok = p2p >= 0.25e-6 && p2p <= 0.75e-6;
    int spread_ok = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        SurfaceParams other = sp;
        other.seed = seed;
        const double q = peak_to_peak(generate_surface(other).x0);
        spread_ok += q >= 0.25e-6 && q <= 0.75e-6;
    }
    return {worst_db <= 3.0 && var_err <= 0.1 && p2p_ok,
            "max PSD deviation " + fmt(worst_db, 3) + " dB over [omega0, 0.2 pi/dt]; variance error " +
                fmt(100.0 * var_err, 3) + "%; calibrated scenario p2p " + fmt(p2p * 1e6, 4) + " um (" +
                std::to_string(spread_ok) + "/20 other seeds at the same R inside [0.25, 0.75] um)"};
}

// 9 -------------------------------------------------------------------------
int run_cli(const std::string& args)
{
    const std::string cmd = std::string(ESSMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / "essmc_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream(root / "scan.json")
            << R"({"scenario": {"kind": "scan", "timing": {"t_end": 0.2, "record_stride": 100}}})";
    }
    const std::string scan = (root / "scan.json").string();
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate-closed", "simulate --controller es-sosmc --delta 0.3 --disturbance seeded-noise --amplitude 0.3"},
        {"simulate-scan", "simulate --config " + scan},
        {"compare", "compare --config " + scan},
        {"tune", "tune --delta-ratio 0.3 --grid 100"},
        {"chatter", "chatter --mu 0.01 --beta1 0.85 --beta2 0.27 --simulate --t-end 1"},
        {"surface", "surface --duration 100"},
        {"fueloptimal", "fueloptimal --start 1 0.5 --start -1 1"},
        {"validate", "validate --controller es-sosmc --beta1 0.85 --beta2 0.27 --delta 0.3"}};

    int identical = 0, files = 0;
    std::string mismatch;
    for (const auto& [name, args] : commands) {
        std::vector<fs::path> dirs;
        for (const char* rep : {"a", "b"}) {
            const fs::path out = root / name / rep;
            const std::string target = name == "tune" ? (out / "map.csv").string() : out.string();
            if (run_cli(args + " --seed 42 --out " + target) != 0) {
                mismatch = name + " failed to run";
            }
            dirs.push_back(out);
        }
        bool same = fs::exists(dirs[0]);
        if (same) {
            for (const auto& e : fs::directory_iterator(dirs[0])) {
                const std::string fname = e.path().filename().string();
                if (fname.find("manifest") != std::string::npos) continue;
                ++files;
                if (slurp(e.path()) != slurp(dirs[1] / fname)) {
                    same = false;
                    if (mismatch.empty()) mismatch = name + "/" + fname;
                }
            }
        }
        identical += same;
    }
    fs::remove_all(root);
    std::string detail = std::to_string(identical) + "/" + std::to_string(commands.size()) +
                         " commands byte-identical across repeated runs (" + std::to_string(files) +
                         " artifact files compared, manifests excluded)";
    if (!mismatch.empty()) detail += "; first problem: " + mismatch;
    return {identical == static_cast<int>(commands.size()) && mismatch.empty(), detail};
}

}  // namespace

int main(int argc, char** argv)
{
    std::set<int> allowed;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--allow-fail") allowed.insert(std::atoi(argv[++i]));
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"recovery equivalence", recovery_equivalence},
        {"finite-time convergence", finite_time_convergence},
        {"monotonic convergence", monotonic_convergence},
        {"energy saving (scan)", energy_saving},
        {"tuning optima", tuning_optima},
        {"chattering", chattering},
        {"fuel-optimal double integrator", fuel_optimal},
        {"surface PSD", surface_spectrum},
        {"determinism", determinism}};

    int unexpected = 0, failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << " ["
                  << fmt(secs, 3) << " s]" << std::endl;
        if (!o.pass) {
            ++failed;
            if (!allowed.count(id)) ++unexpected;
        }
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed";
    if (failed > unexpected) std::cout << " (" << failed - unexpected << " known failure(s) allowed)";
    std::cout << std::endl;
    return unexpected == 0 ? 0 : 1;
}
