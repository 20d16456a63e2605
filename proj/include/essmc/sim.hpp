/**
 * @file sim.hpp
 * @brief Fixed-step closed-loop simulation, fuel metric and convergence detection.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "essmc/controllers.hpp"
#include "essmc/core.hpp"
#include "essmc/disturbance.hpp"
#include "essmc/plant.hpp"

namespace essmc {

struct SimConfig {
    double dt = 1e-4;
    double t_end = 10.0;
    double sigma0 = 1.0;
    double dsigma0 = 0.0;
    double v0 = 0.0;
    PlantParams plant;
    DisturbanceSpec disturbance;
    ControllerParams controller;
    std::optional<double> gain;  ///< input gain g; defaults to gamma_m
    int record_stride = 1;
    double sigma_floor = 1e-6;   ///< lower clamp of |sigma0| in the step-size guidance
    bool check_params = true;    ///< reject infeasible controller parameters
};

/// Time-indexed simulation output. Records are `record_stride` steps apart.
struct Trace {
    std::vector<double> t, sigma, dsigma, u, v, sigma_M, E;
    double dt = 0.0;         ///< integration step
    double record_dt = 0.0;  ///< spacing of records
    std::string config_digest;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
};

struct ConvergenceReport {
    bool converged = false;
    double t_converge = std::nan("");
    int zero_crossings = 0;
    double final_E = 0.0;
};

struct Tolerances {
    double eps_sigma;
    double eps_dsigma;
};

/// The velocity band never drops below the sampled-relay chatter level of a few U*dt.
inline Tolerances default_tolerances(double sigma0, double U, double dt)
{
    return {1e-3 * std::fmax(1.0, std::fabs(sigma0)), std::fmax(1e-2 * U * std::sqrt(dt), 10.0 * U * dt)};
}

/// Canonical text form of a config, hashed into the trace metadata.
inline std::string describe(const SimConfig& c)
{
    std::ostringstream os;
    const auto& p = c.plant;
    const auto& d = c.disturbance;
    const auto& k = c.controller;
    os << "dt=" << format_number(c.dt) << ";t_end=" << format_number(c.t_end)
       << ";sigma0=" << format_number(c.sigma0) << ";dsigma0=" << format_number(c.dsigma0)
       << ";v0=" << format_number(c.v0) << ";stride=" << c.record_stride
       << ";gain=" << (c.gain ? format_number(*c.gain) : std::string("default"))
       << ";delta=" << format_number(p.delta) << ";U=" << format_number(p.u_max)
       << ";gm=" << format_number(p.gamma_m) << ";gM=" << format_number(p.gamma_M)
       << ";mu=" << format_number(p.mu) << ";dist=" << to_string(d.kind)
       << ";amp=" << format_number(d.amplitude) << ";omega=" << format_number(d.omega)
       << ";phase=" << format_number(d.phase) << ";hold=" << format_number(d.hold)
       << ";seed=" << d.seed << ";flip=" << to_string(d.flip) << ";invert=" << d.invert
       << ";samples=" << d.samples.size() << ";ctrl=" << to_string(k.kind)
       << ";b1=" << format_number(k.beta1) << ";b2=" << format_number(k.beta2)
       << ";a=" << format_number(k.alpha_star) << ";K=" << format_number(k.K)
       << ";N=" << k.detector.confirm_window << ";eps=" << format_number(k.detector.hysteresis);
    return os.str();
}

/// Structural checks plus controller feasibility. Returns guidance warnings.
inline std::vector<std::string> validate_config(const SimConfig& c)
{
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be finite and > 0");
    if (!(c.t_end >= c.dt) || !std::isfinite(c.t_end)) throw ConfigError("t_end must be finite and >= dt");
    if (!std::isfinite(c.sigma0) || !std::isfinite(c.dsigma0) || !std::isfinite(c.v0)) {
        throw ConfigError("initial state must be finite");
    }
    if (c.record_stride < 1) throw ConfigError("record_stride must be >= 1");
    c.plant.validate();
    if (c.gain && !(*c.gain >= c.plant.gamma_m && *c.gain <= c.plant.gamma_M)) {
        throw ConfigError("gain must lie in [gamma_m, gamma_M]");
    }
    if (c.controller.u_max != c.plant.u_max) throw ConfigError("controller.u_max must equal plant.u_max");
    if (c.check_params) {
        const auto report = validate_params(c.controller, c.plant);
        if (!report.feasible) {
            std::string msg = "infeasible controller parameters:";
            for (const auto& v : report.violations) msg += " [" + v + "]";
            throw InfeasibleError(msg);
        }
    }
    std::vector<std::string> warnings;
    const double scale = std::fmax(std::fabs(c.sigma0), c.sigma_floor);
    if (!(c.plant.u_max * c.dt < 0.01 * scale)) {
        warnings.emplace_back("step size guidance U*dt < 0.01*max(|sigma0|, sigma_floor) not met");
    }
    return warnings;
}

/// Step-by-step closed loop; `run_closed_loop` records it into a Trace.
class ClosedLoop {
public:
    explicit ClosedLoop(SimConfig config)
        : config_(std::move(config)),
          controller_(config_.controller),
          disturbance_(config_.disturbance, config_.plant.delta, config_.dt),
          gain_(config_.gain.value_or(config_.plant.gamma_m))
    {
        state_.sigma = config_.sigma0;
        state_.dsigma = config_.dsigma0;
        state_.v = config_.v0;
    }

    /// Samples the controller at the current state; call once per step before `advance`.
    double control()
    {
        u_ = controller_(state_.sigma, state_.dsigma);
        return u_;
    }

    void advance()
    {
        const double f = disturbance_.sample(t(), state_, u_);
        state_ = step_plant(state_, u_, f, gain_, config_.plant, config_.dt);
        E_ += std::fabs(u_) * config_.dt;
        ++k_;
    }

    double t() const { return static_cast<double>(k_) * config_.dt; }
    const PlantState& state() const { return state_; }
    double u() const { return u_; }
    double fuel() const { return E_; }
    std::int64_t step_index() const { return k_; }
    const Controller& controller() const { return controller_; }

    double sigma_M() const
    {
        const auto kind = config_.controller.kind;
        if (kind == ControllerKind::Sosmc || kind == ControllerKind::EsSosmc) return controller_.state().sigma_M;
        return std::nan("");
    }

private:
    SimConfig config_;
    Controller controller_;
    Disturbance disturbance_;
    double gain_;
    PlantState state_;
    double u_ = 0.0;
    double E_ = 0.0;
    std::int64_t k_ = 0;
};

inline std::int64_t step_count(double t_end, double dt)
{
    return static_cast<std::int64_t>(std::llround(t_end / dt));
}

inline Trace run_closed_loop(const SimConfig& config)
{
    Trace trace;
    trace.warnings = validate_config(config);
    trace.dt = config.dt;
    trace.record_dt = config.dt * config.record_stride;
    trace.config_digest = digest_hex(describe(config));
    trace.seed = config.disturbance.seed;

    ClosedLoop loop(config);
    const std::int64_t n = step_count(config.t_end, config.dt);
    const auto records = static_cast<std::size_t>(n / config.record_stride + 1);
    for (auto* col : {&trace.t, &trace.sigma, &trace.dsigma, &trace.u, &trace.v, &trace.sigma_M, &trace.E}) {
        col->reserve(records);
    }
    for (std::int64_t k = 0; k <= n; ++k) {
        const double u = loop.control();
        if (k % config.record_stride == 0) {
            const auto& s = loop.state();
            trace.t.push_back(loop.t());
            trace.sigma.push_back(s.sigma);
            trace.dsigma.push_back(s.dsigma);
            trace.u.push_back(u);
            trace.v.push_back(config.plant.mu > 0.0 ? s.v : u);
            trace.sigma_M.push_back(loop.sigma_M());
            trace.E.push_back(loop.fuel());
        }
        if (k < n) loop.advance();
    }
    return trace;
}

/// Bang-bang run that stops on arrival: once the time-optimal time to the origin
/// from the current state is at most `arrive_within`.
struct OriginRun {
    std::vector<double> t, sigma, dsigma, u, E;
    double response_time = std::nan("");
    double fuel = 0.0;
    bool reached = false;
    bool coasted = false;  ///< some sample had u == 0 before arrival
};

inline OriginRun run_to_origin(const SimConfig& config, double arrive_within)
{
    validate_config(config);
    const double U = config.controller.u_max * config.gain.value_or(config.plant.gamma_m);
    ClosedLoop loop(config);
    OriginRun run;
    const std::int64_t n = step_count(config.t_end, config.dt);
    for (std::int64_t k = 0; k <= n; ++k) {
        const auto& s = loop.state();
        const bool arrived = minimum_time(s.sigma, s.dsigma, U) <= arrive_within;
        const double u = arrived ? 0.0 : loop.control();
        if (k % config.record_stride == 0 || arrived) {
            run.t.push_back(loop.t());
            run.sigma.push_back(s.sigma);
            run.dsigma.push_back(s.dsigma);
            run.u.push_back(u);
            run.E.push_back(loop.fuel());
        }
        if (arrived) {
            run.reached = true;
            run.response_time = loop.t();
            break;
        }
        if (u == 0.0) run.coasted = true;
        if (k < n) loop.advance();
    }
    run.fuel = loop.fuel();
    return run;
}

/// Left-rectangle sum of |u| over the record spacing (the last record closes the horizon).
inline double fuel_integral(const Trace& trace)
{
    if (trace.empty()) throw DomainError("fuel_integral of an empty trace");
    double E = 0.0;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        E += std::fabs(trace.u[k]) * (trace.t[k + 1] - trace.t[k]);
    }
    return E;
}

/// Strict sign changes of a signal, ignoring samples inside |x| <= band.
inline int count_zero_crossings(const std::vector<double>& x, double band)
{
    int crossings = 0;
    double last = 0.0;
    for (double s : x) {
        if (std::fabs(s) <= band) continue;
        const double sign = sgn(s);
        if (last != 0.0 && sign != last) ++crossings;
        last = sign;
    }
    return crossings;
}

inline ConvergenceReport detect_convergence(const std::vector<double>& t, const std::vector<double>& sigma,
                                            const std::vector<double>& dsigma, double eps_sigma,
                                            double eps_dsigma)
{
    if (!(eps_sigma > 0.0) || !(eps_dsigma > 0.0)) throw DomainError("convergence tolerances must be > 0");
    ConvergenceReport r;
    if (t.empty()) return r;
    r.zero_crossings = count_zero_crossings(sigma, eps_sigma);
    std::size_t first = t.size();
    while (first > 0 && std::fabs(sigma[first - 1]) <= eps_sigma && std::fabs(dsigma[first - 1]) <= eps_dsigma) {
        --first;
    }
    if (first < t.size()) {
        r.converged = true;
        r.t_converge = t[first];
    }
    return r;
}

inline ConvergenceReport detect_convergence(const Trace& trace, double eps_sigma, double eps_dsigma)
{
    auto r = detect_convergence(trace.t, trace.sigma, trace.dsigma, eps_sigma, eps_dsigma);
    if (!trace.empty()) r.final_E = trace.E.back();
    return r;
}

inline void write_trace_csv(std::ostream& os, const Trace& trace)
{
    os << "t,sigma,dsigma,u,v,sigma_M,E\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        os << format_number(trace.t[k]) << ',' << format_number(trace.sigma[k]) << ','
           << format_number(trace.dsigma[k]) << ',' << format_number(trace.u[k]) << ','
           << format_number(trace.v[k]) << ',' << format_number(trace.sigma_M[k]) << ','
           << format_number(trace.E[k]) << '\n';
    }
}

}  // namespace essmc
