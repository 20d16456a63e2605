/**
 * @file controllers.hpp
 * @brief Time-optimal, fuel-optimal, sub-optimal (SOSMC) and energy-saving
 *        sub-optimal (ES-SOSMC) switching laws.
 *
 * The two sliding-mode laws are sampled-data state machines that only ever see
 * sigma. The extremum memory sigma_M is produced by a trend-reversal detector
 * working on the same samples. The bang-bang laws are full state feedback.
 */
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "essmc/core.hpp"
#include "essmc/plant.hpp"

namespace essmc {

enum class ControllerKind { Off, TimeOptimal, FuelOptimal, Sosmc, EsSosmc };

inline std::string_view to_string(ControllerKind k)
{
    switch (k) {
        case ControllerKind::Off: return "off";
        case ControllerKind::TimeOptimal: return "time-optimal";
        case ControllerKind::FuelOptimal: return "fuel-optimal";
        case ControllerKind::Sosmc: return "sosmc";
        case ControllerKind::EsSosmc: return "es-sosmc";
    }
    return "off";
}

inline ControllerKind controller_kind_from(std::string_view s)
{
    if (s == "off" || s == "none") return ControllerKind::Off;
    if (s == "time-optimal") return ControllerKind::TimeOptimal;
    if (s == "fuel-optimal") return ControllerKind::FuelOptimal;
    if (s == "sosmc") return ControllerKind::Sosmc;
    if (s == "es-sosmc") return ControllerKind::EsSosmc;
    throw ConfigError("unknown controller kind '" + std::string(s) + "'");
}

struct DetectorSettings {
    int confirm_window = 3;   ///< N samples moving away before an extremum is confirmed
    double hysteresis = 0.0;  ///< epsilon_peak, sigma units
};

struct ControllerParams {
    ControllerKind kind = ControllerKind::Sosmc;
    double u_max = 1.0;
    double beta1 = 0.65;
    double beta2 = 0.65;      ///< es-sosmc only
    double alpha_star = 1.0;  ///< sosmc only
    double K = 2.0;           ///< fuel-optimal only
    DetectorSettings detector;
};

// ---------------------------------------------------------------------------
// Bang-bang laws of the unperturbed double integrator
// ---------------------------------------------------------------------------

/// Residual of the time-optimal switching curve x1 + |x2|x2/(2U).
inline double switching_residual(double x1, double x2, double U)
{
    return x1 + 0.5 * std::fabs(x2) * x2 / U;
}

inline double time_optimal_control(double x1, double x2, double U)
{
    const double s = switching_residual(x1, x2, U);
    if (s > 0.0) return -U;
    if (s < 0.0) return U;
    if (x2 > 0.0) return -U;
    if (x2 < 0.0) return U;
    return 0.0;
}

/// Minimum time to the origin under |u| <= U.
inline double minimum_time(double x1, double x2, double U)
{
    const double s = switching_residual(x1, x2, U);
    if (s > 0.0 || (s == 0.0 && x2 > 0.0)) {
        return (x2 + 2.0 * std::sqrt(U * x1 + 0.5 * x2 * x2)) / U;
    }
    if (s < 0.0 || x2 < 0.0) {
        return (-x2 + 2.0 * std::sqrt(-U * x1 + 0.5 * x2 * x2)) / U;
    }
    return 0.0;
}

/// Switch-off curve parameter of the response-time constrained fuel-optimal law.
inline double fuel_optimal_psi(double K)
{
    if (!(K >= 1.0) || !std::isfinite(K)) throw DomainError("fuel_optimal_psi requires K >= 1");
    if (K == 1.0) return 0.5;
    const double root = std::sqrt(K * (K - 1.0));
    // 2K - 1 - 2 sqrt(K(K-1)) == 1/(2K - 1 + 2 sqrt(K(K-1))), which avoids cancellation
    return K * (2.0 * K - 1.0 + 2.0 * root) - 0.5;
}

enum class FuelMode { Bang, Coast, Final };

struct FuelOptimalState {
    FuelMode mode = FuelMode::Bang;
    bool initialized = false;
    double prev_switch_off = 0.0;  ///< residual of gamma_K at the previous sample
    double prev_switching = 0.0;   ///< residual of gamma at the previous sample
};

/// Bang until the gamma_K crossing, coast (u = 0) until the gamma crossing, then
/// time-optimal to the origin. Crossings are sign changes between consecutive
/// samples; touching the curve counts as crossing.
inline double fuel_optimal_control(double x1, double x2, double U, double K, FuelOptimalState& state)
{
    const double psi = fuel_optimal_psi(K);
    const double r_off = x1 + psi * std::fabs(x2) * x2 / U;
    const double r_sw = switching_residual(x1, x2, U);

    if (!state.initialized) {
        state.initialized = true;
        if (r_sw == 0.0) {
            state.mode = FuelMode::Final;
        } else if (r_sw * r_off < 0.0) {
            state.mode = FuelMode::Coast;
        } else {
            state.mode = FuelMode::Bang;
        }
    } else {
        if (state.mode == FuelMode::Bang && state.prev_switch_off * r_off <= 0.0) {
            state.mode = FuelMode::Coast;
        }
        if (state.mode == FuelMode::Coast && state.prev_switching * r_sw <= 0.0) {
            state.mode = FuelMode::Final;
        }
    }
    state.prev_switch_off = r_off;
    state.prev_switching = r_sw;

    if (state.mode == FuelMode::Coast) return 0.0;
    return time_optimal_control(x1, x2, U);
}

// ---------------------------------------------------------------------------
// Extremum detector
// ---------------------------------------------------------------------------

/// Measurement-only detector of local maxima, minima and flat (flex) points.
///
/// A candidate extremum is confirmed once `confirm_window` samples lie more than
/// `hysteresis` beyond it on the far side with no new extreme in between.
/// A pause of `confirm_window` consecutive steps emits the flat value once. A pause
/// step either stays within `hysteresis` or reverses the previous step, so a
/// trajectory held at rest by a dithering disturbance still registers as flat.
/// The emitted value is the candidate sample itself.
class ExtremumDetector {
public:
    explicit ExtremumDetector(DetectorSettings settings = {}) : settings_(settings)
    {
        if (settings_.confirm_window < 1) throw ConfigError("detector.confirm_window must be >= 1");
        if (!(settings_.hysteresis >= 0.0)) throw ConfigError("detector.hysteresis must be >= 0");
    }

    std::optional<double> update(double s)
    {
        if (!started_) {
            started_ = true;
            restart(s);
            last_ = s;
            return std::nullopt;
        }

        const double step = s - last_;
        const double dir = sgn(step);
        if (std::fabs(step) <= settings_.hysteresis || dir == -last_dir_) {
            ++flat_;
        } else {
            flat_ = 0;
            flat_emitted_ = false;
        }
        last_dir_ = dir;
        last_ = s;
        if (flat_ >= settings_.confirm_window && !flat_emitted_) {
            flat_emitted_ = true;
            restart(s);
            return s;
        }

        if (trend_ == 0) {
            if (s - anchor_ > settings_.hysteresis) {
                trend_ = 1;
                candidate_ = far_ = s;
            } else if (anchor_ - s > settings_.hysteresis) {
                trend_ = -1;
                candidate_ = far_ = s;
            }
            return std::nullopt;
        }

        // Distance past the candidate along the trend (positive = new extreme).
        const double ahead = trend_ * (s - candidate_);
        if (ahead > 0.0) {
            candidate_ = far_ = s;
            away_ = 0;
            return std::nullopt;
        }
        if (trend_ * (far_ - s) > 0.0) far_ = s;
        if (-ahead > settings_.hysteresis) {
            if (++away_ >= settings_.confirm_window) {
                const double extremum = candidate_;
                trend_ = -trend_;
                candidate_ = far_;
                away_ = 0;
                return extremum;
            }
        }
        return std::nullopt;
    }

    const DetectorSettings& settings() const { return settings_; }

private:
    void restart(double s)
    {
        trend_ = 0;
        anchor_ = candidate_ = far_ = s;
        away_ = 0;
    }

    DetectorSettings settings_;
    bool started_ = false;
    int trend_ = 0;
    double anchor_ = 0.0;
    double candidate_ = 0.0;
    double far_ = 0.0;  ///< most extreme sample on the opposite side since the candidate
    int away_ = 0;
    double last_ = 0.0;
    int flat_ = 0;
    bool flat_emitted_ = false;
    double last_dir_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sub-optimal laws
// ---------------------------------------------------------------------------

/// Main-phase SOSMC output: -alpha*U*sign(sigma - beta1*sigma_M).
inline double sosmc_law(double sigma, double sigma_M, double beta1, double alpha_star, double U)
{
    const double e = sigma - beta1 * sigma_M;
    const double alpha = (e * sigma_M >= 0.0) ? 1.0 : alpha_star;
    return canonical_zero(-alpha * U * sgn(e));
}

/// Main-phase ES-SOSMC output: two half-authority relays at beta1 and beta2.
inline double es_sosmc_law(double sigma, double sigma_M, double beta1, double beta2, double U)
{
    const double half = 0.5 * U;
    return canonical_zero(-half * sgn(sigma - beta1 * sigma_M) - half * sgn(sigma - beta2 * sigma_M));
}

enum class Phase { Initial, Main };

struct ControllerState {
    Phase phase = Phase::Initial;
    double sigma0 = 0.0;
    double sigma_M = std::nan("");
    bool t_M1_found = false;
    long samples = 0;
    ExtremumDetector detector;
};

namespace detail {

/// Shared initial/main phase logic; `main_law` maps (sigma, sigma_M) to u.
template <typename MainLaw>
double sampled_control(ControllerState& state, double sigma, double U, MainLaw&& main_law)
{
    const auto event = state.detector.update(sigma);
    if (state.samples == 0) state.sigma0 = sigma;
    ++state.samples;

    if (event) {
        state.sigma_M = *event;
        if (state.phase == Phase::Initial) {
            state.phase = Phase::Main;
            state.t_M1_found = true;
        }
    }
    // No motion over the first step: the start is itself an extremum.
    if (state.phase == Phase::Initial && state.samples == 2 && sigma == state.sigma0) {
        state.phase = Phase::Main;
        state.t_M1_found = true;
        state.sigma_M = state.sigma0;
    }
    if (state.phase == Phase::Initial) return canonical_zero(-U * sgn(sigma - state.sigma0));
    return main_law(sigma, state.sigma_M);
}

}  // namespace detail

inline double sosmc_control(ControllerState& state, double sigma, const ControllerParams& p)
{
    return detail::sampled_control(state, sigma, p.u_max, [&](double s, double sm) {
        return sosmc_law(s, sm, p.beta1, p.alpha_star, p.u_max);
    });
}

inline double es_sosmc_control(ControllerState& state, double sigma, const ControllerParams& p)
{
    return detail::sampled_control(state, sigma, p.u_max, [&](double s, double sm) {
        return es_sosmc_law(s, sm, p.beta1, p.beta2, p.u_max);
    });
}

/// Runtime-dispatched controller used by the simulators.
class Controller {
public:
    explicit Controller(ControllerParams params)
        : params_(std::move(params)), state_{Phase::Initial, 0.0, std::nan(""), false, 0,
                                             ExtremumDetector(params_.detector)}
    {
    }

    /// Control from the sampled sliding variable; `dsigma` is read only by the
    /// full-state bang-bang laws.
    double operator()(double sigma, double dsigma)
    {
        switch (params_.kind) {
            case ControllerKind::Off: return 0.0;
            case ControllerKind::TimeOptimal: return time_optimal_control(sigma, dsigma, params_.u_max);
            case ControllerKind::FuelOptimal:
                return fuel_optimal_control(sigma, dsigma, params_.u_max, params_.K, fuel_);
            case ControllerKind::Sosmc: return sosmc_control(state_, sigma, params_);
            case ControllerKind::EsSosmc: return es_sosmc_control(state_, sigma, params_);
        }
        return 0.0;
    }

    bool needs_full_state() const
    {
        return params_.kind == ControllerKind::TimeOptimal || params_.kind == ControllerKind::FuelOptimal;
    }

    /// Largest |u| the law can emit.
    double peak_authority() const
    {
        if (params_.kind == ControllerKind::Off) return 0.0;
        if (params_.kind == ControllerKind::Sosmc) return std::fmax(1.0, params_.alpha_star) * params_.u_max;
        return params_.u_max;
    }

    const ControllerParams& params() const { return params_; }
    const ControllerState& state() const { return state_; }
    const FuelOptimalState& fuel_state() const { return fuel_; }

private:
    ControllerParams params_;
    ControllerState state_;
    FuelOptimalState fuel_;
};

// ---------------------------------------------------------------------------
// Parameter validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    bool feasible = false;
    bool twisting = false;
    bool monotonic = false;
    bool recovery = false;  ///< es-sosmc with beta2 == beta1
    std::vector<std::string> violations;
};

namespace detail {

inline ValidationReport validate_sosmc(double beta1, double alpha_star, const PlantParams& plant, double U,
                                       ValidationReport r)
{
    const double d = plant.delta;
    const double gm = plant.gamma_m;
    const double gM = plant.gamma_M;
    bool ok = r.violations.empty();
    if (!(at_least(beta1, 0.0) && beta1 < 1.0)) {
        r.violations.emplace_back("0 <= beta1 < 1");
        ok = false;
    }
    if (!at_least(alpha_star, 1.0)) {
        r.violations.emplace_back("alpha* >= 1");
        ok = false;
    }
    const double twist_min = (2.0 * d + (1.0 - beta1) * gM * U) / ((1.0 + beta1) * gm * U);
    r.twisting = ok && strictly_greater(alpha_star, twist_min);
    if (!r.twisting && ok) r.violations.emplace_back("alpha* > (2*delta + (1-beta1)*gamma_M*U)/((1+beta1)*gamma_m*U)");
    if (beta1 > 0.0) {
        const double mono_min = (d + (1.0 - beta1) * gM * U) / (beta1 * gm * U);
        r.monotonic = r.twisting && strictly_greater(alpha_star, mono_min);
    }
    r.feasible = r.twisting;
    return r;
}

}  // namespace detail

inline ValidationReport validate_params(const ControllerParams& params, const PlantParams& plant)
{
    ValidationReport r;
    const double U = params.u_max;
    if (!(U > 0.0)) {
        r.violations.emplace_back("U > 0");
        return r;
    }
    const bool authority = strictly_greater(U, plant.delta / plant.gamma_m);
    if (!authority) r.violations.emplace_back("U > delta/gamma_m");

    switch (params.kind) {
        case ControllerKind::Off:
            r.feasible = true;
            r.violations.clear();
            return r;
        case ControllerKind::TimeOptimal:
            r.feasible = authority;
            return r;
        case ControllerKind::FuelOptimal:
            if (!strictly_greater(params.K, 1.0)) r.violations.emplace_back("K > 1");
            r.feasible = r.violations.empty();
            return r;
        case ControllerKind::Sosmc:
            return detail::validate_sosmc(params.beta1, params.alpha_star, plant, U, std::move(r));
        case ControllerKind::EsSosmc: {
            if (params.beta2 == params.beta1) {
                r.recovery = true;
                return detail::validate_sosmc(params.beta1, 1.0, plant, U, std::move(r));
            }
            const double ratio = plant.delta / (plant.gamma_m * U);
            if (!strictly_greater(params.beta1 + params.beta2, 2.0 * ratio)) {
                r.violations.emplace_back("beta1 + beta2 > 2*delta/U");
            }
            if (!(at_least(params.beta1, 0.0) && params.beta1 < 1.0)) r.violations.emplace_back("0 <= beta1 < 1");
            if (!(params.beta2 > -1.0 && params.beta2 < params.beta1)) {
                r.violations.emplace_back("-1 < beta2 < beta1");
            }
            r.feasible = r.violations.empty();
            r.twisting = r.feasible;
            return r;
        }
    }
    return r;
}

}  // namespace essmc
