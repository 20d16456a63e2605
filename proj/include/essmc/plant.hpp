/**
 * @file plant.hpp
 * @brief Perturbed double integrator with optional first-order actuator lag.
 */
#pragma once

#include <cmath>
#include <string>

#include "essmc/core.hpp"

namespace essmc {

/// Normalized uncertain plant: sigma'' = f + g*v, |f| <= delta, gamma_m <= g <= gamma_M,
/// mu*v' + v = u.
struct PlantParams {
    double delta = 0.0;
    double u_max = 1.0;
    double gamma_m = 1.0;
    double gamma_M = 1.0;
    double mu = 0.0;

    /// Structural checks only; U > delta/gamma_m is a tuning condition reported by
    /// validate_params.
    void validate() const
    {
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("plant.delta must be finite and >= 0");
        if (!(u_max > 0.0) || !std::isfinite(u_max)) throw ConfigError("plant.u_max must be finite and > 0");
        if (!(gamma_m > 0.0) || !(gamma_M >= gamma_m)) throw ConfigError("plant gains need 0 < gamma_m <= gamma_M");
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("plant.mu must be finite and >= 0");
    }
};

struct PlantState {
    double sigma = 0.0;
    double dsigma = 0.0;
    double v = 0.0;  ///< actuator output (equals the command when mu == 0)
};

/// Output of a first-order lag after one zero-order-hold step.
inline double lag_update(double v, double u_cmd, double mu, double dt)
{
    if (mu <= 0.0) return u_cmd;
    return u_cmd + (v - u_cmd) * std::exp(-dt / mu);
}

/// One semi-implicit Euler step (velocity first, then position with the new velocity).
inline PlantState step_plant(const PlantState& state, double u_cmd, double f, double g,
                             const PlantParams& params, double dt)
{
    if (!std::isfinite(state.sigma) || !std::isfinite(state.dsigma) || !std::isfinite(state.v) ||
        !std::isfinite(u_cmd) || !std::isfinite(f) || !std::isfinite(g) || !std::isfinite(dt)) {
        throw InvalidStateError("non-finite input to step_plant");
    }
    if (!(dt > 0.0)) throw InvalidStateError("step_plant requires dt > 0");

    PlantState next;
    next.v = lag_update(state.v, u_cmd, params.mu, dt);
    const double accel = f + g * next.v;
    next.dsigma = state.dsigma + accel * dt;
    next.sigma = state.sigma + next.dsigma * dt;
    return next;
}

}  // namespace essmc
