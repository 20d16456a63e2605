/**
 * @file chatter.hpp
 * @brief Describing-function prediction of the chattering limit cycle under
 *        first-order actuator lag, and its measurement in simulated traces.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string_view>
#include <vector>

#include "essmc/core.hpp"

namespace essmc {

using Complex = std::complex<double>;

enum class ChatterMethod { ClosedForm, NumericBalance };

inline std::string_view to_string(ChatterMethod m)
{
    return m == ChatterMethod::ClosedForm ? "closed-form" : "numeric-balance";
}

struct ChatterPrediction {
    bool valid = false;  ///< false when no oscillation is predicted (beta1 + beta2 <= 0)
    double omega_c = std::nan("");
    double sigma_A = std::nan("");
    ChatterMethod method = ChatterMethod::ClosedForm;
    double phase_deg = std::nan("");  ///< inclination of -1/N
    double mu = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double U = 1.0;
};

namespace detail {

inline double root_sum(double beta1, double beta2)
{
    return std::sqrt(1.0 - beta1 * beta1) + std::sqrt(1.0 - beta2 * beta2);
}

inline void check_betas(double beta1, double beta2)
{
    if (!(std::fabs(beta1) <= 1.0) || !(std::fabs(beta2) <= 1.0)) throw DomainError("|beta| must be <= 1");
}

}  // namespace detail

/// Sum of two hysteresis-relay DFs of amplitude U/2 each.
inline Complex df_es_sosmc(double sigma_A, double U, double beta1, double beta2)
{
    if (!(sigma_A > 0.0)) throw DomainError("df_es_sosmc requires sigma_A > 0");
    detail::check_betas(beta1, beta2);
    const double gain = 2.0 * U / (std::numbers::pi * sigma_A);
    return gain * Complex(detail::root_sum(beta1, beta2), beta1 + beta2);
}

/// Double integrator behind a first-order lag: -1/(w^2 + j w^3 mu).
inline Complex plant_response(double omega, double mu)
{
    if (!(omega > 0.0)) throw DomainError("plant_response requires omega > 0");
    return -1.0 / Complex(omega * omega, omega * omega * omega * mu);
}

/// Inclination of the negative reciprocal DF: arctan(-(b1 + b2)/(sqrt(1-b1^2) + sqrt(1-b2^2))).
inline double df_angle(double beta1, double beta2)
{
    detail::check_betas(beta1, beta2);
    return std::atan(-(beta1 + beta2) / detail::root_sum(beta1, beta2));
}

inline ChatterPrediction predict_chatter_closed_form(double mu, double beta1, double beta2, double U = 1.0)
{
    if (!(mu > 0.0)) throw DomainError("closed-form chatter prediction requires mu > 0");
    ChatterPrediction p;
    p.method = ChatterMethod::ClosedForm;
    p.mu = mu;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.U = U;
    p.phase_deg = df_angle(beta1, beta2) * 180.0 / std::numbers::pi;
    if (!(beta1 + beta2 > 0.0)) return p;
    const double w = (beta1 + beta2) / (mu * detail::root_sum(beta1, beta2));
    const double m2 = mu * mu * w * w + 1.0;
    p.omega_c = w;
    p.sigma_A = std::sqrt(m2) / (w * w * m2);
    p.valid = true;
    return p;
}

/// Solves N(sigma_A) W(jw) = -1: bisection of the phase condition in log(w),
/// then the amplitude from |N| |W| = 1.
inline ChatterPrediction solve_harmonic_balance(double mu, double beta1, double beta2, double U = 1.0)
{
    if (!(mu > 0.0)) throw DomainError("harmonic balance requires mu > 0");
    if (!(U > 0.0)) throw DomainError("harmonic balance requires U > 0");
    ChatterPrediction p;
    p.method = ChatterMethod::NumericBalance;
    p.mu = mu;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.U = U;
    p.phase_deg = df_angle(beta1, beta2) * 180.0 / std::numbers::pi;
    if (!(beta1 + beta2 > 0.0)) return p;

    const Complex n1 = df_es_sosmc(1.0, U, beta1, beta2);
    // Principal arguments: arg W falls from pi (w -> 0) to pi/2 (w -> inf) and
    // arg(-1/N) = pi - arg N lies inside that range.
    const double want = std::arg(-1.0 / n1);
    auto residual = [&](double log_w) { return std::arg(plant_response(std::exp(log_w), mu)) - want; };

    double lo = std::log(1e-12 / mu);
    double hi = std::log(1e12 / mu);
    if (!(residual(lo) > 0.0 && residual(hi) < 0.0)) return p;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    const double w = std::exp(0.5 * (lo + hi));
    p.omega_c = w;
    p.sigma_A = std::abs(n1) * std::abs(plant_response(w, mu));
    p.valid = true;
    return p;
}

struct OscillationMeasurement {
    bool valid = false;
    double omega = std::nan("");
    double amplitude = std::nan("");
    int crossings = 0;
};

/// Zero-crossing frequency and half peak-to-peak over the trailing `window` fraction.
inline OscillationMeasurement measure_oscillation(const std::vector<double>& t, const std::vector<double>& x,
                                                  double window = 0.3)
{
    OscillationMeasurement m;
    if (t.size() != x.size() || t.size() < 4) return m;
    const double t_start = t.back() - window * (t.back() - t.front());
    const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_start) - t.begin());
    double lo = x[first], hi = x[first];
    std::vector<double> cross;
    std::size_t last = first;  // latest nonzero sample
    for (std::size_t k = first + 1; k < t.size(); ++k) {
        lo = std::min(lo, x[k]);
        hi = std::max(hi, x[k]);
        if (x[k] == 0.0) continue;
        if (x[last] != 0.0 && sgn(x[k]) != sgn(x[last])) {
            const double a = x[last], b = x[k];
            cross.push_back(t[last] + (t[k] - t[last]) * a / (a - b));
        }
        last = k;
    }
    m.crossings = static_cast<int>(cross.size());
    m.amplitude = 0.5 * (hi - lo);
    if (cross.size() < 3) return m;
    const double half_period = (cross.back() - cross.front()) / static_cast<double>(cross.size() - 1);
    m.omega = std::numbers::pi / half_period;
    m.valid = true;
    return m;
}

}  // namespace essmc
