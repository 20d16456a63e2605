/**
 * @file convergence.hpp
 * @brief Worst-case cycle factors by piecewise-parabola composition, the
 *        convergence-time bound and the energy cost functions J and Jhat.
 *
 * One cycle starts at rest at sigma_M = 1 and moves down through the switching
 * regions of the law until the velocity vanishes again. Every arc is a parabola
 * with constant acceleration u + f, so arc times are exact. Reach time scales
 * with sqrt|sigma_M| and the contraction |sigma_next|/|sigma_M| is scale free.
 */
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "essmc/core.hpp"

namespace essmc {

enum class ControlLaw { Sosmc, EsSosmc };

/// Disturbance placement along the worst-case cycle.
enum class WorstCaseModel {
    PerArc,         ///< f in {-delta, 0, delta} per later arc, maximized over all choices
    OuterEnvelope,  ///< f aids the accelerating arc, weakens braking, zero while u == 0
};

inline std::string_view to_string(WorstCaseModel m)
{
    return m == WorstCaseModel::PerArc ? "per-arc" : "outer-envelope";
}

inline WorstCaseModel worst_case_model_from(std::string_view s)
{
    if (s == "per-arc") return WorstCaseModel::PerArc;
    if (s == "outer-envelope") return WorstCaseModel::OuterEnvelope;
    throw ConfigError("unknown worst-case model '" + std::string(s) + "'");
}

struct CycleFactors {
    double omega1 = 0.0, omega2 = 0.0;        ///< reach time per sqrt|sigma_M|
    double omega_on1 = 0.0, omega_on2 = 0.0;  ///< same, control-on arcs only
    double eta1 = 0.0, eta2 = 0.0;            ///< contraction |sigma_next|/|sigma_M|
    bool contractive = false;                 ///< max(eta1, eta2) < 1

    double omega_max() const { return std::fmax(omega1, omega2); }
    double omega_on_max() const { return std::fmax(omega_on1, omega_on2); }
    double eta_max() const { return std::fmax(eta1, eta2); }
};

struct CostValue {
    double value = std::numeric_limits<double>::infinity();
    bool finite = false;
};

namespace detail {

struct Region {
    double lower;  ///< region spans (lower, previous lower]
    double u;
};

struct CycleResult {
    double time = 0.0;
    double on_time = 0.0;
    double sigma_next = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs one downward cycle from rest at sigma = 1; f[i] is the disturbance on region i.
inline CycleResult compose_cycle(const std::vector<Region>& regions, const std::vector<double>& f)
{
    CycleResult r;
    double top = 1.0;
    double speed = 0.0;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const double len = top - regions[i].lower;
        const double d = -(regions[i].u + f[i]);  // downward acceleration
        double t = 0.0;
        bool stopped = false;
        if (d > 0.0) {
            const double exit = std::sqrt(speed * speed + 2.0 * d * len);
            t = std::isfinite(exit) ? (exit - speed) / d : kInf;
            speed = exit;
        } else if (d == 0.0) {
            t = speed > 0.0 ? len / speed : kInf;
        } else {
            const double stop = speed * speed / (-2.0 * d);
            if (stop < len) {
                t = speed / -d;
                r.sigma_next = top - stop;
                stopped = true;
            } else {
                const double exit = std::sqrt(std::fmax(0.0, speed * speed + 2.0 * d * len));
                t = (speed - exit) / -d;
                speed = exit;
            }
        }
        r.time += t;
        if (regions[i].u != 0.0) r.on_time += t;
        if (stopped) return r;
        if (!std::isfinite(len) || !std::isfinite(r.time)) break;
        top = regions[i].lower;
    }
    r.time = r.on_time = kInf;
    r.sigma_next = -kInf;
    return r;
}

inline std::vector<Region> regions_for(ControlLaw law, double U, double beta1, double beta2, double alpha_star)
{
    if (law == ControlLaw::Sosmc) return {{beta1, -U}, {-kInf, alpha_star * U}};
    return {{beta1, -U}, {beta2, 0.0}, {-kInf, U}};
}

}  // namespace detail

/// Cycle factors of a law for sigma_M = 1. Subscript 1: f aids the control on the
/// first arc, subscript 2: f opposes it.
inline CycleFactors compute_cycle_factors(double U, double delta, double beta1, double beta2, ControlLaw law,
                                          WorstCaseModel model = WorstCaseModel::PerArc,
                                          double alpha_star = 1.0)
{
    if (!(U > 0.0) || !(delta >= 0.0)) throw DomainError("cycle factors need U > 0 and delta >= 0");
    const auto regions = detail::regions_for(law, U, beta1, beta2, alpha_star);
    const std::size_t n = regions.size();
    CycleFactors out;

    if (model == WorstCaseModel::OuterEnvelope) {
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = regions[i].u != 0.0 ? -delta : 0.0;
        const auto c = detail::compose_cycle(regions, f);
        out.omega1 = out.omega2 = c.time;
        out.omega_on1 = out.omega_on2 = c.on_time;
        out.eta1 = out.eta2 = std::fabs(c.sigma_next);
    } else {
        for (int boundary = 0; boundary < 2; ++boundary) {
            double omega = 0.0, omega_on = 0.0, eta = 0.0;
            std::size_t combos = 1;
            for (std::size_t i = 1; i < n; ++i) combos *= 3;
            for (std::size_t code = 0; code < combos; ++code) {
                std::vector<double> f(n);
                f[0] = boundary == 0 ? -delta : delta;  // first arc has u = -U
                for (std::size_t i = 1, c = code; i < n; ++i, c /= 3) f[i] = (static_cast<double>(c % 3) - 1.0) * delta;
                const auto c = detail::compose_cycle(regions, f);
                omega = std::fmax(omega, c.time);
                omega_on = std::fmax(omega_on, c.on_time);
                eta = std::fmax(eta, std::fabs(c.sigma_next));
            }
            (boundary == 0 ? out.omega1 : out.omega2) = omega;
            (boundary == 0 ? out.omega_on1 : out.omega_on2) = omega_on;
            (boundary == 0 ? out.eta1 : out.eta2) = eta;
        }
    }
    out.contractive = out.eta_max() < 1.0;
    return out;
}

/// T_c <= |dsigma0|/(U - delta) + max(Omega) sqrt|sigma_M1| / (1 - max(sqrt(eta))).
inline double convergence_time_bound(double U, double delta, double dsigma0, double sigma_M1,
                                     const CycleFactors& factors)
{
    if (!(U > delta)) throw DomainError("convergence_time_bound requires U > delta");
    if (!factors.contractive) return std::numeric_limits<double>::infinity();
    const double reach = std::fabs(dsigma0) / (U - delta);
    return reach + factors.omega_max() * std::sqrt(std::fabs(sigma_M1)) / (1.0 - std::sqrt(factors.eta_max()));
}

/// Upper bound of |sigma| at the first extremum from (sigma0, dsigma0).
inline double first_extremum_bound(double U, double delta, double sigma0, double dsigma0)
{
    if (!(U > delta)) throw DomainError("first_extremum_bound requires U > delta");
    return std::fabs(sigma0) + 0.5 * dsigma0 * dsigma0 / (U - delta);
}

inline CostValue cost_from_factors(const CycleFactors& f)
{
    CostValue c;
    if (!f.contractive) return c;
    c.value = f.omega_on_max() / (1.0 - std::sqrt(f.eta_max()));
    c.finite = std::isfinite(c.value);
    return c;
}

inline CostValue cost_es(double U, double delta, double beta1, double beta2,
                         WorstCaseModel model = WorstCaseModel::OuterEnvelope)
{
    return cost_from_factors(compute_cycle_factors(U, delta, beta1, beta2, ControlLaw::EsSosmc, model));
}

inline CostValue cost_sosmc(double U, double delta, double beta1,
                            WorstCaseModel model = WorstCaseModel::OuterEnvelope, double alpha_star = 1.0)
{
    return cost_from_factors(
        compute_cycle_factors(U, delta, beta1, beta1, ControlLaw::Sosmc, model, alpha_star));
}

}  // namespace essmc
