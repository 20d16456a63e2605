/**
 * @file disturbance.hpp
 * @brief Matched disturbance realizations, every sample clamped to |f| <= delta.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "essmc/core.hpp"
#include "essmc/plant.hpp"

namespace essmc {

enum class DisturbanceKind { Constant, Sinusoid, SeededNoise, WorstCaseFlip, SurfaceDriven };

/// State-feedback policies of the adversarial disturbance.
enum class FlipMode {
    OpposeControl,  ///< f = -delta*sign(u); a u == 0 arc keeps the braking value latched at its start
    AidMotion,      ///< f = +delta*sign(sigma')
    OuterEnvelope,  ///< f = +delta*sign(sigma') while u != 0, f = 0 while u == 0
};

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Constant;
    double amplitude = 0.0;   ///< level (constant), peak (sinusoid), half-range (noise)
    double omega = 1.0;       ///< rad/s, sinusoid only
    double phase = 0.0;       ///< rad, sinusoid only
    double hold = 0.0;        ///< noise hold time in s; <= 0 means a fresh sample every step
    std::uint64_t seed = 0;
    FlipMode flip = FlipMode::OpposeControl;
    bool invert = false;      ///< negates the open-loop realization (odd-symmetry checks)
    std::vector<double> samples;  ///< surface-driven: zero-order-hold sequence
    double sample_dt = 0.0;
};

inline std::string_view to_string(DisturbanceKind k)
{
    switch (k) {
        case DisturbanceKind::Constant: return "constant";
        case DisturbanceKind::Sinusoid: return "sinusoid";
        case DisturbanceKind::SeededNoise: return "seeded-noise";
        case DisturbanceKind::WorstCaseFlip: return "worst-case-flip";
        case DisturbanceKind::SurfaceDriven: return "surface-driven";
    }
    return "constant";
}

inline DisturbanceKind disturbance_kind_from(std::string_view s)
{
    if (s == "constant" || s == "none") return DisturbanceKind::Constant;
    if (s == "sinusoid") return DisturbanceKind::Sinusoid;
    if (s == "seeded-noise") return DisturbanceKind::SeededNoise;
    if (s == "worst-case-flip") return DisturbanceKind::WorstCaseFlip;
    if (s == "surface-driven") return DisturbanceKind::SurfaceDriven;
    throw ConfigError("unknown disturbance kind '" + std::string(s) + "'");
}

inline std::string_view to_string(FlipMode m)
{
    switch (m) {
        case FlipMode::OpposeControl: return "oppose-control";
        case FlipMode::AidMotion: return "aid-motion";
        case FlipMode::OuterEnvelope: return "outer-envelope";
    }
    return "oppose-control";
}

inline FlipMode flip_mode_from(std::string_view s)
{
    if (s == "oppose-control") return FlipMode::OpposeControl;
    if (s == "aid-motion") return FlipMode::AidMotion;
    if (s == "outer-envelope") return FlipMode::OuterEnvelope;
    throw ConfigError("unknown flip mode '" + std::string(s) + "'");
}

/// Stateful sampler for one realization. Sampled once per step at the step start.
class Disturbance {
public:
    Disturbance(DisturbanceSpec spec, double delta, double dt)
        : spec_(std::move(spec)), delta_(delta), dt_(dt), rng_(spec_.seed)
    {
        if (spec_.kind == DisturbanceKind::SurfaceDriven && !(spec_.sample_dt > 0.0)) {
            throw ConfigError("surface-driven disturbance needs sample_dt > 0");
        }
        if (spec_.hold > 0.0 && dt_ > 0.0) {
            hold_steps_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(spec_.hold / dt_)));
        }
    }

    double sample(double t, const PlantState& x, double u_cmd)
    {
        double f = 0.0;
        const double sign = spec_.invert ? -1.0 : 1.0;
        switch (spec_.kind) {
            case DisturbanceKind::Constant:
                f = sign * spec_.amplitude;
                break;
            case DisturbanceKind::Sinusoid:
                f = sign * spec_.amplitude * std::sin(spec_.omega * t + spec_.phase);
                break;
            case DisturbanceKind::SeededNoise: {
                if (calls_ % hold_steps_ == 0) {
                    std::uniform_real_distribution<double> dist(-1.0, 1.0);
                    noise_ = dist(rng_);
                }
                ++calls_;
                f = sign * spec_.amplitude * noise_;
                break;
            }
            case DisturbanceKind::WorstCaseFlip:
                f = flip(x, u_cmd);
                break;
            case DisturbanceKind::SurfaceDriven: {
                if (spec_.samples.empty()) break;
                auto idx = static_cast<std::size_t>(std::floor(t / spec_.sample_dt + 1e-9));
                idx = std::min(idx, spec_.samples.size() - 1);
                f = sign * spec_.samples[idx];
                break;
            }
        }
        return std::clamp(f, -delta_, delta_);
    }

    const DisturbanceSpec& spec() const { return spec_; }

private:
    double flip(const PlantState& x, double u_cmd)
    {
        switch (spec_.flip) {
            case FlipMode::OpposeControl: {
                const bool entering = u_cmd == 0.0 && !coasting_;
                coasting_ = u_cmd == 0.0;
                if (!coasting_) return -delta_ * sgn(u_cmd);
                if (entering) coast_f_ = x.dsigma != 0.0 ? -delta_ * sgn(x.dsigma) : delta_ * sgn(x.sigma);
                return coast_f_;
            }
            case FlipMode::AidMotion:
                return delta_ * sgn(x.dsigma);
            case FlipMode::OuterEnvelope:
                return u_cmd != 0.0 ? delta_ * sgn(x.dsigma) : 0.0;
        }
        return 0.0;
    }

    DisturbanceSpec spec_;
    double delta_;
    double dt_;
    std::mt19937_64 rng_;
    std::uint64_t hold_steps_ = 1;
    std::uint64_t calls_ = 0;
    double noise_ = 0.0;
    bool coasting_ = false;
    double coast_f_ = 0.0;
};

}  // namespace essmc
