/**
 * @file surface.hpp
 * @brief Randomly rough moving surface as first-order filtered white noise,
 *        with a Welch PSD estimate for verification.
 */
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <type_traits>
#include <utility>
#include <vector>

#include "essmc/core.hpp"

namespace essmc {

struct SurfaceParams {
    double R = 1e-11;       ///< roughness coefficient
    double nu = 1e-4;       ///< surface speed, m/s
    double v0 = 1591.5494309189535;  ///< spatial cutoff, cycles/m (omega0 = 1 rad/s at nu = 1e-4)
    std::uint64_t seed = 1;
    double dt = 1e-3;
    double duration = 10.0;

    double omega0() const { return 2.0 * std::numbers::pi * v0 * nu; }

    void validate() const
    {
        if (!(R >= 0.0) || !std::isfinite(R)) throw ConfigError("surface.R must be finite and >= 0");
        if (!(nu > 0.0) || !(v0 > 0.0)) throw ConfigError("surface.nu and surface.v0 must be > 0");
        if (!(dt > 0.0) || !(duration > 0.0)) throw ConfigError("surface.dt and surface.duration must be > 0");
        if (!(duration >= dt)) throw ConfigError("surface.duration must be >= surface.dt");
    }
};

struct SurfaceProfile {
    std::vector<double> t, y, x0, dx0;
    double dt = 0.0;
    double omega0 = 0.0;

    std::size_t size() const { return t.size(); }

    /// Linear interpolation of (x0, dx0) at time `time`, held beyond the ends.
    std::pair<double, double> at(double time) const
    {
        if (t.empty()) return {0.0, 0.0};
        if (time <= t.front()) return {x0.front(), dx0.front()};
        const double pos = time / dt;
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= t.size()) return {x0.back(), dx0.back()};
        const double w = pos - static_cast<double>(k);
        return {x0[k] + w * (x0[k + 1] - x0[k]), dx0[k] + w * (dx0[k + 1] - dx0[k])};
    }
};

inline double surface_psd(double omega, double R, double nu, double omega0)
{
    return 2.0 * std::numbers::pi * R * nu / (omega * omega + omega0 * omega0);
}

inline double surface_variance(const SurfaceParams& p)
{
    return std::numbers::pi * p.R * p.nu / p.omega0();
}

/// Exact zero-order-hold discretization of sqrt(2 pi R nu)/(s + omega0) driven by
/// white noise of variance 1/dt per sample. The first sample is drawn from the
/// stationary distribution.
inline SurfaceProfile generate_surface(const SurfaceParams& p)
{
    p.validate();
    const double w0 = p.omega0();
    const double c = std::sqrt(2.0 * std::numbers::pi * p.R * p.nu);
    const double a = std::exp(-w0 * p.dt);
    const double b = c * (1.0 - a) / w0;
    const auto n = static_cast<std::size_t>(std::llround(p.duration / p.dt)) + 1;

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double w_scale = 1.0 / std::sqrt(p.dt);

    SurfaceProfile out;
    out.dt = p.dt;
    out.omega0 = w0;
    out.t.resize(n);
    out.y.resize(n);
    out.x0.resize(n);
    out.dx0.resize(n);
    double x = std::sqrt(surface_variance(p)) * normal(rng);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = w_scale * normal(rng);
        out.t[k] = static_cast<double>(k) * p.dt;
        out.y[k] = p.nu * out.t[k];
        out.x0[k] = x;
        out.dx0[k] = -w0 * x + c * w;
        x = a * x + b * w;
    }
    return out;
}

inline double peak_to_peak(const std::vector<double>& x)
{
    if (x.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

/// Scales R so that the profile of `p` has the target peak-to-peak (the profile
/// shape is fixed by the seed, its amplitude scales with sqrt(R)).
inline SurfaceParams calibrate_surface(SurfaceParams p, double target_p2p)
{
    if (!(target_p2p > 0.0)) throw ConfigError("target peak-to-peak must be > 0");
    SurfaceParams unit = p;
    unit.R = 1.0;
    const double p2p = peak_to_peak(generate_surface(unit).x0);
    if (!(p2p > 0.0)) throw DomainError("degenerate surface realization");
    p.R = (target_p2p / p2p) * (target_p2p / p2p);
    return p;
}

struct PsdEstimate {
    std::vector<double> omega;  ///< rad/s, 0 .. pi/dt
    std::vector<double> S;      ///< two-sided density level: integral of S over dw/(2 pi), both signs, is the variance
};

/// Welch estimate: `segments` Hann-windowed segments with 50% overlap, mean removed per segment.
inline PsdEstimate estimate_psd(const std::vector<double>& x, double dt, int segments = 8)
{
    if (segments < 4) throw DomainError("estimate_psd needs at least 4 segments");
    if (!(dt > 0.0)) throw DomainError("estimate_psd needs dt > 0");
    const std::size_t len = (2 * x.size() / static_cast<std::size_t>(segments + 1)) & ~std::size_t{1};
    if (len < 256) throw DomainError("estimate_psd needs segments of at least 256 samples");
    const std::size_t hop = len / 2;
    const std::size_t bins = len / 2 + 1;

    std::vector<double> window(len);
    double wsum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len)));
        wsum += window[i] * window[i];
    }

    std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(len), &fftw_free);
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(bins), &fftw_free);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in.get(), out.get(), FFTW_ESTIMATE);
    std::unique_ptr<std::remove_pointer_t<fftw_plan>, decltype(&fftw_destroy_plan)> guard(plan, &fftw_destroy_plan);

    PsdEstimate est;
    est.S.assign(bins, 0.0);
    for (int s = 0; s < segments; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * hop;
        double mean = 0.0;
        for (std::size_t i = 0; i < len; ++i) mean += x[off + i];
        mean /= static_cast<double>(len);
        for (std::size_t i = 0; i < len; ++i) in.get()[i] = (x[off + i] - mean) * window[i];
        fftw_execute(plan);
        for (std::size_t k = 0; k < bins; ++k) {
            const double re = out.get()[k][0];
            const double im = out.get()[k][1];
            est.S[k] += dt * (re * re + im * im) / wsum;
        }
    }
    est.omega.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.S[k] /= segments;
        est.omega[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(len) * dt);
    }
    return est;
}

inline void write_profile_csv(std::ostream& os, const SurfaceProfile& p)
{
    os << "t,y,x0,dx0\n";
    for (std::size_t k = 0; k < p.size(); ++k) {
        os << format_number(p.t[k]) << ',' << format_number(p.y[k]) << ',' << format_number(p.x0[k]) << ','
           << format_number(p.dx0[k]) << '\n';
    }
}

inline void write_psd_csv(std::ostream& os, const PsdEstimate& est, const SurfaceParams& p)
{
    os << "omega,S_est,S_theory\n";
    const double w0 = p.omega0();
    for (std::size_t k = 0; k < est.omega.size(); ++k) {
        os << format_number(est.omega[k]) << ',' << format_number(est.S[k]) << ','
           << format_number(surface_psd(est.omega[k], p.R, p.nu, w0)) << '\n';
    }
}

}  // namespace essmc
