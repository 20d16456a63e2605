/**
 * @file core.hpp
 * @brief Error types, sign convention and number formatting shared by all modules.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace essmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad dt, unknown kind, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite state or input reached the integrator.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// Controller parameters violate the tuning inequalities.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// sign(0) == 0 everywhere in this library.
inline double sgn(double x) noexcept
{
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

/// Collapses -0.0 to +0.0 so that control values compare bitwise.
inline double canonical_zero(double x) noexcept
{
    return x + 0.0;
}

/// Strict a > b with a relative guard band; boundary-equal counts as violated.
inline bool strictly_greater(double a, double b, double tol = 1e-12) noexcept
{
    const double scale = std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
    return a - b > tol * scale;
}

inline bool at_least(double a, double b, double tol = 1e-12) noexcept
{
    const double scale = std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
    return a - b >= -tol * scale;
}

constexpr int kOutputDigits = 12;

/// Locale-independent shortest form at 12 significant digits.
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), canonical_zero(v),
                             std::chars_format::general, kOutputDigits);
    return std::string(buf, res.ptr);
}

/// Rounds to 12 significant digits (used before handing numbers to JSON).
inline double round_output(double v)
{
    if (!std::isfinite(v)) return v;
    const std::string s = format_number(v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

/// FNV-1a 64-bit digest, hex encoded.
inline std::string digest_hex(std::string_view text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kRngName = "std::mt19937_64";

}  // namespace essmc
