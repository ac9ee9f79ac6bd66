#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lacunary {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using u128 = unsigned __int128;

// Denominators stay below 2^62 so cross-multiplied comparisons fit in 128 bits.
inline constexpr unsigned kMaxPrecisionBits = 62;

constexpr std::uint64_t pow2(unsigned k)
{
    return std::uint64_t{1} << k;
}

// ceil(log2(x)) for x >= 1.
constexpr int ceil_log2(std::uint64_t x)
{
    return x <= 1 ? 0 : 64 - std::countl_zero(x - 1);
}

constexpr bool is_pow2(std::uint64_t x)
{
    return x != 0 && (x & (x - 1)) == 0;
}

inline Rational pow2_rational(int k)
{
    if (k >= 0)
        return Rational(BigInt(1) << k);
    return Rational(BigInt(1), BigInt(1) << -k);
}

inline double to_double(const Rational& r)
{
    return r.convert_to<double>();
}

// Exact value of a finite double.
inline Rational exact_rational(double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("value must be finite");
    int exp = 0;
    const double mant = std::frexp(x, &exp); // x = mant * 2^exp, |mant| in [0.5, 1)
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    return Rational(BigInt(scaled)) * pow2_rational(exp - 53);
}

inline std::string to_string(const Rational& r)
{
    return r.str();
}

// Compare a/p with b/q, all positive denominators below 2^63.
constexpr int compare_fraction(std::uint64_t a, std::uint64_t p, std::uint64_t b, std::uint64_t q)
{
    const u128 lhs = static_cast<u128>(a) * q;
    const u128 rhs = static_cast<u128>(b) * p;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

// floor(a * m / den) and ceil(a * m / den) without overflow.
constexpr std::uint64_t scale_floor(std::uint64_t a, std::uint64_t m, std::uint64_t den)
{
    return static_cast<std::uint64_t>(static_cast<u128>(a) * m / den);
}

constexpr std::uint64_t scale_ceil(std::uint64_t a, std::uint64_t m, std::uint64_t den)
{
    const u128 prod = static_cast<u128>(a) * m;
    return static_cast<std::uint64_t>((prod + den - 1) / den);
}

// A point of [0,1]^d whose coordinates are num[i] / den.
//
// Every corner used in the library (point coordinates, bracket corners,
// chain corners, probe targets) is a Corner. Comparisons are exact.
struct Corner {
    std::vector<std::uint64_t> num;
    std::uint64_t den = 1;

    Corner() = default;
    Corner(std::vector<std::uint64_t> numerators, std::uint64_t denominator)
        : num(std::move(numerators)), den(denominator)
    {
        if (den == 0)
            throw std::invalid_argument("corner denominator must be positive");
        if (den > pow2(kMaxPrecisionBits))
            throw std::invalid_argument("corner denominator exceeds 2^62");
        for (auto a : num)
            if (a > den)
                throw std::invalid_argument("corner coordinate outside [0,1]");
    }

    static Corner zero(std::size_t d) { return Corner(std::vector<std::uint64_t>(d, 0), 1); }
    static Corner ones(std::size_t d) { return Corner(std::vector<std::uint64_t>(d, 1), 1); }

    std::size_t dim() const noexcept { return num.size(); }

    Rational coord(std::size_t i) const { return Rational(BigInt(num[i]), BigInt(den)); }

    // Numerator of the anchored box volume over den^d.
    BigInt volume_numerator() const
    {
        BigInt v = 1;
        for (auto a : num)
            v *= a;
        return v;
    }

    Rational volume() const
    {
        BigInt d = boost::multiprecision::pow(BigInt(den), static_cast<unsigned>(num.size()));
        return Rational(volume_numerator(), d);
    }

    // Same point expressed over a larger denominator that den divides.
    Corner over(std::uint64_t new_den) const
    {
        if (new_den % den != 0)
            throw std::invalid_argument("denominator does not divide target");
        const std::uint64_t f = new_den / den;
        std::vector<std::uint64_t> out(num.size());
        for (std::size_t i = 0; i < num.size(); ++i)
            out[i] = num[i] * f;
        return Corner(std::move(out), new_den);
    }

    // Same point over denominator g; every coordinate must be a multiple of 1/g.
    Corner rescaled(std::uint64_t g) const
    {
        std::vector<std::uint64_t> out(num.size());
        for (std::size_t i = 0; i < num.size(); ++i) {
            const u128 prod = static_cast<u128>(num[i]) * g;
            if (prod % den != 0)
                throw std::invalid_argument("corner is not on the requested grid");
            out[i] = static_cast<std::uint64_t>(prod / den);
        }
        return Corner(std::move(out), g);
    }

    // True when every coordinate is an integer multiple of 1/g.
    bool on_grid(std::uint64_t g) const
    {
        for (auto a : num)
            if ((static_cast<u128>(a) * g) % den != 0)
                return false;
        return true;
    }
};

inline int compare_coord(const Corner& a, const Corner& b, std::size_t i)
{
    return compare_fraction(a.num[i], a.den, b.num[i], b.den);
}

// Componentwise a <= b.
inline bool leq(const Corner& a, const Corner& b)
{
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (compare_coord(a, b, i) > 0)
            return false;
    return true;
}

// Componentwise a < b (the point a lies in the half-open box [0,b)).
inline bool strictly_below(const Corner& a, const Corner& b)
{
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (compare_coord(a, b, i) >= 0)
            return false;
    return true;
}

inline bool operator==(const Corner& a, const Corner& b)
{
    if (a.dim() != b.dim())
        return false;
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (compare_coord(a, b, i) != 0)
            return false;
    return true;
}

} // namespace lacunary
