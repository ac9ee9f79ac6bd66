#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dyadic.hpp"
#include "harness.hpp"
#include "points.hpp"

namespace lacunary::io {

enum class CoordFormat { decimal, bits };

// Exact decimal expansion of num / 2^h, e.g. 13/16 -> "0.8125", 0 -> "0".
inline std::string dyadic_decimal(std::uint64_t num, unsigned h)
{
    if (num == 0)
        return "0";
    BigInt digits = BigInt(num) * boost::multiprecision::pow(BigInt(5), h);
    std::string s = digits.str();
    if (s.size() < h)
        s.insert(0, h - s.size(), '0');
    std::string frac = s.substr(s.size() - h);
    std::string whole = s.substr(0, s.size() - h);
    while (!frac.empty() && frac.back() == '0')
        frac.pop_back();
    if (whole.empty())
        whole = "0";
    return frac.empty() ? whole : whole + "." + frac;
}

inline std::string dyadic_bits(std::uint64_t num, unsigned h)
{
    std::string s(h, '0');
    for (unsigned k = 0; k < h; ++k)
        if ((num >> (h - 1 - k)) & 1U)
            s[k] = '1';
    return s;
}

// Parses "p/q", a finite decimal ("0.015625", "1e-3") or "2^-k".
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto trim = [](std::string& t) {
        const auto b = t.find_first_not_of(" \t\r\n");
        const auto e = t.find_last_not_of(" \t\r\n");
        t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty())
        throw std::invalid_argument("empty number");
    auto parse_int = [](const std::string& t) {
        if (t.empty() || t.find_first_not_of("+-0123456789") != std::string::npos)
            throw std::invalid_argument("not an integer: '" + t + "'");
        // cpp_int reads a leading 0 as an octal prefix.
        std::size_t sign = (t[0] == '+' || t[0] == '-') ? 1 : 0;
        std::size_t first = t.find_first_not_of('0', sign);
        if (t.find_first_of("+-", sign) != std::string::npos || sign == t.size())
            throw std::invalid_argument("not an integer: '" + t + "'");
        if (first == std::string::npos)
            return BigInt(0);
        const BigInt v(t.substr(first));
        return t[0] == '-' ? BigInt(-v) : v;
    };
    if (auto pos = s.find("^"); pos != std::string::npos) {
        const BigInt base = parse_int(s.substr(0, pos));
        const long e = std::stol(s.substr(pos + 1));
        if (base != 2)
            throw std::invalid_argument("only powers of two are accepted: '" + s + "'");
        return pow2_rational(static_cast<int>(e));
    }
    if (auto pos = s.find('/'); pos != std::string::npos) {
        const BigInt p = parse_int(s.substr(0, pos));
        const BigInt q = parse_int(s.substr(pos + 1));
        if (q == 0)
            throw std::invalid_argument("zero denominator");
        return Rational(p, q);
    }
    long exp10 = 0;
    if (auto pos = s.find_first_of("eE"); pos != std::string::npos) {
        exp10 = std::stol(s.substr(pos + 1));
        s = s.substr(0, pos);
    }
    std::string digits = s;
    if (auto dot = s.find('.'); dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<long>(s.size() - dot - 1);
    }
    if (digits == "" || digits == "+" || digits == "-")
        throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
    Rational r(parse_int(digits));
    const BigInt ten = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exp10)));
    return exp10 >= 0 ? r * Rational(ten) : r / Rational(ten);
}

// Dyadic corner from a list of rationals in [0,1], over their common
// power-of-two denominator.
inline Corner corner_from_rationals(std::span<const Rational> coords)
{
    if (coords.empty())
        throw std::invalid_argument("corner needs at least one coordinate");
    unsigned bits = 0;
    for (const auto& c : coords) {
        if (c < 0 || c > 1)
            throw std::invalid_argument("corner coordinates must lie in [0,1]");
        const BigInt den = boost::multiprecision::denominator(c);
        if ((den & (den - 1)) != 0)
            throw std::invalid_argument("corner coordinate is not dyadic: " + c.str());
        bits = std::max(bits, static_cast<unsigned>(boost::multiprecision::msb(den)));
    }
    if (bits > kMaxPrecisionBits)
        throw std::invalid_argument("corner needs more than 62 bits");
    std::vector<std::uint64_t> num;
    for (const auto& c : coords)
        num.push_back(boost::multiprecision::numerator(c * Rational(BigInt(1) << bits)).convert_to<std::uint64_t>());
    return Corner(std::move(num), pow2(bits));
}

// "a,b,c" -> rationals.
inline std::vector<Rational> parse_rational_list(std::string_view text)
{
    std::vector<Rational> out;
    std::string s(text);
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(parse_rational(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

// Writes "n,x1,...,xd" followed by one row per point (n is 1-based).
inline void write_points_csv(std::ostream& out, const PointSet& points, CoordFormat format = CoordFormat::decimal)
{
    out << "n";
    for (std::size_t i = 1; i <= points.dim(); ++i)
        out << ",x" << i;
    out << '\n';
    for (std::size_t p = 0; p < points.size(); ++p) {
        out << p + 1;
        for (std::size_t i = 0; i < points.dim(); ++i) {
            const auto num = points.numerator(p, i);
            out << ',' << (format == CoordFormat::bits ? dyadic_bits(num, points.precision())
                                                      : dyadic_decimal(num, points.precision()));
        }
        out << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

} // namespace detail

// Reads the format produced by write_points_csv. Decimal coordinates must be
// dyadic rationals in [0,1); the common precision is the smallest H that
// represents all of them (at least 1).
inline PointSet read_points_csv(std::istream& in, CoordFormat format = CoordFormat::decimal)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("empty point file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "n")
        throw std::invalid_argument("point file header must be n,x1,...,xd");
    const std::size_t d = header.size() - 1;

    std::vector<Rational> values;
    unsigned bits_precision = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != d + 1)
            throw std::invalid_argument("row has wrong number of fields: " + line);
        for (std::size_t i = 1; i <= d; ++i) {
            if (format == CoordFormat::bits) {
                const std::string& b = fields[i];
                if (b.empty() || b.size() > kMaxPrecisionBits || b.find_first_not_of("01") != std::string::npos)
                    throw std::invalid_argument("bad bit string: '" + b + "'");
                if (bits_precision != 0 && b.size() != bits_precision)
                    throw std::invalid_argument("bit strings must share one length");
                bits_precision = static_cast<unsigned>(b.size());
                values.emplace_back(BigInt(std::stoull(b, nullptr, 2)), BigInt(1) << b.size());
            } else {
                values.push_back(parse_rational(fields[i]));
            }
        }
    }
    if (values.empty())
        throw std::invalid_argument("point file has no points");

    unsigned h = std::max(bits_precision, 1U);
    for (const auto& v : values) {
        if (v < 0 || v >= 1)
            throw std::invalid_argument("coordinates must lie in [0,1)");
        const BigInt den = boost::multiprecision::denominator(v);
        if ((den & (den - 1)) != 0)
            throw std::invalid_argument("coordinate is not a dyadic rational: " + v.str());
        const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(den));
        if (bits > kMaxPrecisionBits)
            throw std::invalid_argument("coordinate needs more than 62 bits");
        h = std::max(h, bits);
    }
    std::vector<std::uint64_t> coords;
    coords.reserve(values.size());
    for (const auto& v : values) {
        const Rational scaled = v * Rational(BigInt(1) << h);
        coords.push_back(boost::multiprecision::numerator(scaled).convert_to<std::uint64_t>());
    }
    return PointSet::from_numerators(d, h, std::move(coords));
}

inline std::string format_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr std::string_view kTrialCsvHeader =
    "trial,seed,d,N,H,method,dstar_lower,dstar_upper,bound_stated,bound_detailed,exceeded";

inline void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records)
{
    out << kTrialCsvHeader << '\n';
    for (const auto& r : records)
        out << r.trial_index << ',' << r.seed << ',' << r.d << ',' << r.n << ',' << r.precision << ','
            << to_string(r.method) << ',' << format_double(to_double(r.dstar_lower)) << ','
            << format_double(to_double(r.dstar_upper)) << ',' << format_double(r.bound_stated) << ','
            << format_double(r.bound_detailed) << ',' << to_string(r.exceeded) << '\n';
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c)
{
    nlohmann::ordered_json j;
    j["d"] = c.d;
    j["N"] = c.n;
    j["epsilon"] = c.epsilon;
    j["trials"] = c.trials;
    j["H"] = c.precision;
    j["master_seed"] = c.master_seed;
    j["method"] = to_string(c.method);
    j["delta"] = c.delta ? nlohmann::ordered_json(c.delta->str()) : nlohmann::ordered_json(nullptr);
    j["kind"] = to_string(c.kind);
    return j;
}

inline nlohmann::ordered_json to_json(const TrialRecord& r)
{
    nlohmann::ordered_json j;
    j["trial"] = r.trial_index;
    j["seed"] = r.seed;
    j["d"] = r.d;
    j["N"] = r.n;
    j["H"] = r.precision;
    j["method"] = to_string(r.method);
    j["dstar_lower"] = to_double(r.dstar_lower);
    j["dstar_upper"] = to_double(r.dstar_upper);
    j["dstar_lower_exact"] = r.dstar_lower.str();
    j["dstar_upper_exact"] = r.dstar_upper.str();
    if (r.method == Method::brackets)
        j["delta"] = r.delta.str();
    j["bound_stated"] = r.bound_stated;
    j["bound_detailed"] = r.bound_detailed;
    j["exceeded"] = to_string(r.exceeded);
    return j;
}

inline nlohmann::ordered_json to_json(const ExceedanceEstimate& e)
{
    nlohmann::ordered_json j;
    j["trials"] = e.trials;
    j["exceedances"] = e.exceedances;
    j["indeterminate"] = e.indeterminate;
    j["estimate"] = e.estimate;
    j["ci95"] = {e.lower, e.upper};
    return j;
}

} // namespace lacunary::io
