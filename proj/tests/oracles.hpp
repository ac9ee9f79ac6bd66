#pragma once

// Reference computations used only by the tests. None of them share code
// paths with the library algorithms they check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include <lacunary/lacunary.hpp>

namespace oracle {

using lacunary::BigInt;
using lacunary::PointSet;
using lacunary::Rational;

// Star discrepancy by brute force over the grid {0, 1/2^g, ..., 1}^d.
// Counts use per-axis bitmasks (N <= 64). Along the last axis the local
// discrepancy is linear between consecutive point coordinates, so only the
// grid values adjacent to a point coordinate and the two ends are visited.
// When g >= H every critical value lies on the grid and the result is exact
// up to double rounding.
inline double dense_grid_discrepancy(const PointSet& p, unsigned g)
{
    const std::size_t d = p.dim();
    const std::size_t n = p.size();
    if (n > 64)
        throw std::invalid_argument("dense oracle handles at most 64 points");
    const std::uint64_t side = std::uint64_t{1} << g;
    const double nd = static_cast<double>(n);

    // lt[i][j]: points with x_i < j/2^g; le[i][j]: points with x_i <= j/2^g.
    std::vector<std::vector<std::uint64_t>> lt(d, std::vector<std::uint64_t>(side + 1)),
        le(d, std::vector<std::uint64_t>(side + 1));
    for (std::size_t i = 0; i < d; ++i)
        for (std::uint64_t j = 0; j <= side; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const Rational x{BigInt(p.numerator(k, i)), BigInt(p.denominator())};
                const Rational y{BigInt(j), BigInt(side)};
                lt[i][j] |= static_cast<std::uint64_t>(x < y) << k;
                le[i][j] |= static_cast<std::uint64_t>(x <= y) << k;
            }

    std::vector<std::uint64_t> last_axis{0, side};
    for (std::size_t k = 0; k < n; ++k) {
        const double x = std::ldexp(static_cast<double>(p.numerator(k, d - 1)), -static_cast<int>(p.precision()));
        const auto lo = static_cast<std::uint64_t>(std::floor(std::ldexp(x, static_cast<int>(g))));
        for (std::uint64_t j : {lo, lo + 1})
            if (j <= side)
                last_axis.push_back(j);
    }
    std::sort(last_axis.begin(), last_axis.end());
    last_axis.erase(std::unique(last_axis.begin(), last_axis.end()), last_axis.end());

    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    const double unit = std::ldexp(1.0, -static_cast<int>(g));
    double best = 0.0;
    auto recurse = [&](auto&& self, std::size_t i, std::uint64_t mlt, std::uint64_t mle, double vol) -> void {
        if (i + 1 == d) {
            for (std::uint64_t j : last_axis) {
                const double v = vol * static_cast<double>(j) * unit;
                const double a = std::popcount(mlt & lt[i][j]) / nd;
                const double b = std::popcount(mle & le[i][j]) / nd;
                best = std::max({best, std::fabs(a - v), std::fabs(b - v)});
            }
            return;
        }
        for (std::uint64_t j = 0; j <= side; ++j)
            self(self, i + 1, mlt & lt[i][j], mle & le[i][j], vol * static_cast<double>(j) * unit);
    };
    recurse(recurse, 0, all, all, 1.0);
    return best;
}

// One-dimensional closed form: max_i max(i/N - x_(i), x_(i) - (i-1)/N).
inline Rational order_statistic_discrepancy_1d(const PointSet& p)
{
    std::vector<Rational> xs;
    for (std::size_t k = 0; k < p.size(); ++k)
        xs.emplace_back(BigInt(p.numerator(k, 0)), BigInt(p.denominator()));
    std::sort(xs.begin(), xs.end());
    const Rational n(static_cast<long long>(xs.size()));
    Rational best = 0;
    for (std::size_t i = 1; i <= xs.size(); ++i) {
        const Rational a = Rational(static_cast<long long>(i)) / n - xs[i - 1];
        const Rational b = xs[i - 1] - Rational(static_cast<long long>(i - 1)) / n;
        best = std::max({best, a, b});
    }
    return best;
}

// Joint law of membership of x_{n_1}, ..., x_{n_m} in K obtained by building
// each lacunary point from an explicit seed bit row. Every seed prefix of
// `bits` bits per axis is visited; the remaining seed bits never influence
// membership when bits >= n_max - 1 + (corner precision of K).
// Returns counts indexed by the membership pattern.
inline std::vector<std::uint64_t> seed_enumeration_counts(const lacunary::LayerFunction& layer,
                                                          const std::vector<std::uint64_t>& indices,
                                                          unsigned bits)
{
    const std::size_t d = layer.dim();
    const std::size_t m = indices.size();
    const std::uint64_t per_axis = std::uint64_t{1} << bits;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < d; ++i)
        total *= per_axis;
    const unsigned h = static_cast<unsigned>(bits); // precision of every point
    std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
    const std::size_t n_points = indices.back();
    for (std::uint64_t code = 0; code < total; ++code) {
        lacunary::SeedBits seed;
        seed.d = d;
        std::uint64_t rest = code;
        for (std::size_t i = 0; i < d; ++i) {
            std::string row;
            const std::uint64_t a = rest % per_axis;
            rest /= per_axis;
            for (unsigned b = 0; b < bits; ++b)
                row.push_back(((a >> (bits - 1 - b)) & 1U) ? '1' : '0');
            row.append(n_points - 1, '0'); // tail bits beyond the prefix
            seed.rows.push_back(lacunary::BitRow::from_string(row));
        }
        const PointSet pts = lacunary::generate_lacunary(seed, n_points, h);
        std::size_t pattern = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (layer.contains(pts.point(indices[j] - 1)))
                pattern |= std::size_t{1} << j;
        ++counts[pattern];
    }
    return counts;
}

} // namespace oracle
