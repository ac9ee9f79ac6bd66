#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "covers.hpp"
#include "dyadic.hpp"
#include "error.hpp"
#include "points.hpp"

namespace lacunary {

enum class CountMode { strict, closed };

// Number of points in [0,y) (strict) or [0,y] (closed).
inline std::size_t box_count(const PointSet& points, const Corner& y, CountMode mode)
{
    if (y.dim() != points.dim())
        throw std::invalid_argument("corner dimension differs from point set dimension");
    const std::size_t d = points.dim();
    const std::uint64_t den = points.denominator();
    std::size_t count = 0;
    for (std::size_t n = 0; n < points.size(); ++n) {
        bool inside = true;
        for (std::size_t i = 0; i < d && inside; ++i) {
            const int c = compare_fraction(points.numerator(n, i), den, y.num[i], y.den);
            inside = mode == CountMode::strict ? c < 0 : c <= 0;
        }
        count += inside;
    }
    return count;
}

struct LocalDiscrepancy {
    Rational under; // lambda([0,y)) - strict/N
    Rational over;  // closed/N - lambda([0,y))
    Corner y;

    Rational magnitude() const
    {
        return std::max(boost::multiprecision::abs(under), boost::multiprecision::abs(over));
    }
};

inline LocalDiscrepancy local_discrepancy(const PointSet& points, const Corner& y)
{
    const Rational n(static_cast<std::uint64_t>(points.size()));
    const Rational vol = y.volume();
    const Rational strict(static_cast<std::uint64_t>(box_count(points, y, CountMode::strict)));
    const Rational closed(static_cast<std::uint64_t>(box_count(points, y, CountMode::closed)));
    return {vol - strict / n, closed / n - vol, y};
}

inline constexpr std::uint64_t kDefaultGridBudget = 100'000'000;

namespace detail {

inline BigInt to_big(__int128 v)
{
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    BigInt r = static_cast<std::uint64_t>(u >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(u);
    return neg ? BigInt(-r) : r;
}

inline BigInt to_big(std::int64_t v) { return BigInt(v); }
inline BigInt to_big(const BigInt& v) { return v; }

template <class Int>
Int pow2_int(unsigned k)
{
    Int r = 1;
    r <<= k;
    return r;
}

// Dispatches on the number of bits the common-denominator numerators need.
template <class F>
auto with_integer_width(unsigned bits, F&& f)
{
    if (bits <= 62)
        return f(std::int64_t{});
    if (bits <= 125)
        return f(__int128{});
    return f(BigInt{});
}

// Sorted distinct coordinates per axis and each point's rank on each axis.
struct CriticalAxes {
    std::vector<std::vector<std::uint64_t>> values;
    std::vector<std::uint32_t> ranks; // N x d
};

inline CriticalAxes critical_axes(const PointSet& points)
{
    const std::size_t d = points.dim();
    const std::size_t n = points.size();
    CriticalAxes ax;
    ax.values.resize(d);
    ax.ranks.resize(n * d);
    for (std::size_t i = 0; i < d; ++i) {
        auto& vals = ax.values[i];
        vals.reserve(n);
        for (std::size_t p = 0; p < n; ++p)
            vals.push_back(points.numerator(p, i));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t p = 0; p < n; ++p)
            ax.ranks[p * d + i] = static_cast<std::uint32_t>(
                std::lower_bound(vals.begin(), vals.end(), points.numerator(p, i)) - vals.begin());
    }
    return ax;
}

inline std::uint64_t saturating_grid_size(const CriticalAxes& ax)
{
    std::uint64_t size = 1;
    for (const auto& v : ax.values) {
        const std::uint64_t e = v.size() + 1;
        if (size > std::numeric_limits<std::uint64_t>::max() / e)
            return std::numeric_limits<std::uint64_t>::max();
        size *= e;
    }
    return size;
}

// In-place inclusive prefix sums of a row-major array along every axis.
inline void prefix_sum_all_axes(std::vector<std::uint32_t>& a, std::span<const std::size_t> extents)
{
    std::size_t stride = 1;
    for (std::size_t axis = 0; axis < extents.size(); ++axis) {
        const std::size_t e = extents[axis];
        const std::size_t block = stride * e;
        for (std::size_t base = 0; base < a.size(); base += block)
            for (std::size_t off = 0; off < stride; ++off)
                for (std::size_t k = 1; k < e; ++k)
                    a[base + off + k * stride] += a[base + off + (k - 1) * stride];
        stride = block;
    }
}

// Maximum over the critical grid of
//   N vol(y) - strict(y) 2^{dH}      for y in prod (Gamma_i + {1}),
//   closed(y) 2^{dH} - N vol(y)      for y in prod Gamma_i,
// i.e. D* scaled by N 2^{dH}. The last axis is swept so that only slabs over
// the first d-1 axes are held in memory.
template <class Int>
Int critical_grid_max(const PointSet& points, const CriticalAxes& ax)
{
    const std::size_t d = points.dim();
    const std::size_t n = points.size();
    const unsigned h = points.precision();
    const std::size_t last = d - 1;
    const Int scale = pow2_int<Int>(static_cast<unsigned>(d * h));
    const Int n_int = static_cast<std::int64_t>(n);
    const std::uint64_t one = pow2(h);

    auto value = [&](std::size_t axis, std::size_t j) -> std::uint64_t {
        return j < ax.values[axis].size() ? ax.values[axis][j] : one;
    };

    std::vector<std::size_t> extents(last);
    std::size_t slab = 1;
    // Tables hold strict counts on the first d-1 axes; the closed count at
    // index j is the strict count at j+1, one step along every axis.
    std::size_t closed_shift = 0;
    for (std::size_t i = 0; i < last; ++i) {
        extents[i] = ax.values[i].size() + 1;
        closed_shift += slab;
        slab *= extents[i];
    }

    std::vector<Int> slab_volume(slab);
    std::vector<std::uint8_t> interior(slab);
    {
        std::vector<std::size_t> idx(last, 0);
        for (std::size_t s = 0; s < slab; ++s) {
            Int v = 1;
            bool inner = true;
            for (std::size_t i = 0; i < last; ++i) {
                v *= static_cast<std::int64_t>(value(i, idx[i]));
                inner = inner && idx[i] < ax.values[i].size();
            }
            slab_volume[s] = v;
            interior[s] = inner;
            for (std::size_t i = 0; i < last && ++idx[i] == extents[i]; ++i)
                idx[i] = 0;
        }
    }

    const std::size_t k_last = ax.values[last].size();
    std::vector<std::vector<std::uint32_t>> bucket(k_last);
    for (std::size_t p = 0; p < n; ++p)
        bucket[ax.ranks[p * d + last]].push_back(static_cast<std::uint32_t>(p));

    std::vector<std::uint32_t> placed(slab, 0), current(slab, 0), next(slab, 0);
    Int best = 0;
    for (std::size_t j = 0; j <= k_last; ++j) {
        if (j < k_last) {
            for (auto p : bucket[j]) {
                std::size_t pos = 0, stride = 1;
                for (std::size_t i = 0; i < last; ++i) {
                    pos += (ax.ranks[p * d + i] + 1) * stride;
                    stride *= extents[i];
                }
                ++placed[pos];
            }
            next = placed;
            prefix_sum_all_axes(next, extents);
        }
        const Int g = static_cast<std::int64_t>(value(last, j));
        for (std::size_t s = 0; s < slab; ++s) {
            const Int vol = slab_volume[s] * g;
            const Int under = n_int * vol - Int(static_cast<std::int64_t>(current[s])) * scale;
            if (under > best)
                best = under;
            if (j < k_last && interior[s]) {
                const Int over = Int(static_cast<std::int64_t>(next[s + closed_shift])) * scale - n_int * vol;
                if (over > best)
                    best = over;
            }
        }
        std::swap(current, next);
    }
    return best;
}

inline unsigned count_bits(std::uint64_t n)
{
    return static_cast<unsigned>(std::bit_width(n));
}

} // namespace detail

// Size of the critical grid prod(|Gamma_i| + 1), saturating at 2^64 - 1.
inline std::uint64_t critical_grid_size(const PointSet& points)
{
    return detail::saturating_grid_size(detail::critical_axes(points));
}

// Exact star discrepancy via the critical grid.
// Throws budget_exceeded when the grid exceeds `budget`; use bracket_bounds then.
inline Rational exact_star_discrepancy(const PointSet& points, std::uint64_t budget = kDefaultGridBudget)
{
    const auto ax = detail::critical_axes(points);
    const std::uint64_t size = detail::saturating_grid_size(ax);
    if (size > budget)
        throw budget_exceeded("critical grid exceeds the evaluation budget; use bracket_bounds", size, budget);
    const unsigned dh = static_cast<unsigned>(points.dim() * points.precision());
    const unsigned bits = dh + detail::count_bits(points.size()) + 2;
    BigInt num = detail::with_integer_width(bits, [&](auto tag) {
        using Int = decltype(tag);
        return detail::to_big(detail::critical_grid_max<Int>(points, ax));
    });
    BigInt den = BigInt(static_cast<std::uint64_t>(points.size())) << dh;
    return Rational(num, den);
}

// max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted coordinates.
inline Rational star_discrepancy_1d(const PointSet& points)
{
    if (points.dim() != 1)
        throw std::invalid_argument("star_discrepancy_1d requires d = 1");
    std::vector<std::uint64_t> x(points.numerators().begin(), points.numerators().end());
    std::sort(x.begin(), x.end());
    const __int128 n = static_cast<__int128>(x.size());
    const __int128 one = static_cast<__int128>(points.denominator());
    __int128 best = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const __int128 i = static_cast<__int128>(k + 1);
        const __int128 xi = static_cast<__int128>(x[k]);
        best = std::max(best, i * one - n * xi);
        best = std::max(best, n * xi - (i - 1) * one);
    }
    return Rational(detail::to_big(best), BigInt(static_cast<std::uint64_t>(x.size())) * BigInt(points.denominator()));
}

struct DiscrepancyBounds {
    Rational lower;
    Rational upper;
    Rational delta;
};

// Prefix-count grids are used when both (q+1)^d tables fit in 2^26 counters.
inline constexpr std::uint64_t kPrefixGridMaxCells = std::uint64_t{1} << 25;
inline constexpr std::uint64_t kMaxCoverBrackets = std::uint64_t{1} << 28;
inline constexpr std::uint64_t kMaxDirectCountWork = 2'000'000'000;

namespace detail {

// Strict and closed box counts at corners a/q for a fixed point set.
class CornerCounter {
public:
    CornerCounter(const PointSet& points, std::uint64_t q) : points_(points), q_(q), d_(points.dim())
    {
        std::uint64_t cells = 1;
        bool fits = true;
        for (std::size_t i = 0; i < d_ && fits; ++i) {
            if (cells > kPrefixGridMaxCells / (q + 1))
                fits = false;
            else
                cells *= q + 1;
        }
        if (!fits)
            return;
        extents_.assign(d_, static_cast<std::size_t>(q + 1));
        strict_.assign(cells, 0);
        closed_.assign(cells, 0);
        const std::uint64_t den = points.denominator();
        for (std::size_t p = 0; p < points.size(); ++p) {
            std::size_t fs = 0, cs = 0, stride = 1;
            for (std::size_t i = 0; i < d_; ++i) {
                const std::uint64_t x = points.numerator(p, i);
                fs += static_cast<std::size_t>(scale_floor(x, q, den) + 1) * stride;
                cs += static_cast<std::size_t>(scale_ceil(x, q, den)) * stride;
                stride *= q + 1;
            }
            ++strict_[fs];
            ++closed_[cs];
        }
        prefix_sum_all_axes(strict_, extents_);
        prefix_sum_all_axes(closed_, extents_);
        grid_ = true;
    }

    bool uses_prefix_grid() const noexcept { return grid_; }

    std::uint64_t strict(std::span<const std::uint64_t> a) const { return grid_ ? lookup(strict_, a) : scan(a, true); }
    std::uint64_t closed(std::span<const std::uint64_t> a) const { return grid_ ? lookup(closed_, a) : scan(a, false); }

private:
    std::uint64_t lookup(const std::vector<std::uint32_t>& t, std::span<const std::uint64_t> a) const
    {
        std::size_t pos = 0, stride = 1;
        for (std::size_t i = 0; i < d_; ++i) {
            pos += static_cast<std::size_t>(a[i]) * stride;
            stride *= q_ + 1;
        }
        return t[pos];
    }

    std::uint64_t scan(std::span<const std::uint64_t> a, bool strict) const
    {
        const std::uint64_t den = points_.denominator();
        std::uint64_t count = 0;
        for (std::size_t p = 0; p < points_.size(); ++p) {
            bool inside = true;
            for (std::size_t i = 0; i < d_ && inside; ++i) {
                const int c = compare_fraction(points_.numerator(p, i), den, a[i], q_);
                inside = strict ? c < 0 : c <= 0;
            }
            count += inside;
        }
        return count;
    }

    const PointSet& points_;
    std::uint64_t q_;
    std::size_t d_;
    bool grid_ = false;
    std::vector<std::size_t> extents_;
    std::vector<std::uint32_t> strict_;
    std::vector<std::uint32_t> closed_;
};

template <class Int>
std::pair<Int, Int> bracket_extrema(const PointSet& points, const BracketingCover& cover, const CornerCounter& counter)
{
    const std::size_t d = points.dim();
    const std::uint64_t q = cover.denominator();
    Int scale = 1;
    for (std::size_t i = 0; i < d; ++i)
        scale *= static_cast<std::int64_t>(q);
    const Int n_int = static_cast<std::int64_t>(points.size());
    Int lower = 0, upper = 0;

    auto volume = [&](std::span<const std::uint64_t> a) {
        Int v = 1;
        for (auto x : a)
            v *= static_cast<std::int64_t>(x);
        return v;
    };
    auto abs_val = [](const Int& x) { return x < 0 ? Int(-x) : x; };

    cover.for_each([&](std::span<const std::uint64_t> v, std::span<const std::uint64_t> w) {
        const Int vol_v = volume(v);
        const Int vol_w = volume(w);
        const Int sv = static_cast<std::int64_t>(counter.strict(v));
        const Int sw = static_cast<std::int64_t>(counter.strict(w));
        const Int cv = static_cast<std::int64_t>(counter.closed(v));
        const Int cw = static_cast<std::int64_t>(counter.closed(w));

        const Int candidates[] = {
            abs_val(n_int * vol_v - sv * scale), abs_val(cv * scale - n_int * vol_v),
            abs_val(n_int * vol_w - sw * scale), abs_val(cw * scale - n_int * vol_w),
        };
        for (const auto& c : candidates)
            if (c > lower)
                lower = c;
        const Int u1 = sw * scale - n_int * vol_v;
        const Int u2 = n_int * vol_w - sv * scale;
        if (u1 > upper)
            upper = u1;
        if (u2 > upper)
            upper = u2;
    });
    return {lower, upper};
}

} // namespace detail

// Two-sided enclosure lower <= D*_N <= upper from a delta-bracketing cover:
// the local discrepancy at every bracket corner is a lower bound, and on each
// bracket [v,w] the local discrepancy is dominated by strict(w)/N - lambda(v)
// and lambda(w) - strict(v)/N.
inline DiscrepancyBounds bracket_bounds(const PointSet& points, const BracketingCover& cover)
{
    if (cover.dim() != points.dim())
        throw std::invalid_argument("cover dimension differs from point set dimension");
    const auto cells = cover.cell_count();
    if (!cells || *cells > kMaxCoverBrackets)
        throw budget_exceeded("cover has too many brackets to enumerate", cells.value_or(~std::uint64_t{0}),
                              kMaxCoverBrackets);
    const std::uint64_t q = cover.denominator();
    detail::CornerCounter counter(points, q);
    if (!counter.uses_prefix_grid()) {
        const u128 work = static_cast<u128>(*cells) * 4 * points.size() * points.dim();
        if (work > kMaxDirectCountWork)
            throw budget_exceeded("per-corner counting exceeds the work budget",
                                  static_cast<std::uint64_t>(std::min<u128>(work, ~std::uint64_t{0})),
                                  kMaxDirectCountWork);
    }
    const unsigned dq = static_cast<unsigned>(points.dim()) * detail::count_bits(q);
    const unsigned bits = dq + detail::count_bits(points.size()) + 2;
    auto [lo, hi] = detail::with_integer_width(bits, [&](auto tag) {
        using Int = decltype(tag);
        auto [l, u] = detail::bracket_extrema<Int>(points, cover, counter);
        return std::pair<BigInt, BigInt>(detail::to_big(l), detail::to_big(u));
    });
    const BigInt den = BigInt(static_cast<std::uint64_t>(points.size())) *
                       boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(points.dim()));
    return {Rational(lo, den), Rational(hi, den), cover.delta()};
}

} // namespace lacunary
