#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bounds.hpp"
#include "dyadic.hpp"
#include "error.hpp"

namespace lacunary {

// A bracket (v, w) with v <= w. Its weight is lambda([0,w) \ [0,v)).
struct Bracket {
    Corner lower;
    Corner upper;

    Rational weight() const { return upper.volume() - lower.volume(); }

    // v <= y <= w componentwise.
    bool contains(const Corner& y) const { return leq(lower, y) && leq(y, upper); }
};

// Lower corners land on multiples of 2^{-coarse_bits}, upper corners on
// multiples of 2^{-fine_bits}, coarse = h+1+ceil(log2 d), fine = coarse + 1.
struct SnapLevels {
    int h = 0;
    int coarse_bits = 0;
    int fine_bits = 0;
};

inline SnapLevels snap_levels(int h, std::size_t d)
{
    if (h < 0 || d == 0)
        throw std::invalid_argument("snap levels require h >= 0 and d >= 1");
    const int log_d = ceil_log2(d);
    SnapLevels s{h, h + 1 + log_d, h + 2 + log_d};
    if (s.fine_bits > static_cast<int>(kMaxPrecisionBits))
        throw std::invalid_argument("snap level too fine for 62-bit corners");
    return s;
}

// Snap v down to the coarse grid and w up to the fine grid.
inline Bracket snap_bracket(const Bracket& b, int h, std::size_t d)
{
    if (b.lower.dim() != d || b.upper.dim() != d)
        throw std::invalid_argument("bracket dimension mismatch");
    const SnapLevels s = snap_levels(h, d);
    const std::uint64_t coarse = pow2(static_cast<unsigned>(s.coarse_bits));
    const std::uint64_t fine = pow2(static_cast<unsigned>(s.fine_bits));
    std::vector<std::uint64_t> v(d), w(d);
    for (std::size_t i = 0; i < d; ++i) {
        v[i] = scale_floor(b.lower.num[i], coarse, b.lower.den) * (fine / coarse);
        w[i] = scale_ceil(b.upper.num[i], fine, b.upper.den);
    }
    return {Corner(std::move(v), fine), Corner(std::move(w), fine)};
}

// A delta-bracketing cover built from the uniform grid of mesh 1/m, with the
// closed grid cells as brackets, optionally passed through dyadic snapping.
//
// The cover is implicit: brackets are produced on demand from a cell index,
// so covers with far more than 2^64 brackets can still be probed. Cells are
// closed, so the cover also contains points with coordinates equal to 1.
class BracketingCover {
public:
    BracketingCover(std::size_t d, Rational delta, std::uint64_t mesh, std::optional<SnapLevels> snap = {})
        : d_(d), delta_(std::move(delta)), mesh_(mesh), snap_(snap)
    {
        if (d_ == 0 || mesh_ == 0)
            throw std::invalid_argument("cover requires d >= 1 and mesh >= 1");
        if (mesh_ > pow2(kMaxPrecisionBits))
            throw std::invalid_argument("cover mesh too fine");
    }

    std::size_t dim() const noexcept { return d_; }
    const Rational& delta() const noexcept { return delta_; }
    std::uint64_t mesh() const noexcept { return mesh_; }
    const std::optional<SnapLevels>& snap() const noexcept { return snap_; }
    bool snapped() const noexcept { return snap_.has_value(); }

    // Common denominator of every corner numerator handed out by for_each.
    std::uint64_t denominator() const noexcept
    {
        return snap_ ? pow2(static_cast<unsigned>(snap_->fine_bits)) : mesh_;
    }

    // Power-of-two corner denominator, or 0 for a non-dyadic grid.
    std::uint64_t corner_denominator() const noexcept
    {
        const std::uint64_t q = denominator();
        return is_pow2(q) ? q : 0;
    }

    // Number of grid cells m^d; the snapped cover has at most this many
    // distinct brackets.
    BigInt cardinality_bound() const
    {
        return boost::multiprecision::pow(BigInt(mesh_), static_cast<unsigned>(d_));
    }

    std::optional<std::uint64_t> cell_count() const
    {
        const BigInt c = cardinality_bound();
        if (c > BigInt(std::numeric_limits<std::uint64_t>::max()))
            return std::nullopt;
        return c.convert_to<std::uint64_t>();
    }

    // Bracket of the grid cell with the given per-axis indices.
    Bracket bracket_for_cell(std::span<const std::uint64_t> cell) const
    {
        std::vector<std::uint64_t> v(d_), w(d_);
        fill_cell(cell, v, w);
        const std::uint64_t q = denominator();
        return {Corner(std::move(v), q), Corner(std::move(w), q)};
    }

    // Bracket containing y, chosen by floor indexing into the grid cell
    // (coordinates equal to 1 use the last cell).
    Bracket locate(const Corner& y) const
    {
        if (y.dim() != d_)
            throw std::invalid_argument("probe dimension differs from cover dimension");
        std::vector<std::uint64_t> cell(d_);
        for (std::size_t i = 0; i < d_; ++i)
            cell[i] = std::min(scale_floor(y.num[i], mesh_, y.den), mesh_ - 1);
        return bracket_for_cell(cell);
    }

    // Calls f(v, w) for every grid cell with corner numerators over
    // denominator(). Snapped covers may repeat brackets.
    template <class F>
    void for_each(F&& f) const
    {
        if (!cell_count())
            throw budget_exceeded("cover has more than 2^64 brackets", ~std::uint64_t{0}, ~std::uint64_t{0});
        std::vector<std::uint64_t> cell(d_, 0), v(d_), w(d_);
        for (;;) {
            fill_cell(cell, v, w);
            f(std::span<const std::uint64_t>(v), std::span<const std::uint64_t>(w));
            std::size_t i = 0;
            while (i < d_ && ++cell[i] == mesh_)
                cell[i++] = 0;
            if (i == d_)
                break;
        }
    }

private:
    void fill_cell(std::span<const std::uint64_t> cell, std::span<std::uint64_t> v, std::span<std::uint64_t> w) const
    {
        if (!snap_) {
            for (std::size_t i = 0; i < d_; ++i) {
                v[i] = cell[i];
                w[i] = cell[i] + 1;
            }
            return;
        }
        const std::uint64_t coarse = pow2(static_cast<unsigned>(snap_->coarse_bits));
        const std::uint64_t fine = pow2(static_cast<unsigned>(snap_->fine_bits));
        for (std::size_t i = 0; i < d_; ++i) {
            v[i] = scale_floor(cell[i], coarse, mesh_) * (fine / coarse);
            w[i] = scale_ceil(cell[i] + 1, fine, mesh_);
        }
    }

    std::size_t d_;
    Rational delta_;
    std::uint64_t mesh_;
    std::optional<SnapLevels> snap_;
};

// Smallest m with 1 - (1 - 1/m)^d <= delta, i.e. m^d - (m-1)^d <= delta m^d.
// The largest cell (the one touching the all-ones corner) has exactly that weight.
inline std::uint64_t grid_mesh(std::size_t d, const Rational& delta)
{
    if (d == 0)
        throw std::invalid_argument("dimension must be positive");
    if (delta <= 0)
        throw std::invalid_argument("delta must be positive");
    if (delta >= 1)
        return 1;
    const unsigned dd = static_cast<unsigned>(d);
    const BigInt p = boost::multiprecision::numerator(delta);
    const BigInt q = boost::multiprecision::denominator(delta);
    auto ok = [&](std::uint64_t m) {
        const BigInt md = boost::multiprecision::pow(BigInt(m), dd);
        const BigInt m1d = boost::multiprecision::pow(BigInt(m - 1), dd);
        return (md - m1d) * q <= p * md;
    };
    // 1/m <= 1 - (1-1/m)^d <= d/m brackets the answer in [ceil(1/delta), ceil(d/delta)].
    const BigInt lo_big = (q + p - 1) / p;
    const BigInt hi_big = (BigInt(dd) * q + p - 1) / p;
    if (hi_big > BigInt(pow2(kMaxPrecisionBits)))
        throw std::invalid_argument("delta too small for a 62-bit grid");
    std::uint64_t lo = std::max<std::uint64_t>(lo_big.convert_to<std::uint64_t>(), 1);
    std::uint64_t hi = hi_big.convert_to<std::uint64_t>();
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

inline BracketingCover build_base_cover(std::size_t d, const Rational& delta)
{
    if (delta <= 0)
        throw std::invalid_argument("delta must be positive");
    if (delta > 1)
        throw std::invalid_argument("delta must not exceed 1");
    return BracketingCover(d, delta, grid_mesh(d, delta));
}

// Turns a 2^{-(h+2)} base cover into a 2^{-h} cover with dyadic corners:
// lower corners on 2^{-(h+1+ceil(log2 d))}, upper corners on 2^{-(h+2+ceil(log2 d))}.
inline BracketingCover dyadic_snap(const BracketingCover& cover, int h)
{
    if (h < 0)
        throw std::invalid_argument("snap level must be non-negative");
    if (cover.snapped())
        throw std::invalid_argument("cover is already snapped");
    if (cover.delta() > pow2_rational(-(h + 2)))
        throw std::invalid_argument("input cover delta exceeds 2^{-(h+2)}");
    return BracketingCover(cover.dim(), pow2_rational(-h), cover.mesh(), snap_levels(h, cover.dim()));
}

inline BracketingCover snapped_cover(std::size_t d, int h)
{
    return dyadic_snap(build_base_cover(d, pow2_rational(-(h + 2))), h);
}

// beta_0 = 0 <= beta_1 <= ... <= beta_H <= y <= beta_{H+1}, with layer sets
// K_h = [0, beta_{h+1}) \ [0, beta_h) for h = 0..H.
struct ChainingDecomposition {
    Corner y;
    int depth = 0;
    std::vector<Corner> betas; // depth + 2 entries

    std::size_t dim() const noexcept { return y.dim(); }

    Bracket layer(int h) const { return {betas.at(h), betas.at(h + 1)}; }

    Rational layer_volume(int h) const { return betas.at(h + 1).volume() - betas.at(h).volume(); }

    // x in K_h, i.e. x < beta_{h+1} componentwise but not x < beta_h.
    bool in_layer(int h, const Corner& x) const
    {
        return strictly_below(x, betas.at(h + 1)) && !strictly_below(x, betas.at(h));
    }
};

// Holds the snapped covers Delta_1..Delta_H for a fixed (d, N) so that many
// chains can be built without recomputing grid meshes.
class ChainBuilder {
public:
    ChainBuilder(std::size_t d, std::uint64_t n) : d_(d), depth_(bounds::chaining_depth(n, static_cast<int>(d)))
    {
        if (depth_ < 1)
            throw infeasible_instance("chaining depth H < 1: N too small relative to d log2 d");
        levels_.reserve(depth_);
        for (int h = 1; h <= depth_; ++h)
            levels_.push_back(snapped_cover(d_, h));
    }

    std::size_t dim() const noexcept { return d_; }
    int depth() const noexcept { return depth_; }
    const BracketingCover& level(int h) const { return levels_.at(h - 1); }

    ChainingDecomposition build(const Corner& y) const
    {
        if (y.dim() != d_)
            throw std::invalid_argument("target dimension differs from builder dimension");
        for (std::size_t i = 0; i < d_; ++i)
            if (y.num[i] >= y.den)
                throw std::invalid_argument("target must lie in [0,1)^d");

        ChainingDecomposition chain;
        chain.y = y;
        chain.depth = depth_;
        chain.betas.resize(depth_ + 2);
        const Bracket top = level(depth_).locate(y);
        chain.betas[depth_ + 1] = top.upper;
        chain.betas[depth_] = lower_on_coarse(top.lower, depth_);
        for (int h = depth_ - 1; h >= 1; --h)
            chain.betas[h] = lower_on_coarse(level(h).locate(chain.betas[h + 1]).lower, h);
        chain.betas[0] = Corner::zero(d_);
        return chain;
    }

private:
    // Express a snapped lower corner over its own coarse denominator.
    Corner lower_on_coarse(const Corner& v, int h) const
    {
        const std::uint64_t coarse = pow2(static_cast<unsigned>(snap_levels(h, d_).coarse_bits));
        std::vector<std::uint64_t> num(d_);
        for (std::size_t i = 0; i < d_; ++i)
            num[i] = scale_floor(v.num[i], coarse, v.den);
        return Corner(std::move(num), coarse);
    }

    std::size_t d_;
    int depth_;
    std::vector<BracketingCover> levels_;
};

inline ChainingDecomposition build_chain(const Corner& y, std::size_t d, std::uint64_t n)
{
    return ChainBuilder(d, n).build(y);
}

} // namespace lacunary
