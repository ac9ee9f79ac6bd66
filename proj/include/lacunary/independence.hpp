#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"
#include "error.hpp"

namespace lacunary {

// f_K(x) = 1_K(x) - lambda(K) for K = [0, high) \ [0, low) at level h.
// Corners are dyadic with denominator dividing 2^{h+2+ceil(log2 d)}.
class LayerFunction {
public:
    LayerFunction(Corner low, Corner high, int h) : low_(std::move(low)), high_(std::move(high)), level_(h)
    {
        if (low_.dim() != high_.dim() || low_.dim() == 0)
            throw std::invalid_argument("layer corners must share a positive dimension");
        if (h < 0)
            throw std::invalid_argument("layer level must be non-negative");
        if (!leq(low_, high_))
            throw std::invalid_argument("layer requires low <= high");
        const int bits = h + 2 + ceil_log2(low_.dim());
        if (bits > 62)
            throw std::invalid_argument("layer level too fine");
        const std::uint64_t grid = pow2(static_cast<unsigned>(bits));
        if (!low_.on_grid(grid) || !high_.on_grid(grid))
            throw std::invalid_argument("layer corners are not multiples of 2^{-(h+2+ceil(log2 d))}");
        if (mean() > pow2_rational(-h))
            throw std::invalid_argument("layer volume exceeds 2^{-h}");
        bits_ = minimal_bits();
    }

    std::size_t dim() const noexcept { return low_.dim(); }
    int level() const noexcept { return level_; }
    const Corner& low() const noexcept { return low_; }
    const Corner& high() const noexcept { return high_; }

    Rational mean() const { return high_.volume() - low_.volume(); }

    // Smallest k such that every corner is a multiple of 2^{-k}; membership
    // of x in K depends only on the first k binary digits of each coordinate.
    int corner_bits() const noexcept { return bits_; }

    bool contains(const Corner& x) const { return strictly_below(x, high_) && !strictly_below(x, low_); }

private:
    int minimal_bits() const
    {
        for (int k = 0; k <= 62; ++k) {
            const std::uint64_t g = pow2(static_cast<unsigned>(k));
            if (low_.on_grid(g) && high_.on_grid(g))
                return k;
        }
        return 62;
    }

    Corner low_;
    Corner high_;
    int level_;
    int bits_ = 0;
};

// Exact joint law of (f_K(x_{n_1}), ..., f_K(x_{n_m})) under a uniform seed.
// probability[p] is the chance that x_{n_j} lies in K exactly for the bits j
// set in p; the value of f_K is 1 - lambda(K) inside and -lambda(K) outside.
struct JointDistribution {
    std::vector<std::uint64_t> indices; // 1-based, strictly increasing
    Rational mean;
    unsigned resolution_bits = 0; // cells have side 2^{-resolution_bits}
    std::uint64_t cell_count = 0; // per-axis cells ^ d
    std::vector<Rational> probability;

    std::size_t arity() const noexcept { return indices.size(); }

    Rational value(bool inside) const { return inside ? Rational(1) - mean : Rational(-mean); }

    Rational marginal(std::size_t j, bool inside) const
    {
        Rational s = 0;
        for (std::size_t p = 0; p < probability.size(); ++p)
            if (((p >> j) & 1U) == static_cast<unsigned>(inside))
                s += probability[p];
        return s;
    }

    // Pair convenience: P(f(x_n) in/out, f(x_n') in/out).
    const Rational& joint(bool first_inside, bool second_inside) const
    {
        return probability.at((first_inside ? 1U : 0U) | (second_inside ? 2U : 0U));
    }
};

inline constexpr unsigned kIndependenceGuardBits = 24;

// Enumerates every cell of side 2^{-R}, R = n_max - 1 + k, where k is the
// corner precision of K. On each cell the first R digits of every seed
// coordinate are fixed, which fixes the first k digits of x_n for all n in
// the index list, so each indicator is constant on the cell.
inline JointDistribution exact_joint(const LayerFunction& layer, std::span<const std::uint64_t> indices)
{
    if (indices.empty() || indices.size() > 8)
        throw std::invalid_argument("need between 1 and 8 indices");
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (indices[j] == 0)
            throw std::invalid_argument("indices are 1-based");
        if (j > 0 && indices[j] <= indices[j - 1])
            throw std::invalid_argument("indices must be strictly increasing");
    }
    const std::size_t d = layer.dim();
    const unsigned k = static_cast<unsigned>(layer.corner_bits());
    const std::uint64_t n_max = indices.back();
    const std::uint64_t r64 = n_max - 1 + k;
    if (r64 * d > kIndependenceGuardBits)
        throw budget_exceeded("cell enumeration exceeds 2^24 cells", r64 * d, kIndependenceGuardBits);
    const unsigned r = static_cast<unsigned>(r64);
    const std::size_t m = indices.size();
    const std::uint64_t per_axis = pow2(r);
    const std::uint64_t kmask = pow2(k) - 1;

    // Cells are products of per-axis seed prefixes a_i, and x_{n_j} lies in K
    // iff every axis has window < high_i and not every axis has window < low_i.
    // Each axis therefore contributes a pair of bit masks (below high, below
    // low); histogramming those pairs per axis and combining the histograms
    // counts every one of the 2^{R d} cells exactly once.
    const Corner hi = layer.high().rescaled(pow2(k));
    const Corner lo = layer.low().rescaled(pow2(k));
    struct MaskCount {
        std::uint32_t high, low;
        std::uint64_t count;
    };
    std::vector<std::vector<MaskCount>> axis_hist(d);
    std::vector<unsigned> shift(m);
    for (std::size_t j = 0; j < m; ++j)
        shift[j] = r - static_cast<unsigned>(indices[j] - 1) - k;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::uint64_t> dense(std::size_t{1} << (2 * m), 0);
        for (std::uint64_t a = 0; a < per_axis; ++a) {
            std::uint32_t hm = 0, lm = 0;
            for (std::size_t j = 0; j < m; ++j) {
                const std::uint64_t window = (a >> shift[j]) & kmask;
                hm |= static_cast<std::uint32_t>(window < hi.num[i]) << j;
                lm |= static_cast<std::uint32_t>(window < lo.num[i]) << j;
            }
            ++dense[hm | (static_cast<std::size_t>(lm) << m)];
        }
        for (std::size_t key = 0; key < dense.size(); ++key)
            if (dense[key])
                axis_hist[i].push_back({static_cast<std::uint32_t>(key & (pow2(static_cast<unsigned>(m)) - 1)),
                                        static_cast<std::uint32_t>(key >> m), dense[key]});
    }

    std::vector<std::uint64_t> counts(pow2(static_cast<unsigned>(m)), 0);
    const std::uint32_t all = static_cast<std::uint32_t>(pow2(static_cast<unsigned>(m)) - 1);
    auto combine = [&](auto&& self, std::size_t i, std::uint32_t hacc, std::uint32_t lacc, std::uint64_t mult) -> void {
        if (i == d) {
            counts[hacc & ~lacc] += mult;
            return;
        }
        for (const auto& e : axis_hist[i])
            self(self, i + 1, hacc & e.high, lacc & e.low, mult * e.count);
    };
    combine(combine, 0, all, all, 1);

    JointDistribution out;
    out.indices.assign(indices.begin(), indices.end());
    out.mean = layer.mean();
    out.resolution_bits = r;
    out.cell_count = pow2(static_cast<unsigned>(r * d));
    out.probability.reserve(counts.size());
    for (auto c : counts)
        out.probability.emplace_back(BigInt(c), BigInt(out.cell_count));
    return out;
}

inline JointDistribution exact_joint(const LayerFunction& layer, std::uint64_t n, std::uint64_t n_prime)
{
    if (!(n < n_prime))
        throw std::invalid_argument("exact_joint requires n < n'");
    const std::uint64_t idx[] = {n, n_prime};
    return exact_joint(layer, idx);
}

// max over value patterns of |P(c_1, ..., c_m) - prod_j P(c_j)|; zero iff the
// variables are mutually independent.
inline Rational factorization_gap(const JointDistribution& joint)
{
    const std::size_t m = joint.arity();
    std::vector<Rational> inside(m), outside(m);
    for (std::size_t j = 0; j < m; ++j) {
        inside[j] = joint.marginal(j, true);
        outside[j] = joint.marginal(j, false);
    }
    Rational gap = 0;
    for (std::size_t p = 0; p < joint.probability.size(); ++p) {
        Rational prod = 1;
        for (std::size_t j = 0; j < m; ++j)
            prod *= ((p >> j) & 1U) ? inside[j] : outside[j];
        const Rational diff = boost::multiprecision::abs(joint.probability[p] - prod);
        if (diff > gap)
            gap = diff;
    }
    return gap;
}

} // namespace lacunary
