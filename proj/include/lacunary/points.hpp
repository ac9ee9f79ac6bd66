#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"
#include "splitmix.hpp"

namespace lacunary {

// Packed row of bits, most significant first: bit k is the (k+1)-th binary
// digit of the seed coordinate.
class BitRow {
public:
    BitRow() = default;
    explicit BitRow(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

    std::size_t size() const noexcept { return size_; }

    bool operator[](std::size_t k) const { return (words_[k / 64] >> (63 - k % 64)) & 1U; }

    void set(std::size_t k, bool value)
    {
        const std::uint64_t mask = std::uint64_t{1} << (63 - k % 64);
        if (value)
            words_[k / 64] |= mask;
        else
            words_[k / 64] &= ~mask;
    }

    static BitRow from_string(std::string_view bits)
    {
        BitRow row(bits.size());
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if (bits[k] != '0' && bits[k] != '1')
                throw std::invalid_argument("bit string may contain only 0 and 1");
            row.set(k, bits[k] == '1');
        }
        return row;
    }

    friend bool operator==(const BitRow&, const BitRow&) = default;

private:
    friend class SeedRowWriter;
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

// The random seed x_1 as d rows of explicit binary digits.
struct SeedBits {
    std::size_t d = 0;
    std::vector<BitRow> rows;
    std::uint64_t master_seed = 0;

    std::size_t bits_per_row() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
    std::uint64_t total_bits() const noexcept { return static_cast<std::uint64_t>(d) * bits_per_row(); }

    friend bool operator==(const SeedBits&, const SeedBits&) = default;
};

class SeedRowWriter {
public:
    static void fill(BitRow& row, SplitMix64& rng)
    {
        for (auto& w : row.words_)
            w = rng.next();
        const std::size_t tail = row.size_ % 64;
        if (tail != 0)
            row.words_.back() &= ~std::uint64_t{0} << (64 - tail);
    }
};

enum class PointKind { lacunary, iid, given };

inline const char* to_string(PointKind k)
{
    switch (k) {
    case PointKind::lacunary: return "lacunary";
    case PointKind::iid: return "iid";
    case PointKind::given: return "given";
    }
    return "?";
}

// N points of [0,1)^d, coordinate (n, i) = numerator(n, i) / 2^H.
class PointSet {
public:
    PointSet(std::size_t d, unsigned precision, std::vector<std::uint64_t> coords, PointKind kind,
             std::uint64_t bits_consumed)
        : d_(d), precision_(precision), coords_(std::move(coords)), kind_(kind), bits_consumed_(bits_consumed)
    {
        if (d_ == 0)
            throw std::invalid_argument("dimension must be positive");
        if (precision_ == 0 || precision_ > kMaxPrecisionBits)
            throw std::invalid_argument("precision must be in [1, 62]");
        if (coords_.empty() || coords_.size() % d_ != 0)
            throw std::invalid_argument("coordinate count must be a positive multiple of d");
        const std::uint64_t limit = pow2(precision_);
        for (auto a : coords_)
            if (a >= limit)
                throw std::invalid_argument("coordinate numerator must be below 2^H");
    }

    // Points supplied by the caller (tests, CSV input).
    static PointSet from_numerators(std::size_t d, unsigned precision, std::vector<std::uint64_t> coords)
    {
        return PointSet(d, precision, std::move(coords), PointKind::given, 0);
    }

    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return coords_.size() / d_; }
    unsigned precision() const noexcept { return precision_; }
    std::uint64_t denominator() const noexcept { return pow2(precision_); }
    PointKind kind() const noexcept { return kind_; }
    std::uint64_t bits_consumed() const noexcept { return bits_consumed_; }

    // Zero-based: numerator(0, i) is x_{1,i}.
    std::uint64_t numerator(std::size_t n, std::size_t i) const { return coords_[n * d_ + i]; }
    std::span<const std::uint64_t> row(std::size_t n) const { return {coords_.data() + n * d_, d_}; }
    std::span<const std::uint64_t> numerators() const noexcept { return coords_; }

    Corner point(std::size_t n) const
    {
        auto r = row(n);
        return Corner(std::vector<std::uint64_t>(r.begin(), r.end()), denominator());
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t d_;
    unsigned precision_;
    std::vector<std::uint64_t> coords_;
    PointKind kind_;
    std::uint64_t bits_consumed_;
};

namespace detail {

inline void check_positive(std::uint64_t d, std::uint64_t n, std::uint64_t h)
{
    if (d == 0 || n == 0 || h == 0)
        throw std::invalid_argument("d, N and H must all be positive");
    if (h > kMaxPrecisionBits)
        throw std::invalid_argument("H must not exceed 62");
}

} // namespace detail

// Deterministic seed bits: row i holds the first H+N-1 binary digits of the
// SplitMix64 stream keyed by mix_seed(master ^ kSeedRowDomain, i). Rows depend
// only on (master_seed, i), so adding coordinates never perturbs existing ones,
// and increasing N or H only extends each row.
inline SeedBits derive_seed(std::uint64_t master_seed, std::size_t d, std::size_t n, unsigned h)
{
    detail::check_positive(d, n, h);
    SeedBits seed;
    seed.d = d;
    seed.master_seed = master_seed;
    seed.rows.reserve(d);
    const std::size_t bits = h + n - 1;
    for (std::size_t i = 0; i < d; ++i) {
        SplitMix64 rng(mix_seed(master_seed ^ kSeedRowDomain, i));
        BitRow row(bits);
        SeedRowWriter::fill(row, rng);
        seed.rows.push_back(std::move(row));
    }
    return seed;
}

// x_{n,i} = 0.b_n b_{n+1} ... b_{n+H-1} in binary: the truncated orbit of the
// coordinatewise doubling map x -> frac(2x) started at the seed.
inline PointSet generate_lacunary(const SeedBits& seed, std::size_t n, unsigned h)
{
    detail::check_positive(seed.d, n, h);
    const std::size_t need = h + n - 1;
    for (const auto& r : seed.rows)
        if (r.size() < need)
            throw std::invalid_argument("seed rows hold fewer than H+N-1 bits");
    if (seed.rows.size() != seed.d)
        throw std::invalid_argument("seed row count differs from d");

    const std::size_t d = seed.d;
    const std::uint64_t mask = pow2(h) - 1;
    std::vector<std::uint64_t> coords(n * d);
    for (std::size_t i = 0; i < d; ++i) {
        const BitRow& row = seed.rows[i];
        std::uint64_t window = 0;
        for (unsigned k = 0; k < h; ++k)
            window = (window << 1) | row[k];
        coords[i] = window;
        for (std::size_t p = 1; p < n; ++p) {
            window = ((window << 1) & mask) | row[p + h - 1];
            coords[p * d + i] = window;
        }
    }
    return PointSet(d, h, std::move(coords), PointKind::lacunary, static_cast<std::uint64_t>(d) * need);
}

inline PointSet generate_lacunary(std::uint64_t master_seed, std::size_t d, std::size_t n, unsigned h)
{
    return generate_lacunary(derive_seed(master_seed, d, n, h), n, h);
}

// N*d independent H-bit coordinates, filled point by point.
inline PointSet generate_iid(std::uint64_t master_seed, std::size_t d, std::size_t n, unsigned h)
{
    detail::check_positive(d, n, h);
    SplitMix64 rng(mix_seed(master_seed ^ kIidDomain, 0));
    std::vector<std::uint64_t> coords(n * d);
    for (auto& c : coords)
        c = rng.next_bits(h);
    return PointSet(d, h, std::move(coords), PointKind::iid, static_cast<std::uint64_t>(d) * h * n);
}

} // namespace lacunary
