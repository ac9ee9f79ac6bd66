#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "bounds.hpp"
#include "covers.hpp"
#include "discrepancy.hpp"
#include "error.hpp"
#include "points.hpp"
#include "splitmix.hpp"

namespace lacunary {

enum class Method { exact, brackets, automatic };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::exact: return "exact";
    case Method::brackets: return "brackets";
    case Method::automatic: return "auto";
    }
    return "?";
}

struct ExperimentConfig {
    std::size_t d = 2;
    std::uint64_t n = 1024;
    double epsilon = 0.1;
    std::size_t trials = 10;
    unsigned precision = 32;
    std::uint64_t master_seed = 1;
    Method method = Method::automatic;
    std::optional<Rational> delta; // dyadic bracket parameter; derived from the bound when absent
    PointKind kind = PointKind::lacunary;
    std::uint64_t grid_budget = kDefaultGridBudget;
    unsigned workers = 1;
};

enum class Exceeded { no, yes, indeterminate };

inline const char* to_string(Exceeded e)
{
    switch (e) {
    case Exceeded::no: return "no";
    case Exceeded::yes: return "yes";
    case Exceeded::indeterminate: return "indeterminate";
    }
    return "?";
}

struct TrialRecord {
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::size_t d = 0;
    std::uint64_t n = 0;
    unsigned precision = 0;
    Method method = Method::exact; // exact or brackets
    Rational dstar_lower;
    Rational dstar_upper;
    Rational delta; // zero for exact trials
    double bound_stated = 0.0;
    double bound_detailed = 0.0;
    Exceeded exceeded = Exceeded::no;
};

inline std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index)
{
    return mix_seed(master_seed, trial_index);
}

// Largest power of two <= bound/10, never above 2^-4.
inline Rational default_delta(double bound_stated)
{
    int k = 4;
    while (std::ldexp(1.0, -k) > bound_stated / 10.0 && k < 40)
        ++k;
    return pow2_rational(-k);
}

inline bool is_dyadic(const Rational& r)
{
    const BigInt den = boost::multiprecision::denominator(r);
    return r > 0 && r <= 1 && (den & (den - 1)) == 0;
}

inline Exceeded classify(const Rational& lower, const Rational& upper, double bound)
{
    const Rational b = exact_rational(bound);
    if (lower > b)
        return Exceeded::yes;
    if (upper <= b)
        return Exceeded::no;
    return Exceeded::indeterminate;
}

namespace detail {

class CoverCache {
public:
    CoverCache(std::size_t d, Rational delta) : d_(d), delta_(std::move(delta)) {}

    const BracketingCover& get()
    {
        std::call_once(once_, [&] { cover_.emplace(build_base_cover(d_, delta_)); });
        return *cover_;
    }

    const Rational& delta() const noexcept { return delta_; }

private:
    std::size_t d_;
    Rational delta_;
    std::once_flag once_;
    std::optional<BracketingCover> cover_;
};

inline PointSet trial_points(const ExperimentConfig& c, std::uint64_t seed)
{
    if (c.kind == PointKind::iid)
        return generate_iid(seed, c.d, c.n, c.precision);
    return generate_lacunary(seed, c.d, c.n, c.precision);
}

inline bool cover_feasible(const BracketingCover& cover)
{
    const auto cells = cover.cell_count();
    return cells && *cells <= kMaxCoverBrackets;
}

// Runs `count` jobs on `workers` threads; results land at their own index.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& job)
{
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(body);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

// One record per trial, sorted by trial index; identical for any worker count.
inline std::vector<TrialRecord> run_trials(const ExperimentConfig& config)
{
    if (config.trials == 0)
        throw std::invalid_argument("trials must be at least 1");
    if (config.d < 2)
        throw std::invalid_argument("experiments compare against the theorem bound and need d >= 2");
    if (config.delta && !is_dyadic(*config.delta))
        throw std::invalid_argument("delta must be a dyadic rational in (0, 1]");

    const int d = static_cast<int>(config.d);
    const double stated = bounds::theorem_bound(d, config.n, config.epsilon, bounds::Variant::stated).value;
    const double detailed = bounds::theorem_bound(d, config.n, config.epsilon, bounds::Variant::detailed).value;
    const Rational delta = config.delta.value_or(default_delta(stated));
    detail::CoverCache coarse(config.d, delta);
    detail::CoverCache refined(config.d, delta / 4);

    std::vector<TrialRecord> records(config.trials);
    detail::parallel_for(config.trials, config.workers, [&](std::size_t t) {
        TrialRecord r;
        r.trial_index = t;
        r.seed = trial_seed(config.master_seed, t);
        r.d = config.d;
        r.n = config.n;
        r.precision = config.precision;
        r.bound_stated = stated;
        r.bound_detailed = detailed;
        const PointSet points = detail::trial_points(config, r.seed);

        bool use_exact = config.method == Method::exact;
        if (config.method == Method::automatic)
            use_exact = critical_grid_size(points) <= config.grid_budget;

        if (use_exact) {
            try {
                r.dstar_lower = r.dstar_upper = exact_star_discrepancy(points, config.grid_budget);
            } catch (const budget_exceeded&) {
                throw infeasible_instance("exact method exceeds the grid budget for this instance");
            }
            r.method = Method::exact;
            r.delta = 0;
            r.exceeded = classify(r.dstar_lower, r.dstar_upper, stated);
        } else {
            r.method = Method::brackets;
            auto enclose = [&](detail::CoverCache& cache) {
                const BracketingCover& cover = cache.get();
                if (!detail::cover_feasible(cover))
                    throw infeasible_instance("bracketing cover too large for this (d, delta)");
                const DiscrepancyBounds b = bracket_bounds(points, cover);
                r.dstar_lower = b.lower;
                r.dstar_upper = b.upper;
                r.delta = b.delta;
                r.exceeded = classify(b.lower, b.upper, stated);
            };
            enclose(coarse);
            if (r.exceeded == Exceeded::indeterminate)
                enclose(refined);
        }
        records[t] = std::move(r);
    });
    return records;
}

struct ExceedanceEstimate {
    std::size_t trials = 0;
    std::size_t exceedances = 0;
    std::size_t indeterminate = 0;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Exact two-sided Clopper-Pearson interval for k successes in n trials.
inline std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double level = 0.95)
{
    if (n == 0 || k > n)
        throw std::invalid_argument("clopper_pearson requires 0 <= k <= n, n >= 1");
    const double alpha = 1.0 - level;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
    const double hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
    return {lo, hi};
}

inline ExceedanceEstimate exceedance_ci(std::span<const TrialRecord> records)
{
    if (records.empty())
        throw std::invalid_argument("exceedance_ci needs at least one record");
    ExceedanceEstimate e;
    e.trials = records.size();
    for (const auto& r : records) {
        e.exceedances += r.exceeded == Exceeded::yes;
        e.indeterminate += r.exceeded == Exceeded::indeterminate;
    }
    e.estimate = static_cast<double>(e.exceedances) / static_cast<double>(e.trials);
    std::tie(e.lower, e.upper) = clopper_pearson(e.exceedances, e.trials);
    return e;
}

struct ScalingRow {
    std::uint64_t n = 0;
    std::size_t trials = 0;
    std::size_t exact_trials = 0;
    double median_normalized = 0.0; // median of dstar_upper * sqrt(N / (d log2 d))
    double max_normalized = 0.0;
    double bound_stated = 0.0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    // Set when the median at the largest N exceeds the one at the smallest
    // N by more than 25%; empty for single-row tables.
    std::optional<bool> trend_flag;
};

inline ScalingTable scaling_study(const ExperimentConfig& base, std::span<const std::uint64_t> grid)
{
    if (grid.empty())
        throw std::invalid_argument("scaling study needs at least one N");
    ScalingTable table;
    const double dl = static_cast<double>(base.d) * std::log2(static_cast<double>(base.d));
    for (auto n : grid) {
        ExperimentConfig c = base;
        c.n = n;
        const auto records = run_trials(c);
        std::vector<double> norm;
        ScalingRow row;
        row.n = n;
        row.trials = records.size();
        for (const auto& r : records) {
            norm.push_back(to_double(r.dstar_upper) * std::sqrt(static_cast<double>(n) / dl));
            row.exact_trials += r.method == Method::exact;
        }
        std::sort(norm.begin(), norm.end());
        const std::size_t m = norm.size();
        row.median_normalized = m % 2 ? norm[m / 2] : 0.5 * (norm[m / 2 - 1] + norm[m / 2]);
        row.max_normalized = norm.back();
        row.bound_stated = records.front().bound_stated;
        table.rows.push_back(row);
    }
    if (table.rows.size() > 1)
        table.trend_flag = table.rows.back().median_normalized > 1.25 * table.rows.front().median_normalized;
    return table;
}

struct BitCost {
    std::uint64_t lacunary_bits = 0; // d (H + N - 1)
    std::uint64_t iid_bits = 0;      // d H N
    double ratio = 0.0;
};

inline BitCost bitcost_report(std::uint64_t d, std::uint64_t n, std::uint64_t h)
{
    if (d == 0 || n == 0 || h == 0)
        throw std::invalid_argument("bit cost needs positive d, N and H");
    const u128 lac = static_cast<u128>(d) * (h + n - 1);
    const u128 iid = static_cast<u128>(d) * h * n;
    if (iid > ~std::uint64_t{0})
        throw std::overflow_error("bit count exceeds 64 bits");
    BitCost b;
    b.lacunary_bits = static_cast<std::uint64_t>(lac);
    b.iid_bits = static_cast<std::uint64_t>(iid);
    b.ratio = static_cast<double>(b.iid_bits) / static_cast<double>(b.lacunary_bits);
    return b;
}

} // namespace lacunary
