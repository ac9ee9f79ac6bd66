// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional argument: path of the lacunary CLI, used for the
// command-line determinism check.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <lacunary/lacunary.hpp>

#include "oracles.hpp"

using namespace lacunary;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

class Suite {
public:
    void run(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < limit_seconds;
        const bool ok = o.passed && in_time;
        failures_ += !ok;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2fs / limit %.0fs", secs, limit_seconds);
        std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << title << " -- " << o.detail << " (" << timing
                  << (in_time ? "" : ", over time limit") << ")" << std::endl;
    }

    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

std::string fmt(double x) { return io::format_double(x); }

Corner random_corner(SplitMix64& rng, std::size_t d, unsigned bits)
{
    std::vector<std::uint64_t> num(d);
    for (auto& x : num)
        x = rng.next_bits(bits);
    return Corner(std::move(num), pow2(bits));
}

Outcome oracle_equivalence()
{
    SplitMix64 rng(0xacce55);
    int mismatches = 0;
    double worst = 0.0;
    int one_d = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t d = 1 + t % 3;
        const std::size_t n = 1 + rng.next() % 16;
        const std::uint64_t seed = rng.next();
        const PointSet p = t % 2 ? generate_lacunary(seed, d, n, 8) : generate_iid(seed, d, n, 8);
        const Rational exact = exact_star_discrepancy(p);
        const double brute = oracle::dense_grid_discrepancy(p, 10);
        const double err = std::fabs(to_double(exact) - brute);
        worst = std::max(worst, err);
        if (err > static_cast<double>(d) * std::ldexp(1.0, -10) + 1e-12)
            ++mismatches;
        if (d == 1) {
            ++one_d;
            if (exact != star_discrepancy_1d(p) || exact != oracle::order_statistic_discrepancy_1d(p))
                ++mismatches;
        }
    }
    return {mismatches == 0, "200 instances (" + std::to_string(one_d) + " in d=1), max |exact - dense grid| = " +
                                 fmt(worst) + ", mismatches " + std::to_string(mismatches)};
}

Outcome bracket_enclosure()
{
    int violations = 0;
    Rational widest = 0;
    for (const Rational delta : {Rational(1, 16), Rational(1, 64)}) {
        const auto cover = build_base_cover(2, delta);
        for (std::uint64_t s = 1; s <= 50; ++s) {
            const PointSet p = generate_lacunary(s, 2, 64, 32);
            const Rational exact = exact_star_discrepancy(p);
            const auto b = bracket_bounds(p, cover);
            if (!(b.lower <= exact && exact <= b.upper && b.upper - b.lower <= delta))
                ++violations;
            widest = std::max(widest, Rational((b.upper - b.lower) / delta));
        }
    }
    return {violations == 0, "100 enclosures, max (upper-lower)/delta = " + fmt(to_double(widest)) +
                                 ", violations " + std::to_string(violations)};
}

Outcome cover_validity()
{
    SplitMix64 rng(31337);
    std::uint64_t uncovered = 0, heavy = 0, off_grid = 0, probes = 0, enumerated = 0;
    for (std::size_t d = 1; d <= 5; ++d)
        for (int h = 1; h <= 6; ++h) {
            const auto cover = snapped_cover(d, h);
            const SnapLevels s = *cover.snap();
            const int log_d = ceil_log2(d);
            if (s.coarse_bits != h + 1 + log_d || s.fine_bits != h + 2 + log_d)
                ++off_grid;
            const std::uint64_t coarse = pow2(static_cast<unsigned>(h + 1 + log_d));
            const std::uint64_t fine = pow2(static_cast<unsigned>(h + 2 + log_d));
            const Rational limit = pow2_rational(-h);
            auto check = [&](const Bracket& b) {
                heavy += b.weight() > limit;
                off_grid += !b.lower.on_grid(coarse) || !b.upper.on_grid(fine);
            };
            for (int t = 0; t < 100000; ++t) {
                Corner y = random_corner(rng, d, 40);
                // Every 64th probe pins a random subset of coordinates to 0 or 1.
                if (t % 64 == 0)
                    for (std::size_t i = 0; i < d; ++i)
                        if (rng.next() & 1U)
                            y.num[i] = (rng.next() & 1U) ? y.den : 0;
                const Bracket b = cover.locate(y);
                uncovered += !b.contains(y);
                check(b);
                ++probes;
            }
            // Small covers are also checked bracket by bracket.
            if (cover.cell_count() && *cover.cell_count() <= 200000)
                cover.for_each([&](std::span<const std::uint64_t> v, std::span<const std::uint64_t> w) {
                    check({Corner({v.begin(), v.end()}, cover.denominator()),
                           Corner({w.begin(), w.end()}, cover.denominator())});
                    ++enumerated;
                });
        }
    return {uncovered == 0 && heavy == 0 && off_grid == 0,
            std::to_string(probes) + " probes over 30 covers, " + std::to_string(enumerated) +
                " brackets enumerated; uncovered " + std::to_string(uncovered) + ", weight > 2^-h " +
                std::to_string(heavy) + ", off-grid corners " + std::to_string(off_grid)};
}

Outcome chaining_invariants()
{
    SplitMix64 rng(4242);
    std::uint64_t failures = 0, chains = 0;
    for (std::size_t d : {2U, 3U}) {
        const ChainBuilder builder(d, 1024);
        const int H = builder.depth();
        for (int t = 0; t < 10000; ++t) {
            const Corner y = random_corner(rng, d, 30);
            const ChainingDecomposition c = builder.build(y);
            ++chains;
            bool ok = c.betas.front() == Corner::zero(d);
            // Monotone chain.
            for (int h = 0; h <= H; ++h)
                ok = ok && leq(c.betas[h], c.betas[h + 1]);
            // Disjoint layers: K_a lies in [0, beta_{a+1}) which lies in [0, beta_b),
            // and K_b misses [0, beta_b).
            for (int a = 0; a <= H; ++a)
                for (int b = a + 1; b <= H; ++b)
                    ok = ok && leq(c.betas[a + 1], c.betas[b]);
            // Sandwich: union of K_0..K_{H-1} is [0, beta_H) inside [0, y) inside [0, beta_{H+1}).
            ok = ok && leq(c.betas[H], y) && leq(y, c.betas[H + 1]);
            // Layer volumes.
            for (int h = 0; h <= H; ++h)
                ok = ok && c.layer_volume(h) <= pow2_rational(-h);
            // Spot-check membership: a point below beta_{H+1} lies in exactly one layer.
            const Corner x = random_corner(rng, d, 32);
            int hits = 0;
            for (int h = 0; h <= H; ++h)
                hits += c.in_layer(h, x);
            ok = ok && hits == (strictly_below(x, c.betas[H + 1]) ? 1 : 0);
            failures += !ok;
        }
    }
    return {failures == 0, std::to_string(chains) + " chains (N=1024, d=2,3), failures " + std::to_string(failures)};
}

Outcome exact_independence()
{
    SplitMix64 rng(194);
    std::uint64_t configurations = 0, dependent = 0, marginal_errors = 0, boundary = 0;
    for (std::size_t d : {1U, 2U})
        for (int h : {0, 1}) {
            const int log_d = ceil_log2(d);
            const unsigned grid_bits = static_cast<unsigned>(h + 2 + log_d);
            const std::uint64_t min_gap = static_cast<std::uint64_t>(h + 2 + log_d);

            std::vector<LayerFunction> layers;
            // Layers of chains for random targets (d >= 2 only).
            if (d >= 2) {
                const ChainBuilder builder(d, 1024);
                for (int t = 0; t < 4; ++t) {
                    const auto c = builder.build(random_corner(rng, d, 24));
                    const Bracket b = c.layer(h);
                    layers.emplace_back(b.lower, b.upper, h);
                }
            }
            // Random dyadic regions on the level-h grid with volume <= 2^-h.
            while (layers.size() < 8) {
                std::vector<std::uint64_t> lo(d), hi(d);
                for (std::size_t i = 0; i < d; ++i) {
                    const std::uint64_t a = rng.next_bits(grid_bits), b = rng.next_bits(grid_bits);
                    lo[i] = std::min(a, b);
                    hi[i] = std::max(a, b) + 1;
                }
                const Corner low(lo, pow2(grid_bits)), high(hi, pow2(grid_bits));
                if (high.volume() - low.volume() <= pow2_rational(-h))
                    layers.emplace_back(low, high, h);
            }

            for (const auto& k : layers) {
                const std::uint64_t kb = static_cast<std::uint64_t>(k.corner_bits());
                for (std::uint64_t n = 1;; ++n) {
                    const std::uint64_t first = n + min_gap;
                    if ((first - 1 + kb) * d > kIndependenceGuardBits)
                        break;
                    for (std::uint64_t np = first; (np - 1 + kb) * d <= kIndependenceGuardBits; ++np) {
                        const auto j = exact_joint(k, n, np);
                        ++configurations;
                        boundary += np - n == min_gap;
                        dependent += factorization_gap(j) != 0;
                        marginal_errors += j.marginal(0, true) != k.mean() || j.marginal(1, true) != k.mean();
                    }
                }
            }
        }

    const LayerFunction quarter(Corner({0}, 1), Corner({1}, 4), 0);
    const Rational counter = factorization_gap(exact_joint(quarter, 1, 2));
    const std::uint64_t triple[] = {1, 3, 5};
    const Rational triple_gap = factorization_gap(exact_joint(quarter, triple));

    return {configurations > 0 && dependent == 0 && marginal_errors == 0 && counter == Rational(1, 16) &&
                triple_gap == 0,
            std::to_string(configurations) + " pairs (" + std::to_string(boundary) +
                " at the minimal gap), nonzero gaps " + std::to_string(dependent) + ", marginal errors " +
                std::to_string(marginal_errors) + "; gap-1 counterexample " + to_string(counter) +
                "; triple {1,3,5} gap " + to_string(triple_gap)};
}

Outcome bernstein_validity()
{
    constexpr int kReps = 100000;
    constexpr int kN = 1000;
    // |S_k| >= t  <=>  |8 c_k - k| >= 8t, with c_k the running count of successes.
    std::vector<int> max_abs8(kReps);
    SplitMix64 rng(195);
    for (int r = 0; r < kReps; ++r) {
        int c8 = 0, best = 0;
        for (int k = 1; k <= kN; ++k) {
            c8 += (rng.next() >> 61) == 0 ? 8 : 0;
            best = std::max(best, std::abs(c8 - k));
        }
        max_abs8[r] = best;
    }
    bool ok = true;
    std::string detail;
    double tightest = 0.0;
    for (int t = 5; t <= 50; t += 5) {
        int hits = 0;
        for (int v : max_abs8)
            hits += v >= 8 * t;
        const double empirical = static_cast<double>(hits) / kReps;
        const double bound = bounds::bernstein_tail(kN, 7.0 / 64.0, t);
        ok = ok && empirical <= bound;
        tightest = std::max(tightest, empirical / bound);
        if (t == 20 || t == 35)
            detail += "t=" + std::to_string(t) + ": " + fmt(empirical) + " <= " + fmt(bound) + "; ";
    }
    return {ok, detail + "max empirical/bound = " + fmt(tightest)};
}

Outcome constants_audit()
{
    const auto report = bounds::constants_audit();
    std::string failed;
    for (const auto& c : report.checks)
        if (!c.passed)
            failed += c.name + " ";
    // Union budget over the full grid.
    int budget_failures = 0;
    for (int d = 2; d <= 64; ++d)
        for (double eps : {0.9, 0.5, 0.1, 1e-3, 1e-6})
            budget_failures += !bounds::union_budget_for_depth(d, eps, 40).passed();
    const auto spot = bounds::union_budget(2, 65536, 0.1);
    const double lhs0 = spot.terms.at(0).lhs;
    const double series = bounds::sqrt_series(1000);
    const double series_cap = (82.357 - 9.864) / 15.465;
    const bool spots = std::fabs(lhs0 - 0.0494) < 5e-5 && lhs0 <= 0.05 && std::fabs(series - 4.14) < 0.01 &&
                       series <= series_cap && std::fabs(series_cap - 4.688) < 1e-3;
    return {report.passed() && budget_failures == 0 && spots,
            std::to_string(report.checks.size()) + " audit checks" + (failed.empty() ? "" : " failed: " + failed) +
                ", union budget failures " + std::to_string(budget_failures) + "; LHS(d=2, eps=0.1) = " + fmt(lhs0) +
                ", sum sqrt(h 2^-h) = " + fmt(series) + " <= " + fmt(series_cap)};
}

Outcome non_vacuous_theorem()
{
    ExperimentConfig c;
    c.d = 2;
    c.n = 65536;
    c.epsilon = 0.1;
    c.trials = 100;
    c.method = Method::brackets;
    c.delta = pow2_rational(-8);
    const auto records = run_trials(c);
    const auto est = exceedance_ci(records);
    Rational max_upper = 0;
    bool widths_ok = true;
    for (const auto& r : records) {
        max_upper = std::max(max_upper, r.dstar_upper);
        widths_ok = widths_ok && r.dstar_upper - r.dstar_lower <= pow2_rational(-8);
    }
    const double bound = records.front().bound_stated;
    const bool ok = std::fabs(bound - 0.52513) < 5e-6 && est.exceedances == 0 && est.indeterminate == 0 &&
                    est.upper <= c.epsilon && std::fabs(est.upper - 0.0362) < 5e-5 && widths_ok;
    return {ok, "bound_stated = " + fmt(bound) + ", exceedances " + std::to_string(est.exceedances) + "/100" +
                    ", indeterminate " + std::to_string(est.indeterminate) + ", CP95 upper = " + fmt(est.upper) +
                    ", max dstar_upper = " + fmt(to_double(max_upper))};
}

Outcome bit_cost()
{
    const auto b = bitcost_report(3, 100, 32);
    const auto seed = derive_seed(1, 3, 100, 32);
    const bool ok = b.lacunary_bits == 393 && b.iid_bits == 9600 && seed.total_bits() == 393 &&
                    generate_iid(1, 3, 100, 32).bits_consumed() == 9600;
    return {ok, std::to_string(b.lacunary_bits) + " vs " + std::to_string(b.iid_bits) + " bits, ratio " +
                    fmt(b.ratio)};
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const std::string& cli)
{
    ExperimentConfig c;
    c.d = 2;
    c.n = 1024;
    c.epsilon = 0.1;
    c.trials = 16;
    c.master_seed = 10;
    std::vector<std::string> outputs;
    for (unsigned w : {1U, 1U, 2U, 4U}) {
        c.workers = w;
        std::ostringstream out;
        io::write_trials_csv(out, run_trials(c));
        outputs.push_back(out.str());
    }
    bool same = true;
    for (const auto& o : outputs)
        same = same && o == outputs.front();
    std::string detail = "in-process CSV identical for workers 1,1,2,4: " + std::string(same ? "yes" : "no");

    if (!cli.empty()) {
        const std::string base = cli + " verify --d 2 --n 1024 --eps 0.1 --trials 16 --seed 10 --format csv";
        std::vector<std::string> files;
        bool ran = true;
        for (const char* w : {"1", "1", "3"}) {
            const std::string path = "acceptance_verify_" + std::to_string(files.size()) + ".csv";
            ran = ran && std::system((base + " --workers " + w + " --out " + path + " 2>/dev/null").c_str()) == 0;
            files.push_back(slurp(path));
        }
        const bool cli_same = ran && files[0] == files[1] && files[0] == files[2] && files[0] == outputs.front();
        same = same && cli_same;
        detail += "; CLI verify CSV identical for workers 1,1,3 and equal to in-process: " +
                  std::string(cli_same ? "yes" : "no");
    }
    return {same, detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::string cli = argc > 1 ? argv[1] : "";
    Suite s;
    s.run(1, "Discrepancy oracle equivalence", 120, oracle_equivalence);
    s.run(2, "Bracket enclosure", 60, bracket_enclosure);
    s.run(3, "Cover validity", 120, cover_validity);
    s.run(4, "Chaining invariants", 60, chaining_invariants);
    s.run(5, "Exact independence", 120, exact_independence);
    s.run(6, "Bernstein empirical validity", 60, bernstein_validity);
    s.run(7, "Constants audit", 10, constants_audit);
    s.run(8, "Non-vacuous bound check", 300, non_vacuous_theorem);
    s.run(9, "Bit-cost accounting", 1, bit_cost);
    s.run(10, "Determinism", 60, [&] { return determinism(cli); });
    std::cout << (s.failures() == 0 ? "ALL CRITERIA PASS" : std::to_string(s.failures()) + " CRITERIA FAIL")
              << std::endl;
    return s.failures() == 0 ? 0 : 1;
}
