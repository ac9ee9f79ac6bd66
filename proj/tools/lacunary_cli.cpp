#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <lacunary/lacunary.hpp>

namespace {

using lacunary::Rational;
using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kUsage = 1, kInfeasible = 2, kGateFailure = 3 };

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

lacunary::Method parse_method(const std::string& s)
{
    if (s == "exact")
        return lacunary::Method::exact;
    if (s == "brackets")
        return lacunary::Method::brackets;
    return lacunary::Method::automatic;
}

lacunary::PointKind parse_kind(const std::string& s)
{
    return s == "iid" ? lacunary::PointKind::iid : lacunary::PointKind::lacunary;
}

// Output goes to --out when given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw usage_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string fmt(double x) { return lacunary::io::format_double(x); }

// "2^a..2^b" -> {2^a, ..., 2^b}; otherwise a comma list of integers.
std::vector<std::uint64_t> parse_n_grid(const std::string& text)
{
    std::vector<std::uint64_t> grid;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        auto exponent = [&](const std::string& t) {
            if (t.rfind("2^", 0) != 0)
                throw usage_error("--n-grid expects 2^a..2^b");
            return std::stoi(t.substr(2));
        };
        const int a = exponent(text.substr(0, dots));
        const int b = exponent(text.substr(dots + 2));
        if (a < 0 || b < a || b > 40)
            throw usage_error("--n-grid exponents must satisfy 0 <= a <= b <= 40");
        for (int k = a; k <= b; ++k)
            grid.push_back(std::uint64_t{1} << k);
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        grid.push_back(std::stoull(item));
    if (grid.empty())
        throw usage_error("--n-grid is empty");
    return grid;
}

struct PointSource {
    std::string input;
    std::string input_format = "decimal";
    std::size_t d = 2;
    std::size_t n = 64;
    unsigned h = 32;
    std::uint64_t seed = 1;
    std::string kind = "lacunary";

    void add_options(CLI::App* app, bool allow_input)
    {
        if (allow_input) {
            app->add_option("--input", input, "Point CSV (header n,x1,...,xd)");
            app->add_option("--input-format", input_format, "Coordinate format of --input")
                ->check(CLI::IsMember({"decimal", "bits"}));
        }
        app->add_option("--d", d, "Dimension")->check(CLI::PositiveNumber);
        app->add_option("--n", n, "Number of points")->check(CLI::PositiveNumber);
        app->add_option("--h-precision", h, "Bits per coordinate H")->check(CLI::Range(1, 62));
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--kind", kind, "Generator")->check(CLI::IsMember({"lacunary", "iid"}));
    }

    lacunary::PointSet load() const
    {
        if (!input.empty()) {
            std::ifstream in(input);
            if (!in)
                throw usage_error("cannot open input file: " + input);
            return lacunary::io::read_points_csv(
                in, input_format == "bits" ? lacunary::io::CoordFormat::bits : lacunary::io::CoordFormat::decimal);
        }
        return kind == "iid" ? lacunary::generate_iid(seed, d, n, h) : lacunary::generate_lacunary(seed, d, n, h);
    }
};

int run_generate(const PointSource& src, const std::string& format, const std::string& out)
{
    Sink sink(out);
    lacunary::io::write_points_csv(sink.stream(), src.load(),
                                   format == "bits" ? lacunary::io::CoordFormat::bits
                                                    : lacunary::io::CoordFormat::decimal);
    return kOk;
}

int run_disc(const PointSource& src, const std::string& method_name, const std::string& delta_text,
             std::uint64_t budget, const std::string& format)
{
    const lacunary::PointSet points = src.load();
    lacunary::Method method = parse_method(method_name);
    if (method == lacunary::Method::automatic)
        method = lacunary::critical_grid_size(points) <= budget ? lacunary::Method::exact : lacunary::Method::brackets;

    Rational lower, upper, delta = 0;
    if (method == lacunary::Method::exact) {
        lower = upper = lacunary::exact_star_discrepancy(points, budget);
    } else {
        delta = delta_text.empty() ? lacunary::pow2_rational(-6) : lacunary::io::parse_rational(delta_text);
        if (!lacunary::is_dyadic(delta))
            throw usage_error("--delta must be a dyadic rational in (0, 1]");
        const auto cover = lacunary::build_base_cover(points.dim(), delta);
        if (!lacunary::detail::cover_feasible(cover))
            throw lacunary::infeasible_instance("bracketing cover too large for this (d, delta)");
        const auto b = lacunary::bracket_bounds(points, cover);
        lower = b.lower;
        upper = b.upper;
    }

    if (format == "csv") {
        std::cout << "n,d,method,dstar_lower,dstar_upper,delta\n"
                  << points.size() << ',' << points.dim() << ',' << lacunary::to_string(method) << ','
                  << fmt(lacunary::to_double(lower)) << ',' << fmt(lacunary::to_double(upper)) << ','
                  << fmt(lacunary::to_double(delta)) << '\n';
        return kOk;
    }
    json j;
    j["n"] = points.size();
    j["d"] = points.dim();
    j["method"] = lacunary::to_string(method);
    if (method == lacunary::Method::exact) {
        j["dstar"] = lacunary::to_double(lower);
        j["dstar_exact"] = lower.str();
    } else {
        j["dstar"] = {{"lower", lacunary::to_double(lower)},
                      {"upper", lacunary::to_double(upper)},
                      {"delta", lacunary::to_double(delta)},
                      {"lower_exact", lower.str()},
                      {"upper_exact", upper.str()}};
    }
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int run_cover(std::size_t d, std::optional<int> h, const std::string& delta_text, bool snap, std::uint64_t probes,
              std::uint64_t seed, const std::string& format)
{
    if (h.has_value() == !delta_text.empty())
        throw usage_error("give exactly one of --h or --delta");
    if (snap && !h)
        throw usage_error("--snap needs --h");

    std::optional<lacunary::BracketingCover> cover;
    if (snap)
        cover.emplace(lacunary::snapped_cover(d, *h));
    else
        cover.emplace(lacunary::build_base_cover(d, h ? lacunary::pow2_rational(-*h)
                                                      : lacunary::io::parse_rational(delta_text)));

    // Probe targets are uniform on the 2^-40 grid plus the all-ones corner.
    lacunary::SplitMix64 rng(lacunary::mix_seed(seed, 0));
    const std::uint64_t den = lacunary::pow2(40);
    Rational max_weight = 0;
    std::uint64_t uncovered = 0;
    bool corners_on_grid = true;
    const auto levels = cover->snap();
    for (std::uint64_t p = 0; p < probes; ++p) {
        std::vector<std::uint64_t> num(d);
        for (auto& x : num)
            x = p == 0 ? den : rng.next_bits(40);
        const lacunary::Corner y(std::move(num), den);
        const auto b = cover->locate(y);
        uncovered += !b.contains(y);
        max_weight = std::max(max_weight, b.weight());
        if (levels)
            corners_on_grid = corners_on_grid && b.lower.on_grid(lacunary::pow2(levels->coarse_bits)) &&
                              b.upper.on_grid(lacunary::pow2(levels->fine_bits));
    }

    const double delta = lacunary::to_double(cover->delta());
    const double log_card = lacunary::bounds::log_cover_cardinality_bound(static_cast<int>(d), delta);
    if (format == "csv") {
        std::cout << "d,delta,mesh,cardinality,probes,uncovered,max_weight,lower_denominator,upper_denominator\n"
                  << d << ',' << fmt(delta) << ',' << cover->mesh() << ',' << cover->cardinality_bound().str() << ','
                  << probes << ',' << uncovered << ',' << fmt(lacunary::to_double(max_weight)) << ','
                  << (levels ? lacunary::pow2(levels->coarse_bits) : cover->mesh()) << ','
                  << (levels ? lacunary::pow2(levels->fine_bits) : cover->mesh()) << '\n';
        return kOk;
    }
    json j;
    j["d"] = d;
    j["delta"] = cover->delta().str();
    j["snapped"] = snap;
    j["mesh"] = cover->mesh();
    j["cardinality"] = cover->cardinality_bound().str();
    j["log_cardinality_bound"] = log_card;
    j["probes"] = probes;
    j["uncovered"] = uncovered;
    j["max_weight"] = max_weight.str();
    j["max_weight_ok"] = max_weight <= cover->delta();
    if (levels) {
        j["corner_denominators"] = {lacunary::pow2(levels->coarse_bits), lacunary::pow2(levels->fine_bits)};
        j["corners_on_grid"] = corners_on_grid;
    } else {
        j["corner_denominators"] = {cover->mesh(), cover->mesh()};
    }
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int run_bound(int d, std::uint64_t n, double eps, const std::string& variant, double c_abs)
{
    json j;
    j["d"] = d;
    j["N"] = n;
    j["variant"] = variant;
    if (variant == "hnww") {
        const double v = lacunary::bounds::hnww_bound(d, n, c_abs);
        j["c_abs"] = c_abs;
        j["value"] = v;
        j["vacuous"] = v > 1.0;
    } else {
        const auto v = variant == "stated" ? lacunary::bounds::Variant::stated : lacunary::bounds::Variant::detailed;
        const auto b = lacunary::bounds::theorem_bound(d, n, eps, v);
        j["epsilon"] = eps;
        j["value"] = b.value;
        j["vacuous"] = b.vacuous;
        j["depth"] = lacunary::bounds::chaining_depth(n, d);
        const auto p = lacunary::bounds::constants(d, eps, 1);
        j["constants"] = {{"C1", p.c1}, {"C2", p.c2}, {"C3", p.c3}, {"C4", p.c4}};
    }
    std::cout << j.dump(2) << '\n';
    return kOk;
}

int run_audit(const std::string& format)
{
    const auto report = lacunary::bounds::constants_audit();
    if (format == "csv") {
        std::cout << "check,passed,detail\n";
        for (const auto& c : report.checks)
            std::cout << c.name << ',' << (c.passed ? "yes" : "no") << ",\"" << c.detail << "\"\n";
    } else {
        json j;
        j["passed"] = report.passed();
        j["sqrt_series"] = report.sqrt_series;
        j["checks"] = json::array();
        for (const auto& c : report.checks)
            j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        std::cout << j.dump(2) << '\n';
    }
    return report.passed() ? kOk : kGateFailure;
}

// --box "lo1,...,lod:hi1,...,hid"
int run_indep(std::size_t d, int h, std::uint64_t n, std::uint64_t n_prime, const std::string& indices_text,
              const std::string& box)
{
    const auto colon = box.find(':');
    if (colon == std::string::npos)
        throw usage_error("--box expects lo1,...,lod:hi1,...,hid");
    const auto lo = lacunary::io::parse_rational_list(box.substr(0, colon));
    const auto hi = lacunary::io::parse_rational_list(box.substr(colon + 1));
    if (lo.size() != d || hi.size() != d)
        throw usage_error("--box corners must have d coordinates");
    const lacunary::LayerFunction layer(lacunary::io::corner_from_rationals(lo),
                                        lacunary::io::corner_from_rationals(hi), h);

    std::vector<std::uint64_t> indices;
    if (!indices_text.empty()) {
        std::stringstream ss(indices_text);
        std::string item;
        while (std::getline(ss, item, ','))
            indices.push_back(std::stoull(item));
    } else {
        if (!(n < n_prime))
            throw usage_error("need --n < --n-prime");
        indices = {n, n_prime};
    }
    const auto joint = lacunary::exact_joint(layer, indices);
    const Rational gap = lacunary::factorization_gap(joint);

    json j;
    j["d"] = d;
    j["h"] = h;
    j["indices"] = joint.indices;
    j["mean"] = joint.mean.str();
    j["resolution_bits"] = joint.resolution_bits;
    j["cells"] = joint.cell_count;
    j["joint"] = json::array();
    for (std::size_t p = 0; p < joint.probability.size(); ++p) {
        json row;
        json values = json::array();
        for (std::size_t k = 0; k < joint.arity(); ++k)
            values.push_back(joint.value(((p >> k) & 1U) != 0).str());
        row["values"] = values;
        row["probability"] = joint.probability[p].str();
        j["joint"].push_back(row);
    }
    j["marginal_inside"] = json::array();
    for (std::size_t k = 0; k < joint.arity(); ++k)
        j["marginal_inside"].push_back(joint.marginal(k, true).str());
    j["factorization_gap"] = gap.str();
    j["independent"] = gap == 0;
    std::cout << j.dump(2) << '\n';
    return kOk;
}

struct VerifyOptions {
    lacunary::ExperimentConfig config;
    std::string n_grid;
    std::string method = "auto";
    std::string delta;
    std::string kind = "lacunary";
    std::string out;
    std::string format = "csv";
    bool gate = false;
};

int run_verify(VerifyOptions o)
{
    auto& c = o.config;
    c.method = parse_method(o.method);
    c.kind = parse_kind(o.kind);
    if (!o.delta.empty())
        c.delta = lacunary::io::parse_rational(o.delta);
    Sink sink(o.out);
    std::ostream& out = sink.stream();

    if (!o.n_grid.empty()) {
        const auto grid = parse_n_grid(o.n_grid);
        const auto table = lacunary::scaling_study(c, grid);
        if (o.format == "csv") {
            out << "N,trials,exact_trials,median_normalized,max_normalized,bound_stated\n";
            for (const auto& r : table.rows)
                out << r.n << ',' << r.trials << ',' << r.exact_trials << ',' << fmt(r.median_normalized) << ','
                    << fmt(r.max_normalized) << ',' << fmt(r.bound_stated) << '\n';
        } else {
            json j;
            j["config"] = lacunary::io::to_json(c);
            j["rows"] = json::array();
            for (const auto& r : table.rows)
                j["rows"].push_back({{"N", r.n},
                                     {"trials", r.trials},
                                     {"exact_trials", r.exact_trials},
                                     {"median_normalized", r.median_normalized},
                                     {"max_normalized", r.max_normalized},
                                     {"bound_stated", r.bound_stated}});
            j["trend_flag"] = table.trend_flag ? json(*table.trend_flag) : json(nullptr);
            out << j.dump(2) << '\n';
        }
        return kOk;
    }

    const auto records = lacunary::run_trials(c);
    const auto est = lacunary::exceedance_ci(records);
    const bool vacuous = records.front().bound_stated > 1.0;
    Rational max_upper = 0;
    for (const auto& r : records)
        max_upper = std::max(max_upper, r.dstar_upper);

    if (o.format == "csv") {
        lacunary::io::write_trials_csv(out, records);
        std::cerr << "exceedances " << est.exceedances << '/' << est.trials << ", indeterminate " << est.indeterminate
                  << ", 95% CI [" << fmt(est.lower) << ", " << fmt(est.upper) << "], max dstar_upper "
                  << fmt(lacunary::to_double(max_upper)) << (vacuous ? ", bound vacuous" : "") << '\n';
    } else {
        json j;
        j["config"] = lacunary::io::to_json(c);
        j["bound_stated"] = records.front().bound_stated;
        j["bound_detailed"] = records.front().bound_detailed;
        j["vacuous"] = vacuous;
        j["records"] = json::array();
        for (const auto& r : records)
            j["records"].push_back(lacunary::io::to_json(r));
        j["exceedance"] = lacunary::io::to_json(est);
        j["max_dstar_upper"] = lacunary::to_double(max_upper);
        out << j.dump(2) << '\n';
    }
    // Gate: in the non-vacuous regime the upper confidence limit must not exceed epsilon.
    if (o.gate && !vacuous && est.upper > c.epsilon)
        return kGateFailure;
    return kOk;
}

int run_bitcost(std::uint64_t d, std::uint64_t n, std::uint64_t h)
{
    const auto b = lacunary::bitcost_report(d, n, h);
    json j;
    j["d"] = d;
    j["N"] = n;
    j["H"] = h;
    j["lacunary_bits"] = b.lacunary_bits;
    j["iid_bits"] = b.iid_bits;
    j["ratio"] = b.ratio;
    std::cout << j.dump(2) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lacunary point sets, star discrepancy and bound verification"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    int code = kOk;

    // generate
    PointSource gen_src;
    std::string gen_format = "decimal", gen_out;
    auto* gen = app.add_subcommand("generate", "Write a point set as CSV");
    gen_src.add_options(gen, false);
    gen->add_option("--format", gen_format, "Coordinate format")->check(CLI::IsMember({"decimal", "bits"}));
    gen->add_option("--out", gen_out, "Output path (default stdout)");
    gen->callback([&] { code = run_generate(gen_src, gen_format, gen_out); });

    // disc
    PointSource disc_src;
    std::string disc_method = "auto", disc_delta, disc_format = "json";
    std::uint64_t disc_budget = lacunary::kDefaultGridBudget;
    auto* disc = app.add_subcommand("disc", "Star discrepancy of a point set");
    disc_src.add_options(disc, true);
    disc->add_option("--method", disc_method)->check(CLI::IsMember({"exact", "brackets", "auto"}));
    disc->add_option("--delta", disc_delta, "Dyadic bracket parameter (default 2^-6)");
    disc->add_option("--budget", disc_budget, "Critical grid budget");
    disc->add_option("--format", disc_format)->check(CLI::IsMember({"json", "csv"}));
    disc->callback([&] { code = run_disc(disc_src, disc_method, disc_delta, disc_budget, disc_format); });

    // cover
    std::size_t cover_d = 2;
    std::optional<int> cover_h;
    std::string cover_delta, cover_format = "json";
    bool cover_snap = false;
    std::uint64_t cover_probes = 0, cover_seed = 1;
    auto* cover = app.add_subcommand("cover", "Build and probe a bracketing cover");
    cover->add_option("--d", cover_d)->check(CLI::PositiveNumber);
    cover->add_option("--h", cover_h, "Level h (delta = 2^-h)")->check(CLI::Range(0, 58));
    cover->add_option("--delta", cover_delta, "Bracket weight bound");
    cover->add_flag("--snap", cover_snap, "Snap corners to the level-h dyadic grids");
    cover->add_option("--probe", cover_probes, "Number of random coverage probes");
    cover->add_option("--seed", cover_seed, "Probe seed");
    cover->add_option("--format", cover_format)->check(CLI::IsMember({"json", "csv"}));
    cover->callback([&] {
        code = run_cover(cover_d, cover_h, cover_delta, cover_snap, cover_probes, cover_seed, cover_format);
    });

    // bound
    int bound_d = 2;
    std::uint64_t bound_n = 65536;
    double bound_eps = 0.1, bound_c = 1.0;
    std::string bound_variant = "stated";
    auto* bound = app.add_subcommand("bound", "Evaluate a discrepancy bound");
    bound->add_option("--d", bound_d)->check(CLI::PositiveNumber);
    bound->add_option("--n", bound_n)->check(CLI::PositiveNumber);
    bound->add_option("--eps", bound_eps);
    bound->add_option("--variant", bound_variant)->check(CLI::IsMember({"stated", "detailed", "hnww"}));
    bound->add_option("--c-abs", bound_c, "Absolute constant for the hnww form");
    bound->callback([&] { code = run_bound(bound_d, bound_n, bound_eps, bound_variant, bound_c); });

    // audit
    std::string audit_format = "json";
    auto* audit = app.add_subcommand("audit", "Audit the constants over the full parameter grid");
    audit->add_option("--format", audit_format)->check(CLI::IsMember({"json", "csv"}));
    audit->callback([&] { code = run_audit(audit_format); });

    // indep
    std::size_t indep_d = 1;
    int indep_h = 0;
    std::uint64_t indep_n = 1, indep_np = 3;
    std::string indep_box, indep_indices;
    auto* indep = app.add_subcommand("indep", "Exact joint law of centered layer indicators");
    indep->add_option("--d", indep_d)->check(CLI::PositiveNumber);
    indep->add_option("--h", indep_h)->check(CLI::NonNegativeNumber);
    indep->add_option("--n", indep_n)->check(CLI::PositiveNumber);
    indep->add_option("--n-prime", indep_np)->check(CLI::PositiveNumber);
    indep->add_option("--indices", indep_indices, "Comma list of indices (overrides --n/--n-prime)");
    indep->add_option("--box", indep_box, "Layer corners lo1,...,lod:hi1,...,hid")->required();
    indep->callback([&] { code = run_indep(indep_d, indep_h, indep_n, indep_np, indep_indices, indep_box); });

    // verify
    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "Monte Carlo check of the discrepancy bound");
    verify->add_option("--d", vo.config.d)->check(CLI::PositiveNumber);
    verify->add_option("--n", vo.config.n)->check(CLI::PositiveNumber);
    verify->add_option("--n-grid", vo.n_grid, "Scaling grid 2^a..2^b");
    verify->add_option("--eps", vo.config.epsilon);
    verify->add_option("--trials", vo.config.trials)->check(CLI::PositiveNumber);
    verify->add_option("--h-precision", vo.config.precision)->check(CLI::Range(1, 62));
    verify->add_option("--method", vo.method)->check(CLI::IsMember({"exact", "brackets", "auto"}));
    verify->add_option("--delta", vo.delta, "Dyadic bracket parameter");
    verify->add_option("--seed", vo.config.master_seed, "Master seed");
    verify->add_option("--kind", vo.kind)->check(CLI::IsMember({"lacunary", "iid"}));
    verify->add_option("--budget", vo.config.grid_budget, "Critical grid budget");
    verify->add_option("--workers", vo.config.workers)->check(CLI::PositiveNumber);
    verify->add_option("--out", vo.out, "Output path (default stdout)");
    verify->add_option("--format", vo.format)->check(CLI::IsMember({"json", "csv"}));
    verify->add_flag("--gate", vo.gate, "Exit 3 if the exceedance upper limit exceeds eps");
    verify->callback([&] { code = run_verify(vo); });

    // bitcost
    std::uint64_t bc_d = 3, bc_n = 100, bc_h = 32;
    auto* bitcost = app.add_subcommand("bitcost", "Random bits used by lacunary vs iid point sets");
    bitcost->add_option("--d", bc_d)->check(CLI::PositiveNumber);
    bitcost->add_option("--n", bc_n)->check(CLI::PositiveNumber);
    bitcost->add_option("--h-precision", bc_h)->check(CLI::PositiveNumber);
    bitcost->callback([&] { code = run_bitcost(bc_d, bc_n, bc_h); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? kOk : kUsage;
    } catch (const lacunary::infeasible_instance& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const lacunary::budget_exceeded& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return code;
}
