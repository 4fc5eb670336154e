// cocyclelab command-line front end.
//
// Exit codes: 0 ok, 1 usage, 2 config error, 3 numeric failure, 4 point not on
// the requested leaf, 5 cocycle not fiber bunched.

#include "emit.hpp"

#include "cocyclelab/config.hpp"
#include "cocyclelab/constructions.hpp"
#include "cocyclelab/errors.hpp"
#include "cocyclelab/holonomy.hpp"
#include "cocyclelab/measures.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>

namespace cocyclelab::cli {

namespace {

using json = nlohmann::ordered_json;

enum exit_code { ok = 0, usage = 1, config_error = 2, numeric_failure = 3, off_leaf = 4, unbunched = 5 };

int exit_code_of(error_kind kind)
{
    switch (kind) {
    case error_kind::config:
    case error_kind::invalid_argument:
    case error_kind::leaf_absent:
        return config_error;
    case error_kind::not_on_leaf:
        return off_leaf;
    case error_kind::not_fiber_bunched:
        return unbunched;
    default:
        return numeric_failure;
    }
}

std::string shortest(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : "nan";
}

json matrix_json(const mat2& m) { return json::array({m.a, m.b, m.c, m.d}); }

std::vector<std::pair<double, double>> matrix_rows(const mat2& m) { return {{m.a, m.b}, {m.c, m.d}}; }

json estimate_json(const lyapunov_estimate& e)
{
    return json{{"value", e.value}, {"std_error", e.std_error}, {"n", e.iterations}, {"orbits", e.orbits}};
}

// Flags shared by every command that reads a config.
struct options {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<long> iterations, orbits, burn_in, bins, workers;
    std::optional<double> tol;
    std::string format = "jsonl";
    bool gnuplot = false;

    std::optional<std::string> x, y, kind;
    std::optional<double> distance;

    std::vector<double> matrix;
    std::string example;
    std::vector<std::string> overrides;
};

// Config plus the run.* parameters the command actually consumed.
class run_context {
public:
    explicit run_context(config_map cfg) : cfg_(std::move(cfg)) {}

    config_map& cfg() { return cfg_; }

    void build()
    {
        sys_ = build_base(cfg_);
        spec_ = build_spec(cfg_);
    }
    const base_system& sys() const { return sys_; }
    const cocycle_spec& spec() const { return spec_; }

    long positive(const std::string& key, long fallback)
    {
        if (!cfg_.has(key))
            cfg_.set(key, std::to_string(fallback));
        const long v = cfg_.integer(key);
        if (v <= 0)
            fail(error_kind::config, key + ": must be positive, got " + std::to_string(v));
        return v;
    }
    double positive_real(const std::string& key, double fallback)
    {
        if (!cfg_.has(key))
            cfg_.set(key, shortest(fallback));
        const double v = cfg_.real(key);
        if (!(v > 0.0))
            fail(error_kind::config, key + ": must be positive, got " + cfg_.text(key));
        return v;
    }
    double real(const std::string& key, double fallback)
    {
        if (!cfg_.has(key))
            cfg_.set(key, shortest(fallback));
        return cfg_.real(key);
    }
    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!cfg_.has(key))
            cfg_.set(key, fallback);
        return cfg_.text(key);
    }
    std::uint64_t seed()
    {
        const auto s = cfg_.get("run.seed");
        if (!s)
            fail(error_kind::config, "run.seed: missing (pass --seed or set run.seed)");
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
        if (ec != std::errc() || ptr != s->data() + s->size())
            fail(error_kind::config, "run.seed: expected an unsigned integer, got '" + *s + "'");
        return v;
    }
    base_point point(const std::string& key)
    {
        return parse_point(sys_, cfg_.text(key), key);
    }
    /// Point from `key`, or a seeded sample of the base measure recorded back into the config.
    base_point point_or_sample(const std::string& key, std::uint64_t seed)
    {
        if (cfg_.has(key))
            return point(key);
        const auto x = sample_measure(sys_, derive_seed(seed, 0x7870));
        cfg_.set(key, "sampled");
        (void)cfg_.get(key);
        return x;
    }
    lyapunov_options lyapunov(long default_iterations)
    {
        lyapunov_options o;
        o.iterations = positive("run.iterations", default_iterations);
        o.orbits = static_cast<int>(positive("run.orbits", 8));
        o.workers = static_cast<int>(positive("run.workers", 1));
        o.seed = seed();
        return o;
    }

    record finish(const std::string& command)
    {
        record r;
        r.command = command;
        r.config = cfg_.entries();
        return r;
    }

private:
    config_map cfg_;
    base_system sys_;
    cocycle_spec spec_;
};

// Flags land in run.* so the record shows one resolved value per parameter.
config_map load_config(const options& o, std::optional<std::string> base_text = std::nullopt)
{
    config_map cfg = base_text ? config_map::parse(*base_text, "example") : config_map{};
    if (!o.config_path.empty()) {
        const auto file = config_map::load(o.config_path);
        for (const auto& [k, v] : file.entries())
            cfg.set(k, v);
    }
    for (const auto& s : o.sets)
        cfg.apply(s);
    if (o.seed)
        cfg.set("run.seed", std::to_string(*o.seed));
    if (o.iterations)
        cfg.set("run.iterations", std::to_string(*o.iterations));
    if (o.orbits)
        cfg.set("run.orbits", std::to_string(*o.orbits));
    if (o.burn_in)
        cfg.set("run.burn_in", std::to_string(*o.burn_in));
    if (o.bins)
        cfg.set("run.bins", std::to_string(*o.bins));
    if (o.workers)
        cfg.set("run.workers", std::to_string(*o.workers));
    if (o.tol)
        cfg.set("run.tol", shortest(*o.tol));
    if (o.x)
        cfg.set("run.x", *o.x);
    if (o.y)
        cfg.set("run.y", *o.y);
    if (o.kind)
        cfg.set("run.kind", *o.kind);
    if (o.distance)
        cfg.set("run.distance", shortest(*o.distance));
    return cfg;
}

// ---------------------------------------------------------------------------
// commands

record cmd_lyapunov(run_context& ctx)
{
    ctx.build();
    const auto opts = ctx.lyapunov(100000);
    ctx.cfg().reject_unused();
    const auto pair = lyapunov_exponents(ctx.spec(), ctx.sys(), opts);
    auto r = ctx.finish("lyapunov");
    r.result["lambda_u"] = pair.top.value;
    r.result["lambda_s"] = pair.bottom.value;
    r.result["std_error"] = pair.top.std_error;
    r.result["std_error_s"] = pair.bottom.std_error;
    r.result["log_det"] = pair.log_det.value;
    r.result["n"] = opts.iterations;
    r.result["orbits"] = opts.orbits;
    r.series = {{pair.top.value, pair.bottom.value}};
    return r;
}

record cmd_holonomy(run_context& ctx)
{
    ctx.build();
    holonomy_options ho;
    ho.tol = ctx.positive_real("run.tol", 1e-10);
    ho.seed = ctx.seed();
    ho.grid = ctx.positive("run.grid", default_bunching_grid);
    const std::string kind_text = ctx.text("run.kind", "s");
    if (kind_text != "s" && kind_text != "u")
        fail(error_kind::config, "run.kind: expected s or u, got '" + kind_text + "'");
    const leaf_kind kind = kind_text == "s" ? leaf_kind::s : leaf_kind::u;
    const base_point x = ctx.point("run.x");
    std::optional<base_point> y;
    std::optional<double> displacement;
    if (ctx.cfg().has("run.distance"))
        displacement = ctx.cfg().real("run.distance");
    else
        y = ctx.point("run.y");
    ctx.cfg().reject_unused();

    const holonomy_engine engine(ctx.spec(), ctx.sys(), ho);
    holonomy h;
    if (displacement)
        h = engine.along_leaf(x, kind, *displacement);
    else
        h = kind == leaf_kind::s ? engine.stable(x, *y) : engine.unstable(x, *y);

    auto r = ctx.finish("holonomy");
    r.result["kind"] = std::string(to_string(h.kind));
    r.result["from"] = h.from.to_string();
    r.result["to"] = h.to.to_string();
    r.result["matrix"] = matrix_json(h.matrix);
    r.result["error_bound"] = h.error_bound;
    r.result["truncation_n"] = h.truncation_n;
    r.result["bunching_margin"] = engine.bunching().margin;
    r.series = matrix_rows(h.matrix);
    return r;
}

record cmd_classify(const options& o)
{
    if (o.matrix.size() != 4)
        fail(error_kind::config, "matrix: expected 4 entries a b c d, got " + std::to_string(o.matrix.size()));
    const mat2 m{o.matrix[0], o.matrix[1], o.matrix[2], o.matrix[3]};
    if (!m.finite())
        fail(error_kind::config, "matrix: entries must be finite");
    const double tol = o.tol.value_or(default_classify_tol);
    if (!(tol > 0.0))
        fail(error_kind::config, "run.tol: must be positive");
    const auto [g, sl] = gl_to_sl(m);
    const auto c = classify(sl, tol);

    record r;
    r.command = "classify";
    r.config = {{"matrix", shortest(m.a) + "," + shortest(m.b) + "," + shortest(m.c) + "," + shortest(m.d)},
                {"run.tol", shortest(tol)}};
    r.result["kind"] = std::string(to_string(c.kind));
    r.result["trace"] = sl.trace();
    r.result["det"] = m.det();
    r.result["angle"] = c.angle ? json(*c.angle) : json(nullptr);
    json fixed = json::array();
    for (const auto& p : c.fixed_points)
        fixed.push_back(p.theta());
    r.result["fixed_points"] = fixed;
    for (const auto& p : c.fixed_points)
        r.series.emplace_back(p.theta(), 0.0);
    return r;
}

record cmd_measure(run_context& ctx)
{
    ctx.build();
    fiber_measure_options fo;
    const auto seed = ctx.seed();
    fo.iterations = ctx.positive("run.iterations", 100000);
    fo.burn_in = ctx.positive("run.burn_in", 1000);
    fo.bins = static_cast<std::size_t>(ctx.positive("run.bins", static_cast<long>(default_bins)));
    fo.radius = ctx.positive_real("run.radius", fo.radius);
    fo.initial_theta = ctx.real("run.initial_theta", fo.initial_theta);
    const base_point x = ctx.point_or_sample("run.x", seed);
    ctx.cfg().reject_unused();

    const auto m = empirical_fiber_measure(ctx.spec(), ctx.sys(), x, fo);
    atom_options ao;
    ao.bins = fo.bins;
    const auto rep = detect_atoms(m, ao);
    const auto h = m.histogram(fo.bins);

    auto r = ctx.finish("measure");
    r.result["x"] = x.to_string();
    r.result["bins"] = fo.bins;
    r.result["histogram"] = h;
    json atoms = json::array();
    for (const auto& [p, w] : rep.atoms)
        atoms.push_back(json::array({p.theta(), w}));
    r.result["atoms"] = atoms;
    r.result["diffuse_mass"] = rep.diffuse_mass;
    r.result["verdict"] = rep.verdict_string();
    for (std::size_t i = 0; i < h.size(); ++i)
        r.series.emplace_back(bin_center(i, h.size()), h[i]);
    return r;
}

record cmd_trivialize(run_context& ctx)
{
    ctx.build();
    holonomy_options ho;
    ho.tol = ctx.positive_real("run.tol", 1e-10);
    ho.seed = ctx.seed();
    trivialize_options to;
    to.seed = ho.seed;
    to.loops = static_cast<int>(ctx.positive("run.loops", to.loops));
    to.samples = ctx.positive("run.samples", to.samples);
    to.loop_tolerance = ctx.positive_real("run.loop_tol", to.loop_tolerance);
    const auto lo = ctx.lyapunov(10000);
    const base_point x = ctx.point_or_sample("run.x", ho.seed);
    ctx.cfg().reject_unused();

    const holonomy_engine engine(ctx.spec(), ctx.sys(), ho);
    const auto t = trivialize(engine, x, to);
    const auto original = lyapunov_top(ctx.spec(), ctx.sys(), lo);
    const auto trivialized = lyapunov_top(specs::constant(t.constant), ctx.sys(), lo);

    auto r = ctx.finish("trivialize");
    r.result["x"] = x.to_string();
    r.result["constant"] = matrix_json(t.constant);
    r.result["max_deviation"] = t.max_deviation;
    r.result["combined_tolerance"] = t.combined_tolerance;
    r.result["certified"] = t.certified;
    r.result["loops_checked"] = t.loops_checked;
    r.result["max_loop_residual"] = t.max_loop_residual;
    r.result["lambda_u"] = original.value;
    r.result["std_error"] = original.std_error;
    r.result["lambda_u_trivialized"] = trivialized.value;
    r.series = matrix_rows(t.constant);
    return r;
}

json center_json(const base_system& sys)
{
    try {
        const auto c = check_center_bunching(sys);
        return json{{"stable_ok", c.stable_ok},
                    {"unstable_ok", c.unstable_ok},
                    {"stable_margin", c.stable_margin},
                    {"unstable_margin", c.unstable_margin},
                    {"center_bunched", c.center_bunched()}};
    } catch (const lab_error& e) {
        if (e.kind() != error_kind::trivial_center)
            throw;
        return json(nullptr);
    }
}

record cmd_check_bunching(run_context& ctx)
{
    ctx.build();
    const auto seed = ctx.seed();
    const long grid = ctx.positive("run.grid", default_bunching_grid);
    ctx.cfg().reject_unused();

    const auto b = fiber_bunching(ctx.spec(), ctx.sys(), grid, seed);
    auto r = ctx.finish("check-bunching");
    r.result["rho_s"] = b.rho_s;
    r.result["rho_u"] = b.rho_u;
    r.result["margin"] = b.margin;
    r.result["alpha"] = b.alpha;
    r.result["sup_norm"] = b.sup_norm;
    r.result["sup_inverse_norm"] = b.sup_inverse_norm;
    r.result["fiber_bunched"] = b.pass();
    r.result["center"] = center_json(ctx.sys());
    r.series = {{b.rho_s, b.rho_u}};
    return r;
}

// ---------------------------------------------------------------------------
// examples

trivial_extension_config theorem_b_of(const run_context& ctx)
{
    const auto* prod = std::get_if<product_system>(&ctx.sys().value());
    const auto* rot = prod ? std::get_if<rotation_system>(&prod->left->value()) : nullptr;
    const auto* cat = prod ? std::get_if<cat_map_system>(&prod->right->value()) : nullptr;
    if (!rot || !cat)
        fail(error_kind::config, "base.kind: theorem-b needs product(rotation, cat)");
    const auto* lift = std::get_if<lift_gen>(&ctx.spec().node().value);
    if (!lift || lift->side != factor_side::left)
        fail(error_kind::config, "cocycle.kind: theorem-b needs a left lift of a circle cocycle");
    trivial_extension_config cfg;
    cfg.omega = rot->omega;
    cfg.cat_power = cat->power;
    cfg.a0 = lift->inner;
    return cfg;
}

random_product_config random_product_of(const run_context& ctx)
{
    const auto* rp = std::get_if<random_product_system>(&ctx.sys().value());
    if (!rp)
        fail(error_kind::config, "base.kind: random-product example needs a random-product base");
    const auto* sel = std::get_if<selector_gen>(&ctx.spec().node().value);
    if (!sel)
        fail(error_kind::config, "cocycle.kind: random-product example needs a selector cocycle");
    random_product_config cfg;
    cfg.probs = rp->probs;
    cfg.fiber_shift = rp->fiber_shift;
    cfg.generators = sel->per_symbol;
    return cfg;
}

void apply_override(config_map& cfg, const std::string& name, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(error_kind::config, "override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    if (key == "p0" && name == "random-product") {
        const double p0 = parse_real(value, "p0");
        if (!(p0 > 0.0 && p0 <= 1.0))
            fail(error_kind::config, "p0: must lie in (0, 1]");
        cfg.set("base.probs", shortest(p0) + "," + shortest(1.0 - p0));
    } else if (key == "a0" && name == "theorem-b") {
        const auto family = parse_a0_family(value);
        if (!family)
            fail(error_kind::config, "a0: expected hyperbolic, rotations or conjugated, got '" + value + "'");
        cfg.erase_prefix("cocycle.inner.");
        for (const auto& [k, v] : a0_family_entries(*family, "cocycle.inner"))
            cfg.set(k, v);
    } else if (key.find('.') != std::string::npos) {
        cfg.set(key, value);
    } else {
        fail(error_kind::config, key + ": unknown override for example '" + name + "'");
    }
}

record cmd_example(const options& o)
{
    const auto text = named_config(o.example);
    if (!text) {
        std::string names;
        for (const auto& n : named_config_names())
            names += (names.empty() ? "" : ", ") + n;
        fail(error_kind::config, "example '" + o.example + "' is unknown (available: " + names + ")");
    }
    config_map cfg = load_config(o, *text);
    for (const auto& ov : o.overrides)
        apply_override(cfg, o.example, ov);
    run_context ctx(std::move(cfg));
    ctx.build();

    if (o.example == "theorem-b") {
        const auto te = theorem_b_of(ctx);
        const auto lo = ctx.lyapunov(100000);
        const int trials = static_cast<int>(ctx.positive("run.trials", 100));
        const long grid = ctx.positive("run.grid", default_bunching_grid);
        ctx.cfg().reject_unused();

        const auto res = trivial_extension_exponent(te, lo);
        const auto bunch = fiber_bunching(te.spec(), te.system(), grid, lo.seed);
        const auto probe = accessibility_probe(te, trials, lo.seed);
        auto r = ctx.finish("example");
        r.result["name"] = o.example;
        r.result["product"] = estimate_json(res.product);
        r.result["factor"] = estimate_json(res.factor);
        r.result["gap"] = res.gap();
        r.result["combined_std_error"] = res.combined_std_error();
        r.result["agree"] = std::abs(res.gap()) <= 3.0 * res.combined_std_error() + 1e-12;
        r.result["fiber_bunched"] = bunch.pass();
        r.result["fiber_bunching_margin"] = bunch.margin;
        r.result["center"] = center_json(te.system());
        r.result["accessibility"] = json{{"cross_trials", probe.cross_trials},
                                         {"cross_unsupported", probe.cross_unsupported},
                                         {"same_trials", probe.same_trials},
                                         {"same_connected", probe.same_connected},
                                         {"same_valid", probe.same_valid},
                                         {"circle_preserved", probe.circle_preserved},
                                         {"pass", probe.pass()}};
        r.series = {{res.product.value, res.factor.value}};
        return r;
    }

    const auto rp = random_product_of(ctx);
    const auto lo = ctx.lyapunov(100000);
    ctx.cfg().reject_unused();
    const auto res = random_product_exponent(rp, lo);
    auto r = ctx.finish("example");
    r.result["name"] = o.example;
    r.result["p0"] = res.p0;
    r.result["direct"] = estimate_json(res.direct);
    r.result["base"] = estimate_json(res.base);
    r.result["formula"] = res.formula;
    r.result["formula_std_error"] = res.formula_std_error;
    r.result["z_score"] = res.z_score();
    r.result["agree"] = res.z_score() <= 3.0;
    r.series = {{res.direct.value, res.formula}};
    return r;
}

void add_common(CLI::App* sub, options& o, bool with_points)
{
    sub->add_option("--config", o.config_path, "Config file (key=value lines)");
    sub->add_option("--set", o.sets, "Config override key=value (repeatable)");
    sub->add_option("--seed", o.seed, "Seed (mandatory unless run.seed is set)");
    sub->add_option("--iterations", o.iterations, "Orbit length n");
    sub->add_option("--orbits", o.orbits, "Number of orbits");
    sub->add_option("--burn-in", o.burn_in, "Burn-in iterations");
    sub->add_option("--tol", o.tol, "Tolerance");
    sub->add_option("--bins", o.bins, "Histogram bins");
    sub->add_option("--workers", o.workers, "Worker threads cap");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}));
    sub->add_flag("--gnuplot-friendly", o.gnuplot, "Two numeric columns, no header");
    if (with_points) {
        sub->add_option("--x", o.x, "Base point, comma separated coordinates");
        sub->add_option("--y", o.y, "Second base point");
        sub->add_option("--kind", o.kind, "Leaf kind s or u");
        sub->add_option("--distance", o.distance, "Signed leaf displacement instead of --y");
    }
}

} // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Linear cocycles over partially hyperbolic model systems"};
    app.require_subcommand(1);
    options o;

    auto* lyap = app.add_subcommand("lyapunov", "Top and bottom Lyapunov exponents");
    add_common(lyap, o, false);
    auto* hol = app.add_subcommand("holonomy", "Stable or unstable holonomy between two points");
    add_common(hol, o, true);
    auto* cls = app.add_subcommand("classify", "Trace trichotomy of a 2x2 matrix");
    cls->add_option("entries", o.matrix, "a b c d")->expected(4);
    cls->add_option("--tol", o.tol, "Parabolic band");
    cls->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}));
    cls->add_flag("--gnuplot-friendly", o.gnuplot, "Two numeric columns, no header");
    auto* meas = app.add_subcommand("measure", "Empirical fiber measure and atom report");
    add_common(meas, o, true);
    auto* triv = app.add_subcommand("trivialize", "Constant form of a cocycle with trivial loop holonomies");
    add_common(triv, o, true);
    auto* ex = app.add_subcommand("example", "Run a named construction");
    ex->add_option("name", o.example, "theorem-b or random-product")->required();
    ex->add_option("overrides", o.overrides, "key=value overrides (p0=, a0=, or dotted config keys)");
    add_common(ex, o, false);
    auto* bunch = app.add_subcommand("check-bunching", "Fiber and center bunching report");
    add_common(bunch, o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        const auto format = o.format == "csv" ? output_format::csv : output_format::jsonl;
        record r;
        if (cls->parsed()) {
            r = cmd_classify(o);
        } else if (ex->parsed()) {
            r = cmd_example(o);
        } else {
            run_context ctx(load_config(o));
            if (lyap->parsed())
                r = cmd_lyapunov(ctx);
            else if (hol->parsed())
                r = cmd_holonomy(ctx);
            else if (meas->parsed())
                r = cmd_measure(ctx);
            else if (triv->parsed())
                r = cmd_trivialize(ctx);
            else
                r = cmd_check_bunching(ctx);
        }
        emitter(std::cout, format, o.gnuplot).emit(r);
        std::cout.flush();
        return ok;
    } catch (const lab_error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_of(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numeric_failure;
    }
}

} // namespace cocyclelab::cli

int main(int argc, char** argv) { return cocyclelab::cli::run(argc, argv); }
