#include "cocyclelab/constructions.hpp"

#include "cocyclelab/errors.hpp"

#include <cmath>

namespace cocyclelab {

long tau_count(const shift_point& x, long n)
{
    long count = 0;
    for (long j = 1; j <= n; ++j)
        count += x.symbol(j) == 0;
    return count;
}

// ---------------------------------------------------------------------------
// random product

base_system random_product_config::system() const { return base_system::random_product(probs, fiber_shift); }

cocycle_spec random_product_config::spec() const { return specs::selector(generators); }

void random_product_config::validate() const
{
    if (generators.size() != probs.size())
        fail(error_kind::invalid_argument, "random product needs one generator per symbol, got " +
                                               std::to_string(generators.size()) + " for " +
                                               std::to_string(probs.size()) + " symbols");
    if (!(probs.front() > 0.0))
        fail(error_kind::invalid_argument, "p0 must be positive");
    for (std::size_t j = 0; j < generators.size(); ++j)
        if (!determinant_one(generators[j]))
            fail(error_kind::invalid_argument, "generator " + std::to_string(j) + " is not SL valued");
    (void)system(); // probability checks
}

std::optional<std::string> random_product_config::structure_problem() const
{
    constexpr int probes = 64;
    for (std::size_t j = 1; j < generators.size(); ++j) {
        if (wrap_unit(fiber_shift[j]) != 0.0)
            return "fiber map " + std::to_string(j) + " is not the identity";
        const auto sys = base_system::rotation(fiber_shift[j]);
        for (int k = 0; k < probes; ++k) {
            const mat2 a = evaluate(generators[j], sys, base_point::circle(k / double(probes)));
            if (distance(a, mat2::identity()) > 1e-15)
                return "generator " + std::to_string(j) + " is not the identity";
        }
    }
    return std::nullopt;
}

random_product_config default_random_product(double p0)
{
    random_product_config cfg;
    cfg.probs = {p0, 1.0 - p0};
    cfg.generators = {specs::constant(mat2::diag(2.0, 0.5)), specs::constant(mat2::identity())};
    return cfg;
}

double random_product_result::z_score() const noexcept
{
    const double se = direct.std_error + formula_std_error;
    const double gap = std::abs(direct.value - formula);
    if (se == 0.0)
        return gap == 0.0 ? 0.0 : INFINITY;
    return gap / se;
}

random_product_result random_product_exponent(const random_product_config& cfg, const lyapunov_options& opts)
{
    cfg.validate();
    if (auto problem = cfg.structure_problem())
        fail(error_kind::structure_violation, "formula not claimed: " + *problem);

    random_product_result out;
    out.p0 = cfg.probs.front();
    out.direct = lyapunov_top(cfg.spec(), cfg.system(), opts);

    lyapunov_options base_opts = opts;
    base_opts.seed = derive_seed(opts.seed, 1);
    out.base = lyapunov_top(cfg.generators.front(), base_system::rotation(cfg.fiber_shift.front()), base_opts);
    out.formula = out.p0 * out.base.value;
    out.formula_std_error = out.p0 * out.base.std_error;
    return out;
}

// ---------------------------------------------------------------------------
// trivial extension

base_system trivial_extension_config::system() const
{
    return base_system::product(base_system::rotation(omega), base_system::cat_map(cat_power));
}

cocycle_spec trivial_extension_config::spec() const { return specs::lift(factor_side::left, a0); }

std::string_view to_string(a0_family family) noexcept
{
    switch (family) {
    case a0_family::hyperbolic:
        return "hyperbolic";
    case a0_family::rotations:
        return "rotations";
    case a0_family::conjugated:
        return "conjugated";
    }
    return "?";
}

std::optional<a0_family> parse_a0_family(std::string_view name) noexcept
{
    for (auto f : {a0_family::hyperbolic, a0_family::rotations, a0_family::conjugated})
        if (to_string(f) == name)
            return f;
    return std::nullopt;
}

cocycle_spec a0_of(a0_family family)
{
    switch (family) {
    case a0_family::hyperbolic:
        return specs::constant(mat2::diag(2.0, 0.5));
    case a0_family::rotations: {
        trig_poly h;
        h.constant = 0.3;
        h.terms.push_back({1, 0, 0.1, 0.0});
        return specs::rotation_valued(h);
    }
    case a0_family::conjugated: {
        trig_poly forward, backward;
        forward.lin_x = 1;
        backward.lin_x = -1;
        return specs::composite({specs::rotation_valued(forward), specs::constant(mat2::diag(2.0, 0.5)),
                                 specs::rotation_valued(backward)});
    }
    }
    fail(error_kind::invalid_argument, "unknown A0 family");
}

trivial_extension_config default_trivial_extension(a0_family family)
{
    trivial_extension_config cfg;
    cfg.a0 = a0_of(family);
    return cfg;
}

trivial_extension_result trivial_extension_exponent(const trivial_extension_config& cfg,
                                                    const lyapunov_options& opts)
{
    trivial_extension_result out;
    out.product = lyapunov_top(cfg.spec(), cfg.system(), opts);
    lyapunov_options factor_opts = opts;
    factor_opts.seed = derive_seed(opts.seed, 1);
    out.factor = lyapunov_top(cfg.a0, cfg.factor(), factor_opts);
    return out;
}

accessibility_report accessibility_probe(const trivial_extension_config& cfg, int trials, std::uint64_t seed)
{
    const auto sys = cfg.system();
    rng_engine rng(seed);
    accessibility_report rep;

    auto point = [](double t, double x, double y) {
        return base_point::product(base_point::circle(t), base_point::torus(x, y));
    };

    for (int i = 0; i < trials; ++i) {
        const double t = uniform01(rng);
        double t2 = uniform01(rng);
        if (t2 == t)
            t2 = wrap_unit(t + 0.5);
        const auto x = point(t, uniform01(rng), uniform01(rng));
        const auto y_cross = point(t2, uniform01(rng), uniform01(rng));
        const auto y_same = point(t, uniform01(rng), uniform01(rng));

        ++rep.cross_trials;
        try {
            (void)su_connect(sys, x, y_cross);
        } catch (const lab_error& e) {
            rep.cross_unsupported += e.kind() == error_kind::unsupported_system;
        }

        ++rep.same_trials;
        try {
            const su_path path = su_connect(sys, x, y_same);
            ++rep.same_connected;
            rep.same_valid += path_is_valid(sys, path);
            for (const auto& leg : path.legs)
                if (leg.start.left().as_circle().t != t || leg.end.left().as_circle().t != t)
                    rep.circle_preserved = false;
        } catch (const lab_error&) {
        }
    }

    const auto x = point(0.1, 0.3, 0.7);
    rep.equal_points_empty = su_connect(sys, x, x).empty();
    return rep;
}

} // namespace cocyclelab
