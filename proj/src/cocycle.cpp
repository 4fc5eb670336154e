#include "cocyclelab/cocycle.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace cocyclelab {

// ---------------------------------------------------------------------------
// trig_poly

double trig_poly::operator()(double x, double y) const noexcept
{
    double v = constant + lin_x * x + lin_y * y;
    for (const auto& t : terms) {
        const double phase = 2.0 * pi * (t.kx * x + t.ky * y);
        if (t.cos_coef != 0.0)
            v += t.cos_coef * std::cos(phase);
        if (t.sin_coef != 0.0)
            v += t.sin_coef * std::sin(phase);
    }
    return v;
}

double trig_poly::lipschitz_bound() const noexcept
{
    double l = std::hypot(static_cast<double>(lin_x), static_cast<double>(lin_y));
    for (const auto& t : terms)
        l += 2.0 * pi * std::hypot(double(t.kx), double(t.ky)) * (std::abs(t.cos_coef) + std::abs(t.sin_coef));
    return l;
}

std::string trig_poly::to_string() const
{
    std::ostringstream os;
    os.precision(17);
    os << "const:" << constant;
    if (lin_x != 0 || lin_y != 0)
        os << ";lin:" << lin_x << ',' << lin_y;
    for (const auto& t : terms) {
        if (t.cos_coef != 0.0)
            os << ";cos:" << t.kx << ',' << t.ky << ':' << t.cos_coef;
        if (t.sin_coef != 0.0)
            os << ";sin:" << t.kx << ',' << t.ky << ':' << t.sin_coef;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// spec construction

cocycle_spec cocycle_spec::with_alpha(double alpha) const
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        fail(error_kind::invalid_argument, "Hoelder exponent must lie in (0, 1]");
    cocycle_spec out = *this;
    out.alpha_ = alpha;
    return out;
}

cocycle_spec cocycle_spec::with_holder_constant(double c) const
{
    if (!(c >= 0.0))
        fail(error_kind::invalid_argument, "Hoelder constant must be nonnegative");
    cocycle_spec out = *this;
    out.holder_constant_ = c;
    return out;
}

namespace specs {

namespace {
template <class G>
cocycle_spec wrap(G g)
{
    return cocycle_spec(std::make_shared<const generator_node>(generator_node{std::move(g)}));
}
} // namespace

cocycle_spec constant(const mat2& m)
{
    if (!m.finite() || m.det() == 0.0)
        fail(error_kind::invalid_argument, "constant cocycle value must be finite and invertible");
    return wrap(constant_gen{m});
}
cocycle_spec rotation_valued(trig_poly h) { return wrap(rotation_gen{std::move(h)}); }
cocycle_spec diagonal_valued(trig_poly g) { return wrap(diagonal_gen{std::move(g)}); }
cocycle_spec entrywise(trig_poly a, trig_poly b, trig_poly c, trig_poly d)
{
    return wrap(entrywise_gen{std::move(a), std::move(b), std::move(c), std::move(d)});
}
cocycle_spec coboundary(cocycle_spec conjugator, cocycle_spec inner)
{
    return wrap(coboundary_gen{std::move(conjugator), std::move(inner)});
}
cocycle_spec lift(factor_side side, cocycle_spec inner) { return wrap(lift_gen{side, std::move(inner)}); }
cocycle_spec selector(std::vector<cocycle_spec> per_symbol)
{
    if (per_symbol.empty())
        fail(error_kind::invalid_argument, "selector needs at least one generator");
    return wrap(selector_gen{std::move(per_symbol)});
}
cocycle_spec composite(std::vector<cocycle_spec> factors)
{
    if (factors.empty())
        fail(error_kind::invalid_argument, "composite needs at least one factor");
    return wrap(composite_gen{std::move(factors)});
}
cocycle_spec sl_part(cocycle_spec inner) { return wrap(sl_part_gen{std::move(inner)}); }
cocycle_spec psl(cocycle_spec inner) { return wrap(psl_gen{std::move(inner)}); }

} // namespace specs

std::string cocycle_spec::describe() const
{
    struct visitor {
        std::string operator()(const constant_gen& g) const
        {
            std::ostringstream os;
            os.precision(17);
            os << "constant[" << g.value.a << ',' << g.value.b << ',' << g.value.c << ',' << g.value.d << ']';
            return os.str();
        }
        std::string operator()(const rotation_gen& g) const { return "rotation{" + g.h.to_string() + "}"; }
        std::string operator()(const diagonal_gen& g) const { return "diagonal{" + g.g.to_string() + "}"; }
        std::string operator()(const entrywise_gen& g) const
        {
            return "entrywise{" + g.a.to_string() + "|" + g.b.to_string() + "|" + g.c.to_string() + "|" +
                   g.d.to_string() + "}";
        }
        std::string operator()(const coboundary_gen& g) const
        {
            return "coboundary(" + g.conjugator.describe() + "," + g.inner.describe() + ")";
        }
        std::string operator()(const lift_gen& g) const
        {
            return std::string("lift[") + (g.side == factor_side::left ? "left" : "right") + "](" +
                   g.inner.describe() + ")";
        }
        std::string operator()(const selector_gen& g) const
        {
            std::string s = "selector(";
            for (std::size_t i = 0; i < g.per_symbol.size(); ++i)
                s += (i ? "," : "") + g.per_symbol[i].describe();
            return s + ")";
        }
        std::string operator()(const composite_gen& g) const
        {
            std::string s = "composite(";
            for (std::size_t i = 0; i < g.factors.size(); ++i)
                s += (i ? "," : "") + g.factors[i].describe();
            return s + ")";
        }
        std::string operator()(const sl_part_gen& g) const { return "sl(" + g.inner.describe() + ")"; }
        std::string operator()(const psl_gen& g) const { return "psl(" + g.inner.describe() + ")"; }
    };
    return std::visit(visitor{}, node_->value);
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

struct plane_coords {
    double x, y;
};

plane_coords coords_of(const base_point& p)
{
    if (const auto* c = std::get_if<circle_point>(&p.value()))
        return {c->t, 0.0};
    if (const auto* t = std::get_if<torus_point>(&p.value()))
        return {t->x, t->y};
    fail(error_kind::invalid_argument,
         "coordinate-valued generators need a circle or torus point; use a lift or selector on composite bases");
}

// Sub-system and sub-point for one side of a product-like base.
std::pair<base_system, const base_point*> factor_of(const base_system& sys, const base_point& x, factor_side side)
{
    if (const auto* p = std::get_if<product_system>(&sys.value()))
        return side == factor_side::left ? std::pair{*p->left, &x.left()} : std::pair{*p->right, &x.right()};
    if (const auto* r = std::get_if<random_product_system>(&sys.value())) {
        if (side == factor_side::left)
            return {base_system::shift(r->probs), &x.left()};
        const int sym = x.left().as_shift().symbol(0);
        return {base_system::rotation(r->fiber_shift.at(static_cast<std::size_t>(sym))), &x.right()};
    }
    fail(error_kind::invalid_argument, "lift requires a product base, got '" + sys.name() + "'");
}

} // namespace

mat2 evaluate(const cocycle_spec& spec, const base_system& sys, const base_point& x)
{
    struct visitor {
        const base_system& sys;
        const base_point& x;

        mat2 operator()(const constant_gen& g) const { return g.value; }
        mat2 operator()(const rotation_gen& g) const
        {
            const auto [u, v] = coords_of(x);
            return mat2::rotation(2.0 * pi * g.h(u, v));
        }
        mat2 operator()(const diagonal_gen& g) const
        {
            const auto [u, v] = coords_of(x);
            const double e = std::exp(g.g(u, v));
            return mat2::diag(e, 1.0 / e);
        }
        mat2 operator()(const entrywise_gen& g) const
        {
            const auto [u, v] = coords_of(x);
            return {g.a(u, v), g.b(u, v), g.c(u, v), g.d(u, v)};
        }
        mat2 operator()(const coboundary_gen& g) const
        {
            const mat2 c_next = evaluate(g.conjugator, sys, step(sys, x, 1));
            const mat2 c_here = evaluate(g.conjugator, sys, x);
            return c_next * evaluate(g.inner, sys, x) * inverse(c_here);
        }
        mat2 operator()(const lift_gen& g) const
        {
            const auto [sub, point] = factor_of(sys, x, g.side);
            return evaluate(g.inner, sub, *point);
        }
        mat2 operator()(const selector_gen& g) const
        {
            if (!std::holds_alternative<random_product_system>(sys.value()))
                fail(error_kind::invalid_argument, "selector generators run over the random-product base only");
            const int sym = x.left().as_shift().symbol(0);
            if (sym < 0 || static_cast<std::size_t>(sym) >= g.per_symbol.size())
                fail(error_kind::invalid_argument, "symbol " + std::to_string(sym) + " has no generator");
            const auto [sub, point] = factor_of(sys, x, factor_side::right);
            return evaluate(g.per_symbol[static_cast<std::size_t>(sym)], sub, *point);
        }
        mat2 operator()(const composite_gen& g) const
        {
            mat2 m = mat2::identity();
            for (const auto& f : g.factors)
                m = m * evaluate(f, sys, x);
            return m;
        }
        mat2 operator()(const sl_part_gen& g) const { return gl_to_sl(evaluate(g.inner, sys, x)).sl; }
        mat2 operator()(const psl_gen& g) const { return psl_normalize(evaluate(g.inner, sys, x)).rep; }
    };
    return std::visit(visitor{sys, x}, spec.node().value);
}

bool determinant_one(const cocycle_spec& spec)
{
    struct visitor {
        bool operator()(const constant_gen& g) const { return std::abs(g.value.det() - 1.0) <= 1e-12; }
        bool operator()(const rotation_gen&) const { return true; }
        bool operator()(const diagonal_gen&) const { return true; }
        bool operator()(const entrywise_gen&) const { return false; }
        bool operator()(const coboundary_gen& g) const { return determinant_one(g.inner); }
        bool operator()(const lift_gen& g) const { return determinant_one(g.inner); }
        bool operator()(const selector_gen& g) const
        {
            return std::all_of(g.per_symbol.begin(), g.per_symbol.end(),
                               [](const cocycle_spec& s) { return determinant_one(s); });
        }
        bool operator()(const composite_gen& g) const
        {
            return std::all_of(g.factors.begin(), g.factors.end(),
                               [](const cocycle_spec& s) { return determinant_one(s); });
        }
        bool operator()(const sl_part_gen&) const { return true; }
        bool operator()(const psl_gen& g) const { return determinant_one(g.inner); }
    };
    return std::visit(visitor{}, spec.node().value);
}

// ---------------------------------------------------------------------------
// products

double renormalize(mat2& m) noexcept
{
    const double big = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
    if (big <= renorm_high && big >= renorm_low)
        return 0.0;
    const double n = operator_norm(m);
    if (!(n > 0.0) || !std::isfinite(n))
        return 0.0;
    m = (1.0 / n) * m;
    return std::log(n);
}

scaled_mat2 cocycle_product(const cocycle_spec& spec, const base_system& sys, const base_point& x, long n)
{
    scaled_mat2 out;
    long double scale = 0.0L;
    if (n >= 0) {
        base_point p = x;
        for (long k = 0; k < n; ++k) {
            out.matrix = evaluate(spec, sys, p) * out.matrix;
            scale += renormalize(out.matrix);
            if (k + 1 < n)
                p = step(sys, p, 1);
        }
    } else {
        // (A^m(y))^{-1} = A(y)^{-1} A(f y)^{-1} ... A(f^{m-1} y)^{-1}, y = f^n x.
        const long m = -n;
        base_point p = step(sys, x, n);
        for (long k = 0; k < m; ++k) {
            out.matrix = out.matrix * inverse(evaluate(spec, sys, p));
            scale += renormalize(out.matrix);
            if (k + 1 < m)
                p = step(sys, p, 1);
        }
    }
    out.log_scale = static_cast<double>(scale);
    return out;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents

namespace {

struct orbit_result {
    double top;
    double bottom;
    double log_det;
};

orbit_result run_orbit(const cocycle_spec& spec, const base_system& sys, long n, std::uint64_t orbit_seed)
{
    base_point p = sample_measure(sys, orbit_seed);
    mat2 forward = mat2::identity();  // A^n(x)
    mat2 backward = mat2::identity(); // (A^n(x))^{-1}
    long double forward_scale = 0.0L;
    long double backward_scale = 0.0L;
    long double log_det = 0.0L;
    for (long k = 0; k < n; ++k) {
        const mat2 a = evaluate(spec, sys, p);
        const double det = a.det();
        forward = a * forward;
        backward = backward * ((1.0 / det) * adjugate(a));
        log_det += std::log(std::abs(det));
        forward_scale += renormalize(forward);
        backward_scale += renormalize(backward);
        if (k + 1 < n)
            p = step(sys, p, 1);
    }
    const long double top = forward_scale + std::log(operator_norm(forward));
    const long double inv = backward_scale + std::log(operator_norm(backward));
    const auto nn = static_cast<long double>(n);
    return {static_cast<double>(top / nn), static_cast<double>(-inv / nn), static_cast<double>(log_det / nn)};
}

std::vector<orbit_result> run_orbits(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts)
{
    if (opts.iterations < 1)
        fail(error_kind::invalid_argument, "iterations must be at least 1");
    if (opts.orbits < 1)
        fail(error_kind::invalid_argument, "orbits must be at least 1");
    std::vector<orbit_result> results(static_cast<std::size_t>(opts.orbits));
    const int workers = std::clamp(opts.workers, 1, opts.orbits);
    auto work = [&](int worker) {
        for (int o = worker; o < opts.orbits; o += workers)
            results[static_cast<std::size_t>(o)] =
                run_orbit(spec, sys, opts.iterations, derive_seed(opts.seed, static_cast<std::uint64_t>(o)));
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
    }
    return results;
}

} // namespace

lyapunov_estimate summarize(const std::vector<double>& per_orbit, long iterations)
{
    lyapunov_estimate est;
    est.iterations = iterations;
    est.orbits = static_cast<int>(per_orbit.size());
    if (per_orbit.empty())
        return est;
    // Summation in orbit order keeps results bitwise reproducible.
    long double sum = 0.0L;
    for (double v : per_orbit)
        sum += v;
    const long double mean = sum / static_cast<long double>(per_orbit.size());
    est.value = static_cast<double>(mean);
    if (per_orbit.size() > 1) {
        long double ss = 0.0L;
        for (double v : per_orbit)
            ss += (v - mean) * (v - mean);
        const long double var = ss / static_cast<long double>(per_orbit.size() - 1);
        est.std_error = static_cast<double>(std::sqrt(var / static_cast<long double>(per_orbit.size())));
    }
    return est;
}

lyapunov_pair lyapunov_exponents(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts)
{
    const auto results = run_orbits(spec, sys, opts);
    std::vector<double> top, bottom, det;
    for (const auto& r : results) {
        top.push_back(r.top);
        bottom.push_back(r.bottom);
        det.push_back(r.log_det);
    }
    return {summarize(top, opts.iterations), summarize(bottom, opts.iterations), summarize(det, opts.iterations)};
}

lyapunov_estimate lyapunov_top(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts)
{
    return lyapunov_exponents(spec, sys, opts).top;
}

lyapunov_estimate lyapunov_bottom(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts)
{
    return lyapunov_exponents(spec, sys, opts).bottom;
}

// ---------------------------------------------------------------------------
// Oseledets directions

namespace {

vec2 normalized(vec2 v) noexcept
{
    const double n = std::hypot(v.x, v.y);
    return {v.x / n, v.y / n};
}

} // namespace

oseledets_pair oseledets_directions(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                                    const oseledets_options& opts)
{
    if (opts.depth < 1)
        fail(error_kind::invalid_argument, "Oseledets depth must be at least 1");
    const auto n = static_cast<std::size_t>(opts.depth);
    const proj_point seeds[2] = {proj_point(opts.seed_theta), proj_point(opts.seed_theta + 0.5 * pi)};

    // Past orbit f^{-1}x, ..., f^{-n}x and future orbit x, ..., f^{n-1}x.
    std::vector<base_point> past;
    std::vector<base_point> future;
    past.reserve(n);
    future.reserve(n);
    base_point p = x;
    for (std::size_t k = 0; k < n; ++k) {
        p = step(sys, p, -1);
        past.push_back(p);
    }
    p = x;
    for (std::size_t k = 0; k < n; ++k) {
        future.push_back(p);
        p = step(sys, p, 1);
    }

    proj_point eu[2], es[2];
    for (int s = 0; s < 2; ++s) {
        vec2 v = seeds[s].unit();
        for (std::size_t k = n; k-- > 0;)
            v = normalized(evaluate(spec, sys, past[k]) * v);
        eu[s] = proj_point::from_vector(v);

        vec2 w = seeds[s].unit();
        for (std::size_t k = n; k-- > 0;)
            w = normalized(adjugate(evaluate(spec, sys, future[k])) * w);
        es[s] = proj_point::from_vector(w);
    }

    const double thr = opts.degeneracy_threshold;
    if (proj_distance(eu[0], eu[1]) > thr || proj_distance(es[0], es[1]) > thr)
        fail(error_kind::degenerate, "generic directions do not converge; no dominated splitting at this depth");
    if (proj_distance(eu[0], es[0]) < thr)
        fail(error_kind::degenerate, "unstable and stable directions coincide; exponents look equal");
    return {eu[0], es[0]};
}

// ---------------------------------------------------------------------------
// projective skew product

fiber_state skew_step(const cocycle_spec& spec, const base_system& sys, fiber_state state, long n)
{
    if (n < 0)
        fail(error_kind::invalid_argument, "skew_step takes n >= 0");
    vec2 v = state.v.unit();
    for (long k = 0; k < n; ++k) {
        v = normalized(evaluate(spec, sys, state.x) * v);
        state.x = step(sys, state.x, 1);
    }
    state.v = proj_point::from_vector(v);
    return state;
}

double phi_integral(const cocycle_spec& spec, const base_system& sys, const fibered_sampler& m, long samples,
                    std::uint64_t seed)
{
    if (samples < 1)
        fail(error_kind::invalid_argument, "samples must be positive");
    rng_engine rng(seed);
    long double sum = 0.0L;
    for (long i = 0; i < samples; ++i) {
        const fiber_state s = m(rng);
        const vec2 u = s.v.unit();
        const vec2 w = evaluate(spec, sys, s.x) * u;
        sum += std::log(std::hypot(w.x, w.y));
    }
    return static_cast<double>(sum / samples);
}

double phi_integral(const cocycle_spec& spec, const base_system& sys,
                    const std::vector<std::pair<proj_point, double>>& fiber_atoms, long samples, std::uint64_t seed)
{
    if (samples < 1)
        fail(error_kind::invalid_argument, "samples must be positive");
    rng_engine rng(seed);
    long double sum = 0.0L;
    for (long i = 0; i < samples; ++i) {
        const base_point x = sample_measure(sys, rng);
        const mat2 a = evaluate(spec, sys, x);
        for (const auto& [v, mass] : fiber_atoms) {
            const vec2 w = a * v.unit();
            sum += mass * std::log(std::hypot(w.x, w.y));
        }
    }
    return static_cast<double>(sum / samples);
}

// ---------------------------------------------------------------------------
// Hoelder ratio

namespace {

base_point perturb(const base_system& sys, const base_point& x, double delta, double direction)
{
    struct visitor {
        const base_point& x;
        double delta;
        double direction;
        base_point operator()(const rotation_system&) const
        {
            return base_point::circle(x.as_circle().t + (std::cos(direction) >= 0 ? delta : -delta));
        }
        base_point operator()(const cat_map_system&) const
        {
            const auto& p = x.as_torus();
            return base_point::torus(p.x + delta * std::cos(direction), p.y + delta * std::sin(direction));
        }
        // Sequences are kept: the generators only read finitely many symbols,
        // so the ratio is governed by the continuous coordinates.
        base_point operator()(const shift_system&) const { return x; }
        base_point operator()(const random_product_system&) const
        {
            return base_point::product(x.left(), base_point::circle(x.right().as_circle().t + delta));
        }
        base_point operator()(const product_system& p) const
        {
            return base_point::product(perturb(*p.left, x.left(), delta, direction),
                                       perturb(*p.right, x.right(), delta, direction + 1.0));
        }
    };
    return std::visit(visitor{x, delta, direction}, sys.value());
}

} // namespace

double sampled_holder_ratio(const cocycle_spec& spec, const base_system& sys, long samples, std::uint64_t seed)
{
    rng_engine rng(seed);
    double worst = 0.0;
    for (long i = 0; i < samples; ++i) {
        const base_point x = sample_measure(sys, rng);
        const mat2 ax = evaluate(spec, sys, x);
        const double direction = 2.0 * pi * uniform01(rng);
        for (double delta : {1e-1, 1e-2, 1e-3, 1e-5}) {
            const base_point y = perturb(sys, x, delta, direction);
            const double d = point_distance(sys, x, y);
            if (d <= 0.0)
                continue;
            worst = std::max(worst, distance(ax, evaluate(spec, sys, y)) / std::pow(d, spec.alpha()));
        }
    }
    return worst;
}

} // namespace cocyclelab
