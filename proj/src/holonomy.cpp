#include "cocyclelab/holonomy.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cocyclelab {

fiber_bunching_report fiber_bunching(const cocycle_spec& spec, const base_system& sys, long grid_size,
                                     std::uint64_t seed)
{
    if (grid_size < 1)
        fail(error_kind::invalid_argument, "bunching grid must be positive");
    fiber_bunching_report rep;
    rep.rates = rates(sys);
    rep.alpha = spec.alpha();
    rep.grid = grid_size;
    rng_engine rng(seed);
    double worst_product = 0.0;
    for (long i = 0; i < grid_size; ++i) {
        const base_point x = sample_measure(sys, rng);
        const mat2 a = evaluate(spec, sys, x);
        const double n = operator_norm(a);
        const double ni = operator_norm(inverse(a));
        rep.sup_norm = std::max(rep.sup_norm, n);
        rep.sup_inverse_norm = std::max(rep.sup_inverse_norm, ni);
        worst_product = std::max(worst_product, n * ni);
    }
    const double nu = rep.rates.has_stable ? rep.rates.nu : 1.0;
    const double nu_hat = rep.rates.has_unstable ? rep.rates.nu_hat : 1.0;
    rep.rho_s = worst_product * std::pow(nu, rep.alpha);
    rep.rho_u = worst_product * std::pow(nu_hat, rep.alpha);
    rep.margin = 1.0 - std::max(rep.rho_s, rep.rho_u);
    return rep;
}

namespace {

// Contraction of leaves under the actual dynamics; declared rate overrides do
// not move points, so shadowing always uses the model geometry.
rate_data geometric_rates(const base_system& sys) { return rates(base_system(sys.value())); }

// Generator values carry a few ulps; M_x - M_y inherits them as an absolute
// error that the products around it amplify.
constexpr double eval_ulps = 4.0;

double leaf_rate(const rate_data& r, leaf_kind kind) { return kind == leaf_kind::s ? r.nu : r.nu_hat; }

} // namespace

holonomy_engine::holonomy_engine(cocycle_spec spec, base_system sys, holonomy_options opts)
    : spec_(std::move(spec)), sys_(std::move(sys)), opts_(opts)
{
    if (!(opts_.tol > 0.0))
        fail(error_kind::invalid_argument, "holonomy tolerance must be positive");
    report_ = fiber_bunching(spec_, sys_, opts_.grid, opts_.seed);
    if (spec_.holder_constant())
        holder_ = *spec_.holder_constant();
    else
        holder_ = opts_.safety * sampled_holder_ratio(spec_, sys_, opts_.grid, opts_.seed + 1);
    sl_ = determinant_one(spec_);
}

double holonomy_engine::contraction(leaf_kind kind) const noexcept
{
    const double r = leaf_rate(geometric_rates(sys_), kind);
    return report_.sup_norm * report_.sup_inverse_norm * std::pow(r, spec_.alpha());
}

double holonomy_engine::holder_bound_constant(leaf_kind kind) const noexcept
{
    const double rho = contraction(kind);
    if (rho >= 1.0)
        return INFINITY;
    // Per-step increment factor: ||A(y)^-1|| C_A for stable legs; for unstable
    // legs the factors are inverses evaluated one step back.
    double k = report_.sup_inverse_norm;
    if (kind == leaf_kind::u)
        k = report_.sup_norm * report_.sup_inverse_norm * report_.sup_inverse_norm *
            std::pow(leaf_rate(geometric_rates(sys_), kind), spec_.alpha());
    return k * holder_ / (1.0 - rho);
}

void holonomy_engine::require_bunched() const
{
    if (!report_.pass() || contraction(leaf_kind::s) >= 1.0 || contraction(leaf_kind::u) >= 1.0)
        fail(error_kind::not_fiber_bunched,
             "cocycle is not fiber-bunched (rho_s = " + std::to_string(report_.rho_s) +
                 ", rho_u = " + std::to_string(report_.rho_u) + ")");
}

holonomy holonomy_engine::along_leaf(const base_point& x, leaf_kind kind, double displacement) const
{
    holonomy out;
    out.kind = kind;
    out.from = x;
    if (displacement == 0.0) {
        out.to = x;
        return out;
    }
    require_bunched();
    out.to = leaf_point(sys_, x, kind, displacement);

    const double r = leaf_rate(geometric_rates(sys_), kind);
    const double tail_constant = holder_bound_constant(kind);
    const double alpha = spec_.alpha();
    const double d = std::abs(displacement);

    base_point xk = x;
    mat2 forward = mat2::identity();      // product along the orbit of x
    mat2 partner_inv = mat2::identity();  // inverse product along the partner orbit
    mat2 h = mat2::identity();
    double rn = 1.0;       // r^n
    double rounding = 0.0; // evaluation rounding amplified by ||Q^-1|| ||P||
    for (long n = 0;; ++n) {
        const double amplification = operator_norm(partner_inv) * operator_norm(forward);
        const double bound = amplification * tail_constant * std::pow(d * rn, alpha);
        if (n >= 1 && bound < opts_.tol) {
            out.truncation_n = n;
            out.error_bound = bound + rounding;
            break;
        }
        if (n >= opts_.max_iterations)
            fail(error_kind::no_convergence,
                 "holonomy did not reach tolerance within " + std::to_string(opts_.max_iterations) + " steps");

        mat2 mx, my;
        base_point next;
        if (kind == leaf_kind::s) {
            const base_point yk = leaf_point(sys_, xk, kind, displacement * rn);
            mx = evaluate(spec_, sys_, xk);
            my = evaluate(spec_, sys_, yk);
            next = step(sys_, xk, 1);
        } else {
            // Stable holonomy of (A^{-1} o f^{-1}, f^{-1}).
            next = step(sys_, xk, -1);
            const base_point zprev = leaf_point(sys_, next, kind, displacement * rn * r);
            mx = inverse(evaluate(spec_, sys_, next));
            my = inverse(evaluate(spec_, sys_, zprev));
        }
        const mat2 my_inv = inverse(my);
        rounding += amplification * operator_norm(my_inv) * (operator_norm(mx) + operator_norm(my)) * eval_ulps *
                    std::numeric_limits<double>::epsilon();
        // H_{n+1} = H_n + Q^{-1} (M_y^{-1} M_x - Id) P, written without cancellation.
        h = h + partner_inv * (my_inv * (mx - my)) * forward;
        if (sl_) {
            const double det = h.det();
            if (det > 0.0)
                h = (1.0 / std::sqrt(det)) * h;
        }
        forward = mx * forward;
        partner_inv = partner_inv * my_inv;
        xk = std::move(next);
        rn *= r;
    }
    out.matrix = h;
    return out;
}

holonomy holonomy_engine::stable(const base_point& x, const base_point& y) const
{
    const auto d = leaf_distance(sys_, x, y, leaf_kind::s);
    if (!d)
        fail(error_kind::not_on_leaf, "point " + y.to_string() + " is not on the stable leaf of " + x.to_string());
    holonomy h = along_leaf(x, leaf_kind::s, *d);
    h.to = y;
    return h;
}

holonomy holonomy_engine::unstable(const base_point& x, const base_point& z) const
{
    const auto d = leaf_distance(sys_, x, z, leaf_kind::u);
    if (!d)
        fail(error_kind::not_on_leaf,
             "point " + z.to_string() + " is not on the unstable leaf of " + x.to_string());
    holonomy h = along_leaf(x, leaf_kind::u, *d);
    h.to = z;
    return h;
}

holonomy holonomy_engine::along_path(const su_path& path) const
{
    holonomy out;
    if (path.empty())
        return out;
    out.from = path.legs.front().start;
    out.to = path.legs.back().end;
    out.kind = path.legs.back().kind;
    double err = 0.0;
    for (const su_leg& leg : path.legs) {
        const holonomy h = along_leaf(leg.start, leg.kind, leg.displacement);
        // ||H M - H' M'|| <= ||H|| e + ||M|| e_h + e e_h
        err = operator_norm(h.matrix) * err + h.error_bound * operator_norm(out.matrix) + h.error_bound * err;
        out.matrix = h.matrix * out.matrix;
        out.truncation_n = std::max(out.truncation_n, h.truncation_n);
    }
    out.error_bound = err;
    return out;
}

double holonomy_engine::equivariance_residual(const base_point& x, const base_point& y, long j) const
{
    if (j < 0)
        fail(error_kind::invalid_argument, "equivariance is checked for j >= 0");
    const auto d = leaf_distance(sys_, x, y, leaf_kind::s);
    if (!d)
        fail(error_kind::not_on_leaf, "point " + y.to_string() + " is not on the stable leaf of " + x.to_string());
    const mat2 h = along_leaf(x, leaf_kind::s, *d).matrix;
    const double r = leaf_rate(geometric_rates(sys_), leaf_kind::s);

    mat2 conj = h; // A^j(y) H A^j(x)^{-1}, built one conjugation at a time
    base_point xk = x;
    double rk = 1.0;
    for (long k = 0; k < j; ++k) {
        const base_point yk = leaf_point(sys_, xk, leaf_kind::s, *d * rk);
        conj = evaluate(spec_, sys_, yk) * conj * inverse(evaluate(spec_, sys_, xk));
        xk = step(sys_, xk, 1);
        rk *= r;
    }
    const mat2 hj = j == 0 ? h : along_leaf(xk, leaf_kind::s, *d * rk).matrix;
    return distance(hj, conj);
}

holonomy stable_holonomy(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                         const base_point& y, double tol)
{
    holonomy_options o;
    o.tol = tol;
    return holonomy_engine(spec, sys, o).stable(x, y);
}

holonomy unstable_holonomy(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                           const base_point& z, double tol)
{
    holonomy_options o;
    o.tol = tol;
    return holonomy_engine(spec, sys, o).unstable(x, z);
}

holonomy path_holonomy(const cocycle_spec& spec, const base_system& sys, const su_path& path, double tol)
{
    holonomy_options o;
    o.tol = tol;
    return holonomy_engine(spec, sys, o).along_path(path);
}

double equivariance_residual(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                             const base_point& y, long j, double tol)
{
    holonomy_options o;
    o.tol = tol;
    return holonomy_engine(spec, sys, o).equivariance_residual(x, y, j);
}

// ---------------------------------------------------------------------------
// trivialization

namespace {

// A random point in the su-class of w: products keep w's center coordinate.
base_point sample_in_fiber(const base_system& sys, const base_point& w, rng_engine& rng)
{
    base_point p = sample_measure(sys, rng);
    if (const auto* prod = std::get_if<product_system>(&sys.value())) {
        if (has_leaves(*prod->left))
            return base_point::product(p.left(), w.right());
        return base_point::product(w.left(), p.right());
    }
    return p;
}

su_path connect_or_unreachable(const base_system& sys, const base_point& a, const base_point& b, double max_leg)
{
    try {
        return su_connect(sys, a, b, max_leg);
    } catch (const lab_error& e) {
        if (e.kind() == error_kind::unsupported_system)
            fail(error_kind::path_unreachable, e.what());
        throw;
    }
}

} // namespace

su_path sample_loop(const base_system& sys, const base_point& w, rng_engine& rng, std::size_t waypoints,
                    double max_leg)
{
    su_path loop;
    base_point cur = w;
    for (std::size_t i = 0; i < waypoints; ++i) {
        base_point z = sample_in_fiber(sys, w, rng);
        loop.append(connect_or_unreachable(sys, cur, z, max_leg));
        cur = std::move(z);
    }
    loop.append(connect_or_unreachable(sys, cur, w, max_leg));
    return loop;
}

trivialization trivialize(const holonomy_engine& engine, const base_point& x, const trivialize_options& opts)
{
    const base_system& sys = engine.system();
    const cocycle_spec& spec = engine.spec();
    if (!has_leaves(sys))
        fail(error_kind::path_unreachable, "system '" + sys.name() + "' has no su-paths");
    rng_engine rng(opts.seed);

    trivialization out;
    // Each connection contributes at most two legs when legs fit in max_leg,
    // so K legs allow K/2 - 1 intermediate waypoints.
    const std::size_t waypoints = std::max<std::size_t>(1, opts.loop_legs / 2 - 1);
    for (int i = 0; i < opts.loops; ++i) {
        const base_point w = i == 0 ? x : sample_in_fiber(sys, sample_measure(sys, rng), rng);
        const su_path loop = sample_loop(sys, w, rng, waypoints, opts.max_leg);
        const holonomy h = engine.along_path(loop);
        const double residual = distance(h.matrix, mat2::identity());
        out.max_loop_residual = std::max(out.max_loop_residual, residual);
        ++out.loops_checked;
        if (residual > opts.loop_tolerance + h.error_bound) {
            const auto cls = classify(h.matrix);
            fail(error_kind::loop_obstruction,
                 "loop at " + w.to_string() + " with " + std::to_string(loop.legs.size()) +
                     " legs has holonomy off the identity by " + std::to_string(residual) + " (" +
                     std::string(to_string(cls.kind)) + ")");
        }
    }

    auto conjugated = [&](const base_point& y, mat2& h_xy, double& err, double& norm_bound) {
        const holonomy to_y = engine.along_path(connect_or_unreachable(sys, x, y, opts.max_leg));
        const holonomy back = engine.along_path(connect_or_unreachable(sys, step(sys, y, 1), x, opts.max_leg));
        const mat2 a = evaluate(spec, sys, y);
        h_xy = to_y.matrix;
        const double na = operator_norm(a);
        err = back.error_bound * na * operator_norm(to_y.matrix) + operator_norm(back.matrix) * na * to_y.error_bound +
              back.error_bound * na * to_y.error_bound;
        norm_bound = std::max(operator_norm(to_y.matrix), operator_norm(back.matrix));
        return back.matrix * a * to_y.matrix;
    };

    mat2 h_xx;
    double err_x = 0.0, norm_x = 1.0;
    out.constant = conjugated(x, h_xx, err_x, norm_x);
    out.holonomy_norm_bound = norm_x;
    double worst_err = err_x;
    out.table.reserve(static_cast<std::size_t>(std::max<long>(0, opts.samples)));
    for (long i = 0; i < opts.samples; ++i) {
        const base_point y = sample_in_fiber(sys, x, rng);
        mat2 h_xy;
        double err = 0.0, norm = 1.0;
        const mat2 a_hat = conjugated(y, h_xy, err, norm);
        out.max_deviation = std::max(out.max_deviation, distance(a_hat, out.constant));
        out.holonomy_norm_bound = std::max(out.holonomy_norm_bound, norm);
        worst_err = std::max(worst_err, err);
        out.table.emplace_back(y, h_xy);
    }
    out.combined_tolerance = opts.certify_tolerance + 2.0 * worst_err;
    out.certified = out.max_deviation <= out.combined_tolerance;
    return out;
}

} // namespace cocyclelab
