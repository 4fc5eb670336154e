#include "cocyclelab/base_dynamics.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <functional>
#include <sstream>
#include <tuple>

namespace cocyclelab {

// ---------------------------------------------------------------------------
// symbol_source

std::shared_ptr<const symbol_source> symbol_source::bernoulli(std::uint64_t seed, std::vector<double> probs)
{
    if (probs.empty())
        fail(error_kind::invalid_argument, "probability vector is empty");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0))
            fail(error_kind::invalid_argument, "probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(error_kind::invalid_argument, "probabilities must sum to one");
    auto src = std::shared_ptr<symbol_source>(new symbol_source());
    src->seed_ = seed;
    src->cumulative_.resize(probs.size());
    std::partial_sum(probs.begin(), probs.end(), src->cumulative_.begin());
    src->cumulative_.back() = 1.0;
    return src;
}

std::shared_ptr<const symbol_source> symbol_source::periodic(std::vector<int> pattern)
{
    if (pattern.empty())
        fail(error_kind::invalid_argument, "periodic pattern is empty");
    auto src = std::shared_ptr<symbol_source>(new symbol_source());
    src->pattern_ = std::move(pattern);
    return src;
}

int symbol_source::at(std::int64_t index) const noexcept
{
    if (!cumulative_.empty()) {
        const double u = unit_interval(derive_seed(seed_, static_cast<std::uint64_t>(index)));
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                         static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    }
    const auto len = static_cast<std::int64_t>(pattern_.size());
    std::int64_t r = index % len;
    if (r < 0)
        r += len;
    return pattern_[static_cast<std::size_t>(r)];
}

int symbol_source::alphabet_size() const noexcept
{
    if (!cumulative_.empty())
        return static_cast<int>(cumulative_.size());
    return *std::max_element(pattern_.begin(), pattern_.end()) + 1;
}

std::vector<int> shift_point::window(std::int64_t lo, std::int64_t hi) const
{
    std::vector<int> out;
    if (hi > lo)
        out.reserve(static_cast<std::size_t>(hi - lo));
    for (std::int64_t i = lo; i < hi; ++i)
        out.push_back(symbol(i));
    return out;
}

// ---------------------------------------------------------------------------
// base_point

double wrap_unit(double v) noexcept
{
    double r = v - std::floor(v);
    if (r >= 1.0)
        r = 0.0;
    return r;
}

base_point base_point::circle(double t) { return base_point(circle_point{wrap_unit(t)}); }

namespace {

std::uint64_t to_fixed(double v) noexcept
{
    // scaling by 2^64 is exact; the largest double below 2^64 still fits
    const double scaled = std::ldexp(wrap_unit(v), 64);
    return scaled >= 0x1.0p64 ? 0 : static_cast<std::uint64_t>(std::nearbyint(scaled));
}

double from_fixed_coord(std::uint64_t f) noexcept
{
    const double v = std::ldexp(static_cast<double>(f), -64);
    return v < 1.0 ? v : std::nextafter(1.0, 0.0);
}

} // namespace

torus_point torus_point::from_fixed(std::uint64_t fx, std::uint64_t fy) noexcept
{
    return {from_fixed_coord(fx), from_fixed_coord(fy), fx, fy};
}

torus_point torus_point::from_real(double x, double y) noexcept { return from_fixed(to_fixed(x), to_fixed(y)); }

base_point base_point::torus(double x, double y) { return base_point(torus_point::from_real(x, y)); }

base_point base_point::shift(std::shared_ptr<const symbol_source> source, std::int64_t offset)
{
    return base_point(shift_point{std::move(source), offset});
}

base_point base_point::product(base_point left, base_point right)
{
    return base_point(product_point{std::make_shared<const base_point>(std::move(left)),
                                    std::make_shared<const base_point>(std::move(right))});
}

namespace {

template <class T>
const T& expect(const base_point::value_type& v, const char* what)
{
    if (const auto* p = std::get_if<T>(&v))
        return *p;
    fail(error_kind::invalid_argument, std::string("base point is not a ") + what);
}

} // namespace

const circle_point& base_point::as_circle() const { return expect<circle_point>(value_, "circle point"); }
const torus_point& base_point::as_torus() const { return expect<torus_point>(value_, "torus point"); }
const shift_point& base_point::as_shift() const { return expect<shift_point>(value_, "shift point"); }
const base_point& base_point::left() const { return *expect<product_point>(value_, "product point").left; }
const base_point& base_point::right() const { return *expect<product_point>(value_, "product point").right; }

std::vector<double> base_point::coordinates() const
{
    struct visitor {
        std::vector<double>& out;
        void operator()(const circle_point& p) const { out.push_back(p.t); }
        void operator()(const torus_point& p) const
        {
            out.push_back(p.x);
            out.push_back(p.y);
        }
        void operator()(const shift_point& p) const { out.push_back(static_cast<double>(p.offset)); }
        void operator()(const product_point& p) const
        {
            std::visit(*this, p.left->value());
            std::visit(*this, p.right->value());
        }
    };
    std::vector<double> out;
    std::visit(visitor{out}, value_);
    return out;
}

std::string base_point::to_string() const
{
    std::ostringstream os;
    os.precision(17);
    const auto c = coordinates();
    os << '(';
    for (std::size_t i = 0; i < c.size(); ++i)
        os << (i ? ", " : "") << c[i];
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------------------
// base_system

base_system base_system::rotation(double omega) { return base_system(rotation_system{omega}); }

base_system base_system::cat_map(int power)
{
    if (power < 1)
        fail(error_kind::invalid_argument, "cat map power must be at least 1");
    return base_system(cat_map_system{power});
}

namespace {

void check_probs(const std::vector<double>& probs)
{
    if (probs.size() < 2)
        fail(error_kind::invalid_argument, "a shift needs at least two symbols");
    double total = 0.0;
    for (double p : probs) {
        // zero is allowed: p0 = 1 collapses a random product onto its first symbol
        if (!(p >= 0.0))
            fail(error_kind::invalid_argument, "shift probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(error_kind::invalid_argument, "shift probabilities must sum to one");
}

} // namespace

base_system base_system::shift(std::vector<double> probs)
{
    check_probs(probs);
    return base_system(shift_system{std::move(probs)});
}

base_system base_system::random_product(std::vector<double> probs, std::vector<double> fiber_shift)
{
    check_probs(probs);
    if (fiber_shift.size() != probs.size())
        fail(error_kind::invalid_argument, "one fiber rotation per symbol is required");
    return base_system(random_product_system{std::move(probs), std::move(fiber_shift)});
}

base_system base_system::product(base_system left, base_system right)
{
    return base_system(product_system{std::make_shared<const base_system>(std::move(left)),
                                      std::make_shared<const base_system>(std::move(right))});
}

base_system base_system::with_rates(const rate_data& r) const
{
    base_system out = *this;
    out.rates_ = r;
    return out;
}

std::string base_system::name() const
{
    struct visitor {
        std::string operator()(const rotation_system&) const { return "rotation"; }
        std::string operator()(const cat_map_system&) const { return "catmap"; }
        std::string operator()(const shift_system&) const { return "shift"; }
        std::string operator()(const random_product_system&) const { return "random-product"; }
        std::string operator()(const product_system& p) const
        {
            return "product(" + p.left->name() + "," + p.right->name() + ")";
        }
    };
    return std::visit(visitor{}, value_);
}

cat_eigenbasis cat_basis() noexcept
{
    // Expanding direction (1, g), contracting (-g, 1) with g = golden mean.
    const double norm = std::sqrt(1.0 + golden_mean * golden_mean);
    return {1.0 / norm, golden_mean / norm, -golden_mean / norm, 1.0 / norm};
}

// ---------------------------------------------------------------------------
// dynamics

namespace {

// Unsigned wraparound is reduction mod 2^64, i.e. mod Z^2 in fixed point.
torus_point cat_forward(const torus_point& p, int power)
{
    std::uint64_t x = p.fx, y = p.fy;
    for (int k = 0; k < power; ++k) {
        const std::uint64_t nx = 2 * x + y;
        y = x + y;
        x = nx;
    }
    return torus_point::from_fixed(x, y);
}

torus_point cat_backward(const torus_point& p, int power)
{
    std::uint64_t x = p.fx, y = p.fy;
    for (int k = 0; k < power; ++k) {
        const std::uint64_t nx = x - y;
        y = 2 * y - x;
        x = nx;
    }
    return torus_point::from_fixed(x, y);
}

base_point step_once(const base_system& sys, const base_point& x, bool forward)
{
    struct visitor {
        const base_point& x;
        bool forward;

        base_point operator()(const rotation_system& r) const
        {
            return base_point::circle(x.as_circle().t + (forward ? r.omega : -r.omega));
        }
        base_point operator()(const cat_map_system& c) const
        {
            const torus_point p = x.as_torus();
            return base_point(forward ? cat_forward(p, c.power) : cat_backward(p, c.power));
        }
        base_point operator()(const shift_system&) const
        {
            const shift_point& s = x.as_shift();
            return base_point::shift(s.source, s.offset + (forward ? 1 : -1));
        }
        base_point operator()(const random_product_system& r) const
        {
            const shift_point& s = x.left().as_shift();
            const double t = x.right().as_circle().t;
            if (forward) {
                const int sym = s.symbol(0);
                return base_point::product(base_point::shift(s.source, s.offset + 1),
                                           base_point::circle(t + r.fiber_shift.at(static_cast<std::size_t>(sym))));
            }
            const int sym = s.symbol(-1);
            return base_point::product(base_point::shift(s.source, s.offset - 1),
                                       base_point::circle(t - r.fiber_shift.at(static_cast<std::size_t>(sym))));
        }
        base_point operator()(const product_system& p) const
        {
            return base_point::product(step_once(*p.left, x.left(), forward),
                                       step_once(*p.right, x.right(), forward));
        }
    };
    return std::visit(visitor{x, forward}, sys.value());
}

} // namespace

base_point step(const base_system& sys, const base_point& x, long n)
{
    if (const auto* r = std::get_if<rotation_system>(&sys.value()))
        return base_point::circle(x.as_circle().t + static_cast<double>(n) * r->omega);
    base_point p = x;
    const bool forward = n >= 0;
    const long count = forward ? n : -n;
    for (long k = 0; k < count; ++k)
        p = step_once(sys, p, forward);
    return p;
}

base_point sample_measure(const base_system& sys, rng_engine& rng)
{
    struct visitor {
        rng_engine& rng;
        base_point operator()(const rotation_system&) const { return base_point::circle(uniform01(rng)); }
        base_point operator()(const cat_map_system&) const
        {
            const double x = uniform01(rng);
            const double y = uniform01(rng);
            return base_point::torus(x, y);
        }
        base_point operator()(const shift_system& s) const
        {
            return base_point::shift(symbol_source::bernoulli(rng(), s.probs));
        }
        base_point operator()(const random_product_system& r) const
        {
            auto seq = base_point::shift(symbol_source::bernoulli(rng(), r.probs));
            return base_point::product(std::move(seq), base_point::circle(uniform01(rng)));
        }
        base_point operator()(const product_system& p) const
        {
            auto l = sample_measure(*p.left, rng);
            auto r = sample_measure(*p.right, rng);
            return base_point::product(std::move(l), std::move(r));
        }
    };
    return std::visit(visitor{rng}, sys.value());
}

base_point sample_measure(const base_system& sys, std::uint64_t seed)
{
    rng_engine rng(seed);
    return sample_measure(sys, rng);
}

rate_data rates(const base_system& sys)
{
    if (sys.rate_override())
        return *sys.rate_override();
    struct visitor {
        rate_data operator()(const rotation_system&) const
        {
            rate_data r;
            r.has_center = true;
            return r;
        }
        rate_data operator()(const cat_map_system& c) const
        {
            rate_data r;
            r.nu = r.nu_hat = std::pow(cat_lambda, -c.power);
            r.has_stable = r.has_unstable = true;
            return r;
        }
        rate_data operator()(const shift_system&) const
        {
            rate_data r;
            r.nu = r.nu_hat = 0.5;
            r.has_stable = r.has_unstable = true;
            return r;
        }
        rate_data operator()(const random_product_system&) const
        {
            rate_data r;
            r.nu = r.nu_hat = 0.5;
            r.has_stable = r.has_unstable = r.has_center = true;
            return r;
        }
        rate_data operator()(const product_system& p) const
        {
            const rate_data a = rates(*p.left);
            const rate_data b = rates(*p.right);
            rate_data r;
            auto merge_max = [](bool ha, double va, bool hb, double vb) {
                if (ha && hb)
                    return std::max(va, vb);
                return ha ? va : (hb ? vb : 1.0);
            };
            auto merge_min = [](bool ha, double va, bool hb, double vb) {
                if (ha && hb)
                    return std::min(va, vb);
                return ha ? va : (hb ? vb : 1.0);
            };
            r.has_stable = a.has_stable || b.has_stable;
            r.has_unstable = a.has_unstable || b.has_unstable;
            r.has_center = a.has_center || b.has_center;
            r.nu = merge_max(a.has_stable, a.nu, b.has_stable, b.nu);
            r.nu_hat = merge_max(a.has_unstable, a.nu_hat, b.has_unstable, b.nu_hat);
            r.gamma = merge_min(a.has_center, a.gamma, b.has_center, b.gamma);
            r.gamma_hat = merge_min(a.has_center, a.gamma_hat, b.has_center, b.gamma_hat);
            return r;
        }
    };
    return std::visit(visitor{}, sys.value());
}

namespace {

double circle_gap(double a, double b) noexcept
{
    const double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

double shift_distance(const shift_point& a, const shift_point& b)
{
    if (a.source == b.source && a.offset == b.offset)
        return 0.0;
    constexpr int horizon = 60;
    for (int n = 0; n <= horizon; ++n) {
        if (a.symbol(n) != b.symbol(n) || a.symbol(-n) != b.symbol(-n))
            return std::ldexp(1.0, -n);
    }
    return 0.0;
}

} // namespace

double point_distance(const base_system& sys, const base_point& x, const base_point& y)
{
    struct visitor {
        const base_point& x;
        const base_point& y;
        double operator()(const rotation_system&) const { return circle_gap(x.as_circle().t, y.as_circle().t); }
        double operator()(const cat_map_system&) const
        {
            const auto& p = x.as_torus();
            const auto& q = y.as_torus();
            return std::hypot(circle_gap(p.x, q.x), circle_gap(p.y, q.y));
        }
        double operator()(const shift_system&) const { return shift_distance(x.as_shift(), y.as_shift()); }
        double operator()(const random_product_system&) const
        {
            return std::max(shift_distance(x.left().as_shift(), y.left().as_shift()),
                            circle_gap(x.right().as_circle().t, y.right().as_circle().t));
        }
        double operator()(const product_system& p) const
        {
            return std::max(point_distance(*p.left, x.left(), y.left()),
                            point_distance(*p.right, x.right(), y.right()));
        }
    };
    return std::visit(visitor{x, y}, sys.value());
}

// ---------------------------------------------------------------------------
// leaves

std::string_view to_string(leaf_kind kind) noexcept { return kind == leaf_kind::s ? "s" : "u"; }

bool has_leaves(const base_system& sys) noexcept
{
    if (std::holds_alternative<cat_map_system>(sys.value()))
        return true;
    if (const auto* p = std::get_if<product_system>(&sys.value()))
        return has_leaves(*p->left) != has_leaves(*p->right);
    return false;
}

namespace {

enum class side { left, right };

side hyperbolic_side(const product_system& p)
{
    const bool l = has_leaves(*p.left);
    const bool r = has_leaves(*p.right);
    if (l == r)
        fail(error_kind::leaf_absent, "product needs exactly one factor carrying stable/unstable leaves");
    return l ? side::left : side::right;
}

void require_leaves(const base_system& sys)
{
    if (!has_leaves(sys))
        fail(error_kind::leaf_absent, "system '" + sys.name() + "' has no stable/unstable leaves");
}

} // namespace

base_point leaf_point(const base_system& sys, const base_point& x, leaf_kind kind, double distance)
{
    require_leaves(sys);
    if (const auto* c = std::get_if<cat_map_system>(&sys.value())) {
        (void)c;
        const auto b = cat_basis();
        const auto& p = x.as_torus();
        if (kind == leaf_kind::u)
            return base_point::torus(p.x + distance * b.ux, p.y + distance * b.uy);
        return base_point::torus(p.x + distance * b.sx, p.y + distance * b.sy);
    }
    const auto& p = std::get<product_system>(sys.value());
    if (hyperbolic_side(p) == side::left)
        return base_point::product(leaf_point(*p.left, x.left(), kind, distance), x.right());
    return base_point::product(x.left(), leaf_point(*p.right, x.right(), kind, distance));
}

namespace {

constexpr int lift_radius = 4;
constexpr double same_point_tol = 1e-12;

struct lift_solution {
    double along_u;
    double along_s;
};

// Coordinates of (q - p + m) in the eigenbasis for every integer lift m in
// the search box.
template <class Fn>
void for_each_lift(const torus_point& p, const torus_point& q, int radius, Fn&& fn)
{
    const auto b = cat_basis();
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    for (int mx = -radius; mx <= radius; ++mx) {
        for (int my = -radius; my <= radius; ++my) {
            const double vx = dx + mx;
            const double vy = dy + my;
            fn(lift_solution{vx * b.ux + vy * b.uy, vx * b.sx + vy * b.sy});
        }
    }
}

std::optional<double> torus_leaf_distance(const torus_point& p, const torus_point& q, leaf_kind kind)
{
    std::optional<double> best;
    for_each_lift(p, q, lift_radius, [&](const lift_solution& l) {
        const double along = kind == leaf_kind::u ? l.along_u : l.along_s;
        const double across = kind == leaf_kind::u ? l.along_s : l.along_u;
        if (std::abs(across) <= leaf_tolerance && (!best || std::abs(along) < std::abs(*best)))
            best = along;
    });
    return best;
}

} // namespace

std::optional<double> leaf_distance(const base_system& sys, const base_point& x, const base_point& y,
                                    leaf_kind kind)
{
    if (!has_leaves(sys)) {
        if (point_distance(sys, x, y) == 0.0)
            return 0.0;
        return std::nullopt;
    }
    if (std::holds_alternative<cat_map_system>(sys.value()))
        return torus_leaf_distance(x.as_torus(), y.as_torus(), kind);
    const auto& p = std::get<product_system>(sys.value());
    if (hyperbolic_side(p) == side::left) {
        if (point_distance(*p.right, x.right(), y.right()) > same_point_tol)
            return std::nullopt;
        return leaf_distance(*p.left, x.left(), y.left(), kind);
    }
    if (point_distance(*p.left, x.left(), y.left()) > same_point_tol)
        return std::nullopt;
    return leaf_distance(*p.right, x.right(), y.right(), kind);
}

bool su_path::is_kl_path(std::size_t max_legs, double max_length) const noexcept
{
    if (legs.size() > max_legs)
        return false;
    return std::all_of(legs.begin(), legs.end(), [&](const su_leg& l) { return l.length() <= max_length; });
}

su_path su_path::reversed() const
{
    su_path out;
    for (auto it = legs.rbegin(); it != legs.rend(); ++it)
        out.legs.push_back(su_leg{it->kind, it->end, it->start, -it->displacement});
    return out;
}

void su_path::append(const su_path& tail) { legs.insert(legs.end(), tail.legs.begin(), tail.legs.end()); }

bool path_is_valid(const base_system& sys, const su_path& path, double tol)
{
    for (std::size_t i = 0; i < path.legs.size(); ++i) {
        const su_leg& leg = path.legs[i];
        const base_point expected_end = leaf_point(sys, leg.start, leg.kind, leg.displacement);
        if (point_distance(sys, expected_end, leg.end) > tol)
            return false;
        if (i + 1 < path.legs.size() && point_distance(sys, leg.end, path.legs[i + 1].start) > tol)
            return false;
    }
    return true;
}

namespace {

void push_subdivided(su_path& path, const base_system& sys, leaf_kind kind, const base_point& start,
                     double displacement, const base_point& end, double max_leg)
{
    if (displacement == 0.0)
        return;
    const auto pieces = static_cast<int>(std::max(1.0, std::ceil(std::abs(displacement) / max_leg)));
    const double piece = displacement / pieces;
    base_point cur = start;
    for (int i = 0; i < pieces; ++i) {
        base_point next = i + 1 == pieces ? end : leaf_point(sys, start, kind, piece * (i + 1));
        path.legs.push_back(su_leg{kind, cur, next, piece});
        cur = std::move(next);
    }
}

su_path connect_torus(const base_system& sys, const base_point& x, const base_point& y, double max_leg,
                      const std::function<base_point(const base_point&)>& embed)
{
    su_path path;
    const auto& p = x.as_torus();
    const auto& q = y.as_torus();
    if (p.x == q.x && p.y == q.y)
        return path;
    // Integer lift minimising the longer leg; ties by (|a|+|b|, a, b).
    std::optional<lift_solution> best;
    auto key = [](const lift_solution& l) {
        return std::make_tuple(std::max(std::abs(l.along_u), std::abs(l.along_s)),
                               std::abs(l.along_u) + std::abs(l.along_s), l.along_u, l.along_s);
    };
    for_each_lift(p, q, 1, [&](const lift_solution& l) {
        if (!best || key(l) < key(*best))
            best = l;
    });
    const base_system cat = base_system::cat_map();
    const base_point z_torus = leaf_point(cat, x, leaf_kind::u, best->along_u);
    const base_point xe = embed(x);
    const base_point ze = embed(z_torus);
    const base_point ye = embed(y);
    push_subdivided(path, sys, leaf_kind::u, xe, best->along_u, best->along_s == 0.0 ? ye : ze, max_leg);
    push_subdivided(path, sys, leaf_kind::s, best->along_u == 0.0 ? xe : ze, best->along_s, ye, max_leg);
    return path;
}

} // namespace

su_path su_connect(const base_system& sys, const base_point& x, const base_point& y, double max_leg)
{
    if (!(max_leg > 0.0))
        fail(error_kind::invalid_argument, "maximum leg length must be positive");
    if (std::holds_alternative<cat_map_system>(sys.value()))
        return connect_torus(sys, x, y, max_leg, [](const base_point& p) { return p; });
    if (const auto* p = std::get_if<product_system>(&sys.value())) {
        if (has_leaves(sys) && std::holds_alternative<cat_map_system>(
                                   (hyperbolic_side(*p) == side::left ? *p->left : *p->right).value())) {
            if (hyperbolic_side(*p) == side::left) {
                if (point_distance(*p->right, x.right(), y.right()) != 0.0)
                    fail(error_kind::unsupported_system,
                         "su-paths preserve the center coordinate; endpoints lie in different fibers");
                const base_point& center = x.right();
                return connect_torus(sys, x.left(), y.left(), max_leg,
                                     [&](const base_point& t) { return base_point::product(t, center); });
            }
            if (point_distance(*p->left, x.left(), y.left()) != 0.0)
                fail(error_kind::unsupported_system,
                     "su-paths preserve the center coordinate; endpoints lie in different fibers");
            const base_point& center = x.left();
            return connect_torus(sys, x.right(), y.right(), max_leg,
                                 [&](const base_point& t) { return base_point::product(center, t); });
        }
    }
    fail(error_kind::unsupported_system, "su_connect supports the cat map and products with one cat-map factor, not '" +
                                             sys.name() + "'");
}

center_bunching_report check_center_bunching(const base_system& sys)
{
    const rate_data r = rates(sys);
    if (!r.has_center)
        fail(error_kind::trivial_center, "system '" + sys.name() + "' has no center direction");
    if (!r.has_stable && !r.has_unstable)
        fail(error_kind::trivial_center, "system '" + sys.name() + "' has no hyperbolic directions");
    const double gg = r.gamma * r.gamma_hat;
    center_bunching_report rep{r, r.nu < gg, r.nu_hat < gg, gg - r.nu, gg - r.nu_hat};
    return rep;
}

} // namespace cocyclelab
