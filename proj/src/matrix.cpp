#include "cocyclelab/matrix.hpp"

#include "cocyclelab/errors.hpp"

#include <algorithm>
#include <string>

namespace cocyclelab {

std::string_view to_string(error_kind kind) noexcept
{
    switch (kind) {
    case error_kind::invalid_argument: return "invalid_argument";
    case error_kind::leaf_absent: return "leaf_absent";
    case error_kind::not_on_leaf: return "not_on_leaf";
    case error_kind::not_fiber_bunched: return "not_fiber_bunched";
    case error_kind::no_convergence: return "no_convergence";
    case error_kind::unsupported_system: return "unsupported_system";
    case error_kind::trivial_center: return "trivial_center";
    case error_kind::degenerate: return "degenerate";
    case error_kind::loop_obstruction: return "loop_obstruction";
    case error_kind::path_unreachable: return "path_unreachable";
    case error_kind::insufficient_samples: return "insufficient_samples";
    case error_kind::structure_violation: return "structure_violation";
    case error_kind::config: return "config";
    }
    return "unknown";
}

mat2 mat2::rotation(double angle) noexcept
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c, -s, s, c};
}

mat2 mat2::sl(double a, double b, double c, double d)
{
    mat2 m{a, b, c, d};
    if (!m.finite())
        fail(error_kind::invalid_argument, "matrix has a non-finite entry");
    const double det = m.det();
    if (!(det > 0.0))
        fail(error_kind::invalid_argument,
             "cannot normalise to SL(2,R): determinant " + std::to_string(det) + " is not positive");
    if (det != 1.0)
        m = (1.0 / std::sqrt(det)) * m;
    return m;
}

bool mat2::finite() const noexcept
{
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
}

mat2 compose(const mat2& lhs, const mat2& rhs) noexcept { return lhs * rhs; }

mat2 inverse(const mat2& m) noexcept { return (1.0 / m.det()) * adjugate(m); }

double operator_norm(const mat2& m) noexcept
{
    // Singular values are (q +- r) / 2 with the two hypotenuses below; this is
    // the closed form of the eigenvalues of m^T m without the cancellation of
    // the quadratic formula.
    const double q = std::hypot(m.a + m.d, m.c - m.b);
    const double r = std::hypot(m.a - m.d, m.b + m.c);
    return 0.5 * (q + r);
}

double distance(const mat2& x, const mat2& y) noexcept { return operator_norm(x - y); }

proj_point::proj_point(double theta) noexcept
{
    double t = std::fmod(theta, pi);
    if (t < 0.0)
        t += pi;
    if (t >= pi)
        t = 0.0;
    theta_ = t + 0.0; // no negative zero
}

proj_point proj_point::from_vector(const vec2& v) noexcept { return proj_point(std::atan2(v.y, v.x)); }

double proj_distance(proj_point u, proj_point v) noexcept
{
    return std::abs(std::sin(u.theta() - v.theta()));
}

proj_point projective_action(const mat2& m, proj_point v) noexcept
{
    return proj_point::from_vector(m * v.unit());
}

std::string_view to_string(mat_kind kind) noexcept
{
    switch (kind) {
    case mat_kind::identity: return "identity";
    case mat_kind::hyperbolic: return "hyperbolic";
    case mat_kind::parabolic: return "parabolic";
    case mat_kind::elliptic: return "elliptic";
    }
    return "unknown";
}

namespace {

// Null direction of the 2x2 matrix n, taken from its larger row.
proj_point null_direction(const mat2& n)
{
    const double r0 = std::hypot(n.a, n.b);
    const double r1 = std::hypot(n.c, n.d);
    if (r0 >= r1)
        return proj_point::from_vector({n.b, -n.a});
    return proj_point::from_vector({n.d, -n.c});
}

} // namespace

std::vector<proj_point> eigendirections(const mat2& m)
{
    const double half_tr = 0.5 * m.trace();
    // (tr/2)^2 - det without the cancellation near |tr| = 2
    const double half_gap = 0.5 * (m.a - m.d);
    const double disc = half_gap * half_gap + m.b * m.c;
    const double scale = std::max(1.0, operator_norm(m));
    const mat2 shifted = m - mat2::diag(half_tr, half_tr);
    if (operator_norm(shifted) <= 1e-14 * scale)
        return {};
    if (disc < 0.0)
        return {};
    if (disc == 0.0)
        return {null_direction(shifted)};
    const double root = std::sqrt(disc);
    // Larger-magnitude eigenvalue first; m - lambda Id = shifted -+ root Id.
    const double r1 = half_tr >= 0.0 ? root : -root;
    return {null_direction(shifted - mat2::diag(r1, r1)), null_direction(shifted + mat2::diag(r1, r1))};
}

mat_class classify(const mat2& m, double tol)
{
    mat_class out;
    const mat2 id = mat2::identity();
    if (distance(m, id) <= tol || distance(m, -id) <= tol) {
        out.kind = mat_kind::identity;
        return out;
    }
    const double t = std::abs(m.trace());
    if (t > 2.0 + tol) {
        out.kind = mat_kind::hyperbolic;
        out.fixed_points = eigendirections(m);
        std::sort(out.fixed_points.begin(), out.fixed_points.end(),
                  [](proj_point u, proj_point v) { return u.theta() < v.theta(); });
    } else if (t < 2.0 - tol) {
        out.kind = mat_kind::elliptic;
        out.angle = std::acos(0.5 * t);
    } else {
        out.kind = mat_kind::parabolic;
        // Inside the band the discriminant is rounding noise; the unique fixed
        // line is the kernel of the nilpotent part m - (tr/2) Id.
        const double half_tr = 0.5 * m.trace();
        out.fixed_points = {null_direction(m - mat2::diag(half_tr, half_tr))};
    }
    return out;
}

gl_split gl_to_sl(const mat2& m)
{
    if (!m.finite())
        fail(error_kind::invalid_argument, "matrix has a non-finite entry");
    const double det = m.det();
    if (!(det > 0.0))
        fail(error_kind::invalid_argument,
             "GL to SL reduction needs a positive determinant, got " + std::to_string(det));
    const double g = std::sqrt(det);
    return {g, (1.0 / g) * m};
}

psl_class psl_normalize(const mat2& m) noexcept
{
    const double tr = m.trace();
    const double scale = std::max(1.0, operator_norm(m));
    if (std::abs(tr) > 1e-15 * scale)
        return {tr > 0.0 ? m : -m};
    for (double entry : {m.a, m.b, m.c, m.d}) {
        if (entry != 0.0)
            return {entry > 0.0 ? m : -m};
    }
    return {m};
}

} // namespace cocyclelab
