#pragma once

// 2x2 real linear algebra for SL(2,R), GL+(2,R) and PSL(2,R) cocycle values.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace cocyclelab {

inline constexpr double pi = std::numbers::pi;

/// Row-major 2x2 real matrix [[a, b], [c, d]].
struct mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static constexpr mat2 identity() noexcept { return {}; }
    static constexpr mat2 diag(double p, double q) noexcept { return {p, 0.0, 0.0, q}; }
    static mat2 rotation(double angle) noexcept;

    /// Builds a determinant-one value, rescaling by sqrt(det) when det > 0.
    /// Throws invalid_argument when det <= 0 or an entry is not finite.
    static mat2 sl(double a, double b, double c, double d);

    constexpr double det() const noexcept { return a * d - b * c; }
    constexpr double trace() const noexcept { return a + d; }
    bool finite() const noexcept;

    friend constexpr bool operator==(const mat2&, const mat2&) = default;
};

constexpr mat2 operator*(const mat2& x, const mat2& y) noexcept
{
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}
constexpr mat2 operator*(double s, const mat2& m) noexcept { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
constexpr mat2 operator+(const mat2& x, const mat2& y) noexcept { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }
constexpr mat2 operator-(const mat2& x, const mat2& y) noexcept { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
constexpr mat2 operator-(const mat2& m) noexcept { return {-m.a, -m.b, -m.c, -m.d}; }

struct vec2 {
    double x = 0.0, y = 0.0;
};

constexpr vec2 operator*(const mat2& m, const vec2& v) noexcept
{
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

mat2 compose(const mat2& lhs, const mat2& rhs) noexcept;

/// Adjugate [[d, -b], [-c, a]]; equals the inverse for determinant-one values.
constexpr mat2 adjugate(const mat2& m) noexcept { return {m.d, -m.b, -m.c, m.a}; }

/// General inverse (adjugate / det). Caller guarantees det != 0.
mat2 inverse(const mat2& m) noexcept;

/// Largest singular value, from the closed-form eigenvalues of the Gram matrix.
double operator_norm(const mat2& m) noexcept;

/// Operator-norm distance ||x - y||.
double distance(const mat2& x, const mat2& y) noexcept;

/// A line through the origin, parametrised by theta in [0, pi).
class proj_point {
public:
    constexpr proj_point() = default;
    explicit proj_point(double theta) noexcept;

    static proj_point from_vector(const vec2& v) noexcept;

    double theta() const noexcept { return theta_; }
    vec2 unit() const noexcept { return {std::cos(theta_), std::sin(theta_)}; }

    friend bool operator==(const proj_point&, const proj_point&) = default;

private:
    double theta_ = 0.0;
};

/// |sin(theta_u - theta_v)|: symmetric, zero iff equal, bounded by one.
double proj_distance(proj_point u, proj_point v) noexcept;

proj_point projective_action(const mat2& m, proj_point v) noexcept;

enum class mat_kind { identity, hyperbolic, parabolic, elliptic };

std::string_view to_string(mat_kind kind) noexcept;

struct mat_class {
    mat_kind kind = mat_kind::identity;
    std::optional<double> angle;          // elliptic rotation angle arccos(|tr|/2)
    std::vector<proj_point> fixed_points; // 2 hyperbolic, 1 parabolic, 0 otherwise
};

inline constexpr double default_classify_tol = 1e-9;

/// Trace trichotomy on |tr|, with a tolerance band around |tr| = 2.
mat_class classify(const mat2& m, double tol = default_classify_tol);

/// Real eigendirections of m (0, 1 or 2 of them). A scalar matrix reports none.
std::vector<proj_point> eigendirections(const mat2& m);

struct gl_split {
    double scale; // sqrt(det)
    mat2 sl;      // determinant-one part
};

/// A = scale * sl for det(A) > 0; nonpositive determinants are rejected.
gl_split gl_to_sl(const mat2& m);

/// Canonical representative of the class {A, -A}.
struct psl_class {
    mat2 rep;

    double norm() const noexcept { return operator_norm(rep); }
    friend bool operator==(const psl_class&, const psl_class&) = default;
};

psl_class psl_normalize(const mat2& m) noexcept;

} // namespace cocyclelab
