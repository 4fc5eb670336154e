#pragma once

// Linear cocycles x -> A(x) over the model base systems: products A^n(x),
// renormalised Lyapunov estimation, Oseledets directions and the projective
// skew product F_A(x, v) = (f x, [A(x) v]).

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cocyclelab {

/// Real trigonometric polynomial on the circle or torus:
///   constant + lin_x x + lin_y y + sum_k (c_k cos 2pi(kx x + ky y) + s_k sin 2pi(kx x + ky y)).
/// Linear coefficients are integers so that R_{2 pi h} descends to the quotient.
struct trig_term {
    int kx = 0, ky = 0;
    double cos_coef = 0.0, sin_coef = 0.0;
};

struct trig_poly {
    double constant = 0.0;
    int lin_x = 0, lin_y = 0;
    std::vector<trig_term> terms;

    double operator()(double x, double y) const noexcept;
    /// Upper bound on the Lipschitz constant w.r.t. Euclidean distance on R^2
    /// (ignores the linear part's wrap).
    double lipschitz_bound() const noexcept;
    std::string to_string() const;
};

struct generator_node;

class cocycle_spec {
public:
    cocycle_spec() = default;
    explicit cocycle_spec(std::shared_ptr<const generator_node> node, double alpha = 1.0)
        : node_(std::move(node)), alpha_(alpha) {}

    const generator_node& node() const { return *node_; }
    double alpha() const noexcept { return alpha_; }
    const std::optional<double>& holder_constant() const noexcept { return holder_constant_; }

    cocycle_spec with_alpha(double alpha) const;
    cocycle_spec with_holder_constant(double c) const;

    std::string describe() const;

private:
    std::shared_ptr<const generator_node> node_;
    double alpha_ = 1.0;
    std::optional<double> holder_constant_;
};

enum class factor_side { left, right };

struct constant_gen {
    mat2 value;
};
/// t -> R_{2 pi h(t)}
struct rotation_gen {
    trig_poly h;
};
/// t -> diag(e^{g(t)}, e^{-g(t)})
struct diagonal_gen {
    trig_poly g;
};
/// x -> [[a(x), b(x)], [c(x), d(x)]], general GL valued.
struct entrywise_gen {
    trig_poly a, b, c, d;
};
/// x -> C(f x) L(x) C(x)^{-1}
struct coboundary_gen {
    cocycle_spec conjugator;
    cocycle_spec inner;
};
/// Evaluates the inner spec on one factor of a product base, ignoring the other.
struct lift_gen {
    factor_side side;
    cocycle_spec inner;
};
/// (x, t) -> A_{x_0}(t) on the random-product base.
struct selector_gen {
    std::vector<cocycle_spec> per_symbol;
};
/// x -> G_1(x) G_2(x) ... G_k(x)
struct composite_gen {
    std::vector<cocycle_spec> factors;
};
/// x -> A(x) / sqrt(det A(x))
struct sl_part_gen {
    cocycle_spec inner;
};
/// x -> canonical PSL representative of A(x)
struct psl_gen {
    cocycle_spec inner;
};

struct generator_node {
    std::variant<constant_gen, rotation_gen, diagonal_gen, entrywise_gen, coboundary_gen, lift_gen, selector_gen,
                 composite_gen, sl_part_gen, psl_gen>
        value;
};

namespace specs {
cocycle_spec constant(const mat2& m);
cocycle_spec rotation_valued(trig_poly h);
cocycle_spec diagonal_valued(trig_poly g);
cocycle_spec entrywise(trig_poly a, trig_poly b, trig_poly c, trig_poly d);
cocycle_spec coboundary(cocycle_spec conjugator, cocycle_spec inner);
cocycle_spec lift(factor_side side, cocycle_spec inner);
cocycle_spec selector(std::vector<cocycle_spec> per_symbol);
cocycle_spec composite(std::vector<cocycle_spec> factors);
cocycle_spec sl_part(cocycle_spec inner);
cocycle_spec psl(cocycle_spec inner);
} // namespace specs

/// A(x) over the given base.
mat2 evaluate(const cocycle_spec& spec, const base_system& sys, const base_point& x);

/// True when every value the spec can produce has determinant one.
bool determinant_one(const cocycle_spec& spec);

/// Product in factored form: the true value is exp(log_scale) * matrix.
struct scaled_mat2 {
    mat2 matrix;
    double log_scale = 0.0;

    mat2 value() const noexcept { return std::exp(log_scale) * matrix; }
    double log_norm() const noexcept { return log_scale + std::log(operator_norm(matrix)); }
};

inline constexpr double renorm_high = 1e30;
inline constexpr double renorm_low = 1e-30;

/// Rescales m to unit norm when its norm leaves [renorm_low, renorm_high],
/// returning the log of the factor removed.
double renormalize(mat2& m) noexcept;

/// A^n(x): A(f^{n-1}x)...A(x) for n > 0, Id for n = 0, (A^{-n}(f^n x))^{-1} for n < 0.
scaled_mat2 cocycle_product(const cocycle_spec& spec, const base_system& sys, const base_point& x, long n);

struct lyapunov_options {
    long iterations = 1000;
    int orbits = 8;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct lyapunov_estimate {
    double value = 0.0; // nats per iteration
    long iterations = 0;
    int orbits = 0;
    double std_error = 0.0;
};

struct lyapunov_pair {
    lyapunov_estimate top;
    lyapunov_estimate bottom;
    /// Per-orbit mean of (1/n) sum log|det A| along the orbit.
    lyapunov_estimate log_det;
};

/// Both exponents from the same seeded orbits. The bottom exponent is computed
/// from the product of inverses, independently of the top one.
lyapunov_pair lyapunov_exponents(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts);

lyapunov_estimate lyapunov_top(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts);
lyapunov_estimate lyapunov_bottom(const cocycle_spec& spec, const base_system& sys, const lyapunov_options& opts);

/// Mean and standard error (sample deviation / sqrt(count)) of per-orbit values.
lyapunov_estimate summarize(const std::vector<double>& per_orbit, long iterations);

struct oseledets_options {
    long depth = 200;
    double seed_theta = 1.0;
    double degeneracy_threshold = 1e-6;
};

struct oseledets_pair {
    proj_point unstable;
    proj_point stable;
};

/// Eu from pushing generic directions forward from f^{-n}x, Es from pulling
/// them back from f^n x. Throws degenerate when the two pushes of distinct
/// seed directions disagree or when Eu and Es nearly coincide.
oseledets_pair oseledets_directions(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                                    const oseledets_options& opts = {});

struct fiber_state {
    base_point x;
    proj_point v;
};

/// n-fold application of F_A.
fiber_state skew_step(const cocycle_spec& spec, const base_system& sys, fiber_state state, long n);

using fibered_sampler = std::function<fiber_state(rng_engine&)>;

/// Monte Carlo mean of log(|A(x) v| / |v|) under the sampler.
double phi_integral(const cocycle_spec& spec, const base_system& sys, const fibered_sampler& m, long samples,
                    std::uint64_t seed);

/// Same integral for (base measure) x (fixed discrete fiber measure): Monte
/// Carlo over the base, exact weighted sum over the fiber atoms.
double phi_integral(const cocycle_spec& spec, const base_system& sys,
                    const std::vector<std::pair<proj_point, double>>& fiber_atoms, long samples, std::uint64_t seed);

/// Largest sampled ratio |A(x) - A(y)| / d(x, y)^alpha over `samples` base
/// points, each paired with perturbations at a few scales.
double sampled_holder_ratio(const cocycle_spec& spec, const base_system& sys, long samples, std::uint64_t seed);

} // namespace cocyclelab
