#pragma once

// Model base systems: circle rotation, cat map, Bernoulli shift, the
// shift-over-circle skew map of random products, and direct products.
// Leaves, rates and su-paths are exact for these linear models.

#include "cocyclelab/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cocyclelab {

// ---------------------------------------------------------------------------
// Symbolic sequences

/// Bi-infinite symbol sequence. Bernoulli sequences are counter based: the
/// symbol at index i is a pure function of (seed, i), so any window can be
/// materialised on demand and two queries always agree.
class symbol_source {
public:
    static std::shared_ptr<const symbol_source> bernoulli(std::uint64_t seed, std::vector<double> probs);
    static std::shared_ptr<const symbol_source> periodic(std::vector<int> pattern);

    int at(std::int64_t index) const noexcept;
    int alphabet_size() const noexcept;

private:
    symbol_source() = default;

    std::uint64_t seed_ = 0;
    std::vector<double> cumulative_; // Bernoulli mode when non-empty
    std::vector<int> pattern_;       // periodic mode otherwise
};

struct shift_point {
    std::shared_ptr<const symbol_source> source;
    std::int64_t offset = 0; // sigma^offset applied to the source sequence

    int symbol(std::int64_t index) const noexcept { return source->at(offset + index); }
    /// Symbols at indices [lo, hi).
    std::vector<int> window(std::int64_t lo, std::int64_t hi) const;
};

// ---------------------------------------------------------------------------
// Points

class base_point;

struct circle_point {
    double t = 0.0;
};
/// Torus coordinates are held in 64-bit fixed point (units of 2^-64); the
/// doubles are a rounded view. The cat map acts on the fixed-point lattice
/// exactly, so f^-n f^n x == x bit for bit.
struct torus_point {
    double x = 0.0, y = 0.0;
    std::uint64_t fx = 0, fy = 0;

    static torus_point from_fixed(std::uint64_t fx, std::uint64_t fy) noexcept;
    static torus_point from_real(double x, double y) noexcept;
};
struct product_point {
    std::shared_ptr<const base_point> left, right;
};

class base_point {
public:
    using value_type = std::variant<circle_point, torus_point, shift_point, product_point>;

    base_point() = default;
    base_point(value_type v) : value_(std::move(v)) {}

    static base_point circle(double t);
    static base_point torus(double x, double y);
    static base_point shift(std::shared_ptr<const symbol_source> source, std::int64_t offset = 0);
    static base_point product(base_point left, base_point right);

    const value_type& value() const noexcept { return value_; }

    const circle_point& as_circle() const;
    const torus_point& as_torus() const;
    const shift_point& as_shift() const;
    const base_point& left() const;
    const base_point& right() const;

    /// Flattened real coordinates in factor order (shift factors contribute
    /// their offset).
    std::vector<double> coordinates() const;
    std::string to_string() const;

private:
    value_type value_;
};

// ---------------------------------------------------------------------------
// Systems

/// Rate functions of a partially hyperbolic splitting, taken constant for the
/// linear models.
struct rate_data {
    double nu = 1.0;        // stable contraction
    double nu_hat = 1.0;    // unstable contraction under the inverse
    double gamma = 1.0;     // center lower rate
    double gamma_hat = 1.0; // center inverse rate
    bool has_stable = false;
    bool has_unstable = false;
    bool has_center = false;
};

class base_system;

inline constexpr double golden_mean = 0.6180339887498948482; // (sqrt 5 - 1) / 2

struct rotation_system {
    double omega = golden_mean;
};
struct cat_map_system {
    int power = 1; // f = [[2,1],[1,1]]^power
};
struct shift_system {
    std::vector<double> probs{0.5, 0.5};
};
/// f(x, t) = (sigma x, t + fiber_shift[x_0]) on shift x circle.
struct random_product_system {
    std::vector<double> probs{0.5, 0.5};
    std::vector<double> fiber_shift{golden_mean, 0.0};
};
struct product_system {
    std::shared_ptr<const base_system> left, right;
};

class base_system {
public:
    using value_type =
        std::variant<rotation_system, cat_map_system, shift_system, random_product_system, product_system>;

    base_system() = default;
    base_system(value_type v) : value_(std::move(v)) {}

    static base_system rotation(double omega = golden_mean);
    static base_system cat_map(int power = 1);
    static base_system shift(std::vector<double> probs);
    static base_system random_product(std::vector<double> probs, std::vector<double> fiber_shift);
    static base_system product(base_system left, base_system right);

    /// Same dynamics with declared rate data replacing the model rates.
    base_system with_rates(const rate_data& rates) const;

    const value_type& value() const noexcept { return value_; }
    const std::optional<rate_data>& rate_override() const noexcept { return rates_; }

    std::string name() const;

private:
    value_type value_;
    std::optional<rate_data> rates_;
};

/// Larger eigenvalue (3 + sqrt 5) / 2 of the cat matrix.
inline constexpr double cat_lambda = 2.6180339887498948482;

/// Unit eigendirections of [[2,1],[1,1]].
struct cat_eigenbasis {
    double ux, uy; // expanding
    double sx, sy; // contracting
};
cat_eigenbasis cat_basis() noexcept;

double wrap_unit(double v) noexcept;

base_point step(const base_system& sys, const base_point& x, long n = 1);

base_point sample_measure(const base_system& sys, rng_engine& rng);
base_point sample_measure(const base_system& sys, std::uint64_t seed);

rate_data rates(const base_system& sys);

/// Metric on the base: arc distance on the circle, minimum-image Euclidean on
/// the torus, 2^-N on sequences (N = first index, in absolute value, where the
/// sequences differ), max over product factors.
double point_distance(const base_system& sys, const base_point& x, const base_point& y);

enum class leaf_kind { s, u };

std::string_view to_string(leaf_kind kind) noexcept;

inline constexpr double leaf_tolerance = 1e-9;

/// Point at signed arc length `distance` along the leaf of the given kind.
base_point leaf_point(const base_system& sys, const base_point& x, leaf_kind kind, double distance);

/// Signed arc length from x to y along the leaf through x, or nullopt when y is
/// not on that leaf (within leaf_tolerance, for lifts of length up to ~5).
std::optional<double> leaf_distance(const base_system& sys, const base_point& x, const base_point& y,
                                    leaf_kind kind);

bool has_leaves(const base_system& sys) noexcept;

struct su_leg {
    leaf_kind kind;
    base_point start;
    base_point end;
    double displacement; // signed arc length
    double length() const noexcept { return displacement < 0 ? -displacement : displacement; }
};

struct su_path {
    std::vector<su_leg> legs;

    bool empty() const noexcept { return legs.empty(); }
    /// Every leg at most `max_length` long and at most `max_legs` legs.
    bool is_kl_path(std::size_t max_legs, double max_length) const noexcept;
    su_path reversed() const;
    void append(const su_path& tail);
};

/// Checks leaf membership of every leg and the chaining of consecutive legs.
bool path_is_valid(const base_system& sys, const su_path& path, double tol = leaf_tolerance);

/// Two-leg (u then s) path from x to y on the cat map, legs subdivided to be at
/// most `max_leg` long. Products connect inside the hyperbolic factor and reject
/// endpoints whose other coordinates differ.
su_path su_connect(const base_system& sys, const base_point& x, const base_point& y, double max_leg = 1.0);

struct center_bunching_report {
    rate_data rates;
    bool stable_ok;   // nu < gamma * gamma_hat
    bool unstable_ok; // nu_hat < gamma * gamma_hat
    double stable_margin;
    double unstable_margin;
    bool center_bunched() const noexcept { return stable_ok && unstable_ok; }
};

center_bunching_report check_center_bunching(const base_system& sys);

} // namespace cocyclelab
