#pragma once

// Two ready-made constructions: the random product over a Bernoulli shift
// with circle fibers, whose exponent collapses to p0 times the exponent of
// A0 over the rotation, and the trivial extension of a circle cocycle to
// rotation x cat map, which is center bunched but not accessible.

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/holonomy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocyclelab {

/// Number of indices j in 1..n with symbol 0 at position j.
long tau_count(const shift_point& x, long n);

struct random_product_config {
    std::vector<double> probs{0.5, 0.5};
    std::vector<double> fiber_shift{golden_mean, 0.0}; // f_j(t) = t + fiber_shift[j]
    std::vector<cocycle_spec> generators;                // A_j, circle valued

    base_system system() const;
    cocycle_spec spec() const;
    /// Throws invalid_argument on a malformed config.
    void validate() const;
    /// Empty when every symbol j >= 1 carries A_j = Id and f_j = id, else the reason.
    std::optional<std::string> structure_problem() const;
};

/// A0 = diag(2, 1/2), A1 = Id, f0 the golden rotation, f1 = id.
random_product_config default_random_product(double p0 = 0.5);

struct random_product_result {
    lyapunov_estimate direct;  // over the skew system
    lyapunov_estimate base;    // A0 over the rotation by fiber_shift[0]
    double formula = 0.0;      // p0 * base.value
    double formula_std_error = 0.0;
    double p0 = 0.0;

    /// |direct - formula| over the combined standard error.
    double z_score() const noexcept;
};

/// Throws structure_violation when the collapse A^n(x, t) = A0^{tau}(t) does not hold.
random_product_result random_product_exponent(const random_product_config& cfg, const lyapunov_options& opts);

struct trivial_extension_config {
    double omega = golden_mean;
    int cat_power = 2;
    cocycle_spec a0; // on the rotation coordinate

    base_system system() const;
    base_system factor() const { return base_system::rotation(omega); }
    cocycle_spec spec() const; // A_hat(t, x) = A0(t)
};

enum class a0_family { hyperbolic, rotations, conjugated };

std::string_view to_string(a0_family family) noexcept;
std::optional<a0_family> parse_a0_family(std::string_view name) noexcept;

/// hyperbolic: diag(2, 1/2); rotations: R_{2 pi (0.3 + 0.1 cos 2 pi t)};
/// conjugated: R_{2 pi t} diag(2, 1/2) R_{-2 pi t}.
cocycle_spec a0_of(a0_family family);

trivial_extension_config default_trivial_extension(a0_family family = a0_family::conjugated);

struct trivial_extension_result {
    lyapunov_estimate product;
    lyapunov_estimate factor;

    double gap() const noexcept { return product.value - factor.value; }
    double combined_std_error() const noexcept { return product.std_error + factor.std_error; }
};

/// The factor run uses an independent seed stream so the comparison is a
/// genuine two-sample check.
trivial_extension_result trivial_extension_exponent(const trivial_extension_config& cfg,
                                                    const lyapunov_options& opts);

struct accessibility_report {
    int cross_trials = 0;
    int cross_unsupported = 0;
    int same_trials = 0;
    int same_connected = 0;
    int same_valid = 0;            // path_is_valid on the product base
    bool circle_preserved = true;  // every leg endpoint keeps the circle coordinate bit for bit
    bool equal_points_empty = false;

    bool pass() const noexcept
    {
        return cross_unsupported == cross_trials && same_connected == same_trials && same_valid == same_trials &&
               circle_preserved && equal_points_empty;
    }
};

accessibility_report accessibility_probe(const trivial_extension_config& cfg, int trials, std::uint64_t seed);

} // namespace cocyclelab
