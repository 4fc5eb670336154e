#pragma once

// Stable/unstable holonomies of fiber-bunched cocycles,
//   H^s_{xy} = lim A^n(y)^{-1} A^n(x)   (y on the stable leaf of x),
//   H^u_{xz} = the same limit for (A^{-1}, f^{-1}),
// truncated once a certified geometric bound on the remainder drops below the
// requested tolerance. Also su-path composition and the change of coordinates
// that makes a cocycle with trivial loop holonomies constant.

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/matrix.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cocyclelab {

struct fiber_bunching_report {
    double rho_s = 0.0; // sup ||A|| ||A^-1|| nu^alpha
    double rho_u = 0.0; // sup ||A|| ||A^-1|| nu_hat^alpha
    double margin = 0.0; // 1 - max(rho_s, rho_u)
    double sup_norm = 0.0;
    double sup_inverse_norm = 0.0;
    double alpha = 1.0;
    rate_data rates;
    long grid = 0;

    bool pass() const noexcept { return rho_s < 1.0 && rho_u < 1.0; }
};

inline constexpr long default_bunching_grid = 10000;

fiber_bunching_report fiber_bunching(const cocycle_spec& spec, const base_system& sys,
                                     long grid_size = default_bunching_grid, std::uint64_t seed = 0);

struct holonomy {
    mat2 matrix;
    long truncation_n = 0;
    // certified series remainder plus a worst-case estimate of evaluation
    // rounding; the latter can exceed tol for strongly non-conformal cocycles
    double error_bound = 0.0;
    leaf_kind kind = leaf_kind::s;
    base_point from;
    base_point to;
};

struct holonomy_options {
    double tol = 1e-10;
    long max_iterations = 20000;
    long grid = default_bunching_grid;
    double safety = 2.0; // multiplies the sampled Hoelder constant
    std::uint64_t seed = 0;
};

/// Constants shared by every holonomy of one (spec, base) pair: the bunching
/// suprema and the Hoelder constant are sampled once.
class holonomy_engine {
public:
    holonomy_engine(cocycle_spec spec, base_system sys, holonomy_options opts = {});

    const fiber_bunching_report& bunching() const noexcept { return report_; }
    double holder_constant() const noexcept { return holder_; }
    const holonomy_options& options() const noexcept { return opts_; }
    const cocycle_spec& spec() const noexcept { return spec_; }
    const base_system& system() const noexcept { return sys_; }

    /// Geometric growth factor of the remainder series for the given leaf.
    double contraction(leaf_kind kind) const noexcept;
    /// C' with ||H_{xy} - Id|| <= C' d(x, y)^alpha on leaf pairs.
    double holder_bound_constant(leaf_kind kind) const noexcept;

    holonomy stable(const base_point& x, const base_point& y) const;
    holonomy unstable(const base_point& x, const base_point& z) const;
    /// Holonomy along a leaf of known signed displacement from x.
    holonomy along_leaf(const base_point& x, leaf_kind kind, double displacement) const;
    holonomy along_path(const su_path& path) const;

    /// ||H_{f^j x f^j y} - A^j(y) H_{xy} A^j(x)^{-1}|| for y on the stable leaf of x.
    double equivariance_residual(const base_point& x, const base_point& y, long j) const;

private:
    void require_bunched() const;

    cocycle_spec spec_;
    base_system sys_;
    holonomy_options opts_;
    fiber_bunching_report report_;
    double holder_ = 0.0;
    bool sl_ = true;
};

holonomy stable_holonomy(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                         const base_point& y, double tol);
holonomy unstable_holonomy(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                           const base_point& z, double tol);
holonomy path_holonomy(const cocycle_spec& spec, const base_system& sys, const su_path& path, double tol);
double equivariance_residual(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                             const base_point& y, long j, double tol);

struct trivialize_options {
    double loop_tolerance = 1e-6;
    int loops = 200;
    std::size_t loop_legs = 6; // K of the sampled (K, L)-loops
    double max_leg = 1.0;      // L
    long samples = 500;
    double certify_tolerance = 1e-6;
    std::uint64_t seed = 0;
};

struct trivialization {
    mat2 constant;                                   // A_hat(x)
    std::vector<std::pair<base_point, mat2>> table;  // y -> H_{xy}
    double max_deviation = 0.0;                      // max_y ||A_hat(y) - A_hat(x)||
    double combined_tolerance = 0.0;                 // certify tolerance + propagated holonomy error
    bool certified = false;
    int loops_checked = 0;
    double max_loop_residual = 0.0;
    double holonomy_norm_bound = 1.0;                // max ||H_{xy}|| over the table
};

/// Loop holonomy generated from the sampler: w -> z_1 -> ... -> w.
su_path sample_loop(const base_system& sys, const base_point& w, rng_engine& rng, std::size_t waypoints,
                    double max_leg);

/// Checks sampled (K, L)-loops, then conjugates A to A_hat(y) = H_{f(y) x} A(y) H_{xy}.
/// Throws loop_obstruction when a loop holonomy differs from Id by more than
/// the loop tolerance, path_unreachable when su_connect cannot join points.
trivialization trivialize(const holonomy_engine& engine, const base_point& x, const trivialize_options& opts = {});

} // namespace cocyclelab
