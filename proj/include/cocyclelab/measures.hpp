#pragma once

// Probability measures on the projective line P^1 = [0, pi): empirical fiber
// measures of the skew product F_A, atom detection, invariant measures of a
// single SL(2,R) matrix and the weak-star test metric.

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/matrix.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cocyclelab {

inline constexpr std::size_t default_bins = 360;

using atom_list = std::vector<std::pair<proj_point, double>>;

enum class measure_kind {
    atoms,
    histogram,       // equal bins over [0, pi)
    pushed_lebesgue, // P_* Leb for a fixed P in GL+(2); Leb itself when P = Id
};

class proj_measure {
public:
    /// Masses must be non-negative and sum to 1 within 1e-9.
    static proj_measure from_atoms(atom_list atoms);
    static proj_measure from_histogram(std::vector<double> masses);
    static proj_measure lebesgue();
    static proj_measure pushed_lebesgue(const mat2& p);

    measure_kind kind() const noexcept { return kind_; }
    const atom_list& atoms() const noexcept { return atoms_; }
    const std::vector<double>& bins() const noexcept { return bins_; }
    const mat2& pushing_map() const noexcept { return map_; }

    double total_mass() const noexcept;

    /// Bin masses on `bins` equal bins. Atoms are binned, pushed Lebesgue is
    /// integrated exactly over each bin, histograms are rebinned uniformly.
    std::vector<double> histogram(std::size_t bins = default_bins) const;

    /// Integral of phi(theta), theta in [0, pi). Histograms use bin centres.
    double integrate(const std::function<double(double)>& phi) const;

    /// Image under the projective action of l (det l > 0 expected).
    proj_measure push_forward(const mat2& l) const;

private:
    measure_kind kind_ = measure_kind::histogram;
    atom_list atoms_;
    std::vector<double> bins_;
    mat2 map_;
};

/// Bin index of theta on `bins` equal bins over [0, pi).
std::size_t bin_of(double theta, std::size_t bins) noexcept;
double bin_center(std::size_t index, std::size_t bins) noexcept;

/// 1/2 sum |m1 - m2| over `bins` equal bins.
double total_variation(const proj_measure& a, const proj_measure& b, std::size_t bins = default_bins);

/// Number of functions in the weak-star test family: cos(2k theta), sin(2k theta), k = 1..16.
inline constexpr int weak_star_frequencies = 16;

/// Integrals of the test family, cos before sin for each k.
std::vector<double> test_integrals(const proj_measure& m);

/// Max discrepancy over the test family.
double weak_star_distance(const proj_measure& a, const proj_measure& b);

struct fiber_measure_options {
    long iterations = 100000;
    long burn_in = 1000;
    std::size_t bins = default_bins;
    double radius = 0.02;        // base-ball around x
    double initial_theta = 1.0;  // fiber direction the orbit starts from
    std::size_t min_samples = 100;
};

/// Histogram of the fiber coordinates of the F_A-orbit of (x, initial_theta)
/// at the times (after burn-in) when the base point is within `radius` of x.
/// Throws insufficient_samples when fewer than min_samples times qualify.
proj_measure empirical_fiber_measure(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                                     const fiber_measure_options& opts = {});

enum class atom_verdict { atomic, diffuse, mixed };

struct atom_report {
    atom_list atoms;
    double diffuse_mass = 1.0;
    atom_verdict verdict = atom_verdict::diffuse;

    /// "atomic(j)", "diffuse" or "mixed".
    std::string verdict_string() const;
};

struct atom_options {
    double mass_floor = 0.05;
    int cluster_radius = 3; // bins on either side of the peak
    std::size_t bins = default_bins;
};

/// Greedy clustering: the heaviest circular window of 2 r + 1 bins is an atom
/// while its mass reaches the floor. atomic(j) needs total atom mass at least
/// 1 - mass_floor and every atom within 0.1/j of 1/j.
atom_report detect_atoms(const proj_measure& m, const atom_options& opts = {});

struct invariant_measures {
    mat_kind kind = mat_kind::identity;
    bool all_measures = false;             // identity: every measure is invariant
    std::vector<proj_measure> extremes;
    std::optional<long> period;            // q for rational elliptic angles
};

/// p/q with q <= max_denominator and |x - p/q| < threshold, found among the
/// continued-fraction convergents of x.
std::optional<std::pair<long, long>> rational_approximation(double x, double threshold = 1e-12,
                                                            long max_denominator = 1000);

/// Conjugator P with P^-1 l P a rotation, for elliptic l.
mat2 elliptic_conjugator(const mat2& l);

/// Extreme invariant measures of the projective action of l (SL expected).
/// Rational elliptic angles return q-point orbit averages of `seed_grid` seeds.
invariant_measures invariant_measure_of_matrix(const mat2& l, double tol = 1e-9, int seed_grid = 8);

/// Weak-star test distance from target to the convex hull of the extremes.
/// Exact for one or two extremes (ternary search on the segment); with more
/// extremes the minimum over hull edges is reported.
double distance_to_invariant_set(const invariant_measures& set, const proj_measure& target);

/// |(1/q) sum_j phi(j/q) - int_0^1 phi|, integral by adaptive Gauss-Kronrod.
double rational_rotation_equidistribution(long q, const std::function<double(double)>& phi);

enum class witness_kind { elliptic, parabolic, hyperbolic };

std::string_view to_string(witness_kind kind) noexcept;

struct prop31_report {
    witness_kind kind = witness_kind::hyperbolic;
    long n_max = 0;
    double min_distance = 0.0;
    double max_distance = 0.0;
    std::vector<double> distances; // index n - 1
};

/// Sequences L_n -> Id of one kind, with the test distance from each L_n's
/// invariant set to (delta_p + delta_q)/2. Elliptic: P R_{1/n} P^-1 for a
/// fixed shear P; parabolic: [[1, 1/n], [0, 1]]; hyperbolic: diag(1 + 1/n, .)
/// conjugated to fix p and q.
prop31_report prop31_witness(witness_kind kind, long n_max, proj_point p, proj_point q);

/// Two columns per line: bin centre and mass.
void write_columns(std::ostream& out, const proj_measure& m, std::size_t bins = default_bins);
proj_measure read_columns(std::istream& in);

} // namespace cocyclelab
