#include "cocyclelab/measures.hpp"

#include "cocyclelab/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cocyclelab {

namespace {

constexpr double mass_tolerance = 1e-9;

void check_masses(const std::vector<double>& masses, const char* what)
{
    double total = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m))
            fail(error_kind::invalid_argument, std::string(what) + " masses must be finite and non-negative");
        total += m;
    }
    if (std::abs(total - 1.0) > mass_tolerance)
        fail(error_kind::invalid_argument,
             std::string(what) + " masses sum to " + std::to_string(total) + ", expected 1");
}

// ccw length of the arc from a to b on P^1 = R / pi Z
double arc_length(double a, double b) noexcept
{
    double len = std::fmod(b - a, pi);
    if (len < 0.0)
        len += pi;
    return len;
}

// Spreads mass w uniformly over the ccw arc [start, start + len).
void deposit(std::vector<double>& bins, double start, double len, double w)
{
    const std::size_t n = bins.size();
    const double width = pi / static_cast<double>(n);
    if (len <= 0.0) {
        bins[bin_of(start, n)] += w;
        return;
    }
    const double density = w / len;
    double pos = proj_point(start).theta();
    double remaining = len;
    while (remaining > 0.0) {
        std::size_t i = bin_of(pos, n);
        const double edge = static_cast<double>(i + 1) * width;
        double take = std::min(remaining, edge - pos);
        if (take <= 0.0) { // pos rounded onto the upper edge
            i = (i + 1) % n;
            take = std::min(remaining, width);
            pos = static_cast<double>(i) * width;
        }
        bins[i] += density * take;
        remaining -= take;
        pos += take;
        if (pos >= pi)
            pos -= pi;
    }
}

double gk_integral(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

} // namespace

std::size_t bin_of(double theta, std::size_t bins) noexcept
{
    const double t = proj_point(theta).theta();
    auto i = static_cast<std::size_t>(t / pi * static_cast<double>(bins));
    return std::min(i, bins - 1);
}

double bin_center(std::size_t index, std::size_t bins) noexcept
{
    return (static_cast<double>(index) + 0.5) * pi / static_cast<double>(bins);
}

// ---------------------------------------------------------------------------
// proj_measure

proj_measure proj_measure::from_atoms(atom_list atoms)
{
    std::vector<double> masses;
    for (const auto& [p, m] : atoms)
        masses.push_back(m);
    check_masses(masses, "atom");
    proj_measure out;
    out.kind_ = measure_kind::atoms;
    out.atoms_ = std::move(atoms);
    return out;
}

proj_measure proj_measure::from_histogram(std::vector<double> masses)
{
    if (masses.empty())
        fail(error_kind::invalid_argument, "histogram needs at least one bin");
    check_masses(masses, "histogram");
    proj_measure out;
    out.kind_ = measure_kind::histogram;
    out.bins_ = std::move(masses);
    return out;
}

proj_measure proj_measure::lebesgue() { return pushed_lebesgue(mat2::identity()); }

proj_measure proj_measure::pushed_lebesgue(const mat2& p)
{
    if (!(p.det() > 0.0) || !p.finite())
        fail(error_kind::invalid_argument, "pushed Lebesgue needs an orientation-preserving map");
    proj_measure out;
    out.kind_ = measure_kind::pushed_lebesgue;
    out.map_ = p;
    return out;
}

double proj_measure::total_mass() const noexcept
{
    switch (kind_) {
    case measure_kind::atoms: {
        double t = 0.0;
        for (const auto& [p, m] : atoms_)
            t += m;
        return t;
    }
    case measure_kind::histogram:
        return std::accumulate(bins_.begin(), bins_.end(), 0.0);
    case measure_kind::pushed_lebesgue:
        return 1.0;
    }
    return 0.0;
}

std::vector<double> proj_measure::histogram(std::size_t bins) const
{
    if (bins == 0)
        fail(error_kind::invalid_argument, "bin count must be positive");
    std::vector<double> out(bins, 0.0);
    switch (kind_) {
    case measure_kind::atoms:
        for (const auto& [p, m] : atoms_)
            out[bin_of(p.theta(), bins)] += m;
        break;
    case measure_kind::histogram:
        if (bins_.size() == bins)
            return bins_;
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            const double w = pi / static_cast<double>(bins_.size());
            deposit(out, static_cast<double>(i) * w, w, bins_[i]);
        }
        break;
    case measure_kind::pushed_lebesgue: {
        if (bins == 1)
            return {1.0};
        // mass of [a, b) is Leb(P^-1 [a, b)) / pi; P^-1 preserves orientation
        const mat2 inv = inverse(map_);
        const double width = pi / static_cast<double>(bins);
        std::vector<double> pre(bins);
        for (std::size_t i = 0; i < bins; ++i)
            pre[i] = projective_action(inv, proj_point(static_cast<double>(i) * width)).theta();
        for (std::size_t i = 0; i < bins; ++i)
            out[i] = arc_length(pre[i], pre[(i + 1) % bins]) / pi;
        break;
    }
    }
    return out;
}

double proj_measure::integrate(const std::function<double(double)>& phi) const
{
    switch (kind_) {
    case measure_kind::atoms: {
        double s = 0.0;
        for (const auto& [p, m] : atoms_)
            s += m * phi(p.theta());
        return s;
    }
    case measure_kind::histogram: {
        double s = 0.0;
        for (std::size_t i = 0; i < bins_.size(); ++i)
            if (bins_[i] != 0.0)
                s += bins_[i] * phi(bin_center(i, bins_.size()));
        return s;
    }
    case measure_kind::pushed_lebesgue: {
        const mat2 p = map_;
        // smooth and pi-periodic integrands: the trapezoidal rule converges geometrically
        const auto f = [&](double t) { return phi(projective_action(p, proj_point(t)).theta()); };
        return boost::math::quadrature::trapezoidal(f, 0.0, pi, 1e-13, 14) / pi;
    }
    }
    return 0.0;
}

proj_measure proj_measure::push_forward(const mat2& l) const
{
    switch (kind_) {
    case measure_kind::atoms: {
        atom_list moved;
        moved.reserve(atoms_.size());
        for (const auto& [p, m] : atoms_)
            moved.emplace_back(projective_action(l, p), m);
        proj_measure out = *this;
        out.atoms_ = std::move(moved);
        return out;
    }
    case measure_kind::pushed_lebesgue:
        return pushed_lebesgue(l * map_);
    case measure_kind::histogram: {
        const std::size_t n = bins_.size();
        const double width = pi / static_cast<double>(n);
        std::vector<double> out(n, 0.0);
        const bool reversing = l.det() < 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (bins_[i] == 0.0)
                continue;
            const double a = projective_action(l, proj_point(static_cast<double>(i) * width)).theta();
            const double b = projective_action(l, proj_point(static_cast<double>(i + 1) * width)).theta();
            if (reversing)
                deposit(out, b, arc_length(b, a), bins_[i]);
            else
                deposit(out, a, n == 1 ? pi : arc_length(a, b), bins_[i]);
        }
        return from_histogram(std::move(out));
    }
    }
    return *this;
}

double total_variation(const proj_measure& a, const proj_measure& b, std::size_t bins)
{
    const auto ha = a.histogram(bins);
    const auto hb = b.histogram(bins);
    double s = 0.0;
    for (std::size_t i = 0; i < bins; ++i)
        s += std::abs(ha[i] - hb[i]);
    return 0.5 * s;
}

std::vector<double> test_integrals(const proj_measure& m)
{
    std::vector<double> out;
    out.reserve(2 * weak_star_frequencies);
    for (int k = 1; k <= weak_star_frequencies; ++k) {
        const double f = 2.0 * k;
        out.push_back(m.integrate([f](double t) { return std::cos(f * t); }));
        out.push_back(m.integrate([f](double t) { return std::sin(f * t); }));
    }
    return out;
}

namespace {

double max_gap(const std::vector<double>& u, const std::vector<double>& v)
{
    double g = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        g = std::max(g, std::abs(u[i] - v[i]));
    return g;
}

} // namespace

double weak_star_distance(const proj_measure& a, const proj_measure& b)
{
    return max_gap(test_integrals(a), test_integrals(b));
}

// ---------------------------------------------------------------------------
// empirical fiber measures

proj_measure empirical_fiber_measure(const cocycle_spec& spec, const base_system& sys, const base_point& x,
                                     const fiber_measure_options& opts)
{
    if (opts.iterations <= opts.burn_in || opts.burn_in < 0)
        fail(error_kind::invalid_argument, "iterations must exceed burn_in");
    if (opts.bins == 0 || !(opts.radius > 0.0))
        fail(error_kind::invalid_argument, "bins and radius must be positive");
    std::vector<double> counts(opts.bins, 0.0);
    std::size_t hits = 0;
    base_point p = x;
    vec2 v = proj_point(opts.initial_theta).unit();
    for (long k = 0; k < opts.iterations; ++k) {
        if (k >= opts.burn_in && point_distance(sys, p, x) <= opts.radius) {
            counts[bin_of(proj_point::from_vector(v).theta(), opts.bins)] += 1.0;
            ++hits;
        }
        v = evaluate(spec, sys, p) * v;
        const double n = std::hypot(v.x, v.y);
        v = {v.x / n, v.y / n};
        p = step(sys, p, 1);
    }
    if (hits < opts.min_samples)
        fail(error_kind::insufficient_samples, "only " + std::to_string(hits) + " orbit points within radius " +
                                                   std::to_string(opts.radius) + " of the base point (need " +
                                                   std::to_string(opts.min_samples) + ")");
    for (double& c : counts)
        c /= static_cast<double>(hits);
    // renormalise against accumulated rounding in the division
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (double& c : counts)
        c /= total;
    return proj_measure::from_histogram(std::move(counts));
}

// ---------------------------------------------------------------------------
// atoms

std::string atom_report::verdict_string() const
{
    switch (verdict) {
    case atom_verdict::atomic:
        return "atomic(" + std::to_string(atoms.size()) + ")";
    case atom_verdict::diffuse:
        return "diffuse";
    case atom_verdict::mixed:
        return "mixed";
    }
    return "?";
}

atom_report detect_atoms(const proj_measure& m, const atom_options& opts)
{
    if (opts.bins == 0 || opts.cluster_radius < 0)
        fail(error_kind::invalid_argument, "atom detection needs bins > 0 and cluster_radius >= 0");
    const std::size_t n = opts.bins;
    std::vector<double> mass = m.histogram(n);
    // Per-bin first moments of the doubled angle, so atom positions come out
    // exact for atom measures and at bin resolution otherwise.
    std::vector<double> mc(n, 0.0), ms(n, 0.0);
    if (m.kind() == measure_kind::atoms) {
        for (const auto& [p, w] : m.atoms()) {
            const std::size_t i = bin_of(p.theta(), n);
            mc[i] += w * std::cos(2.0 * p.theta());
            ms[i] += w * std::sin(2.0 * p.theta());
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            mc[i] = mass[i] * std::cos(2.0 * bin_center(i, n));
            ms[i] = mass[i] * std::sin(2.0 * bin_center(i, n));
        }
    }

    const auto r = static_cast<std::size_t>(std::min<long>(opts.cluster_radius, static_cast<long>(n - 1) / 2));
    const std::size_t width = 2 * r + 1;
    atom_report rep;
    double atom_total = 0.0;
    for (;;) {
        double best = -1.0;
        std::size_t best_start = 0;
        double window = 0.0;
        for (std::size_t k = 0; k < width; ++k)
            window += mass[k % n];
        for (std::size_t s = 0; s < n; ++s) {
            if (window > best + 1e-15) {
                best = window;
                best_start = s;
            }
            window += mass[(s + width) % n] - mass[s];
        }
        if (best < opts.mass_floor || best <= 0.0)
            break;
        double c = 0.0, sn = 0.0, w = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            const std::size_t i = (best_start + k) % n;
            c += mc[i];
            sn += ms[i];
            w += mass[i];
            mass[i] = mc[i] = ms[i] = 0.0;
        }
        rep.atoms.emplace_back(proj_point(0.5 * std::atan2(sn, c)), w);
        atom_total += w;
    }
    std::sort(rep.atoms.begin(), rep.atoms.end(),
              [](const auto& u, const auto& v) { return u.first.theta() < v.first.theta(); });
    rep.diffuse_mass = std::max(0.0, m.total_mass() - atom_total);

    if (rep.atoms.empty()) {
        rep.verdict = atom_verdict::diffuse;
        return rep;
    }
    const double j = static_cast<double>(rep.atoms.size());
    bool equal = atom_total >= 1.0 - opts.mass_floor;
    for (const auto& [p, w] : rep.atoms)
        equal = equal && std::abs(w - 1.0 / j) <= 0.1 / j;
    rep.verdict = equal ? atom_verdict::atomic : atom_verdict::mixed;
    return rep;
}

// ---------------------------------------------------------------------------
// invariant measures of one matrix

std::optional<std::pair<long, long>> rational_approximation(double x, double threshold, long max_denominator)
{
    // convergents h_k / k_k of the continued fraction of x
    long h_prev = 1, h = static_cast<long>(std::floor(x));
    long k_prev = 0, k = 1;
    double frac = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) < threshold)
            return std::pair{h, k};
        if (frac < 1e-300)
            break;
        const double inv = 1.0 / frac;
        const double a_real = std::floor(inv);
        if (a_real > static_cast<double>(max_denominator))
            break;
        const auto a = static_cast<long>(a_real);
        frac = inv - a_real;
        const long h_next = a * h + h_prev;
        const long k_next = a * k + k_prev;
        if (k_next > max_denominator)
            break;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
    return std::nullopt;
}

mat2 elliptic_conjugator(const mat2& l)
{
    // Fixed point z = x + i y of the Moebius map in the upper half plane; the
    // affine map P(i) = z conjugates l to a rotation.
    const double tr = l.trace();
    const double disc = 4.0 - tr * tr;
    if (!(disc > 0.0))
        fail(error_kind::invalid_argument, "elliptic_conjugator needs |trace| < 2");
    if (std::abs(l.c) < 1e-300)
        fail(error_kind::invalid_argument, "elliptic matrix with c = 0 is not elliptic");
    const double x = (l.a - l.d) / (2.0 * l.c);
    const double y = std::sqrt(disc) / (2.0 * std::abs(l.c));
    const double sy = std::sqrt(y);
    const mat2 p{sy, x / sy, 0.0, 1.0 / sy};
    return p;
}

invariant_measures invariant_measure_of_matrix(const mat2& l, double tol, int seed_grid)
{
    if (seed_grid < 1)
        fail(error_kind::invalid_argument, "seed grid must be positive");
    const mat_class cls = classify(l, tol);
    invariant_measures out;
    out.kind = cls.kind;
    switch (cls.kind) {
    case mat_kind::identity:
        out.all_measures = true;
        break;
    case mat_kind::hyperbolic:
    case mat_kind::parabolic:
        for (const auto& fp : cls.fixed_points)
            out.extremes.push_back(proj_measure::from_atoms({{fp, 1.0}}));
        break;
    case mat_kind::elliptic: {
        const mat2 p = elliptic_conjugator(l);
        const mat2 rot = inverse(p) * l * p;
        // P^1 rotation angle of the conjugated matrix, as a fraction of pi
        const double turn = proj_point(std::atan2(rot.c, rot.a)).theta() / pi;
        const auto rational = rational_approximation(turn);
        if (!rational) {
            out.extremes.push_back(proj_measure::pushed_lebesgue(p));
            break;
        }
        const long q = rational->second;
        out.period = q;
        for (int s = 0; s < seed_grid; ++s) {
            // seeds spread over one fundamental arc of the conjugated rotation
            proj_point v = projective_action(p, proj_point(pi * s / (static_cast<double>(q) * seed_grid)));
            atom_list orbit;
            for (long j = 0; j < q; ++j) {
                orbit.emplace_back(v, 1.0 / static_cast<double>(q));
                v = projective_action(l, v);
            }
            out.extremes.push_back(proj_measure::from_atoms(std::move(orbit)));
        }
        break;
    }
    }
    return out;
}

double distance_to_invariant_set(const invariant_measures& set, const proj_measure& target)
{
    if (set.all_measures)
        return 0.0;
    if (set.extremes.empty())
        fail(error_kind::invalid_argument, "invariant set has no extreme measures");
    const auto t = test_integrals(target);
    std::vector<std::vector<double>> e;
    for (const auto& m : set.extremes)
        e.push_back(test_integrals(m));
    if (e.size() == 1)
        return max_gap(e[0], t);

    // The max of |affine| functions is convex along a segment: ternary search.
    auto segment = [&](const std::vector<double>& u, const std::vector<double>& v) {
        auto at = [&](double s) {
            double g = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i)
                g = std::max(g, std::abs(s * u[i] + (1.0 - s) * v[i] - t[i]));
            return g;
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (at(m1) <= at(m2))
                hi = m2;
            else
                lo = m1;
        }
        return std::min({at(0.5 * (lo + hi)), at(0.0), at(1.0)});
    };
    double best = INFINITY;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j)
            best = std::min(best, segment(e[i], e[j]));
    return best;
}

double rational_rotation_equidistribution(long q, const std::function<double(double)>& phi)
{
    if (q < 1)
        fail(error_kind::invalid_argument, "q must be at least 1");
    long double sum = 0.0L;
    for (long j = 0; j < q; ++j)
        sum += phi(static_cast<double>(j) / static_cast<double>(q));
    const double riemann = static_cast<double>(sum / static_cast<long double>(q));
    return std::abs(riemann - gk_integral(phi, 0.0, 1.0));
}

// ---------------------------------------------------------------------------
// Proposition-3.1 style witnesses

std::string_view to_string(witness_kind kind) noexcept
{
    switch (kind) {
    case witness_kind::elliptic:
        return "elliptic";
    case witness_kind::parabolic:
        return "parabolic";
    case witness_kind::hyperbolic:
        return "hyperbolic";
    }
    return "?";
}

prop31_report prop31_witness(witness_kind kind, long n_max, proj_point p, proj_point q)
{
    if (n_max < 1)
        fail(error_kind::invalid_argument, "n_max must be at least 1");
    if (proj_distance(p, q) < 1e-12)
        fail(error_kind::invalid_argument, "p and q must differ");
    const auto target = proj_measure::from_atoms({{p, 0.5}, {q, 0.5}});

    // columns along p and q, oriented so det > 0
    vec2 up = p.unit(), uq = q.unit();
    if (up.x * uq.y - up.y * uq.x < 0.0)
        uq = {-uq.x, -uq.y};
    const mat2 frame{up.x, uq.x, up.y, uq.y};
    const mat2 frame_inv = inverse(frame);
    const mat2 shear{1.1, 0.3, 0.0, 1.0 / 1.1};

    prop31_report rep;
    rep.kind = kind;
    rep.n_max = n_max;
    rep.min_distance = INFINITY;
    for (long n = 1; n <= n_max; ++n) {
        const double s = 1.0 / static_cast<double>(n);
        mat2 l;
        switch (kind) {
        case witness_kind::elliptic:
            l = shear * mat2::rotation(s) * inverse(shear);
            break;
        case witness_kind::parabolic:
            l = mat2{1.0, s, 0.0, 1.0};
            break;
        case witness_kind::hyperbolic:
            l = frame * mat2::diag(1.0 + s, 1.0 / (1.0 + s)) * frame_inv;
            break;
        }
        const double d = distance_to_invariant_set(invariant_measure_of_matrix(l), target);
        rep.distances.push_back(d);
        rep.min_distance = std::min(rep.min_distance, d);
        rep.max_distance = std::max(rep.max_distance, d);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// text format

void write_columns(std::ostream& out, const proj_measure& m, std::size_t bins)
{
    const auto h = m.histogram(bins);
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < bins; ++i)
        out << bin_center(i, bins) << ' ' << h[i] << '\n';
    out.precision(old);
}

proj_measure read_columns(std::istream& in)
{
    std::vector<double> masses;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream row(line);
        double center = 0.0, mass = 0.0;
        if (!(row >> center >> mass))
            fail(error_kind::invalid_argument, "malformed measure row " + std::to_string(lineno));
        masses.push_back(mass);
    }
    return proj_measure::from_histogram(std::move(masses));
}

} // namespace cocyclelab
