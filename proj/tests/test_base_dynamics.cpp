#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/errors.hpp"
#include "doctest.h"

#include <cmath>

using namespace cocyclelab;

namespace {

double torus_gap(const base_point& p, double x, double y)
{
    const auto& t = p.as_torus();
    const auto wrap = [](double v) { return std::abs(v - std::round(v)); };
    return std::max(wrap(t.x - x), wrap(t.y - y));
}

base_point random_point(const base_system& sys, rng_engine& rng) { return sample_measure(sys, rng); }

} // namespace

TEST_CASE("step examples")
{
    const auto rot = base_system::rotation();
    CHECK(step(rot, base_point::circle(0.0)).as_circle().t == doctest::Approx(golden_mean).epsilon(1e-15));

    const auto cat = base_system::cat_map();
    const auto origin = step(cat, base_point::torus(0, 0), 5);
    CHECK(origin.as_torus().x == 0.0);
    CHECK(origin.as_torus().y == 0.0);
    CHECK(torus_gap(step(cat, base_point::torus(0.5, 0.5)), 0.5, 0.0) < 1e-15);
}

TEST_CASE("step inverts on every model")
{
    rng_engine rng(7);
    const std::vector<base_system> systems{
        base_system::rotation(),
        base_system::cat_map(),
        base_system::cat_map(2),
        base_system::shift({0.3, 0.7}),
        base_system::random_product({0.5, 0.5}, {golden_mean, 0.0}),
        base_system::product(base_system::rotation(), base_system::cat_map()),
    };
    for (const auto& sys : systems) {
        for (int trial = 0; trial < 20; ++trial) {
            const base_point x = random_point(sys, rng);
            const long n = static_cast<long>(rng() % 2001) - 1000;
            const base_point back = step(sys, step(sys, x, n), -n);
            CHECK(point_distance(sys, x, back) <= 1e-10);
        }
    }
}

TEST_CASE("sample_measure is reproducible and has the right marginals")
{
    const auto rot = base_system::rotation();
    CHECK(sample_measure(rot, 42).as_circle().t == sample_measure(rot, 42).as_circle().t);

    const auto shift = base_system::shift({0.5, 0.5});
    const long n = 100000;
    long zeros = 0;
    for (long i = 0; i < n; ++i)
        zeros += sample_measure(shift, static_cast<std::uint64_t>(i)).as_shift().symbol(0) == 0;
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) <= 3 * std::sqrt(0.25 / n));

    const auto prod = base_system::product(base_system::rotation(), base_system::cat_map());
    const auto p = sample_measure(prod, 5);
    CHECK(p.coordinates().size() == 3);
}

TEST_CASE("cat map orbits are exact on the fixed-point lattice")
{
    const auto cat = base_system::cat_map(2);
    const auto x = base_point::torus(0.123456789, 0.987654321);
    const auto back = step(cat, step(cat, x, 1000), -1000);
    CHECK(back.as_torus().fx == x.as_torus().fx);
    CHECK(back.as_torus().fy == x.as_torus().fy);
}

TEST_CASE("shift windows are pure functions of the seed")
{
    const auto src = symbol_source::bernoulli(99, {0.5, 0.5});
    const shift_point a{src, 0};
    const auto w1 = a.window(-50, 50);
    const auto w2 = a.window(-50, 50);
    CHECK(w1 == w2);
    const auto wide = a.window(-500, 500);
    CHECK(std::equal(w1.begin(), w1.end(), wide.begin() + 450));
}

TEST_CASE("Birkhoff average of the zeroth symbol")
{
    for (double p0 : {0.5, 0.3}) {
        const auto sys = base_system::shift({p0, 1 - p0});
        base_point x = sample_measure(sys, 17);
        const long n = 100000;
        long hits = 0;
        for (long i = 0; i < n; ++i) {
            hits += x.as_shift().symbol(0) == 0;
            x = step(sys, x);
        }
        CHECK(std::abs(static_cast<double>(hits) / n - p0) <= 3 * std::sqrt(p0 * (1 - p0) / n));
    }
}

TEST_CASE("rates of the models")
{
    const auto cat = rates(base_system::cat_map());
    CHECK(cat.nu == doctest::Approx(1 / cat_lambda).epsilon(1e-15));
    CHECK(cat.nu_hat == doctest::Approx(1 / cat_lambda).epsilon(1e-15));
    CHECK(cat_lambda == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-15));
    const auto rot = rates(base_system::rotation());
    CHECK(rot.gamma == 1.0);
    CHECK(rot.gamma_hat == 1.0);
    CHECK(rot.has_center);
}

TEST_CASE("leaf_point examples")
{
    const auto cat = base_system::cat_map();
    const auto o = leaf_point(cat, base_point::torus(0, 0), leaf_kind::s, 0.0);
    CHECK(torus_gap(o, 0, 0) == 0.0);

    const auto x = base_point::torus(0.3, 0.8);
    const auto there = leaf_point(cat, x, leaf_kind::u, 0.45);
    const auto back = leaf_point(cat, there, leaf_kind::u, -0.45);
    CHECK(torus_gap(back, 0.3, 0.8) <= 1e-12);

    const auto prod = base_system::product(base_system::rotation(), base_system::cat_map());
    const auto px = base_point::product(base_point::circle(0.37), x);
    const auto moved = leaf_point(prod, px, leaf_kind::s, 0.2);
    CHECK(moved.left().as_circle().t == 0.37);
    const auto direct = leaf_point(cat, x, leaf_kind::s, 0.2);
    CHECK(point_distance(cat, moved.right(), direct) == 0.0);

    CHECK_THROWS_AS(leaf_point(base_system::rotation(), base_point::circle(0.1), leaf_kind::s, 0.1), lab_error);
    try {
        leaf_point(base_system::rotation(), base_point::circle(0.1), leaf_kind::u, 0.1);
    } catch (const lab_error& e) {
        CHECK(e.kind() == error_kind::leaf_absent);
    }
}

TEST_CASE("leaf_distance examples")
{
    const auto cat = base_system::cat_map();
    const auto x = base_point::torus(0.11, 0.62);
    CHECK(leaf_distance(cat, x, x, leaf_kind::s).value() == 0.0);
    const auto y = leaf_point(cat, x, leaf_kind::u, 0.7);
    CHECK(leaf_distance(cat, x, y, leaf_kind::u).value() == doctest::Approx(0.7).epsilon(1e-9));
    const auto b = cat_basis();
    const auto off = base_point::torus(wrap_unit(0.11 + 0.1 * b.sx), wrap_unit(0.62 + 0.1 * b.sy));
    CHECK_FALSE(leaf_distance(cat, x, off, leaf_kind::u).has_value());
}

TEST_CASE("property: stable leaves contract by 1/lambda")
{
    const auto cat = base_system::cat_map();
    rng_engine rng(31);
    for (int i = 0; i < 300; ++i) {
        const base_point x = random_point(cat, rng);
        const double d = 2.0 * uniform01(rng) - 1.0;
        const base_point y = leaf_point(cat, x, leaf_kind::s, d);
        const auto dist = leaf_distance(cat, step(cat, x), step(cat, y), leaf_kind::s);
        REQUIRE(dist.has_value());
        CHECK(std::abs(*dist - d / cat_lambda) <= 1e-9);
        const auto udist = leaf_distance(cat, step(cat, x, -1), step(cat, leaf_point(cat, x, leaf_kind::u, d), -1),
                                         leaf_kind::u);
        REQUIRE(udist.has_value());
        CHECK(std::abs(*udist - d / cat_lambda) <= 1e-9);
    }
}

TEST_CASE("su_connect examples")
{
    const auto cat = base_system::cat_map();
    const auto x = base_point::torus(0.4, 0.1);
    CHECK(su_connect(cat, x, x).empty());

    const auto path = su_connect(cat, base_point::torus(0, 0), base_point::torus(0.25, 0.5));
    REQUIRE(path.legs.size() >= 2);
    CHECK(path_is_valid(cat, path));
    CHECK(path.legs.front().kind == leaf_kind::u);
    CHECK(path.legs.back().kind == leaf_kind::s);
    CHECK(torus_gap(path.legs.back().end, 0.25, 0.5) <= 1e-9);

    const auto prod = base_system::product(base_system::rotation(), base_system::cat_map());
    try {
        su_connect(prod, base_point::product(base_point::circle(0.1), x),
                   base_point::product(base_point::circle(0.2), x));
        FAIL("expected unsupported_system");
    } catch (const lab_error& e) {
        CHECK(e.kind() == error_kind::unsupported_system);
    }
}

TEST_CASE("property: su_connect yields valid (K, L)-paths")
{
    const auto cat = base_system::cat_map();
    const auto prod = base_system::product(base_system::rotation(), base_system::cat_map());
    rng_engine rng(1234);
    for (int i = 0; i < 300; ++i) {
        const base_point x = random_point(cat, rng);
        const base_point y = random_point(cat, rng);
        const double max_leg = 0.1 + uniform01(rng);
        const su_path path = su_connect(cat, x, y, max_leg);
        CHECK(path_is_valid(cat, path));
        CHECK(path.is_kl_path(path.legs.size(), max_leg + 1e-12));
        REQUIRE_FALSE(path.empty());
        CHECK(point_distance(cat, path.legs.back().end, y) <= 1e-9);

        const double t = uniform01(rng);
        const su_path ppath = su_connect(prod, base_point::product(base_point::circle(t), x),
                                         base_point::product(base_point::circle(t), y), max_leg);
        CHECK(path_is_valid(prod, ppath));
        for (const auto& leg : ppath.legs) {
            CHECK(leg.start.left().as_circle().t == t);
            CHECK(leg.end.left().as_circle().t == t);
        }
        const su_path rev = path.reversed();
        CHECK(path_is_valid(cat, rev));
        CHECK(point_distance(cat, rev.legs.back().end, x) <= 1e-9);
    }
}

TEST_CASE("center bunching")
{
    const auto prod = base_system::product(base_system::rotation(), base_system::cat_map());
    const auto rep = check_center_bunching(prod);
    CHECK(rep.center_bunched());
    CHECK(rep.stable_margin == doctest::Approx(1 - 1 / cat_lambda).epsilon(1e-12));

    try {
        check_center_bunching(base_system::cat_map());
        FAIL("expected trivial_center");
    } catch (const lab_error& e) {
        CHECK(e.kind() == error_kind::trivial_center);
    }

    rate_data synthetic;
    synthetic.nu = synthetic.nu_hat = 0.99;
    synthetic.gamma = synthetic.gamma_hat = 0.9;
    synthetic.has_stable = synthetic.has_unstable = synthetic.has_center = true;
    const auto slow = base_system::product(base_system::rotation(), base_system::cat_map()).with_rates(synthetic);
    CHECK_FALSE(check_center_bunching(slow).center_bunched());
}
