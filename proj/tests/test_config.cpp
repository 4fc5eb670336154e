#include "cocyclelab/config.hpp"
#include "cocyclelab/constructions.hpp"
#include "cocyclelab/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>

using namespace cocyclelab;

namespace {

error_kind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const lab_error& e) {
        return e.kind();
    }
    return error_kind::invalid_argument;
}

std::string message_of(auto&& fn)
{
    try {
        fn();
    } catch (const lab_error& e) {
        return e.what();
    }
    return {};
}

trig_poly random_poly(rng_engine& rng)
{
    trig_poly p;
    p.constant = 2 * uniform01(rng) - 1;
    p.lin_x = static_cast<int>(rng() % 3) - 1;
    p.lin_y = static_cast<int>(rng() % 3) - 1;
    const int terms = static_cast<int>(rng() % 4);
    for (int i = 0; i < terms; ++i) {
        trig_term t;
        t.kx = static_cast<int>(rng() % 5) - 2;
        t.ky = static_cast<int>(rng() % 5) - 2;
        if (rng() % 2)
            t.cos_coef = uniform01(rng) - 0.5;
        else
            t.sin_coef = uniform01(rng) - 0.5;
        p.terms.push_back(t);
    }
    return p;
}

} // namespace

TEST_CASE("config parsing")
{
    const auto cfg = config_map::parse("# comment\n\nbase.kind = rotation  # trailing\nbase.omega=0.25\n");
    CHECK(cfg.entries().size() == 2);
    CHECK(cfg.text("base.kind") == "rotation");
    CHECK(cfg.real("base.omega") == 0.25);
    CHECK(cfg.real_or("missing", 3.0) == 3.0);

    CHECK(kind_of([] { config_map::parse("base.kind rotation\n"); }) == error_kind::config);
    CHECK(message_of([] { config_map::parse("a=1\nnonsense\n", "f.cfg"); }).find("f.cfg:2") != std::string::npos);
    CHECK(message_of([&] { (void)cfg.integer("base.omega"); }).find("base.omega") != std::string::npos);

    auto over = cfg;
    over.apply("base.omega=golden");
    CHECK(over.real("base.omega") == golden_mean);
}

TEST_CASE("unused keys are rejected by name")
{
    const auto cfg = config_map::parse("base.kind=rotation\nbase.omgea=0.3\n");
    (void)build_base(cfg);
    const auto msg = message_of([&] { cfg.reject_unused(); });
    CHECK(msg.find("base.omgea") != std::string::npos);
}

TEST_CASE("parse_matrix and parse_trig_poly")
{
    CHECK(parse_matrix("2, 0, 0, 0.5") == mat2::diag(2, 0.5));
    CHECK(kind_of([] { parse_matrix("1,2,3"); }) == error_kind::config);

    const auto p = parse_trig_poly("const:0.5;lin:1,0;cos:1,0:0.2;sin:0,1:-0.1");
    CHECK(p.constant == 0.5);
    CHECK(p.lin_x == 1);
    REQUIRE(p.terms.size() == 2);
    CHECK(p(0.25, 0.0) == doctest::Approx(0.75 + 0.2 * std::cos(pi / 2)));
    CHECK(parse_trig_poly("0.7").constant == 0.7);
    CHECK(kind_of([] { parse_trig_poly("tan:1,0:1"); }) == error_kind::config);
    CHECK(kind_of([] { parse_trig_poly("lin:0.5,0"); }) == error_kind::config);
}

TEST_CASE("property: trig_poly string round trip")
{
    rng_engine rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = random_poly(rng);
        const auto q = parse_trig_poly(p.to_string());
        for (int k = 0; k < 5; ++k) {
            const double x = uniform01(rng), y = uniform01(rng);
            CHECK(q(x, y) == p(x, y));
        }
        CHECK(q.to_string() == p.to_string());
    }
}

TEST_CASE("base builders")
{
    const auto cat = build_base(config_map::parse("base.kind=cat\nbase.power=2\n"));
    CHECK(cat.name().find("cat") != std::string::npos);
    CHECK(rates(cat).nu == doctest::Approx(1.0 / (cat_lambda * cat_lambda)));

    const auto over = build_base(config_map::parse("base.kind=product\nbase.left.kind=rotation\nbase.right.kind=cat\n"
                                                  "base.rates.nu=0.99\nbase.rates.gamma=0.9\n"));
    CHECK(rates(over).nu == 0.99);
    CHECK_FALSE(check_center_bunching(over).center_bunched());

    CHECK(kind_of([] { build_base(config_map::parse("base.kind=torus\n")); }) == error_kind::config);
    CHECK(kind_of([] { build_base(config_map::parse("base.kind=shift\nbase.probs=0.5,0.6\n")); }) ==
          error_kind::config);
    CHECK(message_of([] { build_base(config_map::parse("base.kind=product\nbase.left.kind=rotation\n")); })
              .find("base.right.kind") != std::string::npos);
}

TEST_CASE("spec builders")
{
    const auto sys = base_system::rotation();
    const auto cob = config_map::parse(
        "cocycle.kind=coboundary\n"
        "cocycle.conjugator.kind=rotation\ncocycle.conjugator.h=sin:1,0:0.05\n"
        "cocycle.inner.kind=constant\ncocycle.inner.matrix=1.2,0,0,0.8333333333333334\n"
        "cocycle.alpha=0.5\n");
    const auto spec = build_spec(cob);
    CHECK(spec.alpha() == 0.5);
    trig_poly h;
    h.terms.push_back({1, 0, 0.0, 0.05});
    const auto expected = specs::coboundary(specs::rotation_valued(h), specs::constant({1.2, 0, 0, 0.8333333333333334}));
    for (double t : {0.0, 0.1, 0.77})
        CHECK(evaluate(spec, sys, base_point::circle(t)) == evaluate(expected, sys, base_point::circle(t)));
    cob.reject_unused();

    const auto bad = config_map::parse("cocycle.kind=composite\n");
    CHECK(message_of([&] { build_spec(bad); }).find("cocycle.factors.0.kind") != std::string::npos);
    CHECK(kind_of([] { build_spec(config_map::parse("cocycle.kind=constant\ncocycle.matrix=0,0,0,0\n")); }) ==
          error_kind::config);
}

TEST_CASE("named configs build and match the shipped constructions")
{
    for (const auto& name : named_config_names()) {
        const auto text = named_config(name);
        REQUIRE(text.has_value());
        const auto cfg = config_map::parse(*text, name);
        (void)build_base(cfg);
        (void)build_spec(cfg);
        cfg.reject_unused();
    }
    CHECK_FALSE(named_config("nope").has_value());

    const auto tb = config_map::parse(*named_config("theorem-b"));
    const auto sys = build_base(tb);
    const auto spec = build_spec(tb);
    const auto ref = default_trivial_extension(a0_family::conjugated);
    rng_engine rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto x = sample_measure(sys, rng);
        CHECK(distance(evaluate(spec, sys, x), evaluate(ref.spec(), ref.system(), x)) <= 1e-15);
    }

    const auto rp = config_map::parse(*named_config("random-product"));
    const auto rsys = build_base(rp);
    const auto rspec = build_spec(rp);
    const auto rref = default_random_product();
    for (int i = 0; i < 20; ++i) {
        const auto x = sample_measure(rsys, rng);
        CHECK(evaluate(rspec, rsys, x) == evaluate(rref.spec(), rref.system(), x));
        CHECK(step(rsys, x, 1).right().as_circle().t == step(rref.system(), x, 1).right().as_circle().t);
    }
}

TEST_CASE("parse_point")
{
    const auto tb = build_base(config_map::parse(*named_config("theorem-b")));
    const auto p = parse_point(tb, "0.1, 0.3, 0.7");
    CHECK(p.left().as_circle().t == 0.1);
    CHECK(p.right().as_torus().y == doctest::Approx(0.7));
    CHECK(kind_of([&] { parse_point(tb, "0.1,0.3"); }) == error_kind::config);

    const auto rp = build_base(config_map::parse(*named_config("random-product")));
    const auto q = parse_point(rp, "42,0.5");
    CHECK(q.right().as_circle().t == 0.5);
    CHECK(parse_point(rp, "42,0.5").left().as_shift().window(0, 50) == q.left().as_shift().window(0, 50));
    CHECK(kind_of([&] { parse_point(rp, "-1,0.5"); }) == error_kind::config);
}

TEST_CASE("a0 family entries reproduce the shipped families")
{
    const auto sys = base_system::rotation();
    for (auto family : {a0_family::hyperbolic, a0_family::rotations, a0_family::conjugated}) {
        config_map cfg;
        for (const auto& [k, v] : a0_family_entries(family, "cocycle"))
            cfg.set(k, v);
        const auto spec = build_spec(cfg);
        cfg.reject_unused();
        for (double t : {0.0, 0.13, 0.5, 0.91})
            CHECK(evaluate(spec, sys, base_point::circle(t)) == evaluate(a0_of(family), sys, base_point::circle(t)));
    }
}
