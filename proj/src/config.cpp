#include "cocyclelab/config.hpp"

#include "cocyclelab/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cocyclelab {

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& message)
{
    fail(error_kind::config, key + ": " + message);
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

long parse_long(std::string_view text, const std::string& key)
{
    text = trim(text);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        config_fail(key, "expected an integer, got '" + std::string(text) + "'");
    return v;
}

std::uint64_t parse_seed(std::string_view text, const std::string& key)
{
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        config_fail(key, "expected an unsigned seed, got '" + std::string(text) + "'");
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// config_map

config_map config_map::parse(std::string_view text, std::string_view origin)
{
    config_map out;
    std::size_t lineno = 0;
    for (std::string_view line : split(text, '\n')) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        if (line.find('=') == std::string_view::npos)
            fail(error_kind::config,
                 std::string(origin) + ":" + std::to_string(lineno) + ": expected key=value, got '" +
                     std::string(line) + "'");
        out.apply(line);
    }
    return out;
}

config_map config_map::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(error_kind::config, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void config_map::apply(std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        fail(error_kind::config, "expected key=value, got '" + std::string(assignment) + "'");
    const auto key = trim(assignment.substr(0, eq));
    if (key.empty())
        fail(error_kind::config, "empty key in '" + std::string(assignment) + "'");
    set(std::string(key), std::string(trim(assignment.substr(eq + 1))));
}

void config_map::set(const std::string& key, const std::string& value) { entries_[key] = value; }

void config_map::erase_prefix(const std::string& prefix)
{
    for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.starts_with(prefix);)
        it = entries_.erase(it);
}

bool config_map::has(const std::string& key) const { return entries_.count(key) != 0; }

bool config_map::has_prefix(const std::string& prefix) const
{
    const auto it = entries_.lower_bound(prefix);
    return it != entries_.end() && it->first.starts_with(prefix);
}

std::optional<std::string> config_map::get(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    used_.insert(key);
    return it->second;
}

std::string config_map::text(const std::string& key) const
{
    auto v = get(key);
    if (!v)
        config_fail(key, "missing");
    return *v;
}

std::string config_map::text_or(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double config_map::real(const std::string& key) const { return parse_real(text(key), key); }

double config_map::real_or(const std::string& key, double fallback) const
{
    const auto v = get(key);
    return v ? parse_real(*v, key) : fallback;
}

long config_map::integer(const std::string& key) const { return parse_long(text(key), key); }

long config_map::integer_or(const std::string& key, long fallback) const
{
    const auto v = get(key);
    return v ? parse_long(*v, key) : fallback;
}

std::vector<double> config_map::reals(const std::string& key) const { return parse_reals(text(key), key); }

void config_map::reject_unused() const
{
    for (const auto& [k, v] : entries_)
        if (!used_.count(k))
            config_fail(k, "unknown or unused key");
}

// ---------------------------------------------------------------------------
// scalar parsers

double parse_real(std::string_view text, const std::string& key)
{
    text = trim(text);
    if (text == "golden")
        return golden_mean;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
        config_fail(key, "expected a finite real, got '" + std::string(text) + "'");
    return v;
}

std::vector<double> parse_reals(std::string_view text, const std::string& key)
{
    std::vector<double> out;
    for (auto part : split(text, ','))
        out.push_back(parse_real(part, key));
    return out;
}

mat2 parse_matrix(std::string_view text, const std::string& key)
{
    const auto v = parse_reals(text, key);
    if (v.size() != 4)
        config_fail(key, "a matrix needs 4 entries a,b,c,d, got " + std::to_string(v.size()));
    return {v[0], v[1], v[2], v[3]};
}

trig_poly parse_trig_poly(std::string_view text, const std::string& key)
{
    trig_poly p;
    text = trim(text);
    if (text.empty())
        config_fail(key, "empty polynomial");
    if (text.find(':') == std::string_view::npos) {
        p.constant = parse_real(text, key);
        return p;
    }
    for (auto part : split(text, ';')) {
        if (part.empty())
            continue;
        const auto colon = part.find(':');
        if (colon == std::string_view::npos)
            config_fail(key, "term '" + std::string(part) + "' lacks a tag");
        const auto tag = trim(part.substr(0, colon));
        const auto body = trim(part.substr(colon + 1));
        if (tag == "const") {
            p.constant += parse_real(body, key);
        } else if (tag == "lin") {
            const auto ab = split(body, ',');
            if (ab.size() != 2)
                config_fail(key, "lin needs two integer slopes");
            p.lin_x += static_cast<int>(parse_long(ab[0], key));
            p.lin_y += static_cast<int>(parse_long(ab[1], key));
        } else if (tag == "cos" || tag == "sin") {
            const auto c2 = body.find(':');
            if (c2 == std::string_view::npos)
                config_fail(key, std::string(tag) + " needs kx,ky:value");
            const auto k = split(body.substr(0, c2), ',');
            if (k.size() != 2)
                config_fail(key, std::string(tag) + " needs two integer frequencies");
            trig_term t;
            t.kx = static_cast<int>(parse_long(k[0], key));
            t.ky = static_cast<int>(parse_long(k[1], key));
            (tag == "cos" ? t.cos_coef : t.sin_coef) = parse_real(body.substr(c2 + 1), key);
            p.terms.push_back(t);
        } else {
            config_fail(key, "unknown term tag '" + std::string(tag) + "'");
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// builders

base_system build_base(const config_map& cfg, const std::string& prefix)
{
    const std::string kind_key = prefix + ".kind";
    const std::string kind = cfg.text(kind_key);
    base_system sys;
    try {
        if (kind == "rotation") {
            sys = base_system::rotation(cfg.real_or(prefix + ".omega", golden_mean));
        } else if (kind == "cat") {
            const long power = cfg.integer_or(prefix + ".power", 1);
            if (power < 1)
                config_fail(prefix + ".power", "must be at least 1");
            sys = base_system::cat_map(static_cast<int>(power));
        } else if (kind == "shift") {
            sys = base_system::shift(cfg.has(prefix + ".probs") ? cfg.reals(prefix + ".probs")
                                                                 : std::vector<double>{0.5, 0.5});
        } else if (kind == "random-product") {
            const auto probs = cfg.has(prefix + ".probs") ? cfg.reals(prefix + ".probs")
                                                          : std::vector<double>{0.5, 0.5};
            std::vector<double> shifts(probs.size(), 0.0);
            shifts[0] = golden_mean;
            if (cfg.has(prefix + ".fiber_shift"))
                shifts = cfg.reals(prefix + ".fiber_shift");
            sys = base_system::random_product(probs, shifts);
        } else if (kind == "product") {
            sys = base_system::product(build_base(cfg, prefix + ".left"), build_base(cfg, prefix + ".right"));
        } else {
            config_fail(kind_key, "unknown base kind '" + kind + "' (rotation, cat, shift, random-product, product)");
        }
    } catch (const lab_error& e) {
        if (e.kind() == error_kind::config)
            throw;
        config_fail(prefix, e.what());
    }

    const std::string rp = prefix + ".rates.";
    if (cfg.has_prefix(rp)) {
        rate_data r = rates(sys);
        r.nu = cfg.real_or(rp + "nu", r.nu);
        r.nu_hat = cfg.real_or(rp + "nu_hat", r.nu_hat);
        r.gamma = cfg.real_or(rp + "gamma", r.gamma);
        r.gamma_hat = cfg.real_or(rp + "gamma_hat", r.gamma_hat);
        sys = sys.with_rates(r);
    }
    return sys;
}

cocycle_spec build_spec(const config_map& cfg, const std::string& prefix)
{
    const std::string kind_key = prefix + ".kind";
    const std::string kind = cfg.text(kind_key);
    auto poly = [&](const char* name) {
        const std::string key = prefix + "." + name;
        return parse_trig_poly(cfg.text(key), key);
    };
    auto indexed = [&](const char* group) {
        std::vector<cocycle_spec> out;
        for (int i = 0;; ++i) {
            const std::string sub = prefix + "." + group + "." + std::to_string(i);
            if (!cfg.has_prefix(sub + "."))
                break;
            out.push_back(build_spec(cfg, sub));
        }
        if (out.empty())
            config_fail(prefix + "." + group + ".0.kind", "missing");
        return out;
    };

    cocycle_spec spec;
    try {
        if (kind == "constant") {
            const std::string key = prefix + ".matrix";
            spec = specs::constant(parse_matrix(cfg.text(key), key));
        } else if (kind == "rotation") {
            spec = specs::rotation_valued(poly("h"));
        } else if (kind == "diagonal") {
            spec = specs::diagonal_valued(poly("g"));
        } else if (kind == "entrywise") {
            spec = specs::entrywise(poly("a"), poly("b"), poly("c"), poly("d"));
        } else if (kind == "coboundary") {
            spec = specs::coboundary(build_spec(cfg, prefix + ".conjugator"), build_spec(cfg, prefix + ".inner"));
        } else if (kind == "lift") {
            const std::string side_key = prefix + ".side";
            const std::string side = cfg.text(side_key);
            if (side != "left" && side != "right")
                config_fail(side_key, "expected left or right, got '" + side + "'");
            spec = specs::lift(side == "left" ? factor_side::left : factor_side::right,
                               build_spec(cfg, prefix + ".inner"));
        } else if (kind == "selector") {
            spec = specs::selector(indexed("symbols"));
        } else if (kind == "composite") {
            spec = specs::composite(indexed("factors"));
        } else if (kind == "sl") {
            spec = specs::sl_part(build_spec(cfg, prefix + ".inner"));
        } else if (kind == "psl") {
            spec = specs::psl(build_spec(cfg, prefix + ".inner"));
        } else {
            config_fail(kind_key, "unknown cocycle kind '" + kind +
                                      "' (constant, rotation, diagonal, entrywise, coboundary, lift, selector, "
                                      "composite, sl, psl)");
        }
        if (const auto a = cfg.get(prefix + ".alpha"))
            spec = spec.with_alpha(parse_real(*a, prefix + ".alpha"));
        if (const auto c = cfg.get(prefix + ".holder_constant"))
            spec = spec.with_holder_constant(parse_real(*c, prefix + ".holder_constant"));
    } catch (const lab_error& e) {
        if (e.kind() == error_kind::config)
            throw;
        config_fail(prefix, e.what());
    }
    return spec;
}

namespace {

std::size_t coordinate_count(const base_system& sys)
{
    struct visitor {
        std::size_t operator()(const rotation_system&) const { return 1; }
        std::size_t operator()(const cat_map_system&) const { return 2; }
        std::size_t operator()(const shift_system&) const { return 1; }
        std::size_t operator()(const random_product_system&) const { return 2; }
        std::size_t operator()(const product_system& p) const
        {
            return coordinate_count(*p.left) + coordinate_count(*p.right);
        }
    };
    return std::visit(visitor{}, sys.value());
}

base_point build_point(const base_system& sys, const std::vector<std::string_view>& parts, std::size_t& at,
                       const std::string& key)
{
    struct visitor {
        const std::vector<std::string_view>& parts;
        std::size_t& at;
        const std::string& key;

        double next_real() const { return parse_real(parts[at++], key); }
        std::uint64_t next_seed() const { return parse_seed(parts[at++], key); }

        base_point operator()(const rotation_system&) const { return base_point::circle(next_real()); }
        base_point operator()(const cat_map_system&) const
        {
            const double x = next_real();
            return base_point::torus(x, next_real());
        }
        base_point operator()(const shift_system& s) const
        {
            return base_point::shift(symbol_source::bernoulli(next_seed(), s.probs));
        }
        base_point operator()(const random_product_system& r) const
        {
            auto seq = base_point::shift(symbol_source::bernoulli(next_seed(), r.probs));
            return base_point::product(std::move(seq), base_point::circle(next_real()));
        }
        base_point operator()(const product_system& p) const
        {
            auto l = build_point(*p.left, parts, at, key);
            auto r = build_point(*p.right, parts, at, key);
            return base_point::product(std::move(l), std::move(r));
        }
    };
    return std::visit(visitor{parts, at, key}, sys.value());
}

} // namespace

base_point parse_point(const base_system& sys, std::string_view text, const std::string& key)
{
    const auto parts = split(text, ',');
    const std::size_t want = coordinate_count(sys);
    if (parts.size() != want)
        config_fail(key, "base '" + sys.name() + "' needs " + std::to_string(want) + " coordinates, got " +
                             std::to_string(parts.size()));
    std::size_t at = 0;
    return build_point(sys, parts, at, key);
}

// ---------------------------------------------------------------------------
// named configs

namespace {

constexpr std::string_view theorem_b = R"(# rotation x cat map with a cocycle that only sees the rotation
base.kind=product
base.left.kind=rotation
base.left.omega=golden
base.right.kind=cat
base.right.power=2
cocycle.kind=lift
cocycle.side=left
cocycle.inner.kind=composite
cocycle.inner.factors.0.kind=rotation
cocycle.inner.factors.0.h=lin:1,0
cocycle.inner.factors.1.kind=constant
cocycle.inner.factors.1.matrix=2,0,0,0.5
cocycle.inner.factors.2.kind=rotation
cocycle.inner.factors.2.h=lin:-1,0
)";

constexpr std::string_view random_product = R"(# Bernoulli shift x circle; symbol 0 rotates and applies A0, symbol 1 does nothing
base.kind=random-product
base.probs=0.5,0.5
base.fiber_shift=golden,0
cocycle.kind=selector
cocycle.symbols.0.kind=constant
cocycle.symbols.0.matrix=2,0,0,0.5
cocycle.symbols.1.kind=constant
cocycle.symbols.1.matrix=1,0,0,1
)";

} // namespace

std::optional<std::string> named_config(std::string_view name)
{
    if (name == "theorem-b")
        return std::string(theorem_b);
    if (name == "random-product")
        return std::string(random_product);
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> a0_family_entries(a0_family family, const std::string& prefix)
{
    switch (family) {
    case a0_family::hyperbolic:
        return {{prefix + ".kind", "constant"}, {prefix + ".matrix", "2,0,0,0.5"}};
    case a0_family::rotations:
        return {{prefix + ".kind", "rotation"}, {prefix + ".h", "const:0.3;cos:1,0:0.1"}};
    case a0_family::conjugated:
        return {{prefix + ".kind", "composite"},
                {prefix + ".factors.0.kind", "rotation"},
                {prefix + ".factors.0.h", "lin:1,0"},
                {prefix + ".factors.1.kind", "constant"},
                {prefix + ".factors.1.matrix", "2,0,0,0.5"},
                {prefix + ".factors.2.kind", "rotation"},
                {prefix + ".factors.2.h", "lin:-1,0"}};
    }
    return {};
}

std::vector<std::string> named_config_names() { return {"theorem-b", "random-product"}; }

} // namespace cocyclelab
