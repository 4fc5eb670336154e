#pragma once

// Flat key=value configuration with dotted prefixes, e.g.
//
//   base.kind=product
//   base.left.kind=rotation
//   base.right.kind=cat
//   cocycle.kind=lift
//   cocycle.side=left
//   cocycle.inner.kind=constant
//   cocycle.inner.matrix=2,0,0,0.5
//
// Every failure is a lab_error of kind `config` naming the offending key.

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/constructions.hpp"
#include "cocyclelab/matrix.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cocyclelab {

class config_map {
public:
    /// '#' starts a comment; blank lines are skipped; later keys override earlier ones.
    static config_map parse(std::string_view text, std::string_view origin = "config");
    static config_map load(const std::string& path);

    /// Applies "key=value".
    void apply(std::string_view assignment);
    void set(const std::string& key, const std::string& value);
    void erase_prefix(const std::string& prefix);

    bool has(const std::string& key) const;
    bool has_prefix(const std::string& prefix) const;

    // Accessors mark the key as consumed.
    std::optional<std::string> get(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    double real(const std::string& key) const;
    double real_or(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer_or(const std::string& key, long fallback) const;
    std::vector<double> reals(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    /// Throws for keys no accessor has consumed.
    void reject_unused() const;

private:
    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> used_;
};

/// Real number; "golden" stands for the golden mean.
double parse_real(std::string_view text, const std::string& key);
std::vector<double> parse_reals(std::string_view text, const std::string& key);

/// "a,b,c,d" row major.
mat2 parse_matrix(std::string_view text, const std::string& key = "matrix");

/// "const:c;lin:a,b;cos:kx,ky:v;sin:kx,ky:v", any subset and order; a bare
/// number is a constant. Inverse of trig_poly::to_string.
trig_poly parse_trig_poly(std::string_view text, const std::string& key = "poly");

base_system build_base(const config_map& cfg, const std::string& prefix = "base");
cocycle_spec build_spec(const config_map& cfg, const std::string& prefix = "cocycle");

/// Comma separated coordinates in factor order: t on a circle, x,y on the
/// torus, a Bernoulli seed for a shift factor, seed,t on a random product.
base_point parse_point(const base_system& sys, std::string_view text, const std::string& key = "point");

/// Key/value pairs describing a0_of(family) under `prefix`.
std::vector<std::pair<std::string, std::string>> a0_family_entries(a0_family family, const std::string& prefix);

/// Built-in configs: "theorem-b" and "random-product".
std::optional<std::string> named_config(std::string_view name);
std::vector<std::string> named_config_names();

} // namespace cocyclelab
