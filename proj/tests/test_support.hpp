#pragma once

#include "cocyclelab/matrix.hpp"
#include "cocyclelab/rng.hpp"

#include <cmath>

namespace cocyclelab::testing {

/// Random SL(2,R) value R(a) diag(e^s, e^-s) R(b) with |s| <= max_log_stretch.
inline mat2 random_sl(rng_engine& rng, double max_log_stretch = 2.0)
{
    const double a = 2.0 * pi * uniform01(rng);
    const double b = 2.0 * pi * uniform01(rng);
    const double s = max_log_stretch * (2.0 * uniform01(rng) - 1.0);
    return mat2::rotation(a) * mat2::diag(std::exp(s), std::exp(-s)) * mat2::rotation(b);
}

inline double max_entry_gap(const mat2& x, const mat2& y)
{
    return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.d - y.d)});
}

} // namespace cocyclelab::testing
