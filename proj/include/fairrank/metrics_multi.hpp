#pragma once
// Statistical parity over ranking policies: demographic parity ratio and
// expected exposure disparity.

#include <cmath>
#include <cstddef>

#include "fairrank/core.hpp"
#include "fairrank/exposure.hpp"

namespace fairrank {

struct RatioResult {
    double ratio = 0.0;
    double log2_ratio = 0.0;  // 0 is fair; −∞ when the numerator is zero
};

struct BinomialExposure {
    double protected_mass = 0.0;
    double unprotected_mass = 0.0;
};

// Splits ε into G+ and G− mass; G− is every known group but the protected one.
inline BinomialExposure split_binomial(const ExposureVector& eps, const GroupSpace& groups) {
    const std::size_t prot = groups.require_protected();
    BinomialExposure out;
    for (std::size_t g = 0; g < eps.size(); ++g) {
        if (g == prot) out.protected_mass += eps[g];
        else if (groups.is_known(g)) out.unprotected_mass += eps[g];
    }
    return out;
}

inline RatioResult make_ratio(double numerator, double denominator) {
    RatioResult r;
    r.ratio = numerator / denominator;
    r.log2_ratio = std::log2(r.ratio);
    return r;
}

// DP = ε_π(G+) / ε_π(G−).
inline RatioResult demographic_parity(const ExposureVector& system_eps, const GroupSpace& groups) {
    const auto split = split_binomial(system_eps, groups);
    if (!(split.unprotected_mass > 0.0)) {
        if (!(split.protected_mass > 0.0)) throw Error(Errc::NoExposure, "neither group received exposure");
        throw Error(Errc::DegenerateDenominator, "unprotected group received no exposure");
    }
    return make_ratio(split.protected_mass, split.unprotected_mass);
}

enum class EedMode {
    Parity,  // ε sum-normalized first; minimum 1/g at equality
    Raw,     // ‖ε‖² as it enters the expected-exposure decomposition
};

// EED = ‖ε_π‖₂²
inline double eed(const ExposureVector& system_eps, EedMode mode = EedMode::Parity) {
    if (mode == EedMode::Raw) return system_eps.squared_norm();
    if (!(system_eps.total() > 0.0)) throw Error(Errc::NoExposure, "EED of a zero exposure vector");
    return system_eps.normalized().squared_norm();
}

}  // namespace fairrank
