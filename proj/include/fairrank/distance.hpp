#pragma once
// Distribution-comparison functions Δ(observed, target). ND and RD are binomial
// (protected share vs p̂); KL is multinomial. All return signed values.

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/exposure.hpp"

namespace fairrank {

enum class DistanceKind { ND, RD, KL };

inline std::string_view to_string(DistanceKind kind) {
    switch (kind) {
        case DistanceKind::ND: return "ND";
        case DistanceKind::RD: return "RD";
        case DistanceKind::KL: return "KL";
    }
    return "?";
}

inline constexpr double kKlTargetFloor = 1e-10;

// Δ_ND = |G+|/N − p̂
inline double delta_nd(double protected_share, double p_hat) { return protected_share - p_hat; }

inline double delta_nd(std::size_t n_protected, std::size_t n, double p_hat) {
    if (n == 0) throw Error(Errc::InvalidArgument, "Δ_ND of an empty list");
    return delta_nd(static_cast<double>(n_protected) / static_cast<double>(n), p_hat);
}

inline double delta_nd(const ExposureVector& observed, const TargetDistribution& target,
                       const GroupSpace& groups) {
    const double total = observed.total();
    if (!(total > 0.0)) throw Error(Errc::NoExposure, "Δ_ND with zero observed mass");
    return delta_nd(observed[groups.require_protected()] / total, target.protected_share(groups));
}

// Δ_RD = |G+|/|G−| − p̂/(1−p̂); masses may be counts or exposure.
inline double delta_rd(double protected_mass, double unprotected_mass, double p_hat) {
    if (!(unprotected_mass > 0.0))
        throw Error(Errc::DegenerateDenominator, "Δ_RD with empty unprotected group");
    if (!(p_hat < 1.0)) throw Error(Errc::DegenerateDenominator, "Δ_RD with p̂ = 1");
    return protected_mass / unprotected_mass - p_hat / (1.0 - p_hat);
}

// Unprotected mass counts every known group other than the protected one.
inline double delta_rd(const ExposureVector& observed, const TargetDistribution& target,
                       const GroupSpace& groups) {
    const std::size_t prot = groups.require_protected();
    double unprotected = 0.0;
    for (std::size_t g = 0; g < observed.size(); ++g)
        if (g != prot && groups.is_known(g)) unprotected += observed[g];
    return delta_rd(observed[prot], unprotected, target.protected_share(groups));
}

// Target entries are floored at 1e-10 and renormalized, so the result is finite.
inline std::vector<double> smoothed_target(std::span<const double> target) {
    std::vector<double> t(target.begin(), target.end());
    double sum = 0.0;
    for (double& v : t) {
        v = std::max(v, kKlTargetFloor);
        sum += v;
    }
    for (double& v : t) v /= sum;
    return t;
}

// D_KL(observed ‖ target) in bits; observed must already sum to 1.
inline double delta_kl(std::span<const double> observed, std::span<const double> target) {
    if (observed.size() != target.size())
        throw Error(Errc::InvalidArgument, "Δ_KL over distributions of different width");
    double sum = 0.0;
    for (double o : observed) sum += o;
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw Error(Errc::InvalidArgument, "Δ_KL observed distribution is not normalized");
    const auto t = smoothed_target(target);
    double kl = 0.0;
    for (std::size_t g = 0; g < observed.size(); ++g)
        if (observed[g] > 0.0) kl += observed[g] * std::log2(observed[g] / t[g]);
    return std::max(kl, 0.0);
}

inline double delta_kl(const ExposureVector& observed, const TargetDistribution& target) {
    return delta_kl(observed.values(), target.probs());
}

// Δ of an exposure (or composition) vector against the target, any kind.
inline double delta(DistanceKind kind, const ExposureVector& observed, const TargetDistribution& target,
                    const GroupSpace& groups) {
    switch (kind) {
        case DistanceKind::ND: return delta_nd(observed, target, groups);
        case DistanceKind::RD: return delta_rd(observed, target, groups);
        case DistanceKind::KL:
            if (!(observed.total() > 0.0)) throw Error(Errc::NoExposure, "Δ_KL with zero observed mass");
            return delta_kl(observed.normalized(), target);
    }
    throw Error(Errc::InvalidArgument, "unknown distance kind");
}

}  // namespace fairrank
