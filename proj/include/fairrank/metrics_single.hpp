#pragma once
// Statistical-parity metrics over a single ranking: the prefix-fairness family
// (prefD), the FAIR binomial-constraint score and attention-weighted rank
// fairness (AWRF).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/distance.hpp"
#include "fairrank/exposure.hpp"

namespace fairrank {

struct SingleListResult {
    double value = 0.0;
    std::optional<Errc> degenerate;
    Direction direction = Direction::ZeroIsFair;

    bool ok() const noexcept { return !degenerate; }
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Prefix fairness
// ---------------------------------------------------------------------------

// Prefix lengths step, 2·step, …, plus N itself when it is not a multiple.
inline std::vector<std::size_t> prefix_schedule(std::size_t n, std::size_t step) {
    if (step < 2) throw Error(Errc::ParameterOutOfDomain, "prefix step must be at least 2");
    std::vector<std::size_t> out;
    for (std::size_t i = step; i <= n; i += step) out.push_back(i);
    if (n >= step && n % step != 0) out.push_back(n);
    return out;
}

namespace detail {

// |Δ| of a binomial prefix with `c` protected among `i`, against p̂.
inline double binomial_prefix_term(DistanceKind dist, std::size_t c, std::size_t i, double p_hat) {
    const double share = static_cast<double>(c) / static_cast<double>(i);
    switch (dist) {
        case DistanceKind::ND: return std::abs(delta_nd(share, p_hat));
        case DistanceKind::RD:
            return std::abs(delta_rd(static_cast<double>(c), static_cast<double>(i - c), p_hat));
        case DistanceKind::KL: {
            const double observed[2] = {share, 1.0 - share};
            const double target[2] = {p_hat, 1.0 - p_hat};
            return delta_kl(observed, target);
        }
    }
    throw Error(Errc::InvalidArgument, "unknown distance kind");
}

}  // namespace detail

// Unnormalized prefix score of a binomial membership sequence.
inline double pref_raw_binomial(const std::vector<bool>& is_protected, double p_hat, DistanceKind dist,
                                std::size_t step) {
    double raw = 0.0;
    std::size_t next = 0;
    const auto schedule = prefix_schedule(is_protected.size(), step);
    std::size_t count = 0;
    for (std::size_t i = 1; i <= is_protected.size() && next < schedule.size(); ++i) {
        count += is_protected[i - 1] ? 1 : 0;
        if (i != schedule[next]) continue;
        raw += detail::binomial_prefix_term(dist, count, i, p_hat) / std::log2(static_cast<double>(i));
        ++next;
    }
    return raw;
}

// Unnormalized prefix score of soft (multinomial) rows under Δ_KL.
inline double pref_raw_rows(std::span<const std::vector<double>> rows, std::span<const double> target,
                            std::size_t step) {
    if (rows.empty()) return 0.0;
    const std::size_t g = rows.front().size();
    std::vector<double> mass(g, 0.0), composition(g);
    double raw = 0.0;
    std::size_t next = 0;
    const auto schedule = prefix_schedule(rows.size(), step);
    for (std::size_t i = 1; i <= rows.size() && next < schedule.size(); ++i) {
        for (std::size_t k = 0; k < g; ++k) mass[k] += rows[i - 1][k];
        if (i != schedule[next]) continue;
        double total = 0.0;
        for (double m : mass) total += m;
        for (std::size_t k = 0; k < g; ++k) composition[k] = mass[k] / total;
        raw += delta_kl(composition, target) / std::log2(static_cast<double>(i));
        ++next;
    }
    return raw;
}

// Z: the largest unnormalized prefix score over all arrangements of `n` items with
// `n_protected` protected ones. Computed exactly by dynamic programming over
// prefix counts; arrangements on which Δ is undefined (Δ_RD with an all-protected
// prefix) are excluded. Throws UndefinedNormalizer when Z = 0.
inline double pref_normalizer(std::size_t n, std::size_t n_protected, double p_hat, DistanceKind dist,
                              std::size_t step) {
    if (n_protected > n) throw Error(Errc::InvalidArgument, "more protected items than items");
    const auto schedule = prefix_schedule(n, step);
    constexpr double kInvalid = -std::numeric_limits<double>::infinity();
    std::vector<double> best(n_protected + 1, kInvalid), next_best(n_protected + 1);
    best[0] = 0.0;
    std::size_t sched = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t lo = i > n - n_protected ? i - (n - n_protected) : 0;
        const std::size_t hi = std::min(i, n_protected);
        std::fill(next_best.begin(), next_best.end(), kInvalid);
        for (std::size_t c = lo; c <= hi; ++c) {
            double v = best[c];  // item i unprotected
            if (c > 0) v = std::max(v, best[c - 1]);
            next_best[c] = v;
        }
        if (sched < schedule.size() && schedule[sched] == i) {
            const double denom = std::log2(static_cast<double>(i));
            for (std::size_t c = lo; c <= hi; ++c) {
                if (next_best[c] == kInvalid) continue;
                try {
                    next_best[c] += detail::binomial_prefix_term(dist, c, i, p_hat) / denom;
                } catch (const Error& e) {
                    if (e.code() != Errc::DegenerateDenominator) throw;
                    next_best[c] = kInvalid;
                }
            }
            ++sched;
        }
        best.swap(next_best);
    }
    const double z = best[n_protected];
    if (z == kInvalid)
        throw Error(Errc::DegenerateDenominator, "every arrangement has an undefined prefix distance");
    if (!(z > 0.0)) throw Error(Errc::UndefinedNormalizer, "composition admits no unfair arrangement");
    return z;
}

struct PrefOptions {
    DistanceKind dist = DistanceKind::ND;
    std::size_t step = 10;
    double threshold = 0.5;
    // Absent: the list's own composition is the target.
    std::optional<TargetDistribution> target;
};

namespace detail {

inline bool hard_binary_rows(std::span<const std::vector<double>> rows) {
    for (const auto& r : rows) {
        if (r.size() != 2) return false;
        if (!((r[0] == 1.0 && r[1] == 0.0) || (r[0] == 0.0 && r[1] == 1.0))) return false;
    }
    return true;
}

// Lower bound on Z for soft rows: the list itself and, for each group, the
// arrangements placing that group's mass first and last.
inline double pref_normalizer_rows(std::span<const std::vector<double>> rows,
                                   std::span<const double> target, std::size_t step) {
    std::vector<std::vector<double>> arranged(rows.begin(), rows.end());
    double z = pref_raw_rows(arranged, target, step);
    const std::size_t g = rows.front().size();
    for (std::size_t k = 0; k < g; ++k) {
        std::stable_sort(arranged.begin(), arranged.end(),
                         [k](const auto& a, const auto& b) { return a[k] > b[k]; });
        z = std::max(z, pref_raw_rows(arranged, target, step));
        std::reverse(arranged.begin(), arranged.end());
        z = std::max(z, pref_raw_rows(arranged, target, step));
    }
    return z;
}

}  // namespace detail

// prefD: normalized prefix fairness of the labeled part of `ranking`; 0 is fair,
// 1 maximally unfair. Lists with fewer than `step` labeled items are treated as
// maximally fair and flagged ShortList.
inline SingleListResult pref_fairness(const Ranking& ranking, const AlignmentMatrix& alignment,
                                      const GroupSpace& groups, const PrefOptions& opts = {}) {
    SingleListResult result;
    result.direction = Direction::ZeroIsFair;
    auto flagged = [&](Errc code, double value) {
        result.degenerate = code;
        result.value = value;
        return result;
    };

    if (opts.dist == DistanceKind::KL) {
        std::vector<std::vector<double>> rows;
        for (const auto& d : ranking.docs())
            if (const auto* r = alignment.find(d)) rows.push_back(*r);
        if (rows.empty()) return flagged(Errc::NoLabeledDocs, kNaN);
        if (rows.size() < opts.step) return flagged(Errc::ShortList, 0.0);
        std::vector<double> target;
        if (opts.target) {
            target = opts.target->probs();
        } else {
            target.assign(groups.size(), 0.0);
            for (const auto& r : rows)
                for (std::size_t k = 0; k < r.size(); ++k) target[k] += r[k] / static_cast<double>(rows.size());
        }
        const double raw = pref_raw_rows(rows, target, opts.step);
        double z;
        if (detail::hard_binary_rows(rows)) {
            const std::size_t ref = groups.protected_index().value_or(0);
            std::size_t n_ref = 0;
            for (const auto& r : rows) n_ref += r[ref] == 1.0 ? 1 : 0;
            try {
                z = pref_normalizer(rows.size(), n_ref, target[ref], DistanceKind::KL, opts.step);
            } catch (const Error& e) {
                return flagged(e.code(), 0.0);
            }
        } else {
            z = detail::pref_normalizer_rows(rows, target, opts.step);
            if (!(z > 0.0)) return flagged(Errc::UndefinedNormalizer, 0.0);
        }
        result.value = raw / z;
        return result;
    }

    std::vector<bool> member;
    for (const auto& m : protected_mask(ranking, alignment, groups, opts.threshold))
        if (m) member.push_back(*m);
    if (member.empty()) return flagged(Errc::NoLabeledDocs, kNaN);
    if (member.size() < opts.step) return flagged(Errc::ShortList, 0.0);
    const std::size_t n_protected =
        static_cast<std::size_t>(std::count(member.begin(), member.end(), true));
    const double p_hat = opts.target ? opts.target->protected_share(groups)
                                     : static_cast<double>(n_protected) / static_cast<double>(member.size());
    try {
        const double raw = pref_raw_binomial(member, p_hat, opts.dist, opts.step);
        const double z = pref_normalizer(member.size(), n_protected, p_hat, opts.dist, opts.step);
        result.value = raw / z;
    } catch (const Error& e) {
        if (e.code() == Errc::UndefinedNormalizer) return flagged(e.code(), 0.0);
        if (e.code() == Errc::DegenerateDenominator) return flagged(e.code(), kNaN);
        throw;
    }
    return result;
}

// ---------------------------------------------------------------------------
// FAIR
// ---------------------------------------------------------------------------

enum class FairCdf {
    Full,     // P(X ≤ c), j from 0
    FromOne,  // Σ_{j=1}^{c}, as printed in the source formula
};

// Σ_{j=first}^{c} C(k,j) p^j (1−p)^{k−j}
inline double binomial_sum(std::size_t k, std::size_t c, double p, std::size_t first = 0) {
    if (c >= k && first == 0) return 1.0;
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lk = std::lgamma(static_cast<double>(k) + 1.0);
    double s = 0.0;
    for (std::size_t j = first; j <= std::min(c, k); ++j) {
        const double jd = static_cast<double>(j);
        s += std::exp(lk - std::lgamma(jd + 1.0) - std::lgamma(static_cast<double>(k - j) + 1.0) +
                      jd * lp + static_cast<double>(k - j) * lq);
    }
    return std::min(s, 1.0);
}

// Mean over prefixes k = 1..N of P(X ≤ |G+(L≤k)|), X ~ Binomial(k, p̂). 1 is fair.
inline SingleListResult fair_score(const std::vector<bool>& is_protected, double p_hat,
                                   FairCdf mode = FairCdf::Full) {
    if (!(p_hat > 0.0 && p_hat < 1.0))
        throw Error(Errc::ParameterOutOfDomain, "FAIR requires p̂ in (0,1)");
    SingleListResult result;
    result.direction = Direction::OneIsFair;
    if (is_protected.empty()) {
        result.degenerate = Errc::NoLabeledDocs;
        result.value = kNaN;
        return result;
    }
    const std::size_t first = mode == FairCdf::Full ? 0 : 1;
    std::vector<double> terms;
    terms.reserve(is_protected.size());
    std::size_t count = 0;
    for (std::size_t k = 1; k <= is_protected.size(); ++k) {
        count += is_protected[k - 1] ? 1 : 0;
        terms.push_back(binomial_sum(k, count, p_hat, first));
    }
    result.value = detail::pairwise_sum(terms) / static_cast<double>(terms.size());
    return result;
}

inline SingleListResult fair_score(const Ranking& ranking, const AlignmentMatrix& alignment,
                                   const GroupSpace& groups, double p_hat, double threshold = 0.5,
                                   FairCdf mode = FairCdf::Full) {
    std::vector<bool> member;
    for (const auto& m : protected_mask(ranking, alignment, groups, threshold))
        if (m) member.push_back(*m);
    return fair_score(member, p_hat, mode);
}

// ---------------------------------------------------------------------------
// AWRF
// ---------------------------------------------------------------------------

// |Δ(ε, p̂)| with ε = Aᵀa sum-normalized. Weights cover the full ranking, so
// unlabeled documents still occupy positions.
inline SingleListResult awrf(const Ranking& ranking, const AlignmentMatrix& alignment,
                             const GroupSpace& groups, std::span<const double> weights,
                             const TargetDistribution& target, DistanceKind dist) {
    SingleListResult result;
    result.direction = Direction::ZeroIsFair;
    const auto eps = group_exposure(ranking, alignment, weights, groups, /*normalize=*/true);
    if (eps.degenerate) {
        result.degenerate = Errc::NoLabeledDocs;
        result.value = kNaN;
        return result;
    }
    try {
        result.value = std::abs(delta(dist, eps.eps, target, groups));
    } catch (const Error& e) {
        if (e.code() != Errc::DegenerateDenominator && e.code() != Errc::NoExposure) throw;
        result.degenerate = e.code();
        result.value = kNaN;
    }
    return result;
}

inline SingleListResult awrf(const Ranking& ranking, const AlignmentMatrix& alignment,
                             const GroupSpace& groups, const WeightModel& model,
                             const TargetDistribution& target, DistanceKind dist,
                             const RelevanceTable* relevance = nullptr) {
    const auto w = position_weights(model, ranking, relevance);
    return awrf(ranking, alignment, groups, w, target, dist);
}

}  // namespace fairrank
