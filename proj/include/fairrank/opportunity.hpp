#pragma once
// Equal-opportunity metrics: exposed and realized utility ratios (EUR, RUR),
// inequity of amortized attention (IAA), and the expected-exposure family
// (EEL with its EER / EED decomposition).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/exposure.hpp"
#include "fairrank/metrics_multi.hpp"

namespace fairrank {

// Values for the protected (plus) and unprotected (minus) groups.
struct GroupPair {
    double plus = 0.0;
    double minus = 0.0;
};

enum class CandidatePool {
    Judged,               // the request's judged documents
    Retrieved,            // documents appearing in the request's draws
    JudgedAndRetrieved,
};

// Keeps the draws whose request satisfies `keep`; request weights are carried
// over and renormalized.
template <typename Predicate>
RankingSequence filter_requests(const RankingSequence& seq, Predicate keep) {
    std::vector<RankingSequence::Draw> draws;
    for (const auto& d : seq.draws())
        if (keep(d->request())) draws.push_back(d);
    std::optional<std::map<RequestId, double>> weights;
    if (seq.request_weights()) {
        std::map<RequestId, double> w;
        double total = 0.0;
        for (const auto& [q, v] : *seq.request_weights())
            if (keep(q)) {
                w[q] = v;
                total += v;
            }
        if (total > 0.0) {
            for (auto& [q, v] : w) v /= total;
            weights = std::move(w);
        }
    }
    return RankingSequence(std::move(draws), std::move(weights));
}

inline std::vector<DocumentId> candidate_pool(const RankingSequence& seq, const RequestId& request,
                                              const RelevanceTable& relevance, CandidatePool pool) {
    std::vector<DocumentId> out;
    std::unordered_set<DocumentId> seen;
    if (pool != CandidatePool::Retrieved) {
        if (const auto* judged = relevance.judged(request))
            for (const auto& [d, y] : *judged)
                if (seen.insert(d).second) out.push_back(d);
    }
    if (pool != CandidatePool::Judged) {
        for (const Ranking* r : seq.draws_for(request))
            for (const auto& d : r->docs())
                if (seen.insert(d).second) out.push_back(d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline double request_weight(const RankingSequence& seq, const RequestId& q) {
    if (!seq.request_weights()) return 1.0;
    auto it = seq.request_weights()->find(q);
    return it == seq.request_weights()->end() ? 0.0 : it->second;
}

}  // namespace detail

// Υ(G): per request, the mean grade of the group's members in the candidate pool
// (unjudged = 0), averaged over requests with ρ among requests where the group
// has members.
inline GroupPair group_utility(const RankingSequence& seq, const RelevanceTable& relevance,
                               const AlignmentMatrix& alignment, const GroupSpace& groups,
                               double threshold = 0.5, CandidatePool pool = CandidatePool::Judged) {
    double sum_plus = 0.0, sum_minus = 0.0, w_plus = 0.0, w_minus = 0.0;
    for (const auto& q : seq.requests()) {
        const double rho = detail::request_weight(seq, q);
        double y_plus = 0.0, y_minus = 0.0;
        std::size_t n_plus = 0, n_minus = 0;
        for (const auto& d : candidate_pool(seq, q, relevance, pool)) {
            const auto m = binary_membership(alignment.find(d), groups, threshold);
            if (!m) continue;
            const double y = relevance.grade_or_zero(q, d);
            if (*m) {
                y_plus += y;
                ++n_plus;
            } else {
                y_minus += y;
                ++n_minus;
            }
        }
        if (n_plus > 0) {
            sum_plus += rho * y_plus / static_cast<double>(n_plus);
            w_plus += rho;
        }
        if (n_minus > 0) {
            sum_minus += rho * y_minus / static_cast<double>(n_minus);
            w_minus += rho;
        }
    }
    if (!(w_plus > 0.0)) throw Error(Errc::EmptyGroup, "protected group has no candidates");
    if (!(w_minus > 0.0)) throw Error(Errc::EmptyGroup, "unprotected group has no candidates");
    return {sum_plus / w_plus, sum_minus / w_minus};
}

// Γ(G) = Σ_{d∈G} E_{πρ}[a_d · y(d|q)]
inline GroupPair discounted_group_utility(const RankingSequence& seq, const RelevanceTable& relevance,
                                          const AlignmentMatrix& alignment, const GroupSpace& groups,
                                          const WeightModel& model, double threshold = 0.5) {
    double sum_plus = 0.0, sum_minus = 0.0, total_weight = 0.0;
    bool any_plus = false, any_minus = false;
    for (const auto& [q, draws] : seq.by_request()) {
        const double rho = detail::request_weight(seq, q);
        double g_plus = 0.0, g_minus = 0.0;
        for (const Ranking* r : draws) {
            const auto w = position_weights(model, *r, &relevance);
            for (std::size_t i = 0; i < r->size(); ++i) {
                const auto m = binary_membership(alignment.find(r->docs()[i]), groups, threshold);
                if (!m) continue;
                const double gain = w[i] * relevance.grade_or_zero(q, r->docs()[i]);
                if (*m) {
                    g_plus += gain;
                    any_plus = true;
                } else {
                    g_minus += gain;
                    any_minus = true;
                }
            }
        }
        const double n = static_cast<double>(draws.size());
        sum_plus += rho * g_plus / n;
        sum_minus += rho * g_minus / n;
        total_weight += rho;
    }
    if (!any_plus) throw Error(Errc::EmptyGroup, "protected group never retrieved");
    if (!any_minus) throw Error(Errc::EmptyGroup, "unprotected group never retrieved");
    if (!(total_weight > 0.0)) throw Error(Errc::InvalidArgument, "empty ranking sequence");
    return {sum_plus / total_weight, sum_minus / total_weight};
}

// EUR = (ε_π(G+)/Υ(G+)) / (ε_π(G−)/Υ(G−)); 1 is fair.
inline RatioResult eur(const ExposureVector& system_eps, const GroupPair& upsilon,
                       const GroupSpace& groups) {
    if (!(upsilon.plus > 0.0) || !(upsilon.minus > 0.0))
        throw Error(Errc::DegenerateUtility, "a group contributes no utility");
    const auto split = split_binomial(system_eps, groups);
    if (!(split.unprotected_mass > 0.0))
        throw Error(Errc::DegenerateDenominator, "unprotected group received no exposure");
    return make_ratio(split.protected_mass / upsilon.plus, split.unprotected_mass / upsilon.minus);
}

// RUR = (Γ(G+)/Υ(G+)) / (Γ(G−)/Υ(G−)); 1 is fair.
inline RatioResult rur(const GroupPair& gamma_disc, const GroupPair& upsilon) {
    if (!(upsilon.plus > 0.0) || !(upsilon.minus > 0.0))
        throw Error(Errc::DegenerateUtility, "a group contributes no utility");
    if (!(gamma_disc.minus > 0.0))
        throw Error(Errc::DegenerateDenominator, "unprotected group realized no utility");
    return make_ratio(gamma_disc.plus / upsilon.plus, gamma_disc.minus / upsilon.minus);
}

// Group-aggregated predicted utility of one ranking: scores shifted by their
// minimum over the ranking, sum-normalized, then accumulated through alignment.
// Documents without a score contribute nothing.
inline ExposureVector predicted_utility(const Ranking& ranking, const ScoreTable& scores,
                                        const AlignmentMatrix& alignment, const GroupSpace& groups) {
    std::vector<std::pair<const std::vector<double>*, double>> scored;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& d : ranking.docs()) {
        const auto s = scores.score(ranking.request(), d);
        if (!s) continue;
        lo = std::min(lo, *s);
        scored.emplace_back(alignment.find(d), *s);
    }
    ExposureVector out(groups.size());
    double total = 0.0;
    for (const auto& [row, s] : scored) total += s - lo;
    if (!(total > 0.0)) return out;
    for (const auto& [row, s] : scored) {
        if (!row) continue;
        for (std::size_t g = 0; g < groups.size(); ++g) out[g] += (*row)[g] * (s - lo) / total;
    }
    return out;
}

// Û for the system: per-request mean over draws, then ρ-weighted over requests.
inline ExposureVector expected_utility(const RankingSequence& seq, const ScoreTable& scores,
                                       const AlignmentMatrix& alignment, const GroupSpace& groups) {
    std::map<RequestId, ExposureVector> per_request;
    for (const auto& [q, draws] : seq.by_request()) {
        std::vector<ExposureVector> vs;
        for (const Ranking* r : draws) vs.push_back(predicted_utility(*r, scores, alignment, groups));
        per_request.emplace(q, mean_exposure(vs));
    }
    return system_exposure(per_request, seq.request_weights());
}

// IAA = ‖ε − Û‖₁ on sum-normalized vectors; 0 is fair, at most 2.
inline double iaa(const ExposureVector& system_eps, const ExposureVector& expected_utility) {
    if (system_eps.size() != expected_utility.size())
        throw Error(Errc::InvalidArgument, "IAA vectors differ in width");
    if (!(expected_utility.total() > 0.0))
        throw Error(Errc::DegenerateUtility, "total predicted utility is zero");
    if (!(system_eps.total() > 0.0)) throw Error(Errc::NoExposure, "system exposure is zero");
    const auto e = system_eps.normalized();
    const auto u = expected_utility.normalized();
    double l1 = 0.0;
    for (std::size_t g = 0; g < e.size(); ++g) l1 += std::abs(e[g] - u[g]);
    return l1;
}

struct ExpectedExposure {
    double eel = 0.0;      // ‖ε_π − ε*‖²
    double eer = 0.0;      // 2 ε_πᵀε*
    double eed_raw = 0.0;  // ‖ε_π‖²
    double target_sq = 0.0;  // ‖ε*‖²
    ExposureVector system_eps;
    ExposureVector target_eps;
    std::size_t n_requests = 0;
    std::size_t n_skipped = 0;
};

inline ExpectedExposure ee_decompose(const ExposureVector& system_eps, const ExposureVector& target_eps) {
    if (system_eps.size() != target_eps.size())
        throw Error(Errc::InvalidArgument, "exposure vectors differ in width");
    ExpectedExposure out;
    double eel = 0.0;
    for (std::size_t g = 0; g < system_eps.size(); ++g) {
        const double d = system_eps[g] - target_eps[g];
        eel += d * d;
    }
    out.eel = eel;
    out.eer = 2.0 * system_eps.dot(target_eps);
    out.eed_raw = system_eps.squared_norm();
    out.target_sq = target_eps.squared_norm();
    out.system_eps = system_eps;
    out.target_eps = target_eps;
    return out;
}

// Requests without a relevant candidate, or whose candidates are all unlabeled,
// are skipped and counted.
inline ExpectedExposure expected_exposure(const RankingSequence& seq, const RelevanceTable& relevance,
                                          const AlignmentMatrix& alignment, const GroupSpace& groups,
                                          const WeightModel& model,
                                          CandidatePool pool = CandidatePool::JudgedAndRetrieved) {
    std::map<RequestId, ExposureVector> system, target;
    std::size_t skipped = 0;
    const auto requests = seq.requests();
    for (const auto& q : requests) {
        const auto candidates = candidate_pool(seq, q, relevance, pool);
        const bool any_relevant = std::any_of(candidates.begin(), candidates.end(), [&](const DocumentId& d) {
            return relevance.grade_or_zero(q, d) > 0.0;
        });
        if (!any_relevant) {
            ++skipped;
            continue;
        }
        auto star = target_exposure(q, candidates, relevance, alignment, model, groups);
        if (star.degenerate) {
            ++skipped;
            continue;
        }
        auto eps = request_exposure(seq, q, alignment, groups, model, &relevance, /*normalize=*/false);
        system.emplace(q, std::move(eps.eps));
        target.emplace(q, std::move(star.eps));
    }
    if (system.empty()) throw Error(Errc::NoRelevant, "no request has a relevant labeled candidate");
    auto out = ee_decompose(system_exposure(system, seq.request_weights()),
                            system_exposure(target, seq.request_weights()));
    out.n_requests = requests.size();
    out.n_skipped = skipped;
    return out;
}

}  // namespace fairrank
