#pragma once
// Browsing models and exposure aggregation: per-list group exposure, its
// expectation under an empirical policy, the system-level expectation over
// requests, and the target exposure of the ideal (relevance-sorted) policy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank {

namespace detail {

// Pairwise (cascade) summation; result does not depend on accumulation order
// beyond the fixed split, and error grows O(log n).
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace detail

class ExposureVector {
public:
    ExposureVector() = default;
    explicit ExposureVector(std::size_t groups) : eps_(groups, 0.0) {}
    explicit ExposureVector(std::vector<double> eps) : eps_(std::move(eps)) {}

    std::size_t size() const noexcept { return eps_.size(); }
    double& operator[](std::size_t g) { return eps_[g]; }
    double operator[](std::size_t g) const { return eps_[g]; }
    const std::vector<double>& values() const noexcept { return eps_; }

    double total() const { return detail::pairwise_sum(eps_); }

    ExposureVector normalized() const {
        const double t = total();
        ExposureVector out(eps_.size());
        if (t <= 0.0) return out;
        for (std::size_t g = 0; g < eps_.size(); ++g) out[g] = eps_[g] / t;
        return out;
    }

    double dot(const ExposureVector& other) const {
        double s = 0.0;
        for (std::size_t g = 0; g < eps_.size(); ++g) s += eps_[g] * other.eps_.at(g);
        return s;
    }

    double squared_norm() const { return dot(*this); }

    friend bool operator==(const ExposureVector&, const ExposureVector&) = default;

private:
    std::vector<double> eps_;
};

struct ExposureResult {
    ExposureVector eps;
    bool degenerate = false;  // no labeled document carried weight
};

enum class WeightKind { Geometric, Logarithmic, RBP, Cascade };

using StopFunction = std::function<double(double)>;

// Position-weight (browsing) model.
struct WeightModel {
    WeightKind kind = WeightKind::Geometric;
    double gamma = 0.5;
    // Cascade stopping probability φ(y); empty selects y / y_max over the corpus.
    StopFunction stop_fn;
    // RBP: weight γ^{rank} instead of the rank-1-anchored γ^{rank-1}.
    bool rbp_unanchored = false;

    static WeightModel geometric(double gamma) { return checked({WeightKind::Geometric, gamma, {}, false}); }
    static WeightModel logarithmic() { return {WeightKind::Logarithmic, 0.5, {}, false}; }
    static WeightModel rbp(double gamma, bool unanchored = false) {
        return checked({WeightKind::RBP, gamma, {}, unanchored});
    }
    static WeightModel cascade(double gamma, StopFunction stop = {}) {
        return checked({WeightKind::Cascade, gamma, std::move(stop), false});
    }

    // Geometric stopping probability lies in (0,1); patience for RBP and cascade
    // may reach 1 (a user who never abandons).
    static bool gamma_in_domain(WeightKind kind, double gamma) {
        if (!std::isfinite(gamma) || gamma <= 0.0) return false;
        return kind == WeightKind::Geometric ? gamma < 1.0 : gamma <= 1.0;
    }

private:
    static WeightModel checked(WeightModel m) {
        if (!gamma_in_domain(m.kind, m.gamma))
            throw Error(Errc::ParameterOutOfDomain, "gamma = " + std::to_string(m.gamma));
        return m;
    }
};

using PositionWeights = std::vector<double>;

// Cascade weights for a list whose entries have the given grades and ranks.
inline PositionWeights cascade_weights(const WeightModel& model, std::span<const double> grades,
                                       std::span<const std::size_t> ranks, double max_grade) {
    const StopFunction phi = model.stop_fn ? model.stop_fn : StopFunction([max_grade](double y) {
        return max_grade > 0.0 ? y / max_grade : 0.0;
    });
    PositionWeights w(grades.size());
    double survive = 1.0;
    for (std::size_t i = 0; i < grades.size(); ++i) {
        w[i] = std::pow(model.gamma, static_cast<double>(ranks[i]) - 1.0) * survive;
        survive *= 1.0 - std::clamp(phi(grades[i]), 0.0, 1.0);
    }
    return w;
}

inline double rank_weight(const WeightModel& model, std::size_t rank) {
    const double r = static_cast<double>(rank);
    switch (model.kind) {
        case WeightKind::Geometric: return model.gamma * std::pow(1.0 - model.gamma, r - 1.0);
        case WeightKind::Logarithmic: return 1.0 / std::log2(std::max(r, 2.0));
        case WeightKind::RBP: return std::pow(model.gamma, model.rbp_unanchored ? r : r - 1.0);
        case WeightKind::Cascade: break;
    }
    throw Error(Errc::InvalidArgument, "cascade weights depend on relevance");
}

inline PositionWeights position_weights(const WeightModel& model, const Ranking& ranking,
                                        const RelevanceTable* relevance = nullptr) {
    if (model.kind == WeightKind::Cascade) {
        if (!relevance)
            throw Error(Errc::MissingRelevance, "cascade weighting requires relevance judgments");
        std::vector<double> grades;
        grades.reserve(ranking.size());
        for (const auto& d : ranking.docs()) grades.push_back(relevance->grade_or_zero(ranking.request(), d));
        return cascade_weights(model, grades, ranking.positions(), relevance->max_grade());
    }
    PositionWeights w(ranking.size());
    for (std::size_t i = 0; i < ranking.size(); ++i) w[i] = rank_weight(model, ranking.positions()[i]);
    return w;
}

// ε = Aᵀa over labeled documents.
inline ExposureResult group_exposure(const Ranking& ranking, const AlignmentMatrix& alignment,
                                     std::span<const double> weights, const GroupSpace& groups,
                                     bool normalize = false) {
    if (weights.size() != ranking.size())
        throw Error(Errc::InvalidArgument, "position weights are not aligned to the ranking");
    if (alignment.groups() != groups.size())
        throw Error(Errc::InvalidArgument, "alignment width differs from group space");
    ExposureVector eps(groups.size());
    bool any_labeled = false;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const auto* row = alignment.find(ranking.docs()[i]);
        if (!row) continue;
        any_labeled = true;
        for (std::size_t g = 0; g < groups.size(); ++g) eps[g] += (*row)[g] * weights[i];
    }
    if (!any_labeled) return {std::move(eps), true};
    if (normalize) {
        if (eps.total() <= 0.0) return {std::move(eps), true};
        return {eps.normalized(), false};
    }
    return {std::move(eps), false};
}

// Arithmetic mean of equally sized vectors, componentwise pairwise summation.
inline ExposureVector mean_exposure(std::span<const ExposureVector> vectors) {
    if (vectors.empty()) throw Error(Errc::InvalidArgument, "mean of zero exposure vectors");
    const std::size_t g = vectors.front().size();
    ExposureVector out(g);
    std::vector<double> column(vectors.size());
    for (std::size_t k = 0; k < g; ++k) {
        for (std::size_t i = 0; i < vectors.size(); ++i) column[i] = vectors[i][k];
        out[k] = detail::pairwise_sum(column) / static_cast<double>(vectors.size());
    }
    return out;
}

// ε(q) = E_π[ε]: mean over the sequence's draws for `request`. In normalized mode
// draws with no labeled exposure are skipped; in raw mode they contribute zero.
inline ExposureResult request_exposure(const RankingSequence& seq, const RequestId& request,
                                       const AlignmentMatrix& alignment, const GroupSpace& groups,
                                       const WeightModel& model,
                                       const RelevanceTable* relevance = nullptr,
                                       bool normalize = false) {
    const auto draws = seq.draws_for(request);
    if (draws.empty())
        throw Error(Errc::UnknownRequest, "request '" + request.str() + "' has no draws");
    std::vector<ExposureVector> per_draw;
    per_draw.reserve(draws.size());
    for (const Ranking* r : draws) {
        const auto w = position_weights(model, *r, relevance);
        auto e = group_exposure(*r, alignment, w, groups, normalize);
        if (e.degenerate && normalize) continue;
        per_draw.push_back(std::move(e.eps));
    }
    if (per_draw.empty()) return {ExposureVector(groups.size()), true};
    auto mean = mean_exposure(per_draw);
    const bool degenerate = !normalize && mean.total() <= 0.0;
    return {std::move(mean), degenerate};
}

// ε_π = Σ_q ρ(q) ε(q), with ρ renormalized over the requests present (uniform
// when absent). Requests are reduced in key order.
inline ExposureVector system_exposure(const std::map<RequestId, ExposureVector>& per_request,
                                      const std::optional<std::map<RequestId, double>>& rho = std::nullopt) {
    if (per_request.empty()) throw Error(Errc::InvalidArgument, "no per-request exposure to aggregate");
    const std::size_t g = per_request.begin()->second.size();
    std::vector<double> weights;
    weights.reserve(per_request.size());
    for (const auto& [q, eps] : per_request) {
        if (eps.size() != g) throw Error(Errc::InvalidArgument, "exposure vectors differ in width");
        if (rho) {
            auto it = rho->find(q);
            weights.push_back(it == rho->end() ? 0.0 : it->second);
        } else {
            weights.push_back(1.0);
        }
    }
    const double total_weight = detail::pairwise_sum(weights);
    if (!(total_weight > 0.0))
        throw Error(Errc::InvalidArgument, "request weights over present requests sum to zero");
    ExposureVector out(g);
    std::vector<double> column(per_request.size());
    for (std::size_t k = 0; k < g; ++k) {
        std::size_t i = 0;
        for (const auto& [q, eps] : per_request) {
            column[i] = weights[i] * eps[k];
            ++i;
        }
        out[k] = detail::pairwise_sum(column) / total_weight;
    }
    return out;
}

// Expected position weight of each candidate under the ideal policy: candidates
// sorted by descending grade, ties permuted uniformly. Each member of a tier
// receives the mean weight of the tier's block of positions. Output is sorted by
// document id, so it does not depend on candidate order.
inline std::vector<std::pair<DocumentId, double>> ideal_document_exposure(
    const RequestId& request, std::span<const DocumentId> candidates, const RelevanceTable& relevance,
    const WeightModel& model) {
    std::vector<DocumentId> docs(candidates.begin(), candidates.end());
    std::sort(docs.begin(), docs.end());
    docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
    if (docs.empty()) throw Error(Errc::InvalidArgument, "empty candidate set");

    std::vector<double> grades;
    grades.reserve(docs.size());
    for (const auto& d : docs) grades.push_back(relevance.grade_or_zero(request, d));
    std::vector<double> sorted = grades;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    std::vector<std::size_t> ranks(docs.size());
    std::iota(ranks.begin(), ranks.end(), std::size_t{1});
    PositionWeights w;
    if (model.kind == WeightKind::Cascade) {
        w = cascade_weights(model, sorted, ranks, relevance.max_grade());
    } else {
        w.resize(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) w[i] = rank_weight(model, ranks[i]);
    }

    std::map<double, double, std::greater<>> tier_mean;
    for (std::size_t begin = 0; begin < sorted.size();) {
        std::size_t end = begin;
        while (end < sorted.size() && sorted[end] == sorted[begin]) ++end;
        tier_mean[sorted[begin]] =
            detail::pairwise_sum(std::span<const double>(w).subspan(begin, end - begin)) /
            static_cast<double>(end - begin);
        begin = end;
    }

    std::vector<std::pair<DocumentId, double>> out;
    out.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) out.emplace_back(docs[i], tier_mean.at(grades[i]));
    return out;
}

// ε* = E_τ[ε] for one request.
inline ExposureResult target_exposure(const RequestId& request, std::span<const DocumentId> candidates,
                                      const RelevanceTable& relevance, const AlignmentMatrix& alignment,
                                      const WeightModel& model, const GroupSpace& groups) {
    const auto per_doc = ideal_document_exposure(request, candidates, relevance, model);
    ExposureVector eps(groups.size());
    bool any_labeled = false;
    for (const auto& [doc, weight] : per_doc) {
        const auto* row = alignment.find(doc);
        if (!row) continue;
        any_labeled = true;
        for (std::size_t g = 0; g < groups.size(); ++g) eps[g] += (*row)[g] * weight;
    }
    return {std::move(eps), !any_labeled};
}

}  // namespace fairrank
