#pragma once
// Group-conditioned pairwise ranking accuracy and the IntraAcc / InterAcc
// fairness differences, with seeded negative sampling over system scores.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank {

enum class Side : std::uint8_t { Protected = 0, Unprotected = 1 };

inline Side side_of(bool is_protected) { return is_protected ? Side::Protected : Side::Unprotected; }

struct ScoredPair {
    RequestId request;
    DocumentId doc_hi;  // strictly more relevant
    DocumentId doc_lo;
    double score_hi = 0.0;
    double score_lo = 0.0;
    Side group_hi = Side::Protected;
    Side group_lo = Side::Protected;

    friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

// Correct orderings (ties count half) over compared pairs; merges associatively.
struct PairCounts {
    double correct = 0.0;
    std::size_t total = 0;

    void add(double score_hi, double score_lo) {
        correct += score_hi > score_lo ? 1.0 : (score_hi == score_lo ? 0.5 : 0.0);
        ++total;
    }
    PairCounts& operator+=(const PairCounts& o) {
        correct += o.correct;
        total += o.total;
        return *this;
    }
};

// A_{G1>G2}
inline double pairwise_accuracy(std::span<const ScoredPair> pairs, Side g1, Side g2) {
    PairCounts c;
    for (const auto& p : pairs)
        if (p.group_hi == g1 && p.group_lo == g2) c.add(p.score_hi, p.score_lo);
    if (c.total == 0) throw Error(Errc::NoPairs, "no pairs for the requested group combination");
    return c.correct / static_cast<double>(c.total);
}

// 2×2 accuracy table indexed [hi side][lo side].
class AccuracyTable {
public:
    AccuracyTable() = default;

    static AccuracyTable from_pairs(std::span<const ScoredPair> pairs) {
        AccuracyTable t;
        for (const auto& p : pairs)
            t.counts_[static_cast<int>(p.group_hi)][static_cast<int>(p.group_lo)].add(p.score_hi, p.score_lo);
        return t;
    }

    static AccuracyTable from_values(double pp, double pu, double up, double uu) {
        AccuracyTable t;
        t.counts_[0][0] = {pp, 1};
        t.counts_[0][1] = {pu, 1};
        t.counts_[1][0] = {up, 1};
        t.counts_[1][1] = {uu, 1};
        return t;
    }

    void add(Side hi, Side lo, double score_hi, double score_lo) {
        counts_[static_cast<int>(hi)][static_cast<int>(lo)].add(score_hi, score_lo);
    }

    const PairCounts& counts(Side hi, Side lo) const {
        return counts_[static_cast<int>(hi)][static_cast<int>(lo)];
    }

    double at(Side hi, Side lo) const {
        const auto& c = counts(hi, lo);
        if (c.total == 0) throw Error(Errc::NoPairs, "accuracy cell has no pairs");
        return c.correct / static_cast<double>(c.total);
    }

    AccuracyTable& operator+=(const AccuracyTable& o) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) counts_[i][j] += o.counts_[i][j];
        return *this;
    }

private:
    std::array<std::array<PairCounts, 2>, 2> counts_{};
};

struct PairwiseFairness {
    double intra = 0.0;  // A_{−>−} − A_{+>+}
    double inter = 0.0;  // A_{−>+} − A_{+>−}
};

inline PairwiseFairness intra_inter(const AccuracyTable& acc) {
    return {acc.at(Side::Unprotected, Side::Unprotected) - acc.at(Side::Protected, Side::Protected),
            acc.at(Side::Unprotected, Side::Protected) - acc.at(Side::Protected, Side::Unprotected)};
}

// A scored, labeled document of one request as seen by the pair sampler.
struct PairItem {
    DocumentId doc;
    double score = 0.0;
    Side side = Side::Protected;
    std::optional<double> grade;  // nullopt = unjudged
};

struct PairSampleStats {
    std::size_t n_anchors = 0;     // relevant items that anchored pairs
    std::size_t n_exhaustive = 0;  // anchors whose unjudged pool fit in n_negatives
};

// For every labeled, scored item with positive grade: pairs it with every scored
// judged item of strictly lower grade, and with n_negatives distinct unjudged
// scored items drawn uniformly (all of them when the pool is not larger).
// Requests and documents are visited in identifier order so a seed reproduces
// the same sample. `visit(request, hi, lo)` is called once per pair.
template <typename Visitor>
PairSampleStats visit_pairs(const RelevanceTable& relevance, const ScoreTable& scores,
                            const AlignmentMatrix& alignment, const GroupSpace& groups, std::size_t n_negatives,
                            std::uint64_t seed, double threshold, Visitor&& visit) {
    if (n_negatives == 0) throw Error(Errc::ParameterOutOfDomain, "n_negatives must be at least 1");
    std::mt19937_64 rng(seed);
    PairSampleStats stats;

    std::vector<RequestId> requests;
    for (const auto& [q, s] : scores.entries()) requests.push_back(q);
    std::sort(requests.begin(), requests.end());

    std::vector<PairItem> items;
    std::vector<const PairItem*> unjudged, negatives;
    for (const auto& q : requests) {
        items.clear();
        for (const auto& [d, s] : *scores.scored(q)) {
            const auto m = binary_membership(alignment.find(d), groups, threshold);
            if (!m) continue;
            items.push_back({d, s, side_of(*m), relevance.grade(q, d)});
        }
        std::sort(items.begin(), items.end(), [](const PairItem& a, const PairItem& b) { return a.doc < b.doc; });

        unjudged.clear();
        for (const auto& it : items)
            if (!it.grade) unjudged.push_back(&it);

        for (const auto& hi : items) {
            if (!hi.grade || !(*hi.grade > 0.0)) continue;
            ++stats.n_anchors;
            for (const auto& lo : items)
                if (lo.grade && *lo.grade < *hi.grade) visit(q, hi, lo);
            negatives.clear();
            if (unjudged.size() <= n_negatives) {
                negatives = unjudged;
                ++stats.n_exhaustive;
            } else {
                std::sample(unjudged.begin(), unjudged.end(), std::back_inserter(negatives), n_negatives, rng);
            }
            for (const PairItem* lo : negatives) visit(q, hi, *lo);
        }
    }
    return stats;
}

struct PairSample {
    std::vector<ScoredPair> pairs;
    std::size_t n_anchors = 0;
    std::size_t n_exhaustive = 0;
};

inline PairSample sample_pairs(const RelevanceTable& relevance, const ScoreTable& scores,
                               const AlignmentMatrix& alignment, const GroupSpace& groups,
                               std::size_t n_negatives, std::uint64_t seed, double threshold = 0.5) {
    PairSample out;
    const auto stats = visit_pairs(relevance, scores, alignment, groups, n_negatives, seed, threshold,
                                   [&](const RequestId& q, const PairItem& hi, const PairItem& lo) {
                                       out.pairs.push_back({q, hi.doc, lo.doc, hi.score, lo.score, hi.side, lo.side});
                                   });
    out.n_anchors = stats.n_anchors;
    out.n_exhaustive = stats.n_exhaustive;
    return out;
}

// Accuracy table over the same sample as sample_pairs, without storing pairs.
inline AccuracyTable sampled_accuracy(const RelevanceTable& relevance, const ScoreTable& scores,
                                      const AlignmentMatrix& alignment, const GroupSpace& groups,
                                      std::size_t n_negatives, std::uint64_t seed, double threshold = 0.5) {
    AccuracyTable table;
    visit_pairs(relevance, scores, alignment, groups, n_negatives, seed, threshold,
                [&](const RequestId&, const PairItem& hi, const PairItem& lo) { table.add(hi.side, lo.side, hi.score, lo.score); });
    return table;
}

}  // namespace fairrank
