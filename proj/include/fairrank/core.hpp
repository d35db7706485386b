#pragma once
// Domain types shared by every metric: identifiers, rankings, group spaces,
// alignment (soft group membership), relevance judgments and ranking sequences.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairrank/error.hpp"

namespace fairrank {

inline constexpr double kSumTolerance = 1e-9;

// Which end of a metric's range is fair.
enum class Direction { ZeroIsFair, OneIsFair, HigherIsBetter };

inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::ZeroIsFair: return "ZeroIsFair";
        case Direction::OneIsFair: return "OneIsFair";
        case Direction::HigherIsBetter: return "HigherIsBetter";
    }
    return "?";
}

template <typename Tag>
class Identifier {
public:
    Identifier() = default;
    explicit Identifier(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw Error(Errc::InvalidArgument, "identifier must be non-empty");
    }

    const std::string& str() const noexcept { return value_; }

    friend auto operator<=>(const Identifier&, const Identifier&) = default;
    friend bool operator==(const Identifier&, const Identifier&) = default;

private:
    std::string value_;
};

struct DocumentTag {};
struct RequestTag {};
using DocumentId = Identifier<DocumentTag>;
using RequestId = Identifier<RequestTag>;

}  // namespace fairrank

template <typename Tag>
struct std::hash<fairrank::Identifier<Tag>> {
    std::size_t operator()(const fairrank::Identifier<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};

namespace fairrank {

// An ordered list of documents returned for one request. Positions are 1-based.
// `positions()` holds the original rank of each entry; it differs from 1..N only
// for rankings produced by restrict_to_labeled.
class Ranking {
public:
    Ranking() = default;

    Ranking(RequestId request, std::vector<DocumentId> docs,
            std::optional<std::vector<double>> scores = std::nullopt)
        : Ranking(std::move(request), std::move(docs), std::move(scores), {}) {}

    Ranking(RequestId request, std::vector<DocumentId> docs,
            std::optional<std::vector<double>> scores, std::vector<std::size_t> positions)
        : request_(std::move(request)),
          docs_(std::move(docs)),
          scores_(std::move(scores)),
          positions_(std::move(positions)) {
        if (scores_ && scores_->size() != docs_.size())
            throw Error(Errc::InvalidArgument, "score vector length differs from ranking length");
        if (positions_.empty()) {
            positions_.resize(docs_.size());
            for (std::size_t i = 0; i < docs_.size(); ++i) positions_[i] = i + 1;
        } else if (positions_.size() != docs_.size()) {
            throw Error(Errc::InvalidArgument, "position vector length differs from ranking length");
        }
        index_.reserve(docs_.size());
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            if (!index_.emplace(docs_[i], i + 1).second)
                throw Error(Errc::InvalidArgument,
                            "duplicate document '" + docs_[i].str() + "' in ranking for " +
                                request_.str());
        }
    }

    const RequestId& request() const noexcept { return request_; }
    const std::vector<DocumentId>& docs() const noexcept { return docs_; }
    const std::optional<std::vector<double>>& scores() const noexcept { return scores_; }
    const std::vector<std::size_t>& positions() const noexcept { return positions_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    // L^{-1}(i), 1-based.
    const DocumentId& at(std::size_t position) const {
        if (position == 0 || position > docs_.size())
            throw Error(Errc::InvalidArgument, "rank position out of range");
        return docs_[position - 1];
    }

    // L(d): the 1-based index of d in this list.
    std::optional<std::size_t> rank_of(const DocumentId& doc) const {
        auto it = index_.find(doc);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // L_{<=k}
    Ranking prefix(std::size_t k) const {
        k = std::min(k, docs_.size());
        std::vector<DocumentId> docs(docs_.begin(), docs_.begin() + static_cast<std::ptrdiff_t>(k));
        std::optional<std::vector<double>> scores;
        if (scores_) scores.emplace(scores_->begin(), scores_->begin() + static_cast<std::ptrdiff_t>(k));
        std::vector<std::size_t> positions(positions_.begin(),
                                           positions_.begin() + static_cast<std::ptrdiff_t>(k));
        return Ranking(request_, std::move(docs), std::move(scores), std::move(positions));
    }

    friend bool operator==(const Ranking& a, const Ranking& b) {
        return a.request_ == b.request_ && a.docs_ == b.docs_ && a.scores_ == b.scores_ &&
               a.positions_ == b.positions_;
    }

private:
    RequestId request_;
    std::vector<DocumentId> docs_;
    std::optional<std::vector<double>> scores_;
    std::vector<std::size_t> positions_;
    std::unordered_map<DocumentId, std::size_t> index_;
};

class GroupSpace {
public:
    GroupSpace() = default;

    explicit GroupSpace(std::vector<std::string> names,
                        std::optional<std::size_t> protected_index = std::nullopt,
                        std::optional<std::size_t> unknown_index = std::nullopt)
        : names_(std::move(names)), protected_(protected_index), unknown_(unknown_index) {
        if (names_.empty()) throw Error(Errc::InvalidArgument, "group space has no groups");
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j])
                    throw Error(Errc::InvalidArgument, "duplicate group label '" + names_[i] + "'");
        if (protected_ && *protected_ >= names_.size())
            throw Error(Errc::InvalidArgument, "protected index out of range");
        if (unknown_ && *unknown_ >= names_.size())
            throw Error(Errc::InvalidArgument, "unknown index out of range");
        if (protected_ && unknown_ && *protected_ == *unknown_)
            throw Error(Errc::InvalidArgument, "protected group cannot be the unknown group");
    }

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<std::size_t> protected_index() const noexcept { return protected_; }
    std::optional<std::size_t> unknown_index() const noexcept { return unknown_; }

    std::size_t require_protected() const {
        if (!protected_) throw Error(Errc::InvalidArgument, "protected group is not set");
        return *protected_;
    }

    std::optional<std::size_t> index_of(std::string_view label) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == label) return i;
        return std::nullopt;
    }

    // Number of groups with a known identity (the unknown pseudo-group excluded).
    std::size_t known_count() const noexcept { return names_.size() - (unknown_ ? 1 : 0); }

    bool is_known(std::size_t g) const noexcept { return !unknown_ || *unknown_ != g; }

private:
    std::vector<std::string> names_;
    std::optional<std::size_t> protected_;
    std::optional<std::size_t> unknown_;
};

// Soft group membership. Documents without a row are unlabeled.
class AlignmentMatrix {
public:
    AlignmentMatrix() = default;
    explicit AlignmentMatrix(std::size_t groups) : groups_(groups) {}

    void set(const DocumentId& doc, std::vector<double> row) {
        if (row.size() != groups_)
            throw Error(Errc::InvalidArgument, "alignment row for '" + doc.str() + "' has " +
                                                   std::to_string(row.size()) + " entries, expected " +
                                                   std::to_string(groups_));
        double sum = 0.0;
        for (double v : row) {
            if (!std::isfinite(v) || v < 0.0)
                throw Error(Errc::NegativeWeight, "alignment row for '" + doc.str() + "'");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            throw Error(Errc::RowSumOutOfTolerance,
                        "alignment row for '" + doc.str() + "' sums to " + std::to_string(sum));
        rows_.insert_or_assign(doc, std::move(row));
    }

    const std::vector<double>* find(const DocumentId& doc) const {
        auto it = rows_.find(doc);
        return it == rows_.end() ? nullptr : &it->second;
    }

    bool contains(const DocumentId& doc) const { return rows_.contains(doc); }
    std::size_t groups() const noexcept { return groups_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::unordered_map<DocumentId, std::vector<double>>& rows() const noexcept { return rows_; }

private:
    std::size_t groups_ = 0;
    std::unordered_map<DocumentId, std::vector<double>> rows_;
};

// Graded judgments y(d|q). Absent entries are unjudged.
class RelevanceTable {
public:
    using Judgments = std::unordered_map<DocumentId, double>;

    void set(const RequestId& request, const DocumentId& doc, double grade) {
        if (!std::isfinite(grade) || grade < 0.0)
            throw Error(Errc::InvalidArgument, "relevance grade must be finite and non-negative");
        table_[request].insert_or_assign(doc, grade);
        max_grade_ = std::max(max_grade_, grade);
    }

    std::optional<double> grade(const RequestId& request, const DocumentId& doc) const {
        auto q = table_.find(request);
        if (q == table_.end()) return std::nullopt;
        auto d = q->second.find(doc);
        if (d == q->second.end()) return std::nullopt;
        return d->second;
    }

    // Unjudged documents are treated as irrelevant.
    double grade_or_zero(const RequestId& request, const DocumentId& doc) const {
        return grade(request, doc).value_or(0.0);
    }

    const Judgments* judged(const RequestId& request) const {
        auto q = table_.find(request);
        return q == table_.end() ? nullptr : &q->second;
    }

    double max_grade() const noexcept { return max_grade_; }
    bool empty() const noexcept { return table_.empty(); }
    const std::unordered_map<RequestId, Judgments>& entries() const noexcept { return table_; }

private:
    std::unordered_map<RequestId, Judgments> table_;
    double max_grade_ = 0.0;
};

// System scores ŷ(d|q).
class ScoreTable {
public:
    using Scores = std::unordered_map<DocumentId, double>;

    void set(const RequestId& request, const DocumentId& doc, double score) {
        if (!std::isfinite(score)) throw Error(Errc::InvalidArgument, "score must be finite");
        table_[request].insert_or_assign(doc, score);
    }

    std::optional<double> score(const RequestId& request, const DocumentId& doc) const {
        auto q = table_.find(request);
        if (q == table_.end()) return std::nullopt;
        auto d = q->second.find(doc);
        if (d == q->second.end()) return std::nullopt;
        return d->second;
    }

    const Scores* scored(const RequestId& request) const {
        auto q = table_.find(request);
        return q == table_.end() ? nullptr : &q->second;
    }

    bool empty() const noexcept { return table_.empty(); }
    const std::unordered_map<RequestId, Scores>& entries() const noexcept { return table_; }

private:
    std::unordered_map<RequestId, Scores> table_;
};

class TargetDistribution {
public:
    TargetDistribution() = default;
    explicit TargetDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw Error(Errc::InvalidArgument, "empty target distribution");
        double sum = 0.0;
        for (double p : probs_) {
            if (!std::isfinite(p) || p < 0.0 || p > 1.0)
                throw Error(Errc::InvalidArgument, "target probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            throw Error(Errc::InvalidArgument, "target distribution sums to " + std::to_string(sum));
    }

    static TargetDistribution uniform(const GroupSpace& groups) {
        std::vector<double> probs(groups.size(), 0.0);
        const double share = 1.0 / static_cast<double>(groups.known_count());
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups.is_known(g)) probs[g] = share;
        return TargetDistribution(std::move(probs));
    }

    // Binomial p̂: the probability of the protected group.
    double protected_share(const GroupSpace& groups) const {
        return probs_.at(groups.require_protected());
    }

    const std::vector<double>& probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }

private:
    std::vector<double> probs_;
};

// Empirical policy: ordered draws of rankings, each keyed by its request.
class RankingSequence {
public:
    using Draw = std::shared_ptr<const Ranking>;

    RankingSequence() = default;
    explicit RankingSequence(std::vector<Draw> draws,
                             std::optional<std::map<RequestId, double>> request_weights = std::nullopt)
        : draws_(std::move(draws)), weights_(std::move(request_weights)) {
        for (const auto& d : draws_)
            if (!d) throw Error(Errc::InvalidArgument, "null ranking in sequence");
        if (weights_) {
            double sum = 0.0;
            for (const auto& [q, w] : *weights_) {
                if (!std::isfinite(w) || w < 0.0)
                    throw Error(Errc::InvalidArgument, "request weight must be non-negative");
                sum += w;
            }
            if (std::abs(sum - 1.0) > kSumTolerance)
                throw Error(Errc::InvalidArgument, "request weights must sum to 1");
        }
    }

    const std::vector<Draw>& draws() const noexcept { return draws_; }
    const std::optional<std::map<RequestId, double>>& request_weights() const noexcept {
        return weights_;
    }

    // Distinct requests in lexicographic order.
    std::vector<RequestId> requests() const {
        std::vector<RequestId> out;
        for (const auto& d : draws_) out.push_back(d->request());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<const Ranking*> draws_for(const RequestId& request) const {
        std::vector<const Ranking*> out;
        for (const auto& d : draws_)
            if (d->request() == request) out.push_back(d.get());
        return out;
    }

    // Draws grouped by request, requests in lexicographic order.
    std::map<RequestId, std::vector<const Ranking*>> by_request() const {
        std::map<RequestId, std::vector<const Ranking*>> out;
        for (const auto& d : draws_) out[d->request()].push_back(d.get());
        return out;
    }

private:
    std::vector<Draw> draws_;
    std::optional<std::map<RequestId, double>> weights_;
};

struct RestrictedRanking {
    Ranking ranking;
    bool degenerate = false;  // no document was labeled
};

// Drops unlabeled documents, keeping their original positions for weighting.
inline RestrictedRanking restrict_to_labeled(const Ranking& ranking, const AlignmentMatrix& alignment) {
    std::vector<DocumentId> docs;
    std::vector<std::size_t> positions;
    std::optional<std::vector<double>> scores;
    if (ranking.scores()) scores.emplace();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (!alignment.contains(ranking.docs()[i])) continue;
        docs.push_back(ranking.docs()[i]);
        positions.push_back(ranking.positions()[i]);
        if (scores) scores->push_back((*ranking.scores())[i]);
    }
    const bool degenerate = docs.empty();
    return {Ranking(ranking.request(), std::move(docs), std::move(scores), std::move(positions)),
            degenerate};
}

enum class UnlabeledPolicy { Exclude, MapToUnknown, Error };

// Binarized membership of one alignment row: true = G+, false = G-, nullopt =
// excluded. A row is G+ when its protected mass reaches `threshold`; otherwise it
// is G- unless its unknown-group mass reaches the threshold.
inline std::optional<bool> binary_membership(const std::vector<double>* row, const GroupSpace& groups,
                                             double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw Error(Errc::ParameterOutOfDomain, "membership threshold must lie in (0,1]");
    const std::size_t prot = groups.require_protected();
    if (!row) return std::nullopt;
    if ((*row)[prot] >= threshold) return true;
    if (groups.unknown_index() && (*row)[*groups.unknown_index()] >= threshold) return std::nullopt;
    return false;
}

inline std::vector<std::optional<bool>> protected_mask(const Ranking& ranking,
                                                       const AlignmentMatrix& alignment,
                                                       const GroupSpace& groups,
                                                       double threshold = 0.5) {
    std::vector<std::optional<bool>> mask;
    mask.reserve(ranking.size());
    for (const auto& doc : ranking.docs())
        mask.push_back(binary_membership(alignment.find(doc), groups, threshold));
    return mask;
}

// Applies an unlabeled-document policy over a document universe. MapToUnknown
// appends an "unknown" group when the space lacks one.
struct ResolvedAlignment {
    AlignmentMatrix alignment;
    GroupSpace groups;
};

inline ResolvedAlignment apply_unlabeled_policy(const AlignmentMatrix& alignment,
                                                const GroupSpace& groups, UnlabeledPolicy policy,
                                                std::span<const DocumentId> universe) {
    if (policy == UnlabeledPolicy::Exclude) return {alignment, groups};
    if (policy == UnlabeledPolicy::Error) {
        for (const auto& d : universe)
            if (!alignment.contains(d))
                throw Error(Errc::InvalidArgument, "document '" + d.str() + "' has no group alignment");
        return {alignment, groups};
    }
    GroupSpace space = groups;
    AlignmentMatrix out = alignment;
    std::size_t unknown;
    if (groups.unknown_index()) {
        unknown = *groups.unknown_index();
    } else {
        auto names = groups.names();
        std::string label = "unknown";
        while (groups.index_of(label)) label += "_";
        names.push_back(label);
        unknown = names.size() - 1;
        space = GroupSpace(std::move(names), groups.protected_index(), unknown);
        out = AlignmentMatrix(space.size());
        for (const auto& [doc, row] : alignment.rows()) {
            auto extended = row;
            extended.push_back(0.0);
            out.set(doc, std::move(extended));
        }
    }
    for (const auto& d : universe) {
        if (out.contains(d)) continue;
        std::vector<double> row(space.size(), 0.0);
        row[unknown] = 1.0;
        out.set(d, std::move(row));
    }
    return {std::move(out), std::move(space)};
}

}  // namespace fairrank
