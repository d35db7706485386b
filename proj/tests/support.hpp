#pragma once
// Small builders shared by the unit tests and the acceptance binary.

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank::testing {

inline DocumentId doc(const std::string& s) { return DocumentId(s); }
inline RequestId req(const std::string& s) { return RequestId(s); }

inline Ranking ranking(const std::string& q, const std::vector<std::string>& docs) {
    std::vector<DocumentId> ids;
    for (const auto& d : docs) ids.emplace_back(d);
    return Ranking(RequestId(q), std::move(ids));
}

inline RankingSequence sequence(const std::vector<Ranking>& rankings,
                                std::optional<std::map<RequestId, double>> rho = std::nullopt) {
    std::vector<RankingSequence::Draw> draws;
    for (const auto& r : rankings) draws.push_back(std::make_shared<const Ranking>(r));
    return RankingSequence(std::move(draws), std::move(rho));
}

// Two groups, protected first.
inline GroupSpace binary_groups() { return GroupSpace({"A", "B"}, 0); }

inline std::vector<double> one_hot(std::size_t g, std::size_t n) {
    std::vector<double> row(n, 0.0);
    row[g] = 1.0;
    return row;
}

// Hard alignment from (doc, group index) pairs.
inline AlignmentMatrix hard_alignment(std::size_t n_groups,
                                      const std::vector<std::pair<std::string, std::size_t>>& members) {
    AlignmentMatrix a(n_groups);
    for (const auto& [d, g] : members) a.set(DocumentId(d), one_hot(g, n_groups));
    return a;
}

// Documents d0..d{n-1}.
inline std::vector<std::string> doc_names(std::size_t n, const std::string& prefix = "d") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace fairrank::testing
