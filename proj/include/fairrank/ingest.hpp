#pragma once
// Streaming readers and writers for the text formats the tool consumes:
//   run        `qid iter docid rank score tag`   (whitespace, TREC)
//   qrels      `qid iter docid grade`            (whitespace, TREC)
//   alignment  `docid,<group1>,...,<groupG>`     (CSV with header)
//   sequence   `seq_no,qid`                      (CSV, optional header)
//   scores     `qid,docid,score`                 (CSV, optional header)
// Lines may end in LF or CRLF. `#` starts a comment line in run and qrels files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank {

using Warnings = std::vector<std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

inline double parse_real(std::string_view field, std::string_view what, std::string_view source,
                         std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
        throw Error(Errc::Parse, where(source, line) + ": invalid " + std::string(what) + " '" +
                                     std::string(field) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view field, std::string_view what, std::string_view source, std::size_t line) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw Error(Errc::Parse, where(source, line) + ": invalid " + std::string(what) + " '" +
                                     std::string(field) + "'");
    return v;
}

inline bool skip_line(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

// Shortest text that reads back to the same double.
inline std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Run files
// ---------------------------------------------------------------------------

struct RunRecord {
    RequestId request;
    std::string iteration;  // "Q0", or a draw key for stochastic runs
    DocumentId doc;
    long rank = 0;
    double score = 0.0;
    std::string tag;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// One ranking in a run, keyed by (request, iteration).
struct RunRanking {
    std::string iteration;
    std::shared_ptr<const Ranking> ranking;
};

class RunFile {
public:
    RunFile() = default;
    explicit RunFile(std::vector<RunRecord> records) : records_(std::move(records)) {}

    const std::vector<RunRecord>& records() const noexcept { return records_; }
    bool empty() const noexcept { return records_.empty(); }

    // Tag of the first record; empty for an empty run.
    std::string tag() const { return records_.empty() ? std::string() : records_.front().tag; }

    // Rankings reconstructed by ascending rank, ordered by request then
    // iteration (numerically where both are integers).
    std::vector<std::pair<RequestId, RunRanking>> rankings() const {
        struct Key {
            RequestId request;
            std::string iteration;
        };
        auto less = [](const Key& a, const Key& b) {
            if (a.request != b.request) return a.request < b.request;
            long x = 0, y = 0;
            const bool xi = std::from_chars(a.iteration.data(), a.iteration.data() + a.iteration.size(), x).ec ==
                            std::errc();
            const bool yi = std::from_chars(b.iteration.data(), b.iteration.data() + b.iteration.size(), y).ec ==
                            std::errc();
            if (xi && yi && x != y) return x < y;
            return a.iteration < b.iteration;
        };
        std::map<Key, std::vector<const RunRecord*>, decltype(less)> grouped(less);
        for (const auto& r : records_) grouped[{r.request, r.iteration}].push_back(&r);
        std::vector<std::pair<RequestId, RunRanking>> out;
        out.reserve(grouped.size());
        for (auto& [key, recs] : grouped) {
            std::sort(recs.begin(), recs.end(), [](const RunRecord* a, const RunRecord* b) { return a->rank < b->rank; });
            std::vector<DocumentId> docs;
            std::vector<double> scores;
            docs.reserve(recs.size());
            scores.reserve(recs.size());
            for (const auto* r : recs) {
                docs.push_back(r->doc);
                scores.push_back(r->score);
            }
            try {
                out.emplace_back(key.request,
                                 RunRanking{key.iteration, std::make_shared<const Ranking>(
                                                               key.request, std::move(docs), std::move(scores))});
            } catch (const Error& e) {
                throw Error(Errc::Parse, std::string("run ranking for ") + key.request.str() + ": " + e.what());
            }
        }
        return out;
    }

private:
    std::vector<RunRecord> records_;
};

inline RunFile parse_run(std::istream& in, std::string_view source = "<run>") {
    std::vector<RunRecord> records;
    std::map<std::pair<std::string, std::string>, std::set<long>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skip_line(line)) continue;
        const auto f = detail::split_ws(line);
        if (f.size() != 6)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": expected 6 fields, found " +
                                         std::to_string(f.size()));
        RunRecord r;
        r.request = RequestId(std::string(f[0]));
        r.iteration = std::string(f[1]);
        r.doc = DocumentId(std::string(f[2]));
        r.rank = detail::parse_int<long>(f[3], "rank", source, lineno);
        r.score = detail::parse_real(f[4], "score", source, lineno);
        r.tag = std::string(f[5]);
        if (!seen[{r.request.str(), r.iteration}].insert(r.rank).second)
            throw Error(Errc::DuplicateRank, detail::where(source, lineno) + ": rank " + std::to_string(r.rank) +
                                                 " repeated for request " + r.request.str());
        records.push_back(std::move(r));
    }
    return RunFile(std::move(records));
}

inline void write_run(std::ostream& out, const RunFile& run) {
    for (const auto& r : run.records())
        out << r.request.str() << ' ' << r.iteration << ' ' << r.doc.str() << ' ' << r.rank << ' '
            << detail::format_real(r.score) << ' ' << r.tag << '\n';
}

// ---------------------------------------------------------------------------
// Qrels
// ---------------------------------------------------------------------------

inline RelevanceTable parse_qrels(std::istream& in, std::string_view source = "<qrels>",
                                  Warnings* warnings = nullptr) {
    RelevanceTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::skip_line(line)) continue;
        const auto f = detail::split_ws(line);
        if (f.size() != 4)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": expected 4 fields, found " +
                                         std::to_string(f.size()));
        const RequestId q{std::string(f[0])};
        const DocumentId d{std::string(f[2])};
        const double grade = detail::parse_real(f[3], "grade", source, lineno);
        if (grade < 0.0)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": negative grade " + std::string(f[3]));
        if (warnings && table.grade(q, d))
            warnings->push_back(detail::where(source, lineno) + ": duplicate judgment for (" + q.str() + ", " +
                                d.str() + "); later value wins");
        table.set(q, d, grade);
    }
    return table;
}

inline void write_qrels(std::ostream& out, const RelevanceTable& table) {
    std::vector<RequestId> requests;
    for (const auto& [q, j] : table.entries()) requests.push_back(q);
    std::sort(requests.begin(), requests.end());
    for (const auto& q : requests) {
        std::vector<std::pair<DocumentId, double>> rows(table.judged(q)->begin(), table.judged(q)->end());
        std::sort(rows.begin(), rows.end());
        for (const auto& [d, y] : rows) out << q.str() << " 0 " << d.str() << ' ' << detail::format_real(y) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

inline constexpr double kAlignmentRowTolerance = 0.01;

struct AlignmentTable {
    AlignmentMatrix alignment;
    GroupSpace groups;
};

// Rows whose group cells are all empty are unlabeled. Rows summing to within
// 0.01 of 1 are renormalized; others are rejected.
inline AlignmentTable parse_alignment(std::istream& in, std::optional<std::string> protected_label = std::nullopt,
                                      std::optional<std::string> unknown_label = std::nullopt,
                                      std::string_view source = "<alignment>", Warnings* warnings = nullptr) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto header = detail::split_csv(line);
        if (header.size() < 2)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": header needs docid and at least one group");
        for (std::size_t i = 1; i < header.size(); ++i) names.emplace_back(header[i]);
        break;
    }
    if (names.empty()) throw Error(Errc::Parse, std::string(source) + ": missing header row");

    std::optional<std::size_t> prot, unknown;
    if (protected_label) {
        auto it = std::find(names.begin(), names.end(), *protected_label);
        if (it == names.end())
            throw Error(Errc::Parse, std::string(source) + ": protected group '" + *protected_label + "' not in header");
        prot = static_cast<std::size_t>(it - names.begin());
    }
    if (unknown_label) {
        auto it = std::find(names.begin(), names.end(), *unknown_label);
        if (it != names.end()) unknown = static_cast<std::size_t>(it - names.begin());
    }
    GroupSpace groups;
    try {
        groups = GroupSpace(names, prot, unknown);
    } catch (const Error& e) {
        throw Error(Errc::Parse, std::string(source) + ": " + e.what());
    }
    AlignmentMatrix alignment(names.size());

    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != names.size() + 1)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": expected " + std::to_string(names.size() + 1) +
                                         " fields, found " + std::to_string(f.size()));
        if (f[0].empty()) throw Error(Errc::Parse, detail::where(source, lineno) + ": empty docid");
        const std::size_t n_empty = static_cast<std::size_t>(
            std::count_if(f.begin() + 1, f.end(), [](std::string_view c) { return c.empty(); }));
        if (n_empty == names.size()) continue;
        if (n_empty != 0)
            throw Error(Errc::Parse, detail::where(source, lineno) + ": row mixes empty and filled group cells");
        std::vector<double> row;
        double sum = 0.0;
        for (std::size_t i = 1; i < f.size(); ++i) {
            const double v = detail::parse_real(f[i], "group weight", source, lineno);
            if (v < 0.0) throw Error(Errc::NegativeWeight, detail::where(source, lineno) + ": " + std::string(f[i]));
            row.push_back(v);
            sum += v;
        }
        if (std::abs(sum - 1.0) > kAlignmentRowTolerance)
            throw Error(Errc::RowSumOutOfTolerance,
                        detail::where(source, lineno) + ": row sums to " + detail::format_real(sum));
        for (double& v : row) v /= sum;
        const DocumentId doc{std::string(f[0])};
        if (warnings && alignment.contains(doc))
            warnings->push_back(detail::where(source, lineno) + ": duplicate alignment for " + doc.str() +
                                "; later row wins");
        alignment.set(doc, std::move(row));
    }
    return {std::move(alignment), std::move(groups)};
}

// Unlabeled documents listed in `unlabeled` are written with empty cells.
inline void write_alignment(std::ostream& out, const AlignmentTable& table,
                            const std::vector<DocumentId>& unlabeled = {}) {
    out << "docid";
    for (const auto& n : table.groups.names()) out << ',' << n;
    out << '\n';
    std::vector<std::pair<DocumentId, const std::vector<double>*>> rows;
    for (const auto& [d, r] : table.alignment.rows()) rows.emplace_back(d, &r);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [d, r] : rows) {
        out << d.str();
        for (double v : *r) out << ',' << detail::format_real(v);
        out << '\n';
    }
    for (const auto& d : unlabeled) {
        out << d.str();
        for (std::size_t i = 0; i < table.groups.size(); ++i) out << ',';
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

struct SequenceRow {
    long seq_no = 0;
    RequestId request;

    friend bool operator==(const SequenceRow&, const SequenceRow&) = default;
};

inline std::vector<SequenceRow> parse_sequence_rows(std::istream& in, std::string_view source = "<sequence>") {
    std::vector<SequenceRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (rows.empty() && f.size() == 2 && f[0] == "seq_no" && f[1] == "qid") continue;
        if (f.size() != 2 || f[1].empty())
            throw Error(Errc::Parse, detail::where(source, lineno) + ": expected `seq_no,qid`");
        rows.push_back({detail::parse_int<long>(f[0], "sequence number", source, lineno), RequestId(std::string(f[1]))});
    }
    return rows;
}

inline void write_sequence(std::ostream& out, const std::vector<SequenceRow>& rows) {
    out << "seq_no,qid\n";
    for (const auto& r : rows) out << r.seq_no << ',' << r.request.str() << '\n';
}

// Resolves sequence rows against a run. A row (s, q) draws the ranking of q whose
// iteration key is s; when q has no such ranking, its first ranking is drawn.
// Without rows, every ranking in the run is one draw.
inline RankingSequence build_sequence(const RunFile& run, const std::optional<std::vector<SequenceRow>>& rows) {
    const auto rankings = run.rankings();
    std::vector<RankingSequence::Draw> draws;
    if (!rows) {
        for (const auto& [q, rr] : rankings) draws.push_back(rr.ranking);
        return RankingSequence(std::move(draws));
    }
    std::unordered_map<RequestId, std::vector<const RunRanking*>> by_request;
    for (const auto& [q, rr] : rankings) by_request[q].push_back(&rr);
    for (const auto& row : *rows) {
        auto it = by_request.find(row.request);
        if (it == by_request.end())
            throw Error(Errc::UnknownRequest, "sequence row " + std::to_string(row.seq_no) + " references request '" +
                                                  row.request.str() + "' absent from the run");
        const std::string key = std::to_string(row.seq_no);
        const RunRanking* chosen = it->second.front();
        for (const auto* rr : it->second)
            if (rr->iteration == key) chosen = rr;
        draws.push_back(chosen->ranking);
    }
    return RankingSequence(std::move(draws));
}

inline RankingSequence parse_sequence(std::istream& in, const RunFile& run, std::string_view source = "<sequence>") {
    return build_sequence(run, parse_sequence_rows(in, source));
}

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

inline ScoreTable parse_scores(std::istream& in, std::string_view source = "<scores>", Warnings* warnings = nullptr) {
    ScoreTable table;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (first && f.size() == 3 && f[0] == "qid" && f[1] == "docid" && f[2] == "score") {
            first = false;
            continue;
        }
        first = false;
        if (f.size() != 3 || f[0].empty() || f[1].empty())
            throw Error(Errc::Parse, detail::where(source, lineno) + ": expected `qid,docid,score`");
        const RequestId q{std::string(f[0])};
        const DocumentId d{std::string(f[1])};
        const double s = detail::parse_real(f[2], "score", source, lineno);
        if (warnings && table.score(q, d))
            warnings->push_back(detail::where(source, lineno) + ": duplicate score for (" + q.str() + ", " + d.str() +
                                "); later value wins");
        table.set(q, d, s);
    }
    return table;
}

inline void write_scores(std::ostream& out, const ScoreTable& table) {
    out << "qid,docid,score\n";
    std::vector<RequestId> requests;
    for (const auto& [q, s] : table.entries()) requests.push_back(q);
    std::sort(requests.begin(), requests.end());
    for (const auto& q : requests) {
        std::vector<std::pair<DocumentId, double>> rows(table.scored(q)->begin(), table.scored(q)->end());
        std::sort(rows.begin(), rows.end());
        for (const auto& [d, s] : rows) out << q.str() << ',' << d.str() << ',' << detail::format_real(s) << '\n';
    }
}

}  // namespace fairrank
