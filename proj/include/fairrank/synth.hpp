#pragma once
// Deterministic synthetic corpora: a labeled catalog, graded judgments, and a
// family of systems that differ in group exposure skew, ranking quality and
// sampling temperature. Every file is a pure function of the parameters.
//
// Layout written under the output directory:
//   qrels.txt  alignment.csv  sequence.csv  config.json  systems.csv
//   runs/<system>.run  scores/<system>.csv

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fairrank/core.hpp"
#include "fairrank/ingest.hpp"
#include "fairrank/report.hpp"

namespace fairrank {

struct SynthParams {
    std::size_t n_docs = 2000;
    std::size_t n_requests = 50;
    std::size_t n_groups = 2;
    std::size_t n_systems = 10;
    std::size_t pool = 60;   // candidates per request
    std::size_t depth = 20;  // ranking length
    std::size_t draws = 3;   // rankings per request in the sequence
    std::uint64_t seed = 42;
    double protected_share = 0.5;  // catalog share of the protected group
    double exposure_skew = 1.0;    // largest score shift for or against G+
    double relevance_skew = 0.0;   // shift of G+ latent relevance
    double judged_fraction = 0.7;
    double soft_fraction = 0.1;       // labeled docs with mixed membership
    double unlabeled_fraction = 0.05;
    bool edge_cases = true;
};

struct SynthSystem {
    std::string name;
    double skew = 0.0;         // > 0 favors the unprotected group
    double quality = 0.0;      // weight of true relevance in the score, in [0,1]
    double temperature = 0.0;  // 0 = deterministic ranking
};

struct SynthSummary {
    std::vector<SynthSystem> systems;
    std::vector<std::string> requests;
    std::vector<std::string> edge_requests;
};

namespace detail {

// Portable variates on top of mt19937_64, so outputs do not depend on the
// standard library's distribution implementations.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }
    // (0, 1)
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }
    double normal() {
        const double u = uniform(), v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }
    double gumbel() { return -std::log(-std::log(uniform())); }

    // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> choose(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + index(n - i)]);
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

inline std::string padded(std::string_view prefix, std::size_t i, std::size_t width) {
    std::string n = std::to_string(i);
    if (n.size() < width) n.insert(0, width - n.size(), '0');
    return std::string(prefix) + n;
}

inline void check_synth(const SynthParams& p) {
    auto fail = [](const std::string& what) { throw Error(Errc::ParameterOutOfDomain, what); };
    if (p.n_groups < 2) fail("groups must be at least 2");
    if (p.n_systems < 1) fail("systems must be at least 1");
    if (p.n_requests < 1) fail("requests must be at least 1");
    if (p.depth < 1) fail("depth must be at least 1");
    if (p.draws < 1) fail("draws must be at least 1");
    if (p.pool < p.depth) fail("pool must be at least depth");
    if (p.n_docs < p.pool) fail("docs must be at least pool");
    if (!(p.protected_share > 0.0 && p.protected_share < 1.0)) fail("protected share must lie in (0,1)");
    for (double f : {p.judged_fraction, p.soft_fraction, p.unlabeled_fraction})
        if (!(f >= 0.0 && f <= 1.0)) fail("fractions must lie in [0,1]");
    if (!(p.judged_fraction > 0.0)) fail("judged fraction must be positive");
    if (!(p.unlabeled_fraction < 1.0)) fail("unlabeled fraction must be below 1");
    if (!std::isfinite(p.exposure_skew) || !std::isfinite(p.relevance_skew)) fail("skews must be finite");
}

struct SynthDoc {
    std::string id;
    std::optional<std::size_t> group;  // primary group; nullopt = unlabeled
    std::optional<std::size_t> second;  // mixed-membership partner
};

struct SynthRequest {
    std::string id;
    std::vector<std::size_t> pool;  // catalog indices
    std::vector<double> latent;     // true relevance signal per pool entry
    std::vector<std::optional<int>> grade;
    std::size_t depth = 0;
};

inline int grade_of(double z) { return z > 1.0 ? 2 : (z > 0.3 ? 1 : 0); }

}  // namespace detail

// System i gets a skew and a quality level from two independent permutations of
// an evenly spaced grid, and a temperature cycling through {0, 0.5, 1}.
inline std::vector<SynthSystem> synth_systems(const SynthParams& p) {
    detail::SynthRng rng(p.seed, 0x5157);
    const std::size_t n = p.n_systems;
    auto perm = [&] {
        std::vector<std::size_t> v = rng.choose(n, n);
        return v;
    };
    const auto a = perm(), b = perm();
    std::vector<SynthSystem> out;
    const std::size_t width = std::max<std::size_t>(2, std::to_string(n).size());
    for (std::size_t i = 0; i < n; ++i) {
        const double fa = n > 1 ? static_cast<double>(a[i]) / static_cast<double>(n - 1) : 0.5;
        const double fb = n > 1 ? static_cast<double>(b[i]) / static_cast<double>(n - 1) : 0.5;
        static constexpr double kTemps[] = {0.0, 0.5, 1.0};
        out.push_back({detail::padded("sys", i + 1, width), p.exposure_skew * (2.0 * fa - 1.0), 0.2 + 0.8 * fb,
                       kTemps[i % 3]});
    }
    return out;
}

inline SynthSummary write_synthetic(const SynthParams& p, const std::filesystem::path& dir) {
    detail::check_synth(p);
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const auto& sub : {dir, dir / "runs", dir / "scores"}) {
        fs::create_directories(sub, ec);
        if (ec) throw Error(Errc::Io, "cannot create '" + sub.string() + "': " + ec.message());
    }
    detail::SynthRng rng(p.seed, 1);
    SynthSummary summary;
    summary.systems = synth_systems(p);

    // Catalog.
    const std::size_t dw = std::to_string(p.n_docs).size();
    std::vector<detail::SynthDoc> docs;
    docs.reserve(p.n_docs + 16);
    auto draw_group = [&] {
        if (rng.uniform() < p.protected_share) return std::size_t{0};
        return 1 + rng.index(p.n_groups - 1);
    };
    for (std::size_t i = 0; i < p.n_docs; ++i) {
        detail::SynthDoc d{detail::padded("d", i + 1, dw), std::nullopt, std::nullopt};
        const double u = rng.uniform();
        const double s = rng.uniform();
        const std::size_t g = draw_group();
        if (u >= p.unlabeled_fraction) {
            d.group = g;
            if (s < p.soft_fraction) d.second = (g + 1 + rng.index(p.n_groups - 1)) % p.n_groups;
        }
        docs.push_back(std::move(d));
    }

    // Requests.
    std::vector<detail::SynthRequest> requests;
    const std::size_t qw = std::max<std::size_t>(3, std::to_string(p.n_requests).size());
    auto judge = [&](detail::SynthRequest& r, bool force_judged) {
        for (std::size_t k = 0; k < r.pool.size(); ++k) {
            const auto& doc = docs[r.pool[k]];
            double z = rng.normal();
            if (doc.group && *doc.group == 0) z -= p.relevance_skew;
            r.latent.push_back(z);
            const bool judged = force_judged || rng.uniform() < p.judged_fraction;
            r.grade.push_back(judged ? std::optional<int>(detail::grade_of(z)) : std::nullopt);
        }
    };
    for (std::size_t i = 0; i < p.n_requests; ++i) {
        detail::SynthRequest r{detail::padded("q", i + 1, qw), rng.choose(p.n_docs, p.pool), {}, {}, p.depth};
        judge(r, false);
        requests.push_back(std::move(r));
    }
    if (p.edge_cases) {
        auto pick = [&](auto pred, std::size_t k) {
            std::vector<std::size_t> out;
            for (std::size_t i = 0; i < docs.size() && out.size() < k; ++i)
                if (pred(docs[i])) out.push_back(i);
            return out;
        };
        auto hard = [](std::size_t g) {
            return [g](const detail::SynthDoc& d) { return d.group && *d.group == g && !d.second; };
        };
        auto any_hard = [](const detail::SynthDoc& d) { return d.group && !d.second; };
        const std::size_t k = std::min<std::size_t>(p.depth, 12);

        // No protected candidate.
        {
            detail::SynthRequest r{"edge_empty_protected", pick(hard(1), std::max<std::size_t>(k, 2)), {}, {}, 0};
            judge(r, true);
            r.grade[0] = 2;
            requests.push_back(std::move(r));
        }
        // Protected candidates carry no relevance.
        {
            auto pool = pick(hard(0), k / 2 + 1);
            for (auto i : pick(hard(1), k / 2 + 1)) pool.push_back(i);
            detail::SynthRequest r{"edge_zero_utility", pool, {}, {}, 0};
            judge(r, true);
            for (std::size_t j = 0; j < r.pool.size(); ++j) {
                if (*docs[r.pool[j]].group == 0) r.grade[j] = 0;
                else if (j + 1 == r.pool.size()) r.grade[j] = 1;
            }
            requests.push_back(std::move(r));
        }
        // No labeled candidate: dedicated unlabeled documents.
        {
            std::vector<std::size_t> pool;
            for (std::size_t j = 0; j < k; ++j) {
                pool.push_back(docs.size());
                docs.push_back({detail::padded("u", j + 1, 2), std::nullopt, std::nullopt});
            }
            detail::SynthRequest r{"edge_unlabeled", pool, {}, {}, 0};
            judge(r, true);
            requests.push_back(std::move(r));
        }
        // Fewer labeled candidates than one prefix step.
        {
            detail::SynthRequest r{"edge_short", pick(any_hard, 8), {}, {}, 0};
            judge(r, true);
            requests.push_back(std::move(r));
        }
        for (std::size_t i = p.n_requests; i < requests.size(); ++i) {
            requests[i].depth = std::min(requests[i].pool.size(), p.depth);
            summary.edge_requests.push_back(requests[i].id);
        }
    }
    for (const auto& r : requests) summary.requests.push_back(r.id);

    // Alignment.
    write_file(dir / "alignment.csv", [&](std::ostream& out) {
        out << "docid";
        for (std::size_t g = 0; g < p.n_groups; ++g) out << ",g" << g + 1;
        out << '\n';
        for (const auto& d : docs) {
            out << d.id;
            for (std::size_t g = 0; g < p.n_groups; ++g) {
                out << ',';
                if (!d.group) continue;
                if (d.second) out << (g == *d.group ? "0.6" : (g == *d.second ? "0.4" : "0"));
                else out << (g == *d.group ? "1" : "0");
            }
            out << '\n';
        }
    });

    // Judgments.
    write_file(dir / "qrels.txt", [&](std::ostream& out) {
        for (const auto& r : requests) {
            std::vector<std::pair<std::string, int>> rows;
            for (std::size_t k = 0; k < r.pool.size(); ++k)
                if (r.grade[k]) rows.emplace_back(docs[r.pool[k]].id, *r.grade[k]);
            std::sort(rows.begin(), rows.end());
            for (const auto& [d, y] : rows) out << r.id << " 0 " << d << ' ' << y << '\n';
        }
    });

    // Draw schedule shared by every system: draw k of every request, k = 1..draws.
    write_file(dir / "sequence.csv", [&](std::ostream& out) {
        out << "seq_no,qid\n";
        std::size_t seq = 0;
        for (std::size_t k = 0; k < p.draws; ++k)
            for (const auto& r : requests) out << ++seq << ',' << r.id << '\n';
    });

    // Systems.
    for (std::size_t s = 0; s < summary.systems.size(); ++s) {
        const auto& sys = summary.systems[s];
        detail::SynthRng srng(p.seed, 1000 + s);
        std::ofstream run(dir / "runs" / (sys.name + ".run"), std::ios::binary | std::ios::trunc);
        std::ofstream scores(dir / "scores" / (sys.name + ".csv"), std::ios::binary | std::ios::trunc);
        if (!run || !scores) throw Error(Errc::Io, "cannot write system files for " + sys.name);
        scores << "qid,docid,score\n";
        std::size_t seq = 0;
        std::vector<std::vector<double>> base(requests.size());
        for (std::size_t qi = 0; qi < requests.size(); ++qi) {
            const auto& r = requests[qi];
            base[qi].resize(r.pool.size());
            for (std::size_t k = 0; k < r.pool.size(); ++k) {
                const auto& doc = docs[r.pool[k]];
                const double side = !doc.group ? 0.0 : (*doc.group == 0 ? -1.0 : 1.0);
                base[qi][k] = sys.quality * r.latent[k] + (1.0 - sys.quality) * srng.normal() + sys.skew * side;
            }
            std::vector<std::size_t> order(r.pool.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t x, std::size_t y) { return docs[r.pool[x]].id < docs[r.pool[y]].id; });
            for (std::size_t k : order)
                scores << r.id << ',' << docs[r.pool[k]].id << ',' << detail::format_real(base[qi][k]) << '\n';
        }
        for (std::size_t k = 0; k < p.draws; ++k) {
            for (std::size_t qi = 0; qi < requests.size(); ++qi) {
                ++seq;
                const auto& r = requests[qi];
                std::vector<std::pair<double, std::size_t>> keyed;
                for (std::size_t j = 0; j < r.pool.size(); ++j) {
                    const double noise = sys.temperature > 0.0 ? sys.temperature * srng.gumbel() : 0.0;
                    keyed.emplace_back(base[qi][j] + noise, j);
                }
                std::sort(keyed.begin(), keyed.end(), [&](const auto& x, const auto& y) {
                    if (x.first != y.first) return x.first > y.first;
                    return docs[r.pool[x.second]].id < docs[r.pool[y.second]].id;
                });
                for (std::size_t rank = 1; rank <= r.depth; ++rank) {
                    const auto& [key, j] = keyed[rank - 1];
                    run << r.id << ' ' << seq << ' ' << docs[r.pool[j]].id << ' ' << rank << ' '
                        << detail::format_real(key) << ' ' << sys.name << '\n';
                }
            }
        }
        if (!run.flush() || !scores.flush()) throw Error(Errc::Io, "write failed for " + sys.name);
    }

    write_file(dir / "systems.csv", [&](std::ostream& out) {
        out << "system,skew,quality,temperature\n";
        for (const auto& s : summary.systems)
            out << s.name << ',' << detail::format_real(s.skew) << ',' << detail::format_real(s.quality) << ','
                << detail::format_real(s.temperature) << '\n';
    });

    write_file(dir / "config.json", [&](std::ostream& out) {
        out << "{\n  \"protected\": \"g1\",\n  \"seed\": " << p.seed << ",\n  \"metrics\": [";
        bool first = true;
        for (const auto& [kind, name] : kMetricNames) {
            out << (first ? "" : ", ") << '"' << name << '"';
            first = false;
        }
        out << "]\n}\n";
    });
    return summary;
}

}  // namespace fairrank
